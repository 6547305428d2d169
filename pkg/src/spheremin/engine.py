"""Moving-frame geometry of a surface in the unit sphere, computed on jets.

Index conventions (0-based in arrays):

* frame rows ``0, 1`` are the tangent vectors ``e_1, e_2``; rows ``2..n-1``
  are the normals ``e_3..e_n``;
* ``connection[k, A, B] = omega_AB(e_k) = <D_{e_k} e_A, e_B>``;
* ``h[a, i, j] = <D_{e_j} e_i, e_{a+3}>``;
* ``h1[a, i, j, k]`` and ``h2[a, i, j, k, l]`` are the first and second
  covariant derivatives, the last index being the differentiation direction.

Starting from immersion jets of order ``N`` the frame has order ``N-1``,
connection and ``h`` order ``N-2``, ``h1`` order ``N-3`` and ``h2`` order ``N-4``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import jets as J
from .catalog import ImmersionSpec, evaluate
from .errors import DomainError, UsageError
from .jets import Jet2

# tolerance ladder: algebraic/frame, first derivatives, higher derivatives
TOLERANCES = {
    "frame": 1e-9,
    "first_derivative": 1e-8,
    "second_derivative": 1e-7,
    "higher_derivative": 1e-5,
}

DET_MIN = 1e-10


@dataclass(frozen=True)
class FramePoint:
    point: tuple[float, float]
    position: Jet2  # (n+1,), truncated to the frame order
    frame: Jet2  # (n, n+1)
    dual: Jet2  # (2, 2): e_k = dual[k, 0] d/du + dual[k, 1] d/dv
    connection: Jet2  # (2, n, n)
    metric: Jet2  # (3,): E, F, G
    pivots: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.frame.shape[0]

    @property
    def tangent_frame(self) -> Jet2:
        return self.frame[0:2]

    @property
    def normal_frame(self) -> Jet2:
        return self.frame[2:]

    @property
    def omega(self) -> np.ndarray:
        """Values ``omega_AB(e_k)`` with shape ``(2, n, n)``."""
        return self.connection.value

    def gram_residual(self) -> float:
        vecs = np.vstack([self.position.value[None, :], self.frame.value])
        return float(np.abs(vecs @ vecs.T - np.eye(len(vecs))).max())


@dataclass(frozen=True)
class ShapeData:
    h: np.ndarray  # (m, 2, 2)
    h_jet: Jet2
    mean_vector: np.ndarray  # (m,)
    S: float
    S_jet: Jet2
    h1: Optional[np.ndarray] = None  # (m, 2, 2, 2)
    h1_jet: Optional[Jet2] = None
    P: Optional[float] = None
    gradS: Optional[np.ndarray] = None  # (2,) frame derivatives S_k
    gradS_jet: Optional[Jet2] = None
    h2: Optional[np.ndarray] = None  # (m, 2, 2, 2, 2)
    Q: Optional[float] = None
    hessS: Optional[np.ndarray] = None  # (2, 2), S_kl with l the outer direction
    # canonical extras, filled by the frame normalizer
    b: Optional[float] = None
    lam: Optional[np.ndarray] = None
    lam_k: Optional[np.ndarray] = None
    lam_kl: Optional[np.ndarray] = None

    @property
    def codim(self) -> int:
        return self.h.shape[0]


@dataclass(frozen=True)
class CurvatureReport:
    point: tuple[float, float]
    K: float
    KN: float
    S: float
    normal_tensor: np.ndarray  # R_{ab12}, (m, m)
    residuals: dict


# -- derivatives along the frame ------------------------------------------------------


def frame_derivative(dual: Jet2, f: Jet2) -> Jet2:
    """``e_k(f)`` for k = 1, 2 as a jet of order ``f.order - 1``; new leading axis k."""
    d = dual.truncate(f.order - 1)
    fu, fv = f.du(), f.dv()
    extra = (None,) * len(f.shape)
    parts = []
    for k in range(2):
        cu = Jet2._wrap(d.order, d.coeffs[(k, 0) + extra])
        cv = Jet2._wrap(d.order, d.coeffs[(k, 1) + extra])
        parts.append(cu * fu + cv * fv)
    return J.stack(parts)


# -- frames ------------------------------------------------------------------------------


def _pick_pivot(basis_vals: np.ndarray, dim: int) -> int:
    # residual of each ambient basis vector after projecting out the current span
    resid = np.eye(dim) - (basis_vals.T @ basis_vals)
    norms = np.linalg.norm(resid, axis=1)
    best = norms.max()
    return int(np.flatnonzero(norms >= best * (1 - 1e-12))[0])


def build_frames(position: Jet2, point=(float("nan"), float("nan"))) -> FramePoint:
    """Adapted orthonormal frame and connection forms from immersion jets (order >= 2)."""
    if position.order < 2:
        raise UsageError("build_frames needs immersion jets of order >= 2")
    dim = position.shape[0]
    n = dim - 1
    xu, xv = position.du(), position.dv()
    E, F, G = J.dot(xu, xu), J.dot(xu, xv), J.dot(xv, xv)
    det = E.value * G.value - F.value**2
    if not det > DET_MIN:
        raise DomainError(f"degenerate induced metric at {point}: det g = {det:.3e}")
    sqrtE = J.sqrt(E)
    e1 = xu / sqrtE
    w = xv - e1 * J.dot(xv, e1)
    wn = J.norm(w)
    e2 = w / wn
    zero = Jet2.constant(0.0, e1.order)
    dual = J.stack([J.stack([1.0 / sqrtE, zero]), J.stack([-(F / E) / wn, 1.0 / wn])])

    pos = position.truncate(position.order - 1)
    vecs = [pos, e1, e2]
    pivots = []
    for _ in range(n - 2):
        basis = J.stack(vecs)
        j = _pick_pivot(basis.value, dim)
        pivots.append(j)
        # e_j minus its projection: <e_j, b> is the j-th component of b
        r = Jet2.constant(np.eye(dim)[j], pos.order) - (basis * basis[:, j][:, None]).sum(0)
        vecs.append(r / J.norm(r))
    frame = J.stack(vecs[1:])

    De = frame_derivative(dual, frame)  # (2, n, n+1)
    connection = J.einsum("kac,bc->kab", De, frame.truncate(De.order))
    return FramePoint(
        point=tuple(point),
        position=pos,
        frame=frame,
        dual=dual,
        connection=connection,
        metric=J.stack([E, F, G]),
        pivots=tuple(pivots),
    )


def frames_at(spec: ImmersionSpec, u: float, v: float, order: int = 3) -> FramePoint:
    return build_frames(evaluate(spec, u, v, order), point=(u, v))


# -- second fundamental form and curvature -------------------------------------------------


def second_fundamental(frame: FramePoint) -> ShapeData:
    """``h^a_ij = <D_{e_j} e_i, e_a>``; the component along the position vector is dropped."""
    om = frame.connection
    h_jet = Jet2._wrap(om.order, np.ascontiguousarray(om.coeffs[:, 0:2, 2:].transpose(2, 1, 0, 3)))
    # h_jet[a, i, j] = omega_{i, a}(e_j)
    S_jet = (h_jet * h_jet).sum((0, 1, 2)) if h_jet.shape[0] else Jet2.constant(0.0, h_jet.order)
    h = np.asarray(h_jet.value).reshape(-1, 2, 2)
    return ShapeData(
        h=h,
        h_jet=h_jet,
        mean_vector=0.5 * (h[:, 0, 0] + h[:, 1, 1]),
        S=float(S_jet.value),
        S_jet=S_jet,
    )


def normal_curvature_tensor(h: np.ndarray) -> np.ndarray:
    """``R_{ab12} = sum_m h^a_1m h^b_m2 - h^a_2m h^b_m1`` for all normal pairs."""
    prod = np.einsum("aim,bmj->abij", h, h)
    return prod[:, :, 0, 1] - prod[:, :, 1, 0]


def gauss_curvature(h: np.ndarray) -> float:
    """Gauss equation with ambient curvature 1."""
    return float(1.0 + np.sum(h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] ** 2))


def normal_scalar_curvature(R12: np.ndarray) -> float:
    # sum over ordered (i, j) doubles the (1,2) contribution
    return float(0.5 * np.sqrt(2.0 * np.sum(R12**2)))


def curvatures(shape: ShapeData, point=(float("nan"), float("nan"))) -> CurvatureReport:
    R12 = normal_curvature_tensor(shape.h)
    K = gauss_curvature(shape.h)
    return CurvatureReport(
        point=tuple(point),
        K=K,
        KN=normal_scalar_curvature(R12),
        S=shape.S,
        normal_tensor=R12,
        residuals={"gauss_S": abs(2 * K - (2 - shape.S))},
    )


def brioschi_curvature(metric: Jet2) -> float:
    """Intrinsic Gauss curvature from the first fundamental form (needs order >= 2)."""
    if metric.order < 2:
        raise UsageError("Brioschi formula needs metric jets of order >= 2")
    E, F, G = (metric[i] for i in range(3))
    Ev, Eu, Evv = E.coeff(0, 1), E.coeff(1, 0), E.coeff(0, 2)
    Gu, Gv, Guu = G.coeff(1, 0), G.coeff(0, 1), G.coeff(2, 0)
    Fu, Fv, Fuv = F.coeff(1, 0), F.coeff(0, 1), F.coeff(1, 1)
    e, f, g = E.value, F.value, G.value
    A = np.array([
        [-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev],
        [Fv - 0.5 * Gu, e, f],
        [0.5 * Gv, f, g],
    ])
    B = np.array([
        [0.0, 0.5 * Ev, 0.5 * Gu],
        [0.5 * Ev, e, f],
        [0.5 * Gu, f, g],
    ])
    return float((np.linalg.det(A) - np.linalg.det(B)) / (e * g - f * f) ** 2)


# -- covariant derivatives -------------------------------------------------------------------


def _covariant_step(T: Jet2, frame: FramePoint, n_tangent: int) -> Jet2:
    """Covariant derivative of a normal-valued tensor ``T[a, i1, ..., ip]``.

    Returns ``T[a, i1, ..., ip, k]`` (one order lower): the directional
    derivative along ``e_k`` plus one tangent-connection term per tangent
    slot and one normal-connection term for the normal index.
    """
    order = T.order - 1
    om = frame.connection.truncate(order)
    omt = om[:, 0:2, 0:2]  # [k, m, i] = omega_mi(e_k)
    omn = om[:, 2:, 2:]  # [k, b, a] = omega_ba(e_k)
    dT = frame_derivative(frame.dual, T)  # [k, a, i...]
    p = n_tangent
    idx = "ijlm"[:p]
    out = Jet2._wrap(order, np.moveaxis(dT.coeffs, 0, p + 1))
    Tt = T.truncate(order)
    for slot in range(p):
        src = idx[:slot] + "q" + idx[slot + 1:]
        out = out + J.einsum(f"a{src},kq{idx[slot]}->a{idx}k", Tt, omt)
    out = out + J.einsum(f"b{idx},kba->a{idx}k", Tt, omn)
    return out


def covariant_h1(frame: FramePoint, shape: ShapeData) -> ShapeData:
    """First covariant derivative ``h1``, ``P = |h1|^2`` and ``S_k`` (needs jets of order >= 3)."""
    if shape.h_jet.order < 1:
        raise UsageError("covariant_h1 needs immersion jets of order >= 3")
    h1_jet = _covariant_step(shape.h_jet, frame, 2)
    h1 = np.asarray(h1_jet.value).reshape(-1, 2, 2, 2)
    gradS_jet = frame_derivative(frame.dual, shape.S_jet)
    return replace(
        shape,
        h1=h1,
        h1_jet=h1_jet,
        P=float(np.sum(h1**2)),
        gradS=np.asarray(gradS_jet.value, dtype=float),
        gradS_jet=gradS_jet,
    )


def covariant_h2(frame: FramePoint, shape: ShapeData) -> ShapeData:
    """Second covariant derivative ``h2``, ``Q = |h2|^2`` and the Hessian ``S_kl`` (order-4 jets)."""
    if shape.h1_jet is None:
        shape = covariant_h1(frame, shape)
    if shape.h1_jet.order < 1:
        raise UsageError("covariant_h2 needs immersion jets of order >= 4")
    h2_jet = _covariant_step(shape.h1_jet, frame, 3)
    h2 = np.asarray(h2_jet.value).reshape(-1, 2, 2, 2, 2)
    # S_kl = e_l(S_k) + omega_mk(e_l) S_m
    dS = frame_derivative(frame.dual, shape.gradS_jet).value  # [l, k]
    om = frame.omega[:, 0:2, 0:2]  # [l, m, k]
    hess = dS.T + np.einsum("lmk,m->kl", om, shape.gradS)
    return replace(shape, h2=h2, Q=float(np.sum(h2**2)), hessS=hess)


def laplacian_S(spec: ImmersionSpec, u: float, v: float) -> float:
    """Laplace-Beltrami of ``S`` in the chart, from order-4 jets of ``S`` and the metric."""
    pos = evaluate(spec, u, v, 4)
    frame = build_frames(pos, point=(u, v))
    shape = second_fundamental(frame)
    return chart_laplacian(shape.S_jet, frame.metric)


def chart_laplacian(f: Jet2, metric: Jet2) -> float:
    """``(1/sqrt g) d_a (sqrt g g^ab d_b f)`` at the base point; ``f`` needs order >= 2."""
    if f.order < 2:
        raise UsageError("Laplacian needs jets of order >= 2")
    g = metric.truncate(f.order - 1)
    E, F, G = g[0], g[1], g[2]
    det = E * G - F * F
    if not det.value > DET_MIN:
        raise DomainError(f"degenerate induced metric: det g = {det.value:.3e}")
    rg = J.sqrt(det)
    fu, fv = f.du(), f.dv()
    # sqrt(g) g^{ab} = (1/sqrt g) [[G, -F], [-F, E]]
    Xu = (G * fu - F * fv) / rg
    Xv = (E * fv - F * fu) / rg
    return float((Xu.du() + Xv.dv()).value / rg.value)


# -- one-stop evaluation ------------------------------------------------------------------------


@dataclass(frozen=True)
class PointGeometry:
    frame: FramePoint
    shape: ShapeData
    curvature: CurvatureReport
    K_intrinsic: float
    position: Jet2  # full-order immersion jets


def analyze_point(spec: ImmersionSpec, u: float, v: float, order: int = 3) -> PointGeometry:
    """Frames, shape data and curvature at one chart point.

    ``order >= 3`` adds ``h1``, ``P``, ``S_k`` and the intrinsic curvature
    (NaN at order 2); ``order == 4`` adds ``h2``, ``Q`` and the Hessian of ``S``.
    """
    pos = evaluate(spec, u, v, order)
    frame = build_frames(pos, point=(u, v))
    shape = second_fundamental(frame)
    if order >= 3:
        shape = covariant_h1(frame, shape)
    if order >= 4:
        shape = covariant_h2(frame, shape)
    curv = curvatures(shape, point=(u, v))
    return PointGeometry(
        frame=frame,
        shape=shape,
        curvature=curv,
        K_intrinsic=brioschi_curvature(frame.metric) if frame.metric.order >= 2 else math.nan,
        position=pos,
    )
