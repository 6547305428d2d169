"""Normal-frame normalization of shape operators at a point.

All functions act on value-level operator stacks ``h[a, i, j]`` (normal
index first).  A normal rotation ``R`` produces the new frame
``e'_a = sum_b R[a, b] e_b`` and operators ``h'[a] = sum_b R[a, b] h[b]``.
A tangent rotation by ``theta`` maps ``(e_1, e_2)`` to
``(cos e_1 + sin e_2, -sin e_1 + cos e_2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .engine import ShapeData, normal_curvature_tensor
from .errors import SingularityError, UsageError

FLAT_REL_TOL = 1e-8


def flatness_threshold(S: float) -> float:
    return FLAT_REL_TOL * max(1.0, S)


def complete_rotation(first_row: np.ndarray) -> np.ndarray:
    """Orthogonal matrix with the given unit first row.

    Remaining rows come from standard basis vectors, each time taking the
    one with the largest residual against the rows so far (ties go to the
    lowest index), then orthonormalizing.
    """
    m = len(first_row)
    rows = [np.asarray(first_row, dtype=float)]
    for _ in range(m - 1):
        B = np.array(rows)
        resid = np.eye(m) - B.T @ B
        norms = np.linalg.norm(resid, axis=1)
        j = int(np.flatnonzero(norms >= norms.max() * (1 - 1e-12))[0])
        r = resid[j] - B.T @ (B @ resid[j])  # second pass for stability
        rows.append(r / np.linalg.norm(r))
    return np.array(rows)


def rotate_normal(R: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Apply a normal rotation to any tensor whose first axis is the normal index."""
    return np.tensordot(R, T, axes=(1, 0))


def tangent_rotation_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def rotate_tangent(theta: float, h: np.ndarray) -> np.ndarray:
    Rt = tangent_rotation_matrix(theta)
    return np.einsum("ip,jq,apq->aij", Rt, Rt, h)


@dataclass(frozen=True)
class StarResult:
    rotation: np.ndarray
    h: np.ndarray
    flat: bool
    offdiag_norm: float


def normalize_star(h: np.ndarray, threshold: Optional[float] = None) -> StarResult:
    """Rotate the normal frame so that ``e_3`` points along ``sum_a h^a_12 e_a``.

    Afterwards ``h^3_12 = b > 0`` and ``h^a_12 = 0`` for ``a >= 4``.  When the
    off-diagonal vector is shorter than ``threshold`` the input is returned
    unchanged with ``flat=True``.
    """
    h = np.asarray(h, dtype=float)
    m = h.shape[0]
    if threshold is None:
        threshold = flatness_threshold(float(np.sum(h**2)))
    e = h[:, 0, 1]
    ne = float(np.linalg.norm(e))
    if m == 0 or ne <= threshold:
        return StarResult(np.eye(m), h.copy(), True, ne)
    R = complete_rotation(e / ne)
    return StarResult(R, rotate_normal(R, h), False, ne)


@dataclass(frozen=True)
class CanonicalForm:
    rotation: np.ndarray
    tangent_rotation: float
    b: float
    lambda3: float
    lambda4: float
    residual: float
    branch: str  # nowhere_flat | flat | mixed_rejected
    S_bar: float
    S3: float
    h: np.ndarray = field(repr=False)  # operators in the normalized frame

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "b": self.b,
            "b_squared": self.b**2,
            "lambda3": self.lambda3,
            "lambda4": self.lambda4,
            "residual": self.residual,
            "S_bar": self.S_bar,
            "S3": self.S3,
            "tangent_rotation": self.tangent_rotation,
            "rotation": self.rotation.tolist(),
        }


def _split_norms(h: np.ndarray) -> tuple[float, float]:
    S3 = float(np.sum(h[0] ** 2)) if len(h) else 0.0
    return float(np.sum(h[1:] ** 2)), S3


def normalize_reduced(h: np.ndarray, tol: Optional[float] = None) -> CanonicalForm:
    """Second rotation: ``e_4`` along ``(h^b_11)_{b >= 4}``, keeping ``e_3``.

    Input must already be in the starred form.  The residual collects every
    component that vanishes in the canonical form ``L3 = [[0, b], [b, 0]]``,
    ``L4 = diag(b, -b)``, ``L5.. = 0`` plus ``|b^2 - S/4|``; it measures how
    far an arbitrary input is from that form rather than forcing it.
    """
    h = np.asarray(h, dtype=float)
    m = h.shape[0]
    S = float(np.sum(h**2))
    if tol is None:
        tol = flatness_threshold(S)
    if m == 0:
        raise UsageError("normalize_reduced needs at least one normal direction")
    b = float(h[0, 0, 1])
    w = h[1:, 0, 0]
    nw = float(np.linalg.norm(w))
    S_bar, S3 = _split_norms(h)
    if nw <= tol:
        branch = "mixed_rejected" if abs(b) > tol else "flat"
        return CanonicalForm(
            rotation=np.eye(m), tangent_rotation=0.0, b=b, lambda3=float(h[0, 0, 0]),
            lambda4=0.0, residual=float("inf"), branch=branch, S_bar=S_bar, S3=S3, h=h.copy(),
        )
    R = np.eye(m)
    R[1:, 1:] = complete_rotation(w / nw)
    hc = rotate_normal(R, h)
    lam3, lam4 = float(hc[0, 0, 0]), float(hc[1, 0, 0])
    terms = [
        abs(lam3),
        abs(hc[0, 1, 1]),
        abs(hc[1, 0, 1]),
        abs(hc[1, 0, 0] + hc[1, 1, 1]),
        abs(b * b - S / 4),
        abs(abs(lam4) - b),
    ]
    if m > 2:
        terms.append(float(np.abs(hc[2:]).max()))
    S_bar, S3 = _split_norms(hc)
    return CanonicalForm(
        rotation=R, tangent_rotation=0.0, b=b, lambda3=lam3, lambda4=lam4,
        residual=float(max(terms)), branch="nowhere_flat", S_bar=S_bar, S3=S3, h=hc,
    )


def diagonalize_flat(h: np.ndarray, tol: Optional[float] = None) -> tuple[float, np.ndarray]:
    """One tangent rotation diagonalizing a commuting family of shape operators.

    The angle is fixed by the operator with the largest trace-free part and
    lies in ``(-pi/4, pi/4]``, the smallest admissible magnitude.
    """
    h = np.asarray(h, dtype=float)
    if tol is None:
        tol = flatness_threshold(float(np.sum(h**2)))
    if h.shape[0] == 0:
        return 0.0, h.copy()
    comm = math.sqrt(2.0) * np.abs(normal_curvature_tensor(h))
    if comm.max() > tol:
        a, b = np.unravel_index(int(np.argmax(comm)), comm.shape)
        raise UsageError(
            f"shape operators do not commute: |[L{a + 3}, L{b + 3}]| = {comm.max():.3e} > {tol:.1e}"
        )
    d = h[:, 0, 0] - h[:, 1, 1]
    o = h[:, 0, 1]
    k = int(np.argmax(d**2 + 4 * o**2))
    theta = 0.5 * math.atan2(2 * o[k], d[k])
    if theta > math.pi / 4:
        theta -= math.pi / 2
    elif theta <= -math.pi / 4:
        theta += math.pi / 2
    return theta, rotate_tangent(theta, h)


def is_flat_point(h: np.ndarray, S: Optional[float] = None) -> bool:
    if h.shape[0] < 2:
        return True
    if S is None:
        S = float(np.sum(h**2))
    return float(np.abs(normal_curvature_tensor(h)).max()) <= flatness_threshold(S)


def canonicalize(h: np.ndarray) -> CanonicalForm:
    """Full pointwise normalization: flat points are diagonalized, others get the canonical frame."""
    h = np.asarray(h, dtype=float)
    S = float(np.sum(h**2))
    m = h.shape[0]
    if is_flat_point(h, S):
        theta, hd = diagonalize_flat(h, tol=2 * flatness_threshold(S))
        S_bar, S3 = _split_norms(hd)
        resid = float(np.abs(hd[:, 0, 1]).max()) if m else 0.0
        return CanonicalForm(
            rotation=np.eye(m), tangent_rotation=theta, b=0.0, lambda3=float(hd[0, 0, 0]) if m else 0.0,
            lambda4=0.0, residual=resid, branch="flat", S_bar=S_bar, S3=S3, h=hd,
        )
    star = normalize_star(h, threshold=0.0)
    canon = normalize_reduced(star.h)
    return replace(canon, rotation=canon.rotation @ star.rotation)


# -- canonical derivative relations ------------------------------------------------------------


@dataclass(frozen=True)
class DerivativeRelations:
    lam_k: np.ndarray  # (m, 2): lambda^a_k = h^a_11k in the canonical frame
    lam_kl: Optional[np.ndarray]  # (m, 2, 2): lambda^a_kl = h^a_11kl
    first: dict  # name -> (lhs, rhs)
    second: dict

    def residuals(self) -> dict:
        out = {k: abs(a - b) for k, (a, b) in self.first.items()}
        out.update({k: abs(a - b) for k, (a, b) in self.second.items()})
        return out


def canonical_derivatives(shape: ShapeData, canon: CanonicalForm, tol: float = 1e-6) -> DerivativeRelations:
    """Express ``h1`` (and ``h2``) in the canonical frame and pair each
    derivative of ``lambda^3``, ``lambda^4`` with its closed form in ``S_k``,
    ``S_kl`` and ``P``."""
    if canon.branch != "nowhere_flat" or not canon.residual <= tol:
        raise UsageError(f"canonical frame unavailable (branch={canon.branch}, residual={canon.residual:.3e})")
    if shape.h1 is None:
        raise UsageError("shape data lacks first covariant derivatives")
    S = shape.S
    if S < 1e-10:
        raise SingularityError(f"S = {S:.3e} too small for the 1/sqrt(S) relations")
    c = 1.0 / (4.0 * math.sqrt(S))
    h1c = rotate_normal(canon.rotation, shape.h1)
    lam_k = h1c[:, 0, 0, :]
    S1, S2 = shape.gradS
    first = {
        "lambda3_1": (lam_k[0, 0], -c * S2),
        "lambda4_2": (lam_k[1, 1], c * S2),
        "lambda3_2": (lam_k[0, 1], c * S1),
        "lambda4_1": (lam_k[1, 0], c * S1),
    }
    lam_kl = None
    second = {}
    if shape.h2 is not None:
        h2c = rotate_normal(canon.rotation, shape.h2)
        lam_kl = h2c[:, 0, 0, :, :]
        H, P = shape.hessS, shape.P
        L3, L4 = lam_kl[0], lam_kl[1]
        second = {
            "lambda3_11": (L3[0, 0], -c * H[1, 0]),
            "lambda4_21": (L4[1, 0], c * H[1, 0]),
            "lambda3_12": (L3[0, 1], -c * (H[1, 1] - P)),
            "lambda4_22": (L4[1, 1], c * (H[1, 1] - P)),
            "lambda3_22": (L3[1, 1], c * H[0, 1]),
            "lambda4_12": (L4[0, 1], c * H[0, 1]),
            "lambda3_21": (L3[1, 0], c * (H[0, 0] - P)),
            "lambda4_11": (L4[0, 0], c * (H[0, 0] - P)),
        }
    first = {k: (float(a), float(b)) for k, (a, b) in first.items()}
    second = {k: (float(a), float(b)) for k, (a, b) in second.items()}
    return DerivativeRelations(lam_k=lam_k, lam_kl=lam_kl, first=first, second=second)


def with_canonical(shape: ShapeData, canon: CanonicalForm, rel: Optional[DerivativeRelations] = None) -> ShapeData:
    """Attach canonical extras (``b``, ``lambda^a`` and their derivatives) to shape data."""
    return replace(
        shape,
        b=canon.b,
        lam=canon.h[:, 0, 0].copy(),
        lam_k=None if rel is None else rel.lam_k,
        lam_kl=None if rel is None else rel.lam_kl,
    )
