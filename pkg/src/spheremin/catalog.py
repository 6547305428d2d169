"""Chart-parametrized minimal immersions of closed surfaces into unit spheres.

Every surface is a map ``(u, v) -> S^n`` evaluated on jets, so the geometry
engine receives exact derivatives.  Spherical charts use ``u`` as polar angle
and ``v`` as azimuth; a band of width :data:`POLE_BAND` around each pole is
excluded because the chart (not the surface) degenerates there.

Real spherical harmonics follow one fixed convention: no Condon-Shortley
phase, components ordered ``m = -s, ..., s`` with ``m < 0`` carrying
``sin(|m| v)`` and ``m > 0`` carrying ``cos(m v)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import jets as J
from .errors import DomainError, UsageError
from .jets import Jet2

POLE_BAND = 0.15
MAX_DEGREE = 6

ChartMap = Callable[[Jet2, Jet2], Jet2]


@dataclass(frozen=True)
class Expected:
    """Closed-form constants used as test oracles only (the engine never reads them)."""

    K: Fraction
    S: Fraction
    KN: Fraction


@dataclass(frozen=True)
class ImmersionSpec:
    name: str
    ambient_n: int
    chart: ChartMap = field(repr=False, compare=False)
    domain: tuple[float, float, float, float]  # u_lo, u_hi, v_lo, v_hi
    periodic_u: bool = False
    periodic_v: bool = True
    degree_s: Optional[int] = None
    expected: Optional[Expected] = None
    det_floor: float = 0.0
    description: str = ""

    def __post_init__(self):
        if self.ambient_n < 2:
            raise UsageError(f"{self.name}: ambient_n must be >= 2")
        if self.degree_s is not None:
            if self.degree_s < 1:
                raise UsageError(f"{self.name}: degree_s must be >= 1")
            if self.ambient_n != 2 * self.degree_s:
                raise UsageError(f"{self.name}: degree-{self.degree_s} immersion lives in S^{2 * self.degree_s}")

    @property
    def codimension(self) -> int:
        return self.ambient_n - 2


# -- closed-form constants --------------------------------------------------------------


def calabi_constants(s: int) -> Expected:
    K = Fraction(2, s * (s + 1))
    S = 2 - 2 * K
    return Expected(K=K, S=S, KN=(1 - K) if s >= 2 else Fraction(0))


# -- charts -------------------------------------------------------------------------------


def _sphere_xyz(u: Jet2, v: Jet2):
    su, cu = J.sin(u), J.cos(u)
    return su * J.cos(v), su * J.sin(v), cu


def _equator(u: Jet2, v: Jet2) -> Jet2:
    x, y, z = _sphere_xyz(u, v)
    return J.stack([x, y, z, Jet2.constant(0.0, u.order)])


def _clifford(u: Jet2, v: Jet2) -> Jet2:
    r = 1.0 / math.sqrt(2.0)
    return J.stack([J.cos(u) * r, J.sin(u) * r, J.cos(v) * r, J.sin(v) * r])


def _veronese(u: Jet2, v: Jet2) -> Jet2:
    x, y, z = _sphere_xyz(u, v)
    r3 = math.sqrt(3.0)
    return J.stack([
        y * z * r3,
        x * z * r3,
        x * y * r3,
        (x * x - y * y) * (r3 / 2),
        (x * x + y * y - z * z * 2.0) * 0.5,
    ])


def legendre_jets(s: int, x: Jet2, y: Jet2) -> dict[int, Jet2]:
    """Associated Legendre ``P_s^m(cos u)`` for ``m = 0..s`` without the Condon-Shortley phase.

    ``x = cos u`` and ``y = sin u`` (``y > 0`` inside the chart).  Uses the
    diagonal start ``P_m^m = (2m-1)!! y^m`` and the three-term recurrence in
    the degree.
    """
    out = {}
    for m in range(s + 1):
        p_prev = J.powi(y, m) * float(math.prod(range(1, 2 * m, 2)))
        if s == m:
            out[m] = p_prev
            continue
        p_cur = x * p_prev * float(2 * m + 1)
        for l in range(m + 2, s + 1):
            p_prev, p_cur = p_cur, (x * p_cur * float(2 * l - 1) - p_prev * float(l + m - 1)) / float(l - m)
        out[m] = p_cur
    return out


def real_harmonics(s: int, u: Jet2, v: Jet2) -> Jet2:
    """Degree-``s`` real harmonics scaled so that their squares sum to 1.

    Equals ``sqrt(4 pi / (2s + 1)) * Y_{s,m}`` for an L2-orthonormal basis
    ``Y_{s,m}``; the addition theorem gives unit norm.
    """
    x, y = J.cos(u), J.sin(u)
    P = legendre_jets(s, x, y)
    comps = []
    for m in range(-s, s + 1):
        a = abs(m)
        c = math.sqrt((1 if m == 0 else 2) * math.factorial(s - a) / math.factorial(s + a))
        if m < 0:
            comps.append(P[a] * J.sin(v * float(a)) * c)
        elif m == 0:
            comps.append(P[0] * c)
        else:
            comps.append(P[a] * J.cos(v * float(a)) * c)
    return J.stack(comps)


_SPHERICAL = (POLE_BAND, math.pi - POLE_BAND, 0.0, 2.0 * math.pi)


def _sphere_det_floor(scale: float) -> float:
    # induced metric = scale * round metric, so det g = scale^2 sin^2 u
    return 0.999 * scale**2 * math.sin(POLE_BAND) ** 2


EQUATOR = ImmersionSpec(
    name="equator",
    ambient_n=3,
    chart=_equator,
    domain=_SPHERICAL,
    expected=Expected(K=Fraction(1), S=Fraction(0), KN=Fraction(0)),
    det_floor=_sphere_det_floor(1.0),
    description="totally geodesic great 2-sphere in S^3",
)

CLIFFORD_TORUS = ImmersionSpec(
    name="clifford_torus",
    ambient_n=3,
    chart=_clifford,
    domain=(0.0, 2.0 * math.pi, 0.0, 2.0 * math.pi),
    periodic_u=True,
    expected=Expected(K=Fraction(0), S=Fraction(2), KN=Fraction(0)),
    det_floor=0.999 * 0.25,
    description="flat minimal torus (cos u, sin u, cos v, sin v)/sqrt(2) in S^3",
)

VERONESE = ImmersionSpec(
    name="veronese",
    ambient_n=4,
    chart=_veronese,
    domain=_SPHERICAL,
    degree_s=2,
    expected=calabi_constants(2),
    det_floor=_sphere_det_floor(3.0),
    description="Veronese surface in S^4 from the quadratic-form parametrization",
)


def build_calabi(s: int, name: Optional[str] = None) -> ImmersionSpec:
    """Standard minimal immersion of S^2 into S^{2s} by degree-``s`` harmonics."""
    if not isinstance(s, (int, np.integer)) or not 1 <= s <= MAX_DEGREE:
        raise UsageError(f"Calabi degree must be an integer in [1, {MAX_DEGREE}], got {s!r}")
    s = int(s)

    def chart(u: Jet2, v: Jet2) -> Jet2:
        return real_harmonics(s, u, v)

    return ImmersionSpec(
        name=name or f"calabi_{s}",
        ambient_n=2 * s,
        chart=chart,
        domain=_SPHERICAL,
        degree_s=s,
        expected=calabi_constants(s),
        det_floor=_sphere_det_floor(s * (s + 1) / 2),
        description=f"degree-{s} standard minimal immersion S^2 -> S^{2 * s}",
    )


GENERALIZED_VERONESE = build_calabi(3, name="generalized_veronese")


def catalog_list() -> list[ImmersionSpec]:
    return [EQUATOR, CLIFFORD_TORUS, VERONESE, GENERALIZED_VERONESE]


_CALABI_NAME = re.compile(r"^calabi[_(]?(\d+)\)?$")


def get_spec(name: str) -> ImmersionSpec:
    """Look up a catalog entry by name; ``calabi_<s>`` builds the degree-s immersion."""
    for spec in catalog_list():
        if spec.name == name:
            return spec
    m = _CALABI_NAME.match(name)
    if m:
        return build_calabi(int(m.group(1)))
    known = ", ".join(s.name for s in catalog_list())
    raise UsageError(f"unknown surface {name!r}; known: {known}, calabi_<s>")


def rotated(spec: ImmersionSpec, matrix) -> ImmersionSpec:
    """Same surface composed with a constant orthogonal map of the ambient space."""
    Q = np.asarray(matrix, dtype=float)
    if Q.shape != (spec.ambient_n + 1,) * 2 or not np.allclose(Q @ Q.T, np.eye(len(Q)), atol=1e-12):
        raise UsageError("rotation must be an orthogonal matrix of the ambient dimension")
    base = spec.chart
    return replace(spec, name=f"{spec.name}@rotated", chart=lambda u, v: J.linear_map(Q, base(u, v)))


# -- evaluation and sampling --------------------------------------------------------------


def check_point(spec: ImmersionSpec, u: float, v: float) -> None:
    u_lo, u_hi, v_lo, v_hi = spec.domain
    if not (u_lo <= u <= u_hi and v_lo <= v <= v_hi):
        band = ""
        if not spec.periodic_u:
            band = f" (pole exclusion band: |u| and |pi - u| must be >= {POLE_BAND})"
        raise DomainError(
            f"point (u={u!r}, v={v!r}) outside chart domain of {spec.name}: "
            f"u in [{u_lo:.6g}, {u_hi:.6g}], v in [{v_lo:.6g}, {v_hi:.6g}]{band}"
        )


def evaluate(spec: ImmersionSpec, u: float, v: float, order: int) -> Jet2:
    """Component jets of the immersion at ``(u, v)``; shape ``(ambient_n + 1,)``."""
    if not isinstance(spec, ImmersionSpec):
        raise UsageError(f"not an immersion spec: {spec!r}")
    check_point(spec, u, v)
    uj, vj = J.seed_pair(u, v, order)
    return spec.chart(uj, vj)


def _axis(lo: float, hi: float, n: int, periodic: bool) -> np.ndarray:
    return np.linspace(lo, hi, n, endpoint=not periodic)


def sample_grid(spec: ImmersionSpec, nu: int = 10, nv: int = 10, bounds=None) -> list[tuple[int, int, float, float]]:
    """Uniform grid ``[(i, j, u, v), ...]`` in grid-index order.

    Periodic directions omit the duplicated endpoint.  ``bounds`` overrides
    the chart rectangle and must lie inside it.
    """
    if nu < 2 or nv < 2:
        raise UsageError("grid needs at least 2 points per direction")
    u_lo, u_hi, v_lo, v_hi = bounds if bounds is not None else spec.domain
    check_point(spec, u_lo, v_lo)
    check_point(spec, u_hi, v_hi)
    full = bounds is None
    us = _axis(u_lo, u_hi, nu, spec.periodic_u and full)
    vs = _axis(v_lo, v_hi, nv, spec.periodic_v and full)
    return [(i, j, float(a), float(b)) for i, a in enumerate(us) for j, b in enumerate(vs)]


def random_points(spec: ImmersionSpec, n: int, seed: int = 0) -> list[tuple[float, float]]:
    rng = np.random.default_rng(seed)
    u_lo, u_hi, v_lo, v_hi = spec.domain
    us = rng.uniform(u_lo, u_hi, n)
    vs = rng.uniform(v_lo, v_hi, n)
    return [(float(a), float(b)) for a, b in zip(us, vs)]
