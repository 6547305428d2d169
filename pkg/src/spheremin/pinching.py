"""Curvature-range summaries and the pinching decision rules.

A :class:`SurfaceSummary` holds grid ranges of K, K^N and S plus a branch
label.  :func:`classify` walks a fixed list of rules; each rule either names
a surface or falls through, so widening ``tol`` can only trade one specific
verdict for another (never for ``Indeterminate``).  Human-readable citation
strings live in ``data/citations.json`` keyed by rule id.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Iterable, Optional, Union

import numpy as np

from .catalog import ImmersionSpec, sample_grid
from .engine import analyze_point, gauss_curvature, normal_curvature_tensor, normal_scalar_curvature
from .errors import DomainError, UsageError
from .normalize import is_flat_point

DEFAULT_TOL = 1e-6

VERDICTS = ("GeodesicSphere", "CliffordTorus", "VeroneseS4", "GeneralizedVeroneseS6", "CalabiStandard", "Indeterminate")

_NAMED_BY_DEGREE = {1: "GeodesicSphere", 2: "VeroneseS4", 3: "GeneralizedVeroneseS6"}


@lru_cache(maxsize=1)
def citations() -> dict[str, str]:
    text = resources.files("spheremin").joinpath("data/citations.json").read_text(encoding="utf-8")
    return json.loads(text)


def cite(rule: str) -> str:
    return citations()[rule]


@dataclass(frozen=True)
class SurfaceSummary:
    K_min: float
    K_max: float
    KN_min: float
    KN_max: float
    S_min: float
    S_max: float
    branch: str  # flat | nowhere_flat | mixed
    n_points: int
    surface: str = ""

    def validate(self) -> None:
        for name in ("K", "KN", "S"):
            lo, hi = getattr(self, f"{name}_min"), getattr(self, f"{name}_max")
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise UsageError(f"{name} range must be finite")
            if lo > hi:
                raise UsageError(f"inverted {name} range: min {lo!r} > max {hi!r}")
        if self.KN_min < 0:
            raise UsageError(f"normal curvature cannot be negative (KN_min = {self.KN_min!r})")
        if self.branch not in ("flat", "nowhere_flat", "mixed"):
            raise UsageError(f"unknown branch {self.branch!r}")
        if self.n_points < 1:
            raise UsageError("summary needs at least one point")

    def to_dict(self) -> dict:
        return asdict(self)


def _branch(flags: Iterable[bool]) -> str:
    flags = set(flags)
    if flags == {True}:
        return "flat"
    if flags == {False}:
        return "nowhere_flat"
    return "mixed"


def _from_values(K, KN, S, flags, surface="") -> SurfaceSummary:
    K, KN, S = (np.asarray(x, dtype=float) for x in (K, KN, S))
    return SurfaceSummary(
        K_min=float(K.min()), K_max=float(K.max()),
        KN_min=float(KN.min()), KN_max=float(KN.max()),
        S_min=float(S.min()), S_max=float(S.max()),
        branch=_branch(flags), n_points=int(K.size), surface=surface,
    )


def summarize(spec: ImmersionSpec, nu: int = 10, nv: int = 10, jet_order: int = 3, bounds=None) -> SurfaceSummary:
    """Exact min/max of engine outputs over the grid."""
    K, KN, S, flags = [], [], [], []
    for _, _, u, v in sample_grid(spec, nu, nv, bounds):
        try:
            g = analyze_point(spec, u, v, jet_order)
        except DomainError as exc:
            raise DomainError(f"summarize aborted at (u={u!r}, v={v!r}): {exc}") from exc
        K.append(g.curvature.K)
        KN.append(g.curvature.KN)
        S.append(g.curvature.S)
        flags.append(is_flat_point(g.shape.h, g.shape.S))
    return _from_values(K, KN, S, flags, spec.name)


def summarize_operators(hs: Iterable[np.ndarray], surface: str = "") -> SurfaceSummary:
    """Summary from raw shape-operator stacks ``h[a, i, j]`` (one per point).

    K comes from the Gauss equation, so scaled or synthetic operators give
    the curvature ranges such data would imply.
    """
    K, KN, S, flags = [], [], [], []
    for h in hs:
        h = np.asarray(h, dtype=float)
        K.append(gauss_curvature(h))
        KN.append(normal_scalar_curvature(normal_curvature_tensor(h)))
        S.append(float(np.sum(h**2)))
        flags.append(is_flat_point(h))
    if not K:
        raise UsageError("no operators given")
    return _from_values(K, KN, S, flags, surface)


# -- window helpers ---------------------------------------------------------------------------------


Number = Union[int, float, Fraction]


def curvature_of_degree(s: int) -> Fraction:
    return Fraction(2, s * (s + 1))


def squared_norm_of_degree(s: int) -> Fraction:
    return Fraction(2 * (s - 1) * (s + 2), s * (s + 1))


def simon_window(S_value: Number) -> tuple[int, Number, Number]:
    """The ``s`` with ``S(s) <= S_value <= S(s+1)``; a shared endpoint goes to the lower window.

    Exact when ``S_value`` is an ``int`` or ``Fraction``; endpoints are then
    returned as ``Fraction`` (floats otherwise).
    """
    exact = isinstance(S_value, (int, Fraction)) and not isinstance(S_value, bool)
    x = Fraction(S_value) if exact else float(S_value)
    if not exact and not math.isfinite(x):
        raise DomainError(f"S must be finite, got {S_value!r}")
    if x < 0:
        raise DomainError(f"S must be nonnegative, got {S_value!r}")
    if x >= 2:
        raise DomainError(f"S = {S_value!r} >= 2 lies beyond every window (it would force K <= 0)")
    s = 1
    while x > squared_norm_of_degree(s + 1):
        s += 1
    lo, hi = squared_norm_of_degree(s), squared_norm_of_degree(s + 1)
    if not exact:
        lo, hi = float(lo), float(hi)
    return s, lo, hi


def degree_from_normal_curvature(KN: float) -> float:
    """Real ``s`` solving ``K^N = 1 - 2/(s(s+1))``."""
    if not 0 <= KN < 1:
        raise DomainError(f"K^N = {KN!r} outside [0, 1)")
    return (-1.0 + math.sqrt(1.0 + 8.0 / (1.0 - KN))) / 2.0


# -- classification ------------------------------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    verdict: str
    theorem_used: str
    margin: Optional[float]
    rule: str = ""
    s: Optional[int] = None
    paper_asserted: bool = False
    hypotheses: dict = field(default_factory=dict)
    supporting: tuple[str, ...] = ()
    note: str = ""

    @property
    def label(self) -> str:
        return f"CalabiStandard({self.s})" if self.verdict == "CalabiStandard" else self.verdict

    def to_dict(self) -> dict:
        return {
            "verdict": self.label,
            "theorem_used": self.theorem_used,
            "rule": self.rule,
            "margin": self.margin,
            "s": self.s,
            "paper_asserted": self.paper_asserted,
            "hypotheses": dict(self.hypotheses),
            "supporting": list(self.supporting),
            "note": self.note,
        }


def _near(lo: float, hi: float, target: float) -> float:
    return max(abs(lo - target), abs(hi - target))


def hypotheses(sm: SurfaceSummary, tol: float) -> dict[str, bool]:
    """Which classification hypotheses hold for the ranges (tolerance-widened)."""
    ok_branch = sm.branch in ("flat", "nowhere_flat")
    kpos = sm.K_min > 0
    return {
        "flat_or_nowhere_flat": ok_branch,
        "positive_K": kpos,
        "wintgen": kpos and ok_branch,
        "ratio_low": ok_branch and sm.KN_max <= 2 * sm.K_min + tol,
        "ratio_mid": kpos and 2 * sm.K_max <= sm.KN_min + tol and sm.KN_max <= 5 * sm.K_min + tol,
        "window_low": ok_branch and sm.S_min >= -tol and sm.S_max <= 4 / 3 + tol,
        "window_mid": ok_branch and sm.S_min >= 4 / 3 - tol and sm.S_max <= 5 / 3 + tol,
        "kn_window_low": kpos and ok_branch and sm.KN_max <= 2 / 3 + tol,
        "kn_window_mid": kpos and sm.KN_min >= 2 / 3 - tol and sm.KN_max <= 5 / 6 + tol,
        "constant_kn": kpos and sm.KN_max - sm.KN_min <= tol and sm.KN_min > tol,
    }


def _result(verdict, rule, margin, hyp, s=None, note="") -> Classification:
    support = tuple(cite(k) for k, v in hyp.items() if v and k in citations())
    return Classification(
        verdict=verdict,
        theorem_used=cite(rule),
        margin=float(margin),
        rule=rule,
        s=s,
        paper_asserted=rule == "constant_kn",
        hypotheses=hyp,
        supporting=support,
        note=note,
    )


def classify(summary: SurfaceSummary, tol: float = DEFAULT_TOL) -> Classification:
    """Predicted surface class for the curvature ranges in ``summary``."""
    if not tol >= 0:
        raise UsageError(f"tolerance must be nonnegative, got {tol!r}")
    summary.validate()
    sm = summary
    hyp = hypotheses(sm, tol)

    if sm.branch == "mixed":
        return Classification("Indeterminate", "", None, rule="mixed_branch", hypotheses=hyp,
                              note="surface mixes flat and non-flat points; no rule applies")

    # (1) totally geodesic
    if sm.S_max <= tol:
        return _result("GeodesicSphere", "geodesic_sphere", tol - sm.S_max, hyp)

    # (2) flat torus
    if sm.branch == "flat" and _near(sm.S_min, sm.S_max, 2.0) <= tol:
        return _result("CliffordTorus", "clifford_torus", tol - _near(sm.S_min, sm.S_max, 2.0), hyp)

    # (3) low S window
    if sm.K_min > 0 and sm.S_max <= 4 / 3 + tol:
        d = _near(sm.S_min, sm.S_max, 4 / 3)
        if d <= tol:
            rule = "veronese_ratio" if hyp["ratio_low"] and sm.branch == "nowhere_flat" else "veronese_low_window"
            return _result("VeroneseS4", rule, tol - d, hyp, s=2)

    # (4) middle S window
    if sm.S_min >= 4 / 3 - tol and sm.S_max <= 5 / 3 + tol:
        d4, d5 = _near(sm.S_min, sm.S_max, 4 / 3), _near(sm.S_min, sm.S_max, 5 / 3)
        if min(d4, d5) <= tol:
            if d4 <= d5:
                return _result("VeroneseS4", "veronese_mid_window", tol - d4, hyp, s=2)
            rule = "generalized_veronese_ratio" if hyp["ratio_mid"] else "generalized_veronese_mid_window"
            return _result("GeneralizedVeroneseS6", rule, tol - d5, hyp, s=3)

    # (5) normal-curvature windows, via K + K^N = 1
    if hyp["kn_window_low"]:
        d0, d2 = _near(sm.KN_min, sm.KN_max, 0.0), _near(sm.KN_min, sm.KN_max, 2 / 3)
        if d0 <= tol and d0 <= d2:
            return _result("GeodesicSphere", "kn_low_sphere", tol - d0, hyp, s=1)
        if d2 <= tol:
            return _result("VeroneseS4", "kn_low_veronese", tol - d2, hyp, s=2)
    if hyp["kn_window_mid"]:
        d2, d3 = _near(sm.KN_min, sm.KN_max, 2 / 3), _near(sm.KN_min, sm.KN_max, 5 / 6)
        if min(d2, d3) <= tol:
            if d2 <= d3:
                return _result("VeroneseS4", "kn_mid_veronese", tol - d2, hyp, s=2)
            return _result("GeneralizedVeroneseS6", "kn_mid_generalized", tol - d3, hyp, s=3)

    # (6) constant normal curvature
    if hyp["constant_kn"] and sm.KN_max < 1:
        kn = 0.5 * (sm.KN_min + sm.KN_max)
        s_real = degree_from_normal_curvature(kn)
        s = int(round(s_real))
        if s >= 2:
            err = abs(s_real - s)
            bound = tol * s * (s + 1)
            if err <= bound:
                verdict = _NAMED_BY_DEGREE.get(s, "CalabiStandard")
                return _result(verdict, "constant_kn", bound - err, hyp, s=s,
                               note=f"degree recovered from constant K^N: s = {s_real:.12g}")

    return Classification("Indeterminate", "", None, rule="none", hypotheses=hyp,
                          note="no rule matched the measured ranges")


def expected_verdict(spec: ImmersionSpec) -> str:
    """Class label a catalog surface should receive."""
    if spec.name == "clifford_torus":
        return "CliffordTorus"
    if spec.name == "equator":
        return "GeodesicSphere"
    s = spec.degree_s
    if s is None:
        raise UsageError(f"no expected class for {spec.name}")
    name = _NAMED_BY_DEGREE.get(s)
    return name if name else f"CalabiStandard({s})"


__all__ = [
    "Classification",
    "DEFAULT_TOL",
    "SurfaceSummary",
    "classify",
    "curvature_of_degree",
    "degree_from_normal_curvature",
    "expected_verdict",
    "hypotheses",
    "simon_window",
    "squared_norm_of_degree",
    "summarize",
    "summarize_operators",
]
