"""Pointwise identity checks over chart grids.

Each registered check maps a :class:`PointContext` to ``(lhs, rhs, residual)``
or signals that it does not apply at that point.  :func:`run_suite`
evaluates the registry on a grid and aggregates per-check statistics in
grid-index order, so a report depends only on (surface, grid, tier,
tolerances).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import jets as J
from .catalog import ImmersionSpec, calabi_constants, sample_grid
from .engine import (
    TOLERANCES,
    PointGeometry,
    analyze_point,
    chart_laplacian,
    frame_derivative,
    laplacian_S,
    normal_curvature_tensor,
)
from .errors import UsageError
from .normalize import (
    CanonicalForm,
    DerivativeRelations,
    StarResult,
    canonical_derivatives,
    canonicalize,
    is_flat_point,
    normalize_star,
    rotate_normal,
)

CANONICAL_GATE = 1e-8


class NotApplicable(Exception):
    """The check's hypotheses do not hold at this point."""


class GaugeFailed(Exception):
    """The canonical frame could not be established within tolerance."""


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    tier: int
    lhs: float
    rhs: float
    residual: float
    tolerance: float
    passed: bool
    point: tuple[float, float]
    status: str = "pass"  # pass | fail | skipped | gauge_failed
    reason: str = ""


@dataclass(frozen=True)
class CheckSummary:
    name: str
    tier: int
    reference: str
    tolerance: float
    status: str  # pass | fail | skipped | gauge_failed
    n_evaluated: int
    n_failed: int
    n_skipped: int
    n_gauge_failed: int
    max_residual: Optional[float]
    first_failure: Optional[dict]
    skip_reason: str = ""

    @property
    def passed(self) -> bool:
        return self.status in ("pass", "skipped")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "tier": self.tier,
            "reference": self.reference,
            "tolerance": self.tolerance,
            "status": self.status,
            "n_evaluated": self.n_evaluated,
            "n_failed": self.n_failed,
            "n_skipped": self.n_skipped,
            "n_gauge_failed": self.n_gauge_failed,
            "max_residual": self.max_residual,
            "first_failure": self.first_failure,
            "skip_reason": self.skip_reason,
        }


@dataclass(frozen=True)
class IdentityReport:
    surface: str
    grid: dict
    tier: int
    jet_order: int
    branch: str
    checks: tuple[CheckSummary, ...]
    summary: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckSummary:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "surface": self.surface,
            "grid": self.grid,
            "tier": self.tier,
            "jet_order": self.jet_order,
            "branch": self.branch,
            "passed": self.passed,
            "summary": self.summary,
            "checks": [c.to_dict() for c in self.checks],
        }


# -- per-point context -------------------------------------------------------------------------


@dataclass
class PointContext:
    index: tuple[int, int]
    point: tuple[float, float]
    geom: PointGeometry
    laplacian: float
    flat: bool
    star: Optional[StarResult]
    canon: CanonicalForm
    relations: Optional[DerivativeRelations] = None
    gate: float = CANONICAL_GATE
    grid_branch: str = ""
    _cache: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.geom.shape

    @property
    def S(self) -> float:
        return self.geom.shape.S

    @property
    def K(self) -> float:
        return self.geom.curvature.K

    def require_nowhere_flat(self) -> None:
        if self.grid_branch == "mixed":
            raise NotApplicable("surface mixes flat and non-flat points")
        if self.flat:
            raise NotApplicable("flat normal bundle at this point")

    def require_flat(self) -> None:
        if self.grid_branch == "mixed":
            raise NotApplicable("surface mixes flat and non-flat points")
        if not self.flat:
            raise NotApplicable("normal bundle not flat at this point")

    def require_canonical(self) -> CanonicalForm:
        self.require_nowhere_flat()
        if not self.K > 0:
            raise NotApplicable("canonical frame requires K > 0")
        if not self.canon.residual <= self.gate:
            raise GaugeFailed(f"canonical residual {self.canon.residual:.3e} > {self.gate:.1e}")
        return self.canon

    def require_relations(self, second: bool = False) -> DerivativeRelations:
        self.require_canonical()
        if self.relations is None:
            self.relations = canonical_derivatives(self.shape, self.canon, tol=self.gate)
        if second and self.relations.lam_kl is None:
            raise UsageError("second derivative relations need order-4 jets")
        return self.relations


def build_context(spec: ImmersionSpec, index, u: float, v: float, order: int, gate: float = CANONICAL_GATE) -> PointContext:
    geom = analyze_point(spec, u, v, order)
    if order >= 4:
        lap = chart_laplacian(geom.shape.S_jet, geom.frame.metric)
    else:
        lap = laplacian_S(spec, u, v)
    h = geom.shape.h
    flat = is_flat_point(h, geom.shape.S)
    star = None if flat else normalize_star(h, threshold=0.0)
    return PointContext(
        index=tuple(index),
        point=(u, v),
        geom=geom,
        laplacian=lap,
        flat=flat,
        star=star,
        canon=canonicalize(h),
        gate=gate,
    )


# -- tensors used by several checks ------------------------------------------------------------------


def tangent_curvature(h: np.ndarray) -> np.ndarray:
    """``R_ijkl`` from the Gauss equation in the unit sphere."""
    d = np.eye(2)
    R = np.einsum("ik,jl->ijkl", d, d) - np.einsum("il,jk->ijkl", d, d)
    R = R + np.einsum("aik,ajl->ijkl", h, h) - np.einsum("ail,ajk->ijkl", h, h)
    return R


def normal_curvature_full(h: np.ndarray) -> np.ndarray:
    """``R_{ab kl}`` for all tangent index pairs."""
    prod = np.einsum("akm,bml->abkl", h, h)
    return prod - prod.transpose(0, 1, 3, 2)


def normal_tensor_derivative(ctx: PointContext) -> np.ndarray:
    """Covariant derivative ``R_{ab12,k}`` in the working frame, shape (m, m, 2)."""
    if "dR" in ctx._cache:
        return ctx._cache["dR"]
    frame = ctx.geom.frame
    hj = ctx.shape.h_jet
    prod = J.einsum("akm,bml->abkl", hj, hj)
    R12 = prod[:, :, 0, 1] - prod[:, :, 1, 0]
    dR = frame_derivative(frame.dual, R12).value  # [k, a, b]
    omn = frame.omega[:, 2:, 2:]  # [k, c, a] = omega_ca(e_k)
    R = R12.value
    out = np.moveaxis(dR, 0, 2) + np.einsum("cb,kca->abk", R, omn) + np.einsum("ac,kcb->abk", R, omn)
    ctx._cache["dR"] = out
    return out


# -- check implementations -----------------------------------------------------------------------------


def _simons_scale(P: float) -> float:
    return max(1.0, abs(P))


def chk_unit_sphere(ctx):
    pos = ctx.geom.position
    n2 = (pos * pos).sum(0).coeffs
    dev = n2.copy()
    dev[0] -= 1.0
    r = float(np.abs(dev).max())
    return float(n2[0]), 1.0, r


def chk_frame(ctx):
    return ctx.geom.frame.gram_residual(), 0.0, ctx.geom.frame.gram_residual()


def chk_minimality(ctx):
    H = ctx.shape.mean_vector
    r = float(np.abs(H).max()) if H.size else 0.0
    return r, 0.0, r


def chk_gauss(ctx):
    a, b = ctx.K, ctx.geom.K_intrinsic
    return a, b, abs(a - b)


def chk_window(ctx):
    a, b = 2 * ctx.geom.K_intrinsic, 2 - ctx.S
    return a, b, abs(a - b)


def chk_codazzi(ctx):
    h1 = ctx.shape.h1
    if h1 is None or h1.size == 0:
        return 0.0, 0.0, 0.0
    perms = [(0, 1, 2, 3), (0, 1, 3, 2), (0, 2, 1, 3), (0, 2, 3, 1), (0, 3, 1, 2), (0, 3, 2, 1)]
    r = max(float(np.abs(h1 - h1.transpose(p)).max()) for p in perms)
    return r, 0.0, r


def chk_wintgen(ctx):
    if not ctx.K > TOLERANCES["frame"]:
        raise NotApplicable("requires K > 0")
    if ctx.grid_branch == "mixed":
        raise NotApplicable("surface mixes flat and non-flat points")
    lhs = ctx.K + ctx.geom.curvature.KN
    return lhs, 1.0, abs(lhs - 1.0)


def chk_star_form(ctx):
    ctx.require_nowhere_flat()
    hs = ctx.star.h
    off = float(np.abs(hs[1:, 0, 1]).max()) if len(hs) > 1 else 0.0
    b = float(hs[0, 0, 1])
    r = max(off, abs(b - ctx.star.offdiag_norm), 0.0 if b > 0 else abs(b) + 1.0)
    return b, ctx.star.offdiag_norm, r


def chk_canonical_form(ctx):
    ctx.require_nowhere_flat()
    if not ctx.K > 0:
        raise NotApplicable("canonical frame requires K > 0")
    return ctx.canon.residual, 0.0, ctx.canon.residual


def chk_normal_tensor(ctx):
    c = ctx.require_canonical()
    R = normal_curvature_tensor(c.h)
    target = np.zeros_like(R)
    target[0, 1], target[1, 0] = -ctx.S / 2, ctx.S / 2
    return float(R[0, 1]), -ctx.S / 2, float(np.abs(R - target).max())


def chk_b_squared(ctx):
    c = ctx.require_canonical()
    return c.b**2, ctx.S / 4, abs(c.b**2 - ctx.S / 4)


def chk_sbar(ctx):
    c = ctx.require_canonical()
    return c.S_bar, ctx.S / 2, max(abs(c.S_bar - ctx.S / 2), abs(c.S3 - ctx.S / 2))


def chk_simons_flat(ctx):
    ctx.require_flat()
    P, S = ctx.shape.P, ctx.S
    lhs, rhs = 0.5 * ctx.laplacian, P + (2 - S) * S
    return lhs, rhs, abs(lhs - rhs) / _simons_scale(P)


def chk_simons_general(ctx):
    if ctx.grid_branch == "mixed":
        raise NotApplicable("surface mixes flat and non-flat points")
    P, S = ctx.shape.P, ctx.S
    if ctx.flat:
        b, S_bar = 0.0, 0.0
    else:
        hs = ctx.star.h
        b, S_bar = float(hs[0, 0, 1]), float(np.sum(hs[1:] ** 2))
    lhs, rhs = 0.5 * ctx.laplacian, P + (2 - S) * S - 4 * b * b * S_bar
    return lhs, rhs, abs(lhs - rhs) / _simons_scale(P)


def chk_simons_canonical(ctx):
    ctx.require_canonical()
    P, S = ctx.shape.P, ctx.S
    lhs, rhs = 0.5 * ctx.laplacian, P - 0.5 * S * (3 * S - 4)
    return lhs, rhs, abs(lhs - rhs) / _simons_scale(P)


def _worst(pairs: dict):
    name = max(pairs, key=lambda k: abs(pairs[k][0] - pairs[k][1]))
    a, b = pairs[name]
    return a, b, abs(a - b)


def chk_gradient_relations(ctx):
    return _worst(ctx.require_relations().first)


def chk_covariant_S(ctx):
    sh = ctx.shape
    direct = sh.gradS
    via_h = 2 * np.einsum("aij,aijk->k", sh.h, sh.h1)
    r = float(np.abs(direct - via_h).max())
    k = int(np.argmax(np.abs(direct - via_h)))
    return float(direct[k]), float(via_h[k]), r


def chk_second_relations(ctx):
    return _worst(ctx.require_relations(second=True).second)


def chk_ricci_e3(ctx):
    rel = ctx.require_relations(second=True)
    L = rel.lam_kl
    S = ctx.S
    lhs = L[0, 0, 1] - L[0, 1, 0]
    rhs = 0.25 * math.sqrt(S) * (3 * S - 4)
    terms = [abs(lhs - rhs), abs(L[0, 0, 0] + L[0, 1, 1])]
    if len(L) > 2:
        terms.append(float(np.abs(L[2:, 0, 0] + L[2:, 1, 1]).max()))
        terms.append(float(np.abs(L[2:, 0, 1] - L[2:, 1, 0]).max()))
    return float(lhs), float(rhs), float(max(terms))


def _require_h2(ctx):
    if ctx.shape.h2 is None:
        raise UsageError("tier-2 checks need order-4 jets")
    return ctx.shape.h2


def chk_ricci_general(ctx):
    h2 = _require_h2(ctx)
    h = ctx.shape.h
    if h.size == 0:
        return 0.0, 0.0, 0.0
    Rt = tangent_curvature(h)
    Rn = normal_curvature_full(h)
    lhs = h2 - h2.transpose(0, 1, 2, 4, 3)
    rhs = (
        np.einsum("apj,pikl->aijkl", h, Rt)
        + np.einsum("aip,pjkl->aijkl", h, Rt)
        + np.einsum("bij,bakl->aijkl", h, Rn)
    )
    idx = np.unravel_index(int(np.argmax(np.abs(lhs - rhs))), lhs.shape)
    return float(lhs[idx]), float(rhs[idx]), float(np.abs(lhs - rhs).max())


def chk_laplacian_h(ctx):
    h2 = _require_h2(ctx)
    h = ctx.shape.h
    if h.size == 0:
        return 0.0, 0.0, 0.0
    Rt = tangent_curvature(h)
    Rn = normal_curvature_full(h)
    lhs = np.einsum("aijmm->aij", h2)
    rhs = (
        np.einsum("ammij->aij", h2)
        + np.einsum("api,pmjm->aij", h, Rt)
        + np.einsum("amp,pijm->aij", h, Rt)
        + np.einsum("dmi,dajm->aij", h, Rn)
    )
    idx = np.unravel_index(int(np.argmax(np.abs(lhs - rhs))), lhs.shape)
    return float(lhs[idx]), float(rhs[idx]), float(np.abs(lhs - rhs).max())


def chk_q_bound(ctx):
    ctx.require_canonical()
    Q = ctx.shape.Q
    if Q is None:
        raise UsageError("Q needs order-4 jets")
    S = ctx.S
    bound = 0.25 * S * (3 * S - 4) ** 2
    return Q, bound, max(0.0, bound - Q) / max(1.0, abs(bound))


def chk_chern(ctx):
    rel = ctx.require_relations()
    lk = rel.lam_k[2:]
    a = float(np.sum(lk[:, 0] * lk[:, 1]))
    b = float(np.sum(lk[:, 0] ** 2 - lk[:, 1] ** 2))
    return a, 0.0, max(abs(a), abs(b))


def chk_normal_tensor_derivative(ctx):
    c = ctx.require_canonical()
    rel = ctx.require_relations()
    R = c.rotation
    dR = np.einsum("ac,bd,cdk->abk", R, R, normal_tensor_derivative(ctx))
    b, lam = c.b, rel.lam_k
    Sk = ctx.shape.gradS
    target = np.zeros_like(dR)
    target[0, 1] = -0.5 * Sk
    target[1, 0] = 0.5 * Sk
    for beta in range(2, dR.shape[0]):
        target[0, beta] = -2 * b * lam[beta]
        target[beta, 0] = -target[0, beta]
        target[1, beta, 1] = -2 * b * lam[beta, 0]
        target[1, beta, 0] = 2 * b * lam[beta, 1]
        target[beta, 1] = -target[1, beta]
    idx = np.unravel_index(int(np.argmax(np.abs(dR - target))), dR.shape)
    return float(dR[idx]), float(target[idx]), float(np.abs(dR - target).max())


def chk_laplacian_routes(ctx):
    H = ctx.shape.hessS
    if H is None:
        raise UsageError("frame Hessian of S needs order-4 jets")
    a, b = float(np.trace(H)), ctx.laplacian
    return a, b, abs(a - b) / _simons_scale(ctx.shape.P)


@dataclass(frozen=True)
class CheckDef:
    name: str
    tier: int
    reference: str
    tolerance: float
    func: Callable


T = TOLERANCES
REGISTRY: tuple[CheckDef, ...] = (
    CheckDef("unit_sphere", 1, "immersion lies in the unit sphere", 1e-10, chk_unit_sphere),
    CheckDef("frame_orthonormality", 1, "adapted orthonormal frame", T["frame"], chk_frame),
    CheckDef("minimality", 1, "mean curvature vector vanishes", T["frame"], chk_minimality),
    CheckDef("gauss_equation", 1, "Gauss equation vs intrinsic curvature", T["second_derivative"], chk_gauss),
    CheckDef("curvature_window", 1, "2K = 2 - S (reduced R_ijkl)", T["second_derivative"], chk_window),
    CheckDef("codazzi", 1, "Codazzi symmetry h_ijk = h_ikj", T["first_derivative"], chk_codazzi),
    CheckDef("wintgen", 1, "K + K^N = 1 where K > 0", T["first_derivative"], chk_wintgen),
    CheckDef("star_form", 1, "normal rotation to the starred form", T["frame"], chk_star_form),
    CheckDef("canonical_form", 1, "canonical shape operators", CANONICAL_GATE, chk_canonical_form),
    CheckDef("normal_tensor_reduction", 1, "R_3412 = -S/2, other R_ab12 = 0", T["frame"], chk_normal_tensor),
    CheckDef("b_squared", 1, "b^2 = S/4", T["frame"], chk_b_squared),
    CheckDef("sbar", 1, "S_bar = S_3 = S/2", T["frame"], chk_sbar),
    CheckDef("simons_flat", 1, "1/2 Lap S = P + (2-S)S, flat normal bundle", T["higher_derivative"], chk_simons_flat),
    CheckDef("simons_general", 1, "1/2 Lap S = P + (2-S)S - 4b^2 S_bar", T["higher_derivative"], chk_simons_general),
    CheckDef("simons_canonical", 1, "1/2 Lap S = P - S(3S-4)/2", T["higher_derivative"], chk_simons_canonical),
    CheckDef("gradient_relations", 1, "lambda^3_k, lambda^4_k in terms of S_k", T["second_derivative"], chk_gradient_relations),
    CheckDef("covariant_S_derivative", 2, "S_k = 2 sum h h_k", T["first_derivative"], chk_covariant_S),
    CheckDef("second_derivative_relations", 2, "lambda^3_kl, lambda^4_kl in terms of S_kl, P", T["higher_derivative"], chk_second_relations),
    CheckDef("ricci_e3", 2, "lambda^3_12 - lambda^3_21 = sqrt(S)(3S-4)/4", T["higher_derivative"], chk_ricci_e3),
    CheckDef("ricci_general", 2, "Ricci formula for h_ijkl - h_ijlk", T["higher_derivative"], chk_ricci_general),
    CheckDef("laplacian_h", 2, "Laplacian of h via Ricci formula", T["higher_derivative"], chk_laplacian_h),
    CheckDef("q_lower_bound", 2, "Q >= S(3S-4)^2/4", T["higher_derivative"], chk_q_bound),
    CheckDef("chern_relations", 2, "sum_{g>=5} lambda^g_1 lambda^g_2 = 0 and the squared difference", T["second_derivative"], chk_chern),
    CheckDef("normal_tensor_derivative", 2, "R_ab12,k in the canonical frame", T["second_derivative"], chk_normal_tensor_derivative),
    CheckDef("laplacian_routes", 2, "chart Laplacian equals frame Hessian trace", T["higher_derivative"], chk_laplacian_routes),
)

CHECK_NAMES = tuple(c.name for c in REGISTRY)


def resolve_tolerances(overrides: Optional[dict]) -> dict[str, float]:
    """Per-check tolerance after applying overrides keyed by check name or ``all``."""
    overrides = dict(overrides or {})
    unknown = set(overrides) - set(CHECK_NAMES) - {"all", "canonical_gate"}
    if unknown:
        raise UsageError(f"unknown tolerance name(s): {sorted(unknown)}")
    base = overrides.get("all")
    return {c.name: float(overrides.get(c.name, base if base is not None else c.tolerance)) for c in REGISTRY}


def evaluate_check(cdef: CheckDef, ctx: PointContext, tol: float) -> IdentityCheck:
    try:
        lhs, rhs, resid = cdef.func(ctx)
    except NotApplicable as exc:
        return IdentityCheck(cdef.name, cdef.tier, math.nan, math.nan, math.nan, tol, True, ctx.point, "skipped", str(exc))
    except GaugeFailed as exc:
        return IdentityCheck(cdef.name, cdef.tier, math.nan, math.nan, math.nan, tol, False, ctx.point, "gauge_failed", str(exc))
    ok = bool(resid <= tol)
    return IdentityCheck(cdef.name, cdef.tier, float(lhs), float(rhs), float(resid), tol, ok, ctx.point, "pass" if ok else "fail")


def grid_branch(contexts) -> str:
    flags = {c.flat for c in contexts}
    if flags == {True}:
        return "flat"
    if flags == {False}:
        return "nowhere_flat"
    return "mixed"


def _summarize(cdef: CheckDef, results: list[IdentityCheck], tol: float) -> CheckSummary:
    evaluated = [r for r in results if r.status in ("pass", "fail")]
    failed = [r for r in results if r.status == "fail"]
    gauge = [r for r in results if r.status == "gauge_failed"]
    skipped = [r for r in results if r.status == "skipped"]
    first = next((r for r in results if r.status in ("fail", "gauge_failed")), None)
    if failed:
        status = "fail"
    elif gauge:
        status = "gauge_failed"
    elif evaluated:
        status = "pass"
    else:
        status = "skipped"
    return CheckSummary(
        name=cdef.name,
        tier=cdef.tier,
        reference=cdef.reference,
        tolerance=tol,
        status=status,
        n_evaluated=len(evaluated),
        n_failed=len(failed),
        n_skipped=len(skipped),
        n_gauge_failed=len(gauge),
        max_residual=max((r.residual for r in evaluated), default=None),
        first_failure=None if first is None else {
            "u": first.point[0], "v": first.point[1], "residual": first.residual,
            "lhs": first.lhs, "rhs": first.rhs, "status": first.status, "reason": first.reason,
        },
        skip_reason=skipped[0].reason if skipped and not evaluated else "",
    )


def collect_contexts(spec: ImmersionSpec, grid, jet_order: int, gate: float = CANONICAL_GATE) -> list[PointContext]:
    ctxs = [build_context(spec, (i, j), u, v, jet_order, gate) for i, j, u, v in grid]
    label = grid_branch(ctxs)
    for c in ctxs:
        c.grid_branch = label
    return ctxs


def _grid_stats(ctxs: list[PointContext]) -> dict:
    def stats(values):
        a = np.array(values, dtype=float)
        return {"mean": float(a.mean()), "min": float(a.min()), "max": float(a.max())}

    out = {
        "K": stats([c.K for c in ctxs]),
        "KN": stats([c.geom.curvature.KN for c in ctxs]),
        "S": stats([c.S for c in ctxs]),
        "laplacian_S": stats([c.laplacian for c in ctxs]),
    }
    if ctxs[0].shape.P is not None:
        out["P"] = stats([c.shape.P for c in ctxs])
    if ctxs[0].shape.Q is not None:
        out["Q"] = stats([c.shape.Q for c in ctxs])
    return out


def run_suite(
    spec: ImmersionSpec,
    nu: int = 10,
    nv: int = 10,
    tier: int = 1,
    jet_order: Optional[int] = None,
    tolerances: Optional[dict] = None,
    bounds=None,
) -> IdentityReport:
    """Evaluate every registered check of tier ``<= tier`` on an ``nu x nv`` grid."""
    if tier not in (1, 2):
        raise UsageError(f"tier must be 1 or 2, got {tier!r}")
    if jet_order is None:
        jet_order = 3 if tier == 1 else 4
    if jet_order not in (3, 4):
        raise UsageError("jet order must be 3 or 4")
    if tier == 2 and jet_order != 4:
        raise UsageError("tier 2 requires jet order 4")
    tols = resolve_tolerances(tolerances)
    gate = float((tolerances or {}).get("canonical_gate", CANONICAL_GATE))
    grid = sample_grid(spec, nu, nv, bounds)
    ctxs = collect_contexts(spec, grid, jet_order, gate)
    summaries = []
    for cdef in REGISTRY:
        if cdef.tier > tier:
            continue
        results = [evaluate_check(cdef, c, tols[cdef.name]) for c in ctxs]
        summaries.append(_summarize(cdef, results, tols[cdef.name]))
    u_lo, u_hi, v_lo, v_hi = bounds if bounds is not None else spec.domain
    return IdentityReport(
        surface=spec.name,
        grid={"nu": nu, "nv": nv, "bounds": [u_lo, u_hi, v_lo, v_hi]},
        tier=tier,
        jet_order=jet_order,
        branch=ctxs[0].grid_branch,
        checks=tuple(summaries),
        summary=_grid_stats(ctxs),
    )


# -- closed-form constants -------------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantCheck:
    quantity: str
    expected: float
    mean: float
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "expected": self.expected,
            "mean": self.mean,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def check_constants(spec: ImmersionSpec, nu: int = 10, nv: int = 10, tol: float = 1e-8, jet_order: int = 3) -> list[ConstantCheck]:
    """Compare grid values of K, S, K^N with the closed forms for the surface.

    ``K(s) = 2/(s(s+1))`` and ``S(s) = 2(s-1)(s+2)/(s(s+1))`` when a degree is
    known, otherwise the surface's stored constants; ``K^N`` is compared with
    ``1 - K`` when ``K > 0`` on a non-flat surface and with 0 on flat ones.
    """
    if spec.degree_s is not None:
        s = spec.degree_s
        K_exp = 2 / (s * (s + 1))
        S_exp = 2 * (s - 1) * (s + 2) / (s * (s + 1))
    elif spec.expected is not None:
        K_exp, S_exp = float(spec.expected.K), float(spec.expected.S)
    else:
        raise UsageError(f"{spec.name} has no closed-form constants")
    pts = [analyze_point(spec, u, v, jet_order) for _, _, u, v in sample_grid(spec, nu, nv)]
    flat = all(is_flat_point(p.shape.h, p.shape.S) for p in pts)
    KN_exp = 0.0 if flat or K_exp <= 0 else 1 - K_exp
    out = []
    for name, vals, exp in (
        ("K", [p.curvature.K for p in pts], K_exp),
        ("S", [p.curvature.S for p in pts], S_exp),
        ("KN", [p.curvature.KN for p in pts], KN_exp),
    ):
        a = np.array(vals)
        out.append(ConstantCheck(name, float(exp), float(a.mean()), float(np.abs(a - exp).max()), tol))
    return out


# -- gauge robustness ---------------------------------------------------------------------------------------


def random_rotation(rng: np.random.Generator, m: int) -> np.ndarray:
    """Haar-distributed orthogonal ``m x m`` matrix."""
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    return q * np.sign(np.diag(r))


@dataclass(frozen=True)
class GaugeReport:
    seed: int
    rotations_per_point: int
    n_tested: int
    max_residual: float
    max_b_squared_error: float
    max_sbar_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return max(self.max_residual, self.max_b_squared_error, self.max_sbar_error) <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "rotations_per_point": self.rotations_per_point,
            "n_tested": self.n_tested,
            "max_residual": self.max_residual,
            "max_b_squared_error": self.max_b_squared_error,
            "max_sbar_error": self.max_sbar_error,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def gauge_robustness(
    spec: ImmersionSpec,
    nu: int = 10,
    nv: int = 10,
    rotations: int = 20,
    seed: int = 0,
    tol: float = CANONICAL_GATE,
    jet_order: int = 3,
) -> GaugeReport:
    """Canonicalize randomly rotated normal frames at every non-flat, K > 0 grid point.

    The canonical data must not depend on the starting frame, so each
    rotated copy must reach residual, ``|b^2 - S/4|`` and ``|S_bar - S/2|``
    within ``tol``.
    """
    rng = np.random.default_rng(seed)
    worst = [0.0, 0.0, 0.0]
    n = 0
    for _, _, u, v in sample_grid(spec, nu, nv):
        g = analyze_point(spec, u, v, jet_order)
        h, S = g.shape.h, g.shape.S
        if is_flat_point(h, S) or not g.curvature.K > 0:
            continue
        for _ in range(rotations):
            c = canonicalize(rotate_normal(random_rotation(rng, h.shape[0]), h))
            worst[0] = max(worst[0], c.residual)
            worst[1] = max(worst[1], abs(c.b**2 - S / 4))
            worst[2] = max(worst[2], abs(c.S_bar - S / 2))
            n += 1
    return GaugeReport(seed, rotations, n, worst[0], worst[1], worst[2], tol)


__all__ = [
    "GaugeReport",
    "gauge_robustness",
    "CHECK_NAMES",
    "REGISTRY",
    "CheckSummary",
    "ConstantCheck",
    "IdentityCheck",
    "IdentityReport",
    "calabi_constants",
    "check_constants",
    "run_suite",
]
