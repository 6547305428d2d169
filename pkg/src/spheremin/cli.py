"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 domain or usage error,
3 I/O error.
"""
from __future__ import annotations

import argparse
import re
import sys
from typing import Optional, Sequence

import numpy as np

from . import report as R
from ._version import __version__
from .catalog import ImmersionSpec, build_calabi, catalog_list, get_spec, sample_grid
from .engine import analyze_point
from .errors import SphereminError, UsageError
from .identities import CANONICAL_GATE, CHECK_NAMES, check_constants, gauge_robustness, run_suite
from .normalize import canonicalize
from .pinching import DEFAULT_TOL, classify, summarize

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

GAUGE_ROTATIONS = 3

_SUPERSCRIPT = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")


def _sphere_label(n: int) -> str:
    return "S" + str(n).translate(_SUPERSCRIPT)


def _frac(x) -> str:
    return R.plain(x) if x is not None else "-"


# -- surface resolution ---------------------------------------------------------------------------


def resolve_surface(name: Optional[str], s: Optional[int]) -> ImmersionSpec:
    if name in (None, "calabi"):
        if s is None:
            raise UsageError("give a surface name or --s for the degree-s immersion")
        return build_calabi(s)
    if s is not None:
        spec = get_spec(name)
        if spec.degree_s != s:
            raise UsageError(f"--s {s} conflicts with surface {name!r}")
        return spec
    return get_spec(name)


# -- commands ---------------------------------------------------------------------------------------


def catalog_rows() -> list[dict]:
    rows = []
    for spec in catalog_list():
        e = spec.expected
        rows.append({
            "name": spec.name,
            "ambient_n": spec.ambient_n,
            "s": spec.degree_s,
            "K": e.K if e else None,
            "S": e.S if e else None,
            "KN": e.KN if e else None,
            "description": spec.description,
        })
    return rows


def cmd_list(cfg: R.RunConfig) -> tuple[int, str]:
    rows = catalog_rows()
    if cfg.fmt == "csv":
        return EXIT_OK, R.dumps_csv(["name", "ambient_n", "s", "K", "S", "KN"],
                                    [[r["name"], r["ambient_n"], r["s"], _frac(r["K"]), _frac(r["S"]), _frac(r["KN"])] for r in rows])
    if cfg.out is not None:
        return EXIT_OK, R.dumps_json(R.envelope("list", cfg, {"surfaces": rows, "parametric": "calabi_<s>, 1 <= s <= 6"}, "ok"))
    lines = []
    for r in rows:
        deg = f"s={r['s']}" if r["s"] is not None else "-"
        lines.append(f"{r['name']}, {_sphere_label(r['ambient_n'])}, {deg}, K={_frac(r['K'])}, S={_frac(r['S'])}, KN={_frac(r['KN'])}")
    lines.append("calabi_<s> (1 <= s <= 6): degree-s standard immersion in S^{2s}, K=2/(s(s+1))")
    return EXIT_OK, "\n".join(lines) + "\n"


def point_record(spec: ImmersionSpec, u: float, v: float, order: int) -> dict:
    g = analyze_point(spec, u, v, order)
    sh, cv = g.shape, g.curvature
    canon = canonicalize(sh.h)
    return {
        "surface": spec.name,
        "u": u,
        "v": v,
        "K": cv.K,
        "K_intrinsic": g.K_intrinsic,
        "KN": cv.KN,
        "S": cv.S,
        "P": sh.P,
        "mean_curvature_norm": float(np.linalg.norm(sh.mean_vector)),
        "normal_tensor": cv.normal_tensor,
        "canonical": canon.to_dict(),
    }


def cmd_eval(cfg: R.RunConfig, u: float, v: float) -> tuple[int, str]:
    spec = resolve_surface(cfg.surface, cfg.s)
    rec = point_record(spec, u, v, cfg.jet_order)
    if cfg.fmt == "csv":
        cols = ["surface", "u", "v", "K", "K_intrinsic", "KN", "S", "P", "mean_curvature_norm"]
        return EXIT_OK, R.dumps_csv(cols, [[rec[c] for c in cols]])
    return EXIT_OK, R.dumps_json(R.envelope("eval", cfg, rec, "ok"))


def verify_document(cfg: R.RunConfig) -> tuple[bool, dict]:
    spec = resolve_surface(cfg.surface, cfg.s)
    check_tols = {k: v for k, v in cfg.tolerances.items() if k in CHECK_NAMES or k in ("all", "canonical_gate")}
    rep = run_suite(spec, cfg.nu, cfg.nv, tier=cfg.tier, jet_order=cfg.jet_order, tolerances=check_tols, bounds=cfg.bounds)
    result = rep.to_dict()
    passed = rep.passed
    if cfg.bounds is None and (spec.degree_s is not None or spec.expected is not None):
        consts = check_constants(spec, cfg.nu, cfg.nv, tol=cfg.tol("constants", R.DEFAULT_CONSTANT_TOL))
        result["constants"] = [c.to_dict() for c in consts]
        passed = passed and all(c.passed for c in consts)
    if rep.branch == "nowhere_flat" and rep.summary["K"]["min"] > 0:
        gauge = gauge_robustness(spec, cfg.nu, cfg.nv, rotations=GAUGE_ROTATIONS, seed=cfg.seed,
                                 tol=cfg.tol("gauge", CANONICAL_GATE), jet_order=cfg.jet_order)
        result["gauge"] = gauge.to_dict()
        passed = passed and gauge.passed
    result["means"] = {k: v["mean"] for k, v in rep.summary.items()}
    return passed, result


def cmd_verify(cfg: R.RunConfig) -> tuple[int, str]:
    passed, result = verify_document(cfg)
    code = EXIT_OK if passed else EXIT_FAIL
    status = "pass" if passed else "fail"
    if cfg.fmt == "csv":
        cols = ["name", "tier", "status", "max_residual", "tolerance", "n_evaluated", "n_failed", "n_skipped", "n_gauge_failed"]
        return code, R.dumps_csv(cols, [[c[k] for k in cols] for c in result["checks"]])
    return code, R.dumps_json(R.envelope("verify", cfg, result, status))


def cmd_classify(cfg: R.RunConfig) -> tuple[int, str]:
    spec = resolve_surface(cfg.surface, cfg.s)
    sm = summarize(spec, cfg.nu, cfg.nv, jet_order=cfg.jet_order, bounds=cfg.bounds)
    c = classify(sm, tol=cfg.tol("classify", DEFAULT_TOL))
    if cfg.fmt == "csv":
        d = c.to_dict()
        return EXIT_OK, R.dumps_csv(["surface", "verdict", "theorem_used", "margin"],
                                    [[spec.name, d["verdict"], d["theorem_used"], d["margin"]]])
    return EXIT_OK, R.dumps_json(R.envelope("classify", cfg, {"summary": sm.to_dict(), "classification": c.to_dict()}, "ok"))


def sweep_rows(s_values: Sequence[int], nu: int, nv: int, order: int) -> list[list]:
    rows = []
    for s in s_values:
        spec = build_calabi(s)
        K, S, KN, P, wres = [], [], [], [], []
        for _, _, u, v in sample_grid(spec, nu, nv):
            g = analyze_point(spec, u, v, order)
            K.append(g.curvature.K)
            S.append(g.curvature.S)
            KN.append(g.curvature.KN)
            P.append(g.shape.P)
            if g.curvature.K > 0:
                wres.append(abs(g.curvature.K + g.curvature.KN - 1.0))
        rows.append([s, float(np.mean(K)), float(np.mean(S)), float(np.mean(KN)), float(np.mean(P)),
                     float(max(wres)) if wres else None])
    return rows


def parse_s_range(text: str) -> list[int]:
    m = re.fullmatch(r"\s*(\d+)\s*(?:(?:\.\.|-|:)\s*(\d+))?\s*", text)
    if not m:
        raise UsageError(f"s range must look like A..B, got {text!r}")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) else lo
    if not 1 <= lo <= hi <= 6:
        raise UsageError(f"s range must satisfy 1 <= A <= B <= 6, got {text!r}")
    return list(range(lo, hi + 1))


def cmd_sweep(cfg: R.RunConfig, s_range: str) -> tuple[int, str]:
    s_values = parse_s_range(s_range)
    rows = sweep_rows(s_values, cfg.nu, cfg.nv, cfg.jet_order)
    if cfg.fmt == "csv":
        return EXIT_OK, R.dumps_csv(R.SWEEP_COLUMNS, rows)
    recs = [dict(zip(R.SWEEP_COLUMNS, r)) for r in rows]
    return EXIT_OK, R.dumps_json(R.envelope("sweep", cfg, {"s_range": s_values, "columns": list(R.SWEEP_COLUMNS), "rows": recs}, "ok"))


# -- argument parsing ---------------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, surface: bool = True) -> None:
    if surface:
        p.add_argument("--surface", help="catalog name, calabi_<s>, or 'calabi' with --s")
        p.add_argument("--s", type=int, help="degree of the standard immersion")
    p.add_argument("--grid", default="10x10", help="sample grid NUxNV (default 10x10)")
    p.add_argument("--jet-order", type=int, choices=(3, 4), help="jet order (default 3, or 4 for tier 2)")
    p.add_argument("--tier", type=int, choices=(1, 2), default=1)
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                   help="tolerance override by check name or 'all' (repeatable)")
    p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--format", dest="fmt", choices=("json", "csv"), help="report format")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized gauge rotations")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spheremin", description="Curvature identities and pinching verdicts for minimal surfaces in spheres.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command")

    p = sub.add_parser("list", help="show the surface catalog")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--format", dest="fmt", choices=("json", "csv"))

    p = sub.add_parser("eval", help="curvatures and canonical frame at one chart point")
    p.add_argument("args", nargs="+", metavar="[SURFACE] U V")
    _common(p)

    for name, text in (("verify", "run the identity suite"), ("classify", "predict the surface class")):
        p = sub.add_parser(name, help=text)
        p.add_argument("name", nargs="?", metavar="SURFACE")
        _common(p)

    p = sub.add_parser("sweep", help="constants of the standard immersions over a degree range")
    p.add_argument("s_range", nargs="?", default="1..6", metavar="A..B")
    _common(p, surface=False)
    return ap


def _config(ns: argparse.Namespace, command: str) -> R.RunConfig:
    tols = dict(R.parse_tolerance(t) for t in getattr(ns, "tol", []))
    nu, nv = R.parse_grid(getattr(ns, "grid", "10x10"))
    fmt = ns.fmt or ("csv" if command == "sweep" else "json")
    return R.RunConfig(
        command=command,
        surface=getattr(ns, "surface", None),
        s=getattr(ns, "s", None),
        nu=nu,
        nv=nv,
        jet_order=getattr(ns, "jet_order", None),
        tier=getattr(ns, "tier", 1),
        tolerances=tols,
        out=ns.out,
        fmt=fmt,
        seed=getattr(ns, "seed", 0),
    ).validate()


def _pick_surface(cfg: R.RunConfig, positional: Optional[str]) -> None:
    if positional is not None:
        if cfg.surface is not None and cfg.surface != positional:
            raise UsageError(f"surface given twice: {positional!r} and --surface {cfg.surface!r}")
        cfg.surface = positional


def _float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{what} must be a number, got {text!r}") from None


def run(argv: Optional[Sequence[str]] = None) -> tuple[int, str, Optional[str]]:
    """Execute a command; returns (exit code, text, output path)."""
    ns = build_parser().parse_args(argv)
    command = ns.command or "list"
    if ns.command is None:
        ns = build_parser().parse_args(["list"])
    cfg = _config(ns, command)
    if command == "list":
        code, text = cmd_list(cfg)
    elif command == "eval":
        args = list(ns.args)
        if len(args) == 3:
            _pick_surface(cfg, args.pop(0))
        if len(args) != 2:
            raise UsageError("eval needs the chart point: [SURFACE] U V")
        code, text = cmd_eval(cfg, _float(args[0], "u"), _float(args[1], "v"))
    elif command == "verify":
        _pick_surface(cfg, ns.name)
        code, text = cmd_verify(cfg)
    elif command == "classify":
        _pick_surface(cfg, ns.name)
        code, text = cmd_classify(cfg)
    else:
        code, text = cmd_sweep(cfg, ns.s_range)
    return code, text, cfg.out


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        code, text, out = run(argv)
    except SphereminError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if out is None:
        sys.stdout.write(text)
        return code
    try:
        R.write_text(out, text)
    except OSError as exc:
        print(f"error: cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {out} (exit {code})")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
