"""Minimal surfaces in unit spheres: jets, moving frames, identity checks and pinching verdicts."""
from ._version import __version__
from .catalog import (
    CLIFFORD_TORUS,
    EQUATOR,
    GENERALIZED_VERONESE,
    VERONESE,
    ImmersionSpec,
    build_calabi,
    catalog_list,
    evaluate,
    get_spec,
    sample_grid,
)
from .engine import analyze_point, build_frames, laplacian_S
from .errors import ConfigurationError, DomainError, SingularityError, SphereminError, UsageError
from .identities import check_constants, gauge_robustness, run_suite
from .jets import Jet2
from .normalize import canonicalize, normalize_star, normalize_reduced
from .pinching import classify, simon_window, summarize

__all__ = [
    "CLIFFORD_TORUS",
    "ConfigurationError",
    "DomainError",
    "EQUATOR",
    "GENERALIZED_VERONESE",
    "ImmersionSpec",
    "Jet2",
    "SingularityError",
    "SphereminError",
    "UsageError",
    "VERONESE",
    "__version__",
    "analyze_point",
    "build_calabi",
    "build_frames",
    "canonicalize",
    "catalog_list",
    "check_constants",
    "classify",
    "evaluate",
    "gauge_robustness",
    "get_spec",
    "laplacian_S",
    "normalize_star",
    "normalize_reduced",
    "run_suite",
    "sample_grid",
    "simon_window",
    "summarize",
]
