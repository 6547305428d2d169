"""Run configuration and deterministic JSON / CSV serialization."""
from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Any, Optional, Sequence

import numpy as np

from ._version import __version__
from .engine import TOLERANCES
from .errors import UsageError
from .identities import CANONICAL_GATE, CHECK_NAMES
from .pinching import DEFAULT_TOL

SCHEMA_VERSION = "1.0"
TOOL_NAME = "spheremin"

# extra tolerance names accepted by --tol besides per-check names
EXTRA_TOL_NAMES = ("all", "canonical_gate", "constants", "classify", "gauge")
DEFAULT_CONSTANT_TOL = 1e-8

SWEEP_COLUMNS = ("s", "K", "S", "KN", "P", "wintgen_residual")


@dataclass
class RunConfig:
    command: str
    surface: Optional[str] = None
    s: Optional[int] = None
    nu: int = 10
    nv: int = 10
    bounds: Optional[tuple[float, float, float, float]] = None
    jet_order: Optional[int] = None
    tier: int = 1
    tolerances: dict = field(default_factory=dict)
    out: Optional[str] = None
    fmt: str = "json"
    seed: int = 0

    def validate(self) -> "RunConfig":
        if self.nu < 2 or self.nv < 2:
            raise UsageError("grid needs nu, nv >= 2")
        if self.tier not in (1, 2):
            raise UsageError(f"tier must be 1 or 2, got {self.tier}")
        if self.jet_order is None:
            self.jet_order = 4 if self.tier == 2 else 3
        if self.jet_order not in (3, 4):
            raise UsageError(f"jet order must be 3 or 4, got {self.jet_order}")
        if self.tier == 2 and self.jet_order != 4:
            raise UsageError("tier 2 requires --jet-order 4")
        if self.fmt not in ("json", "csv"):
            raise UsageError(f"format must be json or csv, got {self.fmt!r}")
        known = set(CHECK_NAMES) | set(EXTRA_TOL_NAMES)
        for k, v in self.tolerances.items():
            if k not in known:
                raise UsageError(f"unknown tolerance name {k!r}")
            if not (isinstance(v, float) and math.isfinite(v) and v >= 0):
                raise UsageError(f"tolerance {k} must be a finite nonnegative number")
        return self

    def tol(self, name: str, default: float) -> float:
        if name in self.tolerances:
            return self.tolerances[name]
        return self.tolerances.get("all", default)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tolerances"] = dict(sorted(self.tolerances.items()))
        d["bounds"] = list(self.bounds) if self.bounds is not None else None
        d.pop("out")  # output location is not part of the computation
        return d


def parse_grid(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
    if not m:
        raise UsageError(f"grid must look like NUxNV, got {text!r}")
    nu, nv = int(m.group(1)), int(m.group(2))
    if nu < 2 or nv < 2:
        raise UsageError("grid needs nu, nv >= 2")
    return nu, nv


def parse_tolerance(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise UsageError(f"tolerance must look like NAME=VALUE, got {text!r}")
    try:
        val = float(value)
    except ValueError:
        raise UsageError(f"tolerance value for {name!r} is not a number: {value!r}") from None
    if not math.isfinite(val) or val < 0:
        raise UsageError(f"tolerance {name} must be finite and nonnegative")
    return name.strip(), val


def tolerance_ladder() -> dict:
    return {
        **TOLERANCES,
        "canonical_gate": CANONICAL_GATE,
        "constants": DEFAULT_CONSTANT_TOL,
        "classify": DEFAULT_TOL,
    }


# -- serialization ---------------------------------------------------------------------------------


def plain(obj: Any) -> Any:
    """Recursively convert to JSON-native values; non-finite floats become ``None``."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}" if obj.denominator != 1 else str(obj.numerator)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def envelope(command: str, config: RunConfig, result: dict, status: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": TOOL_NAME, "version": __version__},
        "command": command,
        "config": config.to_dict(),
        "tolerance_ladder": tolerance_ladder(),
        "status": status,
        "result": result,
    }


def dumps_json(doc: dict) -> str:
    # repr-based floats are the shortest strings that round-trip exactly
    return json.dumps(plain(doc), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def dumps_csv(columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for v in plain(list(row))])
    return buf.getvalue()


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def schema() -> dict:
    text = resources.files("spheremin").joinpath("schema/report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)
