import numpy as np
import pytest

from spheremin import jets as J
from spheremin.catalog import ImmersionSpec
from spheremin.jets import Jet2

U0 = 0.2


def _mixed_chart(u, v):
    one = Jet2.constant(1.0, u.order)
    d = u - U0
    w = J.stack([one, u, v, u * u - v * v * 0.5 + u * v, d * d * d * 4.0])
    return w / J.norm(w)


# the last component vanishes to third order on u = U0, so those points are flat
MIXED = ImmersionSpec(
    name="mixed_patch", ambient_n=4, chart=_mixed_chart,
    domain=(-0.6, 0.6, -0.6, 0.6), periodic_v=False,
)
MIXED_BOUNDS = (-0.6, 0.6, -0.6, 0.6)  # a 7-point axis hits u = 0.2 exactly


@pytest.fixture
def mixed_spec():
    return MIXED


_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def acceptance_record():
    def record(n: int, ok: bool, detail: str) -> None:
        _ACCEPTANCE[n] = (ok, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
