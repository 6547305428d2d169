import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from spheremin import jets as J
from spheremin.errors import ConfigurationError, SingularityError, UsageError
from spheremin.jets import Jet2

U, V = sp.symbols("u v")
U0, V0 = 0.7, -0.4


def sym_partials(expr, order, u0=U0, v0=V0):
    out = {}
    for i, j in J.multi_indices(order):
        d = expr
        if i:
            d = sp.diff(d, U, i)
        if j:
            d = sp.diff(d, V, j)
        out[(i, j)] = float(d.subs({U: u0, V: v0}))
    return out


def assert_jet_matches(jet, expected, rtol=1e-11):
    for ij, want in expected.items():
        got = jet.coeff(*ij)
        assert got == pytest.approx(want, rel=rtol, abs=rtol), ij


CASES = [
    (lambda u, v: u * v + u * u * 3.0, U * V + 3 * U**2),
    (lambda u, v: J.sin(u) * J.cos(v), sp.sin(U) * sp.cos(V)),
    (lambda u, v: (u + 2.0) / (v * v + 1.5), (U + 2) / (V**2 + sp.Rational(3, 2))),
    (lambda u, v: J.sqrt(u * u + v * v + 1.0), sp.sqrt(U**2 + V**2 + 1)),
    (lambda u, v: J.exp(u - v * 2.0) * J.sin(u * v), sp.exp(U - 2 * V) * sp.sin(U * V)),
    (lambda u, v: J.powi(u + v * 0.5 + 1.0, -3), (U + V / 2 + 1) ** -3),
    (lambda u, v: J.cos(J.sin(u) + v), sp.cos(sp.sin(U) + V)),
    (lambda u, v: 1.0 / (u + 3.0) - v**4, 1 / (U + 3) - V**4),
]


@pytest.mark.parametrize("order", [1, 2, 3, 4])
@pytest.mark.parametrize("case", range(len(CASES)))
def test_partials_match_symbolic_derivatives(case, order):
    f, expr = CASES[case]
    u, v = J.seed_pair(U0, V0, order)
    assert_jet_matches(f(u, v), sym_partials(expr, order))


def test_storage_order_and_sizes():
    assert J.multi_indices(2) == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    assert [J.n_coeffs(k) for k in range(5)] == [1, 3, 6, 10, 15]


def test_seed_and_constant():
    u = J.seed_variable("u", 1.25, 3)
    assert u.value == 1.25 and u.coeff(1, 0) == 1.0 and u.coeff(0, 1) == 0.0
    c = Jet2.constant(2.0, 2)
    assert c.as_dict() == {(0, 0): 2.0, (1, 0): 0.0, (0, 1): 0.0, (2, 0): 0.0, (1, 1): 0.0, (0, 2): 0.0}
    with pytest.raises(UsageError):
        J.seed_variable("w", 0.0, 2)


def test_from_dict_round_trip():
    d = {(0, 0): 1.0, (2, 1): 5.0, (0, 3): -2.0}
    j = Jet2.from_dict(3, d)
    assert j.coeff(2, 1) == 5.0 and j.coeff(0, 3) == -2.0
    with pytest.raises(UsageError):
        Jet2.from_dict(2, {(2, 1): 1.0})


def test_derivative_shift_and_truncate():
    u, v = J.seed_pair(0.3, 0.9, 4)
    f = J.sin(u) * v * v
    g = f.du()
    assert g.order == 3
    assert_jet_matches(g, sym_partials(sp.diff(sp.sin(U) * V**2, U), 3, 0.3, 0.9))
    assert f.truncate(2).order == 2
    with pytest.raises(UsageError):
        f.truncate(2).truncate(3)
    with pytest.raises(UsageError):
        Jet2.constant(1.0, 0).du()


def test_errors():
    a = Jet2.constant(1.0, 2)
    b = Jet2.constant(1.0, 3)
    with pytest.raises(UsageError):
        a + b
    with pytest.raises(ConfigurationError):
        Jet2.constant(1.0, 5)
    with pytest.raises(SingularityError):
        J.sqrt(Jet2.constant(-1.0, 2))
    with pytest.raises(SingularityError):
        a / Jet2.constant(0.0, 2)
    with pytest.raises(SingularityError):
        a / 0.0
    with pytest.raises(SingularityError):
        Jet2(1, [float("nan"), 0.0, 0.0])
    with pytest.raises(UsageError):
        J.apply_unary("tan", a)
    with pytest.raises(AttributeError):
        a.order = 3
    with pytest.raises(ValueError):
        a.coeffs[0] = 2.0


def test_apply_unary_dispatch():
    u, _ = J.seed_pair(0.4, 0.0, 3)
    assert np.allclose(J.apply_unary("sin", u).coeffs, J.sin(u).coeffs)
    assert np.allclose(J.apply_unary("powi", u, 3).coeffs, (u * u * u).coeffs)


def test_batched_arithmetic_and_einsum():
    u, v = J.seed_pair(0.2, 0.5, 3)
    vec = J.stack([J.sin(u), J.cos(v), u * v])
    mat = J.stack([vec, vec * 2.0])
    g = J.einsum("ic,jc->ij", mat, mat)
    for i in range(2):
        for k in range(2):
            direct = J.dot(mat[i], mat[k])
            assert np.allclose(g[i, k].coeffs, direct.coeffs, atol=1e-14)
    assert np.allclose(J.norm(vec).coeffs, J.sqrt(J.dot(vec, vec)).coeffs)
    assert mat.shape == (2, 3) and len(mat) == 2


def test_ndarray_on_left_defers_to_jet():
    u, v = J.seed_pair(0.2, 0.5, 2)
    vec = J.stack([u, v])
    out = np.array([2.0, 3.0]) * vec
    assert isinstance(out, Jet2)
    assert np.allclose(out.coeffs, (vec * np.array([2.0, 3.0])).coeffs)


def test_linear_map_matches_manual_combination():
    u, v = J.seed_pair(0.2, 0.5, 2)
    vec = J.stack([u, v, u * v])
    M = np.arange(9.0).reshape(3, 3)
    out = J.linear_map(M, vec)
    manual = vec[0] * M[1, 0] + vec[1] * M[1, 1] + vec[2] * M[1, 2]
    assert np.allclose(out[1].coeffs, manual.coeffs)


coeff_arrays = st.lists(st.floats(-3, 3, allow_nan=False), min_size=15, max_size=15).map(np.array)


def jet_of(c):
    return Jet2(4, c)


@settings(max_examples=60, deadline=None)
@given(coeff_arrays, coeff_arrays, coeff_arrays)
def test_ring_laws(a, b, c):
    A, B, C = jet_of(a), jet_of(b), jet_of(c)
    scale = 1 + np.abs(a).max() * np.abs(b).max() * np.abs(c).max()
    tol = 1e-10 * scale * 1e3
    assert np.allclose((A * B).coeffs, (B * A).coeffs, atol=tol)
    assert np.allclose(((A * B) * C).coeffs, (A * (B * C)).coeffs, atol=tol)
    assert np.allclose((A * (B + C)).coeffs, (A * B + A * C).coeffs, atol=tol)


@settings(max_examples=60, deadline=None)
@given(coeff_arrays, coeff_arrays)
def test_leibniz_rule(a, b):
    A, B = jet_of(a), jet_of(b)
    lhs = (A * B).du()
    rhs = A.du() * B.truncate(3) + A.truncate(3) * B.du()
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(coeff_arrays, st.floats(0.5, 3.0))
def test_reciprocal_inverts(a, a0):
    a = a.copy()
    a[0] = a0
    A = jet_of(a)
    one = A * J.reciprocal(A)
    expect = np.zeros(15)
    expect[0] = 1.0
    assert np.allclose(one.coeffs, expect, atol=1e-7 * (1 + np.abs(a).max()) ** 5)


@settings(max_examples=40, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_pythagorean_identity_as_jet(u0, v0):
    u, v = J.seed_pair(u0, v0, 4)
    x = u * v + u
    one = J.sin(x) ** 2 + J.cos(x) ** 2
    expect = np.zeros(15)
    expect[0] = 1.0
    assert np.allclose(one.coeffs, expect, atol=1e-10 * (1 + abs(u0) + abs(v0)) ** 4)


def test_compose_matches_closed_form_exponential_chain():
    u, v = J.seed_pair(0.1, 0.2, 4)
    got = J.exp(u * 2.0 + v)
    assert_jet_matches(got, sym_partials(sp.exp(2 * U + V), 4, 0.1, 0.2))
    assert math.isclose(got.coeff(4, 0), 16 * math.exp(0.4))
