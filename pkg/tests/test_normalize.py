import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spheremin.catalog import GENERALIZED_VERONESE, VERONESE, build_calabi
from spheremin.engine import analyze_point
from spheremin.errors import SingularityError, UsageError
from spheremin.normalize import (
    canonical_derivatives,
    canonicalize,
    complete_rotation,
    diagonalize_flat,
    flatness_threshold,
    is_flat_point,
    normalize_star,
    normalize_reduced,
    rotate_normal,
    rotate_tangent,
    with_canonical,
)


def rand_orth(rng, m):
    q, r = np.linalg.qr(rng.standard_normal((m, m)))
    return q * np.sign(np.diag(r))


def canonical_stack(b, m):
    h = np.zeros((m, 2, 2))
    h[0] = [[0, b], [b, 0]]
    h[1] = [[b, 0], [0, -b]]
    return h


def test_complete_rotation_is_orthogonal_with_given_row():
    rng = np.random.default_rng(0)
    for m in range(1, 7):
        x = rng.standard_normal(m)
        x /= np.linalg.norm(x)
        R = complete_rotation(x)
        assert np.allclose(R @ R.T, np.eye(m), atol=1e-13)
        assert np.allclose(R[0], x)
    # basis input: remaining rows are the other basis vectors in index order
    assert np.allclose(complete_rotation(np.array([0.0, 1.0, 0.0])), [[0, 1, 0], [1, 0, 0], [0, 0, 1]])


def test_star_form_zeroes_other_off_diagonals():
    h = analyze_point(GENERALIZED_VERONESE, 1.1, 0.7, 2).shape.h
    st_ = normalize_star(h)
    assert not st_.flat
    assert st_.h[0, 0, 1] > 0
    assert np.abs(st_.h[1:, 0, 1]).max() <= 1e-14
    assert st_.h[0, 0, 1] == pytest.approx(np.linalg.norm(h[:, 0, 1]))


def test_star_form_flags_small_off_diagonal_vectors():
    h = np.zeros((2, 2, 2))
    h[0] = np.diag([1.0, -1.0])
    st_ = normalize_star(h)
    assert st_.flat and np.array_equal(st_.rotation, np.eye(2))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 2.0), st.integers(2, 6), st.floats(-math.pi, math.pi), st.integers(0, 10_000))
def test_canonical_form_recovered_from_any_frame(b, m, theta, seed):
    rng = np.random.default_rng(seed)
    h = rotate_normal(rand_orth(rng, m), rotate_tangent(theta, canonical_stack(b, m)))
    c = canonicalize(h)
    S = 4 * b * b
    assert c.branch == "nowhere_flat"
    assert c.residual <= 1e-12 * max(1.0, S)
    assert c.b == pytest.approx(b, rel=1e-12)
    assert c.S_bar == pytest.approx(S / 2, rel=1e-12) and c.S3 == pytest.approx(S / 2, rel=1e-12)
    # the composed rotation really maps the input to the reported operators
    assert np.allclose(rotate_normal(c.rotation, h), c.h, atol=1e-13)


def test_non_canonical_operators_have_large_residual():
    rng = np.random.default_rng(4)
    h = rng.standard_normal((3, 2, 2))
    h = h + h.transpose(0, 2, 1)
    h[:, 1, 1] = -h[:, 0, 0]
    c = canonicalize(h)
    assert c.branch == "nowhere_flat" and c.residual > 1e-3


def test_reduced_normalization_flags_mixed_input():
    h = np.zeros((2, 2, 2))
    h[0] = [[0, 0.5], [0.5, 0]]
    c = normalize_reduced(h)
    assert c.branch == "mixed_rejected" and math.isinf(c.residual)
    c = normalize_reduced(np.zeros((2, 2, 2)))
    assert c.branch == "flat"
    with pytest.raises(UsageError):
        normalize_reduced(np.zeros((0, 2, 2)))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=5), st.floats(-3, 3))
def test_flat_family_is_diagonalized(lams, phi):
    h = np.array([np.diag([l, -l]) for l in lams])
    h = rotate_tangent(phi, h)
    theta, hd = diagonalize_flat(h)
    assert -math.pi / 4 < theta <= math.pi / 4 + 1e-15
    assert np.abs(hd[:, 0, 1]).max() <= 1e-12
    assert np.allclose(np.sort(np.abs(hd[:, 0, 0])), np.sort(np.abs(lams)), atol=1e-12)


def test_non_commuting_family_rejected_with_commutator_norm():
    with pytest.raises(UsageError, match="do not commute"):
        diagonalize_flat(canonical_stack(0.5, 2))


def test_flat_branch_of_canonicalize():
    h = rotate_tangent(0.3, np.array([np.diag([1.0, -1.0]), np.diag([0.5, -0.5])]))
    c = canonicalize(h)
    assert c.branch == "flat" and c.b == 0.0 and c.residual <= 1e-14
    assert is_flat_point(h) and not is_flat_point(canonical_stack(0.5, 2))
    assert flatness_threshold(0.1) == flatness_threshold(1.0) < flatness_threshold(10.0)


@pytest.mark.parametrize("spec", [VERONESE, GENERALIZED_VERONESE, build_calabi(5)], ids=lambda s: s.name)
def test_canonical_derivative_relations(spec):
    g = analyze_point(spec, 0.9, 2.3, 4)
    c = canonicalize(g.shape.h)
    rel = canonical_derivatives(g.shape, c)
    assert len(rel.first) == 4 and len(rel.second) == 8
    assert max(rel.residuals().values()) <= 1e-10
    sh = with_canonical(g.shape, c, rel)
    assert sh.b == pytest.approx(c.b) and sh.lam_k.shape == (spec.ambient_n - 2, 2)


def test_canonical_derivatives_errors():
    g = analyze_point(VERONESE, 0.9, 2.3, 3)
    c = canonicalize(g.shape.h)
    rel = canonical_derivatives(g.shape, c)
    assert rel.lam_kl is None and rel.second == {}
    with pytest.raises(UsageError):
        canonical_derivatives(g.shape, replace(c, branch="flat"))
    with pytest.raises(UsageError):
        canonical_derivatives(g.shape, replace(c, residual=1.0))
    with pytest.raises(SingularityError):
        canonical_derivatives(replace(g.shape, S=1e-12), c)
    with pytest.raises(UsageError):
        canonical_derivatives(replace(g.shape, h1=None), c)
