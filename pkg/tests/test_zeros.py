import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geflab.complex_gaussian import derive_trial_rng
from geflab.errors import CertificationError, DegenerateInputError
from geflab.experiments import zero_counts
from geflab.gef_core import TruncatedGef, evaluate_many, sample_coefficient_batch, sample_gef
from geflab.zeros import (
    DiscZeroSet,
    HoleTag,
    classify_hole,
    find_zeros,
    winding_count,
    winding_count_batch,
)


def poly_gef(monomial, radius=1.0):
    """TruncatedGef whose truncation equals sum monomial[k] z^k."""
    c = np.array(monomial, dtype=complex) * np.sqrt([math.factorial(k) for k in range(len(monomial))])
    return TruncatedGef.exact(c, radius)


def test_double_zero_at_origin():
    gef = poly_gef([0, 0, 1, 0])
    assert gef.coefficients[2] == pytest.approx(math.sqrt(2))
    res = winding_count(gef, 0, 1)
    assert res.count == 2
    assert res.certified


def test_constant_has_no_zeros():
    res = winding_count(poly_gef([1, 0], radius=3.0), 0.5 + 0.5j, 1.5)
    assert res.count == 0
    assert res.min_circle_modulus == pytest.approx(1.0)
    assert res.refinement_depth <= 16


def test_zero_coefficients_rejected():
    with pytest.raises(DegenerateInputError):
        winding_count(poly_gef([0, 0, 0]), 0, 0.5)
    with pytest.raises(DegenerateInputError):
        find_zeros(poly_gef([0, 0, 0]), 0.5)


def test_disc_outside_certificate_rejected():
    gef = sample_gef(1, derive_trial_rng(0, 0, 0))
    with pytest.raises(CertificationError):
        winding_count(gef, 0.5, 0.6)
    with pytest.raises(CertificationError):
        find_zeros(gef, 1.2)
    with pytest.raises(CertificationError):
        classify_hole(gef, 1.01)


def test_find_zeros_quadratic():
    zs = find_zeros(poly_gef([-0.25, 0, 1]), 1.0)
    assert len(zs) == 2
    assert np.sort(zs.zeros.real) == pytest.approx([-0.5, 0.5], abs=1e-10)
    assert np.abs(zs.zeros.imag).max() < 1e-10


@pytest.mark.parametrize("a", [0.3, -0.5 + 0.2j, 0.9j])
def test_find_zeros_linear(a):
    zs = find_zeros(poly_gef([-a, 1]), 1.0)
    assert len(zs) == 1
    assert zs.zeros[0] == pytest.approx(a, abs=1e-12)


def test_find_zeros_double_root_merged():
    zs = find_zeros(poly_gef([0, 0, 1]), 1.0)
    assert len(zs) == 2
    assert np.all(zs.zeros == 0)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_winding_agrees_with_root_finder(r):
    for i in range(100):
        gef = sample_gef(r, derive_trial_rng(21, r, i))
        res = winding_count(gef, 0, r)
        zs = find_zeros(gef, r)
        assert res.certified
        assert res.count == len(zs)
        assert zs.max_poly_residual < 1e-8
        assert np.all(np.abs(zs.zeros) < r)


def test_root_finder_against_companion_matrix():
    for i in range(50):
        gef = sample_gef(2, derive_trial_rng(22, 0, i))
        ours = np.sort_complex(find_zeros(gef, 2).zeros)
        roots = np.roots(gef.poly_coefficients()[::-1])
        ref = np.sort_complex(roots[np.abs(roots) < 2])
        assert ours.shape == ref.shape
        assert np.abs(ours - ref).max() < 1e-8


def test_batch_matches_scalar():
    idx = np.arange(300, dtype=np.uint64)
    coeffs = sample_coefficient_batch(23, 0, idx, 32)
    gef0 = sample_gef(2, derive_trial_rng(23, 0, 0))
    wb = winding_count_batch(coeffs, gef0.tail_bound, 0j, 2.0)
    for i in range(0, 300, 37):
        res = winding_count(sample_gef(2, derive_trial_rng(23, 0, i)), 0, 2.0)
        assert res.count == wb.counts[i]
        assert res.min_circle_modulus == pytest.approx(wb.min_modulus[i], rel=1e-12)


def test_classify_hole_fixtures():
    assert classify_hole(poly_gef([1, 0]), 1.0).tag is HoleTag.HOLE
    v = classify_hole(poly_gef([0, 1], radius=2.0), 0.7)
    assert v.tag is HoleTag.NOT_HOLE and v.count == 1


def test_boundary_zero_is_uncertain():
    v = classify_hole(poly_gef([-1, 1]), 1.0)
    assert v.tag is HoleTag.UNCERTAIN
    assert v.reason


def test_exhausted_refinement_is_uncertain():
    from geflab.zeros import WindingPolicy

    # zero just inside the circle: the phase jumps by ~pi between the first nodes
    gef = poly_gef([-(1 - 1e-9), 1])
    res = winding_count(gef, 0, 1.0, WindingPolicy(max_depth=2))
    v = classify_hole(gef, 1.0, WindingPolicy(max_depth=2))
    assert res.exhausted
    assert v.tag is HoleTag.UNCERTAIN and "exhausted" in v.reason


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.2, 1.0), st.floats(0.2, 1.0))
def test_count_is_monotone_in_radius(trial, f1, f2):
    gef = sample_gef(2.5, derive_trial_rng(24, 0, trial))
    r1, r2 = sorted((2.5 * f1, 2.5 * f2))
    c1, c2 = winding_count(gef, 0, r1), winding_count(gef, 0, r2)
    if c1.certified and c2.certified:
        assert c1.count <= c2.count


def test_count_is_additive_over_annulus():
    for i in range(100):
        gef = sample_gef(3, derive_trial_rng(25, 0, i))
        outer, inner = winding_count(gef, 0, 3), winding_count(gef, 0, 1.5)
        zs = find_zeros(gef, 3).zeros
        annulus = np.count_nonzero(np.abs(zs) > 1.5)
        assert outer.certified and inner.certified
        assert outer.count == inner.count + annulus


def test_uncertain_rate_is_small_at_r2():
    counts = zero_counts(2.0, 100_000, master_seed=26)
    assert np.mean(counts < 0) < 1e-3


def test_disc_zero_set_json():
    zs = find_zeros(poly_gef([-0.25, 0, 1]), 1.0)
    d = zs.to_dict()
    assert d["radius"] == 1.0 and len(d["zeros"]) == 2
    assert isinstance(DiscZeroSet(np.array([0.1j]), 1.0).to_json(), str)


def test_listed_zeros_have_small_residual():
    gef = sample_gef(3, derive_trial_rng(27, 0, 0))
    zs = find_zeros(gef, 3)
    assert np.abs(evaluate_many(gef, zs.zeros)).max() <= zs.max_poly_residual
