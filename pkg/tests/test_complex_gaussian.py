import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from geflab.complex_gaussian import (
    RngState,
    derive_trial_rng,
    gaussian_small_ball,
    gaussian_tail,
    log_gaussian_small_ball,
    philox4x32,
    sample_standard_complex,
    standard_complex_array,
)
from geflab.errors import DomainError

N_BIG = 1_000_000


@pytest.fixture(scope="module")
def big_sample():
    return standard_complex_array(RngState(2024, 3, 0), N_BIG)


@pytest.mark.parametrize(
    "ctr, key, expected",
    [
        ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
        ((0xFFFFFFFF,) * 4, (0xFFFFFFFF,) * 2, (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
        (
            (0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344),
            (0xA4093822, 0x299F31D0),
            (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1),
        ),
    ],
)
def test_philox_known_answers(ctr, key, expected):
    out = philox4x32(*ctr, *key)
    assert tuple(int(x) for x in out) == expected


def test_mean_square_modulus_is_one(big_sample):
    sq = np.abs(big_sample) ** 2
    se = sq.std() / math.sqrt(sq.size)
    assert abs(sq.mean() - 1.0) < 4 * se


def test_real_and_imag_parts_have_variance_half(big_sample):
    for part in (big_sample.real, big_sample.imag):
        assert abs(part.mean()) < 4 * math.sqrt(0.5 / part.size)
        assert part.var() == pytest.approx(0.5, rel=0.01)


def test_tail_frequency_matches_closed_form(big_sample):
    p = math.exp(-1)
    hits = np.mean(np.abs(big_sample) >= 1.0)
    assert abs(hits - p) < 4 * math.sqrt(p * (1 - p) / N_BIG)


def test_square_modulus_is_unit_exponential_by_chi_square(big_sample):
    edges = stats.expon.ppf(np.linspace(0, 1, 21))
    observed, _ = np.histogram(np.abs(big_sample) ** 2, bins=edges)
    assert stats.chisquare(observed).pvalue > 1e-3


def test_phase_is_uniform_by_chi_square(big_sample):
    observed, _ = np.histogram(np.angle(big_sample) % (2 * np.pi), bins=20, range=(0, 2 * np.pi))
    assert stats.chisquare(observed).pvalue > 1e-3


def test_same_state_gives_identical_samples():
    s = RngState(11, 2, 77)
    assert sample_standard_complex(s) == sample_standard_complex(s)


def test_scalar_draws_match_array_draws():
    s = RngState(5, 1, 123)
    arr = standard_complex_array(s, 10)
    scalar = []
    for _ in range(10):
        w, s = sample_standard_complex(s)
        scalar.append(w)
    assert np.array_equal(arr, np.array(scalar))
    assert s.counter == 133


def test_state_fields_are_range_checked():
    with pytest.raises(DomainError):
        RngState(-1)
    with pytest.raises(DomainError):
        RngState(0, 2**32)
    with pytest.raises(DomainError):
        derive_trial_rng(0, 0, 2**32)


def test_derive_trial_rng_is_pure():
    assert derive_trial_rng(9, 4, 17) == derive_trial_rng(9, 4, 17)


@pytest.mark.parametrize("a, b", [((0, 0), (0, 1)), ((1, 0), (2, 0))])
def test_derived_streams_are_uncorrelated(a, b):
    n = 10_000
    x = standard_complex_array(derive_trial_rng(31337, *a), n)
    y = standard_complex_array(derive_trial_rng(31337, *b), n)
    assert not np.any(x == y)
    for u, v in ((x.real, y.real), (x.imag, y.imag), (np.abs(x), np.abs(y))):
        assert abs(np.corrcoef(u, v)[0, 1]) < 4 / math.sqrt(n)


def test_gaussian_tail_values():
    assert gaussian_tail(0) == 1.0
    assert gaussian_tail(2) == pytest.approx(0.0183156388887342, rel=1e-12)
    assert gaussian_tail(1) == pytest.approx(math.exp(-1), rel=1e-15)


def test_gaussian_small_ball_values():
    assert gaussian_small_ball(0) == 0.0
    v = gaussian_small_ball(1)
    assert v == pytest.approx(0.632120558828558, rel=1e-12)
    assert 0.5 <= v <= 1.0
    assert gaussian_small_ball(1e-3) == pytest.approx(1e-6, rel=1e-6)


def test_negative_lambda_rejected():
    with pytest.raises(DomainError):
        gaussian_tail(-0.1)
    with pytest.raises(DomainError):
        gaussian_small_ball(-1)


@given(st.floats(min_value=0, max_value=50))
def test_tail_and_small_ball_sum_to_one(lam):
    assert gaussian_tail(lam) + gaussian_small_ball(lam) == 1.0


@given(st.floats(min_value=0, max_value=1))
def test_small_ball_bracket(lam):
    v = gaussian_small_ball(lam)
    assert lam * lam / 2 - 1e-16 <= v <= lam * lam + 1e-16


@given(st.floats(min_value=1e-150, max_value=5))
def test_log_small_ball_twin(lam):
    direct = gaussian_small_ball(lam)
    if direct > 1e-6:
        assert log_gaussian_small_ball(lam) == pytest.approx(math.log(direct), rel=1e-9, abs=1e-12)
    else:
        assert log_gaussian_small_ball(lam) == pytest.approx(2 * math.log(lam), rel=1e-6, abs=1e-6)
