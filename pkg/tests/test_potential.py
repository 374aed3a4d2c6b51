import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geflab.complex_gaussian import derive_trial_rng
from geflab.errors import CertificationError, DegenerateInputError, DomainError, SingularGridError
from geflab.experiments import estimate_event_probability
from geflab.gef_core import TruncatedGef, circle_points, sample_gef
from geflab.potential import (
    CircleGrid,
    PoissonProbe,
    circle_mean_log_modulus,
    jensen_residual,
    local_sup_log_modulus,
    make_probe,
    poisson_kernel,
    probe_deviation,
)


def linear(a, radius=1.0):
    return TruncatedGef.exact([-a, 1.0], radius)


def constant(c, radius=1.0):
    return TruncatedGef.exact([c, 0.0], radius)


def test_circle_grid_invariants():
    g = CircleGrid.for_radius(3.0)
    assert g.n_points == 576
    with pytest.raises(DomainError):
        CircleGrid(3.0, 500)
    assert np.allclose(np.abs(g.points()), 3.0)


def test_circle_mean_of_linear_factor_is_log_radius():
    gef = linear(0.4 + 0.3j, radius=2.0)
    grid = CircleGrid(1.5, 4096)
    assert circle_mean_log_modulus(gef, grid) == pytest.approx(math.log(1.5), abs=1e-6)


@pytest.mark.parametrize("mode", ["signed", "absolute", "positive-part"])
def test_circle_mean_of_constant(mode):
    assert circle_mean_log_modulus(constant(2.5), CircleGrid.for_radius(1.0), mode) == pytest.approx(math.log(2.5))


def test_circle_mean_modes_relation():
    gef = sample_gef(2, derive_trial_rng(40, 0, 0))
    g = CircleGrid.for_radius(2)
    s = circle_mean_log_modulus(gef, g, "signed")
    a = circle_mean_log_modulus(gef, g, "absolute")
    p = circle_mean_log_modulus(gef, g, "positive-part")
    # log = log+ - log-, |log| = log+ + log-
    assert a == pytest.approx(2 * p - s)


def test_grid_node_on_a_zero_is_singular():
    with pytest.raises(SingularGridError):
        circle_mean_log_modulus(linear(1.0), CircleGrid(1.0, 256))


def test_circle_mean_rejects_uncertified_radius():
    with pytest.raises(CertificationError):
        circle_mean_log_modulus(constant(1.0), CircleGrid(2.0, 256))


def test_circle_mean_low_event_is_rare_at_r3():
    est = estimate_event_probability("circle_mean_low", 3.0, 0.25, trials=10_000, master_seed=41)
    assert est.p_hat < 1e-2


def test_poisson_kernel_values():
    z = circle_points(0j, 2.0, 7)
    assert np.allclose(poisson_kernel(z, 0, 2.0), 1.0)
    assert poisson_kernel(1.0, 0.5, 1.0) == pytest.approx(3.0)
    assert poisson_kernel(1.0, -0.5, 1.0) == pytest.approx(1 / 3)


def test_poisson_kernel_domain():
    with pytest.raises(DomainError):
        poisson_kernel(1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        poisson_kernel(0.9, 0.1, 1.0)


@given(st.floats(0, 0.999), st.floats(0, 2 * math.pi), st.floats(0.1, 10))
def test_poisson_kernel_normalization(frac, angle, r):
    zeta = frac * r * np.exp(1j * angle)
    if frac > 0.95:
        n = 65536
    else:
        n = 4096
    z = circle_points(0j, r, n)
    assert poisson_kernel(z, zeta, r).mean() == pytest.approx(1.0, abs=1e-8)


@given(st.floats(0, 2 * math.pi), st.floats(0.1, 10))
def test_poisson_kernel_bounds_at_half_radius(angle, r):
    vals = poisson_kernel(circle_points(0j, r, 4096), 0.5 * r * np.exp(1j * angle), r)
    assert vals.min() >= 1 / 3 - 1e-9
    assert vals.max() <= 3 + 1e-9


def test_probe_geometry_at_quarter():
    p = make_probe(0.25, 1.0, "center")
    assert p.kappa == pytest.approx(0.2928932188134524, abs=1e-12)
    assert p.n_discs == 25
    assert np.allclose(np.abs(p.probe_centers), p.kappa)


def test_probe_points_stay_in_their_discs():
    for placement in ("random", "corner", "center"):
        p = make_probe(0.04, 2.0, placement, derive_trial_rng(42, 0, 0))
        assert np.all(np.abs(p.probe_points - p.probe_centers) <= 0.04 * 2.0 * (1 + 1e-12))
    with pytest.raises(DomainError):
        PoissonProbe(0.25, 1.0, np.zeros(25, complex) + 0.9)
    with pytest.raises(DomainError):
        make_probe(0.3)


def test_probe_deviation_shrinks_with_delta():
    # centred probes are exponentially accurate Riemann sums
    assert probe_deviation(make_probe(1e-3, 1.0, "center")) < 1e-12
    assert probe_deviation(make_probe(1e-1, 1.0, "center")) < 1e-12
    small = probe_deviation(make_probe(1e-3, 1.0, "random", derive_trial_rng(43, 0, 0)))
    large = probe_deviation(make_probe(1e-1, 1.0, "random", derive_trial_rng(43, 0, 0)))
    assert small < large


def test_probe_deviation_scaling_constant():
    ratios = {}
    for d in (0.04, 0.01, 0.0025):
        worst = max(probe_deviation(make_probe(d, 1.0, "random", derive_trial_rng(44, 0, i))) for i in range(20))
        worst = max(worst, probe_deviation(make_probe(d, 1.0, "corner")))
        ratios[d] = worst / math.sqrt(d)
    C = ratios[0.04]
    assert ratios[0.01] <= C and ratios[0.0025] <= C


def test_jensen_residual_fixtures():
    assert jensen_residual(constant(1.7 - 0.2j, 2.0), 2.0) == 0.0
    assert jensen_residual(linear(0.3 + 0.4j, 2.0), 2.0) < 1e-8


def test_jensen_residual_requires_nonzero_origin():
    with pytest.raises(DegenerateInputError):
        jensen_residual(TruncatedGef.exact([0, 1.0], 1.0), 1.0)


def test_jensen_residual_random_samples():
    for i in range(30):
        assert jensen_residual(sample_gef(2, derive_trial_rng(45, 0, i)), 2.0) < 1e-6


def test_local_sup_of_constant():
    assert local_sup_log_modulus(constant(3.0, 2.0), 0.5 + 0.5j, 0.4) == pytest.approx(math.log(3.0))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_local_sup_is_monotone_in_radius(trial):
    gef = sample_gef(2, derive_trial_rng(46, 0, trial))
    assert local_sup_log_modulus(gef, 1.0, 0.1) <= local_sup_log_modulus(gef, 1.0, 0.2)


def test_local_sup_dominates_any_point_in_disc():
    gef = sample_gef(3, derive_trial_rng(47, 0, 0))
    sup = local_sup_log_modulus(gef, 2.1, 0.6)
    rng = np.random.default_rng(1)
    pts = 2.1 + 0.6 * np.sqrt(rng.random(2000)) * np.exp(2j * np.pi * rng.random(2000))
    from geflab.gef_core import evaluate_many

    assert np.log(np.abs(evaluate_many(gef, pts))).max() <= sup + 1e-12


def test_local_sup_certification():
    with pytest.raises(CertificationError):
        local_sup_log_modulus(sample_gef(1, derive_trial_rng(0, 0, 0)), 0.8, 0.3)


def test_local_sup_failure_is_rare_at_r3():
    est = estimate_event_probability("claim32_failure", 3.0, 0.2, trials=10_000, master_seed=48)
    assert est.p_hat < 1e-2
