"""Simulation toolkit for zeros of the Gaussian entire function.

psi(z) = sum_k zeta_k z^k / sqrt(k!) with i.i.d. standard complex Gaussian
coefficients: certified truncations, zero counting, hole probabilities and
large-deviation estimates.
"""
from .complex_gaussian import (
    RngState,
    derive_trial_rng,
    gaussian_small_ball,
    gaussian_tail,
    sample_standard_complex,
)
from .errors import (
    CertificationError,
    ConvergenceError,
    DegenerateInputError,
    DegreeTooSmallError,
    DomainError,
    GefError,
    NotInOmegaError,
    SingularGridError,
)
from .experiments import (
    FitResult,
    McEstimate,
    OmegaChainReport,
    estimate_event_probability,
    fit_decay_exponent,
    log_prob_omega,
    sample_conditional_omega,
    verify_omega_chain,
    zero_counts,
)
from .gef_core import (
    GridPolicy,
    TruncatedGef,
    TruncationPolicy,
    evaluate,
    max_modulus_on_circle,
    sample_gef,
    tail_bound,
    truncation_degree,
)
from .potential import (
    CircleGrid,
    PoissonProbe,
    circle_mean_log_modulus,
    jensen_residual,
    local_sup_log_modulus,
    make_probe,
    poisson_kernel,
    probe_deviation,
)
from .zeros import (
    CountResult,
    DiscZeroSet,
    HoleTag,
    HoleVerdict,
    classify_hole,
    find_zeros,
    winding_count,
)

__version__ = "0.1.0"
