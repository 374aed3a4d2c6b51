"""Certified finite truncations of the Gaussian entire function.

psi(z) = sum_k zeta_k z^k / sqrt(k!) is truncated at degree N. On the
event that |zeta_k| <= k for every k > N (whose probability of failing is
sum_{k>N} exp(-k^2)), the discarded tail is bounded on |z| <= r by

    tau = sum_{k>N} k r^k / sqrt(k!)

which is what ``TruncatedGef.tail_bound`` stores.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .complex_gaussian import RngState, standard_complex_array, trial_counters, uniform_pairs, complex_from_uniforms
from .errors import CertificationError, DegreeTooSmallError, DomainError

_REL_TOL = 1e-12


@dataclass(frozen=True)
class TruncationPolicy:
    alpha: float = 8.0
    min_degree: int = 24


@dataclass(frozen=True)
class GridPolicy:
    min_points: int = 256
    per_zero: float = 64.0

    def n_points(self, rho: float) -> int:
        return max(self.min_points, math.ceil(self.per_zero * rho * rho))


DEFAULT_TRUNCATION = TruncationPolicy()
DEFAULT_GRID = GridPolicy()


@dataclass(frozen=True, eq=False)
class TruncatedGef:
    coefficients: np.ndarray
    certified_radius: float
    tail_bound: float = 0.0
    tail_failure_log_prob: float = -math.inf
    degree: int = field(init=False)

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=np.complex128).ravel()
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "degree", len(c) - 1)
        if self.degree < 1:
            raise DomainError("a truncation needs degree >= 1")
        if not self.certified_radius > 0:
            raise DomainError("certified_radius must be positive")
        if self.tail_bound < 0:
            raise DomainError("tail_bound must be nonnegative")

    def __eq__(self, other):
        if not isinstance(other, TruncatedGef):
            return NotImplemented
        return (
            np.array_equal(self.coefficients, other.coefficients)
            and self.certified_radius == other.certified_radius
            and self.tail_bound == other.tail_bound
            and self.tail_failure_log_prob == other.tail_failure_log_prob
        )

    __hash__ = None

    @classmethod
    def exact(cls, coefficients, certified_radius: float = 1.0) -> "TruncatedGef":
        """Fixture constructor: a polynomial with no tail at all."""
        return cls(coefficients, certified_radius, 0.0, -math.inf)

    def truncated(self, degree: int) -> "TruncatedGef":
        """The same sample cut at a lower degree, with its own certificate."""
        tau, logp = tail_bound(degree, self.certified_radius)
        return TruncatedGef(self.coefficients[: degree + 1], self.certified_radius, tau, logp)

    def poly_coefficients(self) -> np.ndarray:
        """Monomial coefficients zeta_k / sqrt(k!), lowest degree first."""
        return self.coefficients * power_table(np.ones(1), self.degree)[:, 0]

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "certified_radius": self.certified_radius,
            "tail_bound": self.tail_bound,
            "tail_failure_log_prob": self.tail_failure_log_prob,
            "coefficients": [[float(w.real), float(w.imag)] for w in self.coefficients],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "TruncatedGef":
        coeffs = [complex(re, im) for re, im in d["coefficients"]]
        if len(coeffs) != d["degree"] + 1:
            raise DomainError("coefficient count does not match degree")
        return cls(coeffs, d["certified_radius"], d["tail_bound"], d["tail_failure_log_prob"])

    @classmethod
    def from_json(cls, text: str) -> "TruncatedGef":
        return cls.from_dict(json.loads(text))


def truncation_degree(r: float, policy: TruncationPolicy = DEFAULT_TRUNCATION) -> int:
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    return max(math.ceil(policy.alpha * r * r), policy.min_degree)


def tail_bound(N: int, r: float) -> tuple[float, float]:
    """Tail envelope bound ``tau`` and the log-probability that the envelope fails."""
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    if N < math.ceil(8 * r * r):
        raise DegreeTooSmallError(f"degree {N} is below 8 r^2 = {8 * r * r:.3f}")
    log_r = math.log(r)
    total = 0.0
    k = N + 1
    while True:
        term = math.exp(math.log(k) + k * log_r - 0.5 * math.lgamma(k + 1))
        total += term
        if term <= 1e-30 * total or term == 0.0:
            break
        k += 1
    # sum_{k>N} exp(-k^2); terms past N+40 are far below double resolution
    ks = np.arange(N + 1, N + 41, dtype=float)
    failure_log_prob = float(logsumexp(-ks * ks))
    return total, failure_log_prob


def sample_gef(r: float, state: RngState, policy: TruncationPolicy = DEFAULT_TRUNCATION) -> TruncatedGef:
    """Draw a truncated GEF certified on the disc of radius r."""
    N = truncation_degree(r, policy)
    coeffs = standard_complex_array(state, N + 1)
    tau, logp = tail_bound(N, r)
    return TruncatedGef(coeffs, r, tau, logp)


def sample_coefficient_batch(master_seed: int, stream_id: int, trial_indices, degree: int) -> np.ndarray:
    """Coefficients of many trials at once, shape ``(len(trial_indices), degree + 1)``.

    Row i equals ``sample_gef(...).coefficients`` for
    ``derive_trial_rng(master_seed, stream_id, trial_indices[i])``.
    """
    u, v = uniform_pairs(master_seed, stream_id, trial_counters(trial_indices, degree + 1))
    return complex_from_uniforms(u, v)


def power_table(z, degree: int) -> np.ndarray:
    """t_k(z) = z^k / sqrt(k!) for k = 0..degree, shape ``(degree + 1, len(z))``.

    Built by the recurrence t_{k+1} = t_k z / sqrt(k + 1).
    """
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    steps = z[None, :] / np.sqrt(np.arange(1, degree + 1, dtype=float))[:, None]
    table = np.empty((degree + 1, z.size), dtype=np.complex128)
    table[0] = 1.0
    np.cumprod(steps, axis=0, out=table[1:])
    return table


def evaluate_many(gef: TruncatedGef, z) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    return (gef.coefficients @ power_table(z.ravel(), gef.degree)).reshape(z.shape)


def evaluate(gef: TruncatedGef, z: complex) -> complex:
    """Truncated series at z (the tail certificate only covers |z| <= certified_radius)."""
    t = 1.0 + 0j
    acc = gef.coefficients[0] * t
    z = complex(z)
    for k in range(1, gef.degree + 1):
        t = t * z / math.sqrt(k)
        acc += gef.coefficients[k] * t
    return complex(acc)


def evaluate_high_precision(gef: TruncatedGef, z: complex, dps: int = 50):
    """mpmath evaluation used only to build oracle fixtures."""
    import mpmath

    with mpmath.workdps(dps):
        z = mpmath.mpc(z)
        return mpmath.fsum(
            mpmath.mpc(c.real, c.imag) * z**k / mpmath.sqrt(mpmath.factorial(k))
            for k, c in enumerate(gef.coefficients)
        )


def circle_points(center: complex, rho: float, n: int, phase: float = 0.0) -> np.ndarray:
    theta = phase + 2.0 * np.pi * np.arange(n) / n
    return center + rho * np.exp(1j * theta)


def check_inside(gef: TruncatedGef, center: complex, rho: float):
    if abs(center) + rho > gef.certified_radius * (1 + _REL_TOL):
        raise CertificationError(
            f"disc |z - {center}| <= {rho} leaves the certified disc of radius {gef.certified_radius}"
        )


def max_modulus_on_circle(gef: TruncatedGef, rho: float, grid: GridPolicy = DEFAULT_GRID) -> float:
    """M(rho) estimated on an equispaced circle grid (maximum principle: disc max = circle max)."""
    if not rho > 0:
        raise DomainError("rho must be positive")
    check_inside(gef, 0j, rho)
    values = evaluate_many(gef, circle_points(0j, rho, grid.n_points(rho)))
    return float(np.abs(values).max())


def max_modulus_batch(coeffs: np.ndarray, rho: float, grid: GridPolicy = DEFAULT_GRID) -> np.ndarray:
    table = power_table(circle_points(0j, rho, grid.n_points(rho)), coeffs.shape[1] - 1)
    return np.abs(coeffs @ table).max(axis=1)
