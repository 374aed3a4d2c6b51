"""Monte Carlo drivers, the hole-forcing coefficient event, and decay fits.

Trial ``i`` of an event always draws its coefficients from
``derive_trial_rng(master_seed, EVENT_STREAMS[event], i)``. Trials are
processed in fixed chunks of ``CHUNK`` indices and reduced by summing
integer counters, so estimates do not depend on how many workers ran
them or in which order.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln
from scipy.stats import binomtest

from . import complex_gaussian as cg
from .complex_gaussian import RngState, derive_trial_rng
from .errors import DomainError, NotInOmegaError
from .gef_core import (
    DEFAULT_GRID,
    TruncatedGef,
    max_modulus_batch,
    sample_coefficient_batch,
    tail_bound,
    truncation_degree,
)
from .potential import circle_mean_log_batch, local_sup_log_modulus
from .zeros import winding_count_batch

EVENT_STREAMS = {
    "hole": 1,
    "count_deviation": 2,
    "logM_deviation": 3,
    "circle_mean_low": 4,
    "claim32_failure": 5,
    "abs_mean_high": 6,
    "omega": 7,
    "jensen": 8,
    "counts": 9,
}
DELTA_EVENTS = {"count_deviation", "logM_deviation", "circle_mean_low", "claim32_failure"}
MC_EVENTS = DELTA_EVENTS | {"hole", "abs_mean_high"}

CHUNK = 10_000
# local-supremum probe sits at 0.7 r on the positive axis
LOCAL_SUP_CENTER_FRACTION = 0.7


@dataclass(frozen=True)
class McEstimate:
    event_name: str
    r: float
    delta: float | None
    trials: int
    successes: int
    uncertain: int
    p_hat: float
    p_low_bound: float
    p_high_bound: float
    ci_low: float
    ci_high: float
    master_seed: int

    @property
    def log_p_hat(self) -> float | None:
        return math.log(self.p_hat) if self.p_hat > 0 else None

    def as_row(self) -> dict:
        return {
            "event": self.event_name,
            "r": self.r,
            "delta": self.delta,
            "trials": self.trials,
            "successes": self.successes,
            "uncertain": self.uncertain,
            "p_hat": self.p_hat,
            "p_low": self.p_low_bound,
            "p_high": self.p_high_bound,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "log_p_hat": self.log_p_hat,
            "seed": self.master_seed,
        }


@dataclass(frozen=True)
class OmegaChainReport:
    r: float
    zeta0_abs: float
    sum_prime: float
    sum_double_prime_bound: float
    lower_bound_on_min_psi: float
    chain_holds: bool


@dataclass(frozen=True)
class FitResult:
    amplitude: float
    exponent: float
    window: tuple = field(default_factory=tuple)
    residual_rms: float = 0.0

    def as_row(self, event: str = "fit") -> dict:
        return {
            "event": event,
            "window_min_r": self.window[0][0],
            "window_max_r": self.window[-1][0],
            "amplitude": self.amplitude,
            "exponent": self.exponent,
            "residual_rms": self.residual_rms,
        }


# --- the hole-forcing event -------------------------------------------------

def omega_index_bound(r: float) -> int:
    """Largest index constrained to be tiny: floor(48 r^2)."""
    return math.floor(48 * r * r)


def log_prob_omega(r: float) -> float:
    """Exact log-probability of the event
    |zeta_0| >= 2,  |zeta_k| <= exp(-2 r^2) for 1 <= k <= 48 r^2,  |zeta_k| <= 2^k beyond.
    """
    if not r >= 1:
        raise DomainError(f"the hole-forcing event needs r >= 1, got {r}")
    K = omega_index_bound(r)
    total = cg.log_gaussian_tail(2.0)
    total += K * _log_small_ball_of_tiny(4 * r * r)
    k = K + 1
    while True:
        x = 4.0**k if k < 512 else math.inf
        term = math.log1p(-math.exp(-x))
        total += term
        if term == 0.0:
            break
        k += 1
    return total


def _log_small_ball_of_tiny(s: float) -> float:
    """log P(|w| <= lam) for lam^2 = exp(-s), without underflow for large s."""
    if s > 18:
        # x = e^-s < 1e-8: log(1 - e^-x) = -s - x/2 + O(x^2)
        return -s - 0.5 * math.exp(-s)
    return cg.log_small_ball_from_sq(math.exp(-s))


def omega_degree(r: float) -> int:
    return max(truncation_degree(r), math.ceil(48 * r * r) + 1)


def sample_conditional_omega(r: float, state: RngState, degree: int | None = None) -> TruncatedGef:
    """Coefficients drawn exactly from their law conditioned on the hole-forcing event."""
    if not r >= 1:
        raise DomainError(f"the hole-forcing event needs r >= 1, got {r}")
    degree = omega_degree(r) if degree is None else degree
    K = omega_index_bound(r)
    if degree < 48 * r * r:
        raise DomainError(f"degree {degree} does not cover the constrained indices up to {K}")
    counters = np.uint64(state.counter) + np.arange(degree + 1, dtype=np.uint64)
    u, v = cg.uniform_pairs(state.master_seed, state.stream_id, counters)
    coeffs = np.empty(degree + 1, dtype=np.complex128)
    # |zeta_0|^2 given |zeta_0| >= 2 is 4 + Exp(1) by memorylessness
    coeffs[0] = cg.complex_from_uniforms(u[:1], v[:1], exp_shift=4.0)[0]
    coeffs[1:K + 1] = cg.complex_from_uniforms(u[1:K + 1], v[1:K + 1], exp_scale=math.exp(-4 * r * r))
    tail = cg.complex_from_uniforms(u[K + 1:], v[K + 1:])
    spare = state.counter + degree + 1
    for j, k in enumerate(range(K + 1, degree + 1)):
        while abs(tail[j]) > 2.0**k:
            w, _ = cg.sample_standard_complex(RngState(state.master_seed, state.stream_id, spare))
            tail[j] = w
            spare += 1
    coeffs[K + 1:] = tail
    tau, logp = tail_bound(degree, r)
    return TruncatedGef(coeffs, r, tau, logp)


def _log_weights(r: float, ks: np.ndarray) -> np.ndarray:
    return ks * math.log(r) - 0.5 * gammaln(ks + 1)


def verify_omega_chain(gef: TruncatedGef, r: float) -> OmegaChainReport:
    """Lower bound |zeta_0| - sum' - 1/2 on |psi| over the closed disc of radius r."""
    K = omega_index_bound(r)
    c = np.abs(gef.coefficients)
    if gef.degree < K:
        raise NotInOmegaError(f"degree {gef.degree} leaves constrained indices unmaterialized")
    if c[0] < 2.0:
        raise NotInOmegaError(f"|zeta_0| = {c[0]:.6g} < 2")
    small = math.exp(-2 * r * r)
    if np.any(c[1:K + 1] > small * (1 + 1e-12)):
        raise NotInOmegaError("a middle coefficient exceeds exp(-2 r^2)")
    ks = np.arange(K + 1, gef.degree + 1)
    if np.any(c[K + 1:] > 2.0**ks):
        raise NotInOmegaError("a tail coefficient exceeds 2^k")
    mids = np.arange(1, K + 1)
    sum_prime = float(np.sum(c[1:K + 1] * np.exp(_log_weights(r, mids))))
    lower = float(c[0]) - sum_prime - 0.5
    return OmegaChainReport(r, float(c[0]), sum_prime, 0.5, lower, lower >= 1.0)


# --- Monte Carlo estimators -------------------------------------------------

def _chunks(trials: int):
    return [(s, min(s + CHUNK, trials)) for s in range(0, trials, CHUNK)]


def _certified_gef_radius(event: str, r: float, delta: float | None) -> float:
    if event == "claim32_failure":
        return (LOCAL_SUP_CENTER_FRACTION + delta) * r
    return r


def _chunk_outcomes(args) -> tuple[int, int]:
    """(successes, uncertain) for trials [lo, hi) of one event."""
    event, r, delta, master_seed, lo, hi = args
    stream = EVENT_STREAMS[event]
    idx = np.arange(lo, hi, dtype=np.uint64)
    if r == 0:
        if event != "hole":
            raise DomainError("r = 0 is only meaningful for the hole event")
        z0 = sample_coefficient_batch(master_seed, stream, idx, 0)[:, 0]
        return int(np.count_nonzero(z0)), 0
    R = _certified_gef_radius(event, r, delta)
    N = truncation_degree(R)
    tau, _ = tail_bound(N, R)
    coeffs = sample_coefficient_batch(master_seed, stream, idx, N)
    if event in ("hole", "count_deviation"):
        wb = winding_count_batch(coeffs, tau, 0j, r)
        cert = wb.certified
        if event == "hole":
            hit = wb.counts == 0
        else:
            hit = np.abs(wb.counts / (r * r) - 1.0) >= delta
        return int(np.count_nonzero(hit & cert)), int(np.count_nonzero(~cert))
    if event == "logM_deviation":
        logm = np.log(max_modulus_batch(coeffs, r, DEFAULT_GRID))
        return int(np.count_nonzero(np.abs(logm / (r * r) - 0.5) >= delta)), 0
    if event == "circle_mean_low":
        mean = circle_mean_log_batch(coeffs, r)["signed"]
        return int(np.count_nonzero(mean / (r * r) <= 0.5 - delta)), 0
    if event == "abs_mean_high":
        mean = circle_mean_log_batch(coeffs, r, modes=("absolute",))["absolute"]
        return int(np.count_nonzero(mean > 10 * r * r)), 0
    if event == "claim32_failure":
        z0 = LOCAL_SUP_CENTER_FRACTION * r
        threshold = (0.5 - 3 * delta) * z0 * z0
        hits = 0
        for row in coeffs:
            gef = TruncatedGef(row, R, tau)
            hits += local_sup_log_modulus(gef, z0, delta * r) <= threshold
        return int(hits), 0
    raise DomainError(f"unknown event {event!r}")


def _run_chunks(fn, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def wilson_interval(successes: int, n: int) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    ci = binomtest(successes, n).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def estimate_event_probability(event: str, r: float, delta: float | None = None, trials: int = 1000,
                               master_seed: int = 0, workers: int = 1) -> McEstimate:
    """Direct Monte Carlo estimate of one event probability.

    Uncertain trials are excluded from ``p_hat`` and bracketed by
    ``p_low_bound`` (all failures) and ``p_high_bound`` (all successes).
    """
    if event not in MC_EVENTS:
        raise DomainError(f"unknown event {event!r}")
    if trials < 1:
        raise DomainError("trials must be at least 1")
    if r < 0:
        raise DomainError("r must be nonnegative")
    if event in DELTA_EVENTS:
        if delta is None or not 0 < delta <= 0.25:
            raise DomainError("delta must lie in (0, 1/4] for deviation events")
    jobs = [(event, r, delta, master_seed, lo, hi) for lo, hi in _chunks(trials)]
    parts = _run_chunks(_chunk_outcomes, jobs, workers)
    successes = sum(p[0] for p in parts)
    uncertain = sum(p[1] for p in parts)
    certified = trials - uncertain
    p_low = successes / trials
    p_high = (successes + uncertain) / trials
    p_hat = successes / certified if certified else p_low
    ci_low, ci_high = wilson_interval(successes, certified)
    return McEstimate(event, r, delta, trials, successes, uncertain, p_hat, p_low, p_high,
                      min(ci_low, p_hat), max(ci_high, p_hat), master_seed)


def _count_chunk(args):
    r, center, cert_radius, stream, master_seed, lo, hi = args
    N = truncation_degree(cert_radius)
    tau, _ = tail_bound(N, cert_radius)
    coeffs = sample_coefficient_batch(master_seed, stream, np.arange(lo, hi, dtype=np.uint64), N)
    wb = winding_count_batch(coeffs, tau, center, r)
    return np.where(wb.certified, wb.counts, -1)


def zero_counts(r: float, trials: int, master_seed: int = 0, center: complex = 0j,
                certified_radius: float | None = None, stream: int | None = None,
                workers: int = 1) -> np.ndarray:
    """Certified zero counts in |z - center| <= r for independent samples (-1 marks Uncertain)."""
    cert = certified_radius if certified_radius is not None else abs(center) + r
    if abs(center) + r > cert * (1 + 1e-12):
        raise DomainError("counting disc leaves the certified disc")
    stream = EVENT_STREAMS["counts"] if stream is None else stream
    jobs = [(r, complex(center), cert, stream, master_seed, lo, hi) for lo, hi in _chunks(trials)]
    return np.concatenate(_run_chunks(_count_chunk, jobs, workers))


def fit_decay_exponent(points) -> FitResult:
    """Least-squares power law neg_log_p ~ amplitude * r**exponent on log-log axes."""
    pts = [(float(r), float(v)) for r, v in points]
    if len(pts) < 3:
        raise DomainError("need at least 3 points to fit a decay exponent")
    rs = np.array([p[0] for p in pts])
    vals = np.array([p[1] for p in pts])
    if np.any(vals <= 0) or np.any(rs <= 0) or not np.all(np.isfinite(vals)):
        raise DomainError("fit needs positive radii and positive finite -log p values")
    if np.any(np.diff(rs) <= 0):
        raise DomainError("radii must be strictly increasing")
    x, y = np.log(rs), np.log(vals)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return FitResult(float(math.exp(intercept)), float(slope), tuple(pts), float(np.sqrt(np.mean(resid**2))))


def default_workers() -> int:
    env = os.environ.get("GEFLAB_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1

