"""Standard complex Gaussians from a counter-based generator.

Every draw is a pure function of ``(master_seed, stream_id, counter)``:
one Philox4x32-10 block per complex sample. The block counter words are
``(counter_lo, counter_hi, stream_id, 0)`` and the key is the 64-bit
master seed split in two halves. Because nothing is carried between
draws, trials can be generated in any order, in any batch size, on any
number of workers and still produce bit-identical numbers.

A complex sample ``w`` is built from its squared modulus, drawn from the
unit exponential law by inverse CDF, and a uniform phase. This makes the
laws ``P(|w| >= lam) = exp(-lam^2)`` and ``P(|w| <= lam) = 1 - exp(-lam^2)``
exact, and conditioning on either event a one-line transform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError

_MASK32 = 0xFFFFFFFF
_MASK64 = 0xFFFFFFFFFFFFFFFF

_PHILOX_M0 = np.uint64(0xD2511F53)
_PHILOX_M1 = np.uint64(0xCD9E8D57)
_PHILOX_W0 = 0x9E3779B9
_PHILOX_W1 = 0xBB67AE85
_PHILOX_ROUNDS = 10

# trial_index occupies the high half of the 64-bit counter
TRIAL_SHIFT = 32
MAX_DRAWS_PER_TRIAL = 1 << TRIAL_SHIFT

_TWO_POW_M53 = 2.0**-53


@dataclass(frozen=True)
class RngState:
    """Immutable position in a counter-based random stream."""

    master_seed: int
    stream_id: int = 0
    counter: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed <= _MASK64:
            raise DomainError(f"master_seed must fit in 64 bits, got {self.master_seed}")
        if not 0 <= self.stream_id <= _MASK32:
            raise DomainError(f"stream_id must fit in 32 bits, got {self.stream_id}")
        if not 0 <= self.counter <= _MASK64:
            raise DomainError(f"counter must fit in 64 bits, got {self.counter}")

    def advanced(self, n: int) -> "RngState":
        return replace(self, counter=(self.counter + n) & _MASK64)


def philox4x32(c0, c1, c2, c3, k0, k1):
    """Vectorized Philox4x32-10 block function.

    Counter words ``c0..c3`` may be arrays (broadcast together); key words
    are scalars. Returns four ``uint32`` arrays.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & np.uint64(_MASK32) for c in (c0, c1, c2, c3))
    c0, c1, c2, c3 = np.broadcast_arrays(c0, c1, c2, c3)
    mask = np.uint64(_MASK32)
    shift = np.uint64(32)
    k0 = int(k0) & _MASK32
    k1 = int(k1) & _MASK32
    for _ in range(_PHILOX_ROUNDS):
        p0 = _PHILOX_M0 * c0
        p1 = _PHILOX_M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> shift) ^ c1 ^ np.uint64(k0),
            p1 & mask,
            (p0 >> shift) ^ c3 ^ np.uint64(k1),
            p0 & mask,
        )
        k0 = (k0 + _PHILOX_W0) & _MASK32
        k1 = (k1 + _PHILOX_W1) & _MASK32
    return tuple(c.astype(np.uint32) for c in (c0, c1, c2, c3))


def _to_unit(hi, lo):
    # 53-bit double in [0, 1)
    bits = (hi.astype(np.uint64) >> np.uint64(5)) * np.uint64(1 << 26) + (lo.astype(np.uint64) >> np.uint64(6))
    return bits.astype(np.float64) * _TWO_POW_M53


def uniform_pairs(master_seed: int, stream_id: int, counters) -> tuple[np.ndarray, np.ndarray]:
    """Two independent uniforms on [0, 1) for each 64-bit counter value."""
    counters = np.asarray(counters, dtype=np.uint64)
    lo = counters & np.uint64(_MASK32)
    hi = counters >> np.uint64(32)
    x0, x1, x2, x3 = philox4x32(lo, hi, stream_id, 0, master_seed & _MASK32, master_seed >> 32)
    return _to_unit(x0, x1), _to_unit(x2, x3)


def trial_counters(trial_indices, n_draws: int) -> np.ndarray:
    """Counter grid of shape ``(len(trial_indices), n_draws)`` for batched trials."""
    if n_draws > MAX_DRAWS_PER_TRIAL:
        raise DomainError("too many draws for a single trial")
    t = np.asarray(trial_indices, dtype=np.uint64)[:, None] << np.uint64(TRIAL_SHIFT)
    return t + np.arange(n_draws, dtype=np.uint64)[None, :]


def complex_from_uniforms(u_mod, u_phase, exp_scale=None, exp_shift=0.0):
    """Map uniform pairs to complex Gaussians (optionally conditioned).

    The squared modulus is ``exp_shift + E`` where ``E`` is the unit
    exponential restricted to ``[0, exp_scale]`` (unrestricted when
    ``exp_scale`` is None), drawn by inverse CDF.
    """
    if exp_scale is None:
        e = -np.log1p(-u_mod)
    else:
        # P(E <= a) = -expm1(-a); invert u * P(E <= a)
        e = -np.log1p(u_mod * np.expm1(-np.asarray(exp_scale, dtype=float)))
    modulus = np.sqrt(exp_shift + e)
    return modulus * np.exp(2j * np.pi * u_phase)


def standard_complex_array(state: RngState, n: int) -> np.ndarray:
    """``n`` consecutive draws starting at ``state`` (same values as n scalar calls)."""
    counters = np.uint64(state.counter) + np.arange(n, dtype=np.uint64)
    u, v = uniform_pairs(state.master_seed, state.stream_id, counters)
    return complex_from_uniforms(u, v)


def sample_standard_complex(state: RngState) -> tuple[complex, RngState]:
    """One standard complex Gaussian (density exp(-|w|^2)/pi) and the advanced state."""
    w = standard_complex_array(state, 1)[0]
    return complex(w), state.advanced(1)


def derive_trial_rng(master_seed: int, stream_id: int, trial_index: int) -> RngState:
    """Starting state for trial ``trial_index`` of ``stream_id``.

    Each trial owns ``2**32`` consecutive counters, so a trial never
    overlaps its neighbours.
    """
    if not 0 <= trial_index < (1 << (64 - TRIAL_SHIFT)):
        raise DomainError(f"trial_index must be below 2**32, got {trial_index}")
    return RngState(master_seed, stream_id, trial_index << TRIAL_SHIFT)


def _check_lambda(lam):
    if lam < 0 or math.isnan(lam):
        raise DomainError(f"lambda must be nonnegative, got {lam}")


def gaussian_tail(lam: float) -> float:
    """P(|w| >= lam) = exp(-lam^2)."""
    _check_lambda(lam)
    return math.exp(-lam * lam)


def log_gaussian_tail(lam: float) -> float:
    _check_lambda(lam)
    return -lam * lam


def gaussian_small_ball(lam: float) -> float:
    """P(|w| <= lam) = 1 - exp(-lam^2).

    Computed as the exact complement of ``gaussian_tail`` so the two always
    sum to 1; use ``log_gaussian_small_ball`` when lam is tiny.
    """
    return 1.0 - gaussian_tail(lam)


def log_gaussian_small_ball(lam: float) -> float:
    """log P(|w| <= lam), accurate when lam^2 underflows or is tiny."""
    _check_lambda(lam)
    if lam == 0:
        return -math.inf
    x = lam * lam
    if x < 1e-8:
        # log(1 - e^-x) = log x - x/2 + O(x^2)
        return 2.0 * math.log(lam) - 0.5 * x
    return math.log(-math.expm1(-x))


def log_small_ball_from_sq(x: float) -> float:
    """log(1 - exp(-x)) given the squared radius ``x`` directly (x may underflow lam^2)."""
    if x <= 0:
        return -math.inf
    if x < 1e-8:
        return math.log(x) - 0.5 * x
    return math.log(-math.expm1(-x))
