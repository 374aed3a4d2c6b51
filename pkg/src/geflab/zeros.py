"""Zero counting and location for truncated GEF samples.

Counting uses the argument principle on an adaptively refined circle
partition; a count is certified when the smallest modulus seen on the
circle exceeds the truncation tail bound (Rouché). Location uses
Ehrlich-Aberth simultaneous iteration on the truncated polynomial.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .errors import ConvergenceError, DegenerateInputError, DomainError
from .gef_core import TruncatedGef, check_inside, evaluate_many, power_table


@dataclass(frozen=True)
class WindingPolicy:
    """Initial circle partition and bisection budget for winding counts.

    The initial partition has ``max(min_points, per_unit * rho * (|c| + rho))``
    arcs: the phase of psi turns at a rate of about ``|z|`` per unit length.
    """

    min_points: int = 64
    per_unit: float = 32.0
    max_depth: int = 16
    threshold: float = math.pi / 2

    def n_points(self, center: complex, radius: float) -> int:
        return max(self.min_points, math.ceil(self.per_unit * radius * (abs(center) + radius)))


DEFAULT_WINDING = WindingPolicy()


@dataclass(frozen=True)
class CountResult:
    count: int
    min_circle_modulus: float
    guard_margin: float
    refinement_depth: int
    exhausted: bool = False

    @property
    def certified(self) -> bool:
        return self.guard_margin > 0 and not self.exhausted


@dataclass(frozen=True)
class WindingBatch:
    counts: np.ndarray
    min_modulus: np.ndarray
    depth: np.ndarray
    exhausted: np.ndarray
    guard_margin: np.ndarray

    @property
    def certified(self) -> np.ndarray:
        return (self.guard_margin > 0) & ~self.exhausted


class HoleTag(str, enum.Enum):
    HOLE = "Hole"
    NOT_HOLE = "NotHole"
    UNCERTAIN = "Uncertain"


@dataclass(frozen=True)
class HoleVerdict:
    tag: HoleTag
    count: int | None = None
    reason: str | None = None


@dataclass(frozen=True, eq=False)
class DiscZeroSet:
    zeros: np.ndarray
    radius: float
    center: complex = 0j
    max_poly_residual: float = 0.0

    def __len__(self):
        return len(self.zeros)

    def to_dict(self) -> dict:
        return {
            "center": [self.center.real, self.center.imag],
            "radius": self.radius,
            "max_poly_residual": self.max_poly_residual,
            "zeros": [[float(z.real), float(z.imag)] for z in self.zeros],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _refine_row(coeffs, center, radius, thetas, values, policy):
    """Bisect every arc whose phase increment is at least ``policy.threshold``.

    Returns (winding angle, min modulus, depth reached, exhausted flag).
    """
    degree = len(coeffs) - 1
    min_mod = float(np.abs(values).min())
    a_t = thetas
    b_t = np.append(thetas[1:], thetas[0] + 2 * np.pi)
    a_v = values
    b_v = np.roll(values, -1)
    total = 0.0
    depth = 0
    exhausted = False
    while a_t.size:
        inc = np.angle(b_v * np.conj(a_v))
        bad = np.abs(inc) >= policy.threshold
        if depth >= policy.max_depth:
            exhausted = bool(bad.any())
            total += float(inc.sum())
            break
        total += float(inc[~bad].sum())
        if not bad.any():
            break
        depth += 1
        a_t, b_t, a_v, b_v = a_t[bad], b_t[bad], a_v[bad], b_v[bad]
        m_t = 0.5 * (a_t + b_t)
        m_v = coeffs @ power_table(center + radius * np.exp(1j * m_t), degree)
        min_mod = min(min_mod, float(np.abs(m_v).min()))
        a_t, b_t = np.concatenate([a_t, m_t]), np.concatenate([m_t, b_t])
        a_v, b_v = np.concatenate([a_v, m_v]), np.concatenate([m_v, b_v])
    return total, min_mod, depth, exhausted


def winding_count_batch(coeffs, tail_bound, center: complex, radius: float,
                        policy: WindingPolicy = DEFAULT_WINDING, chunk: int = 8192) -> WindingBatch:
    """Winding counts for many coefficient rows (no certification-region check)."""
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=np.complex128))
    B, n_coef = coeffs.shape
    n0 = policy.n_points(center, radius)
    thetas = 2.0 * np.pi * np.arange(n0) / n0
    table = power_table(center + radius * np.exp(1j * thetas), n_coef - 1)
    counts = np.empty(B, dtype=np.int64)
    min_mod = np.empty(B)
    depth = np.zeros(B, dtype=np.int64)
    exhausted = np.zeros(B, dtype=bool)
    for start in range(0, B, chunk):
        block = coeffs[start:start + chunk]
        vals = block @ table
        inc = np.angle(np.roll(vals, -1, axis=1) * np.conj(vals))
        total = inc.sum(axis=1)
        mm = np.abs(vals).min(axis=1)
        for i in np.flatnonzero((np.abs(inc) >= policy.threshold).any(axis=1)):
            total[i], mm[i], d, ex = _refine_row(block[i], center, radius, thetas, vals[i], policy)
            depth[start + i] = d
            exhausted[start + i] = ex
        counts[start:start + chunk] = np.rint(total / (2 * np.pi)).astype(np.int64)
        min_mod[start:start + chunk] = mm
    guard = min_mod - np.asarray(tail_bound, dtype=float)
    return WindingBatch(counts, min_mod, depth, exhausted, np.broadcast_to(guard, (B,)).copy())


def winding_count(gef: TruncatedGef, center: complex = 0j, radius: float = 1.0,
                  policy: WindingPolicy = DEFAULT_WINDING) -> CountResult:
    """Zero count of the truncation inside |z - center| < radius by the argument principle."""
    if not radius > 0:
        raise DomainError("radius must be positive")
    check_inside(gef, center, radius)
    if not np.any(gef.coefficients):
        raise DegenerateInputError("all coefficients are zero")
    wb = winding_count_batch(gef.coefficients[None, :], gef.tail_bound, complex(center), radius, policy)
    return CountResult(
        count=int(wb.counts[0]),
        min_circle_modulus=float(wb.min_modulus[0]),
        guard_margin=float(wb.guard_margin[0]),
        refinement_depth=int(wb.depth[0]),
        exhausted=bool(wb.exhausted[0]),
    )


def _verdict(count: int, certified: bool, exhausted: bool) -> HoleVerdict:
    if exhausted:
        return HoleVerdict(HoleTag.UNCERTAIN, reason="refinement budget exhausted")
    if not certified:
        return HoleVerdict(HoleTag.UNCERTAIN, reason="guard margin not positive")
    if count == 0:
        return HoleVerdict(HoleTag.HOLE)
    return HoleVerdict(HoleTag.NOT_HOLE, count=count)


def classify_hole(gef: TruncatedGef, r: float, policy: WindingPolicy = DEFAULT_WINDING) -> HoleVerdict:
    """Certified decision on 'no zeros in the closed disc |z| <= r'."""
    res = winding_count(gef, 0j, r, policy)
    return _verdict(res.count, res.certified, res.exhausted)


# --- Ehrlich-Aberth -------------------------------------------------------

def _horner(a, z):
    """p(z) and p'(z) for coefficients ``a`` (lowest degree first)."""
    p = np.full(z.shape, a[-1], dtype=np.complex128)
    dp = np.zeros(z.shape, dtype=np.complex128)
    for c in a[-2::-1]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _cauchy_radius(a) -> float:
    """Unique positive root of |a_m| x^m = sum_{k<m} |a_k| x^k (all roots lie within it)."""
    m = len(a) - 1
    mags = np.abs(a)
    ks = np.flatnonzero(mags[:m])
    log_lead = math.log(mags[m])
    log_mags = np.log(mags[ks])

    def g(logx):
        return log_lead + m * logx - float(logsumexp(log_mags + ks * logx))

    lo, hi = -8.0, 8.0
    while g(hi) < 0:
        hi *= 2
    while g(lo) > 0:
        lo *= 2
    return math.exp(brentq(g, lo, hi, xtol=1e-10))


def aberth_roots(a, tol: float, max_sweeps: int = 200) -> np.ndarray:
    """All roots of sum a_k z^k by simultaneous Ehrlich-Aberth iteration.

    Stops once every correction is below ``tol * max(1, |z_i|)``; callers
    rescale the variable so that unit length is the disc radius.
    """
    a = np.asarray(a, dtype=np.complex128)
    m = len(a) - 1
    if m == 0:
        return np.empty(0, dtype=np.complex128)
    if m == 1:
        return np.array([-a[0] / a[1]])
    R = _cauchy_radius(a)
    k = np.arange(m)
    z = (k + 0.5) / (m + 1) * 1.2 * R * np.exp(1j * (2.399963229728653 * k + 0.3))
    eye = np.eye(m, dtype=bool)
    for _ in range(max_sweeps):
        p, dp = _horner(a, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = p / dp
            diff = z[:, None] - z[None, :]
            diff[eye] = 1.0
            inv = 1.0 / diff
            inv[eye] = 0.0
            s = inv.sum(axis=1)
            w = newton / (1.0 - newton * s)
        w[p == 0] = 0.0
        bad = ~np.isfinite(w)
        w[bad] = 1e-3 * R * np.exp(1j * k[bad])
        z = z - w
        if np.all(np.abs(w) < tol * np.maximum(1.0, np.abs(z))) and not bad.any():
            return z
    raise ConvergenceError(f"Aberth iteration did not converge in {max_sweeps} sweeps", partial=z)


def _merge_clusters(roots, tol):
    roots = sorted(roots, key=lambda w: (w.real, w.imag))
    out = []
    used = [False] * len(roots)
    for i, w in enumerate(roots):
        if used[i]:
            continue
        group = [w]
        used[i] = True
        for j in range(i + 1, len(roots)):
            if not used[j] and abs(roots[j] - w) < tol:
                group.append(roots[j])
                used[j] = True
        centre = complex(np.mean(group))
        out.extend([centre] * len(group))
    return np.array(out, dtype=np.complex128)


def find_zeros(gef: TruncatedGef, radius: float, center: complex = 0j, max_sweeps: int = 200) -> DiscZeroSet:
    """Zeros of the truncation in |z - center| < radius, with multiplicity."""
    if not radius > 0:
        raise DomainError("radius must be positive")
    check_inside(gef, center, radius)
    a = gef.poly_coefficients()
    nz = np.flatnonzero(a)
    if nz.size == 0:
        raise DegenerateInputError("all coefficients are zero")
    a = a[: nz[-1] + 1]
    n_at_origin = int(nz[0])
    a = a[n_at_origin:]
    # work in units of radius so inner roots stop at 1e-12 * radius
    radius = float(radius)
    scaled = a * radius ** np.arange(len(a))
    try:
        roots = aberth_roots(scaled, tol=1e-12, max_sweeps=max_sweeps) * radius
    except ConvergenceError as exc:
        partial = np.concatenate([np.zeros(n_at_origin, complex), exc.partial * radius])
        raise ConvergenceError(str(exc), partial=partial) from None
    roots = np.concatenate([np.zeros(n_at_origin, dtype=np.complex128), roots])
    inside = roots[np.abs(roots - center) < radius]
    inside = _merge_clusters(inside, 1e-8 * radius) if inside.size else inside
    residual = float(np.abs(evaluate_many(gef, inside)).max()) if inside.size else 0.0
    return DiscZeroSet(inside, radius, complex(center), residual)
