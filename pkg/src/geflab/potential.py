"""Circle averages of log|psi|, the Poisson kernel, and Jensen's identity.

All circle integrals use the normalized angular measure, discretized by
the trapezoid rule on equispaced angles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.optimize import minimize_scalar

from .complex_gaussian import RngState, uniform_pairs
from .errors import DegenerateInputError, DomainError, SingularGridError
from .gef_core import TruncatedGef, check_inside, circle_points, evaluate_many, power_table
from .zeros import find_zeros

Mode = Literal["signed", "absolute", "positive-part"]


@dataclass(frozen=True)
class CircleGrid:
    radius: float
    n_points: int
    phase: float = 0.0

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("radius must be positive")
        need = max(256, math.ceil(64 * self.radius**2))
        if self.n_points < need:
            raise DomainError(f"circle grid needs at least {need} points at radius {self.radius}")

    @classmethod
    def for_radius(cls, radius: float, phase: float = 0.0) -> "CircleGrid":
        return cls(radius, max(256, math.ceil(64 * radius**2)), phase)

    def points(self) -> np.ndarray:
        return circle_points(0j, self.radius, self.n_points, self.phase)


def _reduce_log(logabs: np.ndarray, mode: Mode, axis=-1):
    if mode == "signed":
        return logabs.mean(axis=axis)
    if mode == "absolute":
        return np.abs(logabs).mean(axis=axis)
    if mode == "positive-part":
        return np.maximum(logabs, 0.0).mean(axis=axis)
    raise DomainError(f"unknown mode {mode!r}")


def circle_mean_log_modulus(gef: TruncatedGef, grid: CircleGrid, mode: Mode = "signed") -> float:
    check_inside(gef, 0j, grid.radius)
    mod = np.abs(evaluate_many(gef, grid.points()))
    if np.any(mod == 0):
        raise SingularGridError("a grid node is an exact zero of psi; shift the grid phase")
    return float(_reduce_log(np.log(mod), mode))


def circle_mean_log_batch(coeffs: np.ndarray, radius: float, modes=("signed",)) -> dict:
    """Circle means of log|psi| for many coefficient rows at once, one array per mode."""
    grid = CircleGrid.for_radius(radius)
    table = power_table(grid.points(), coeffs.shape[1] - 1)
    with np.errstate(divide="ignore"):
        logabs = np.log(np.abs(coeffs @ table))
    return {m: _reduce_log(logabs, m, axis=1) for m in modes}


def poisson_kernel(z, zeta, r: float):
    """(r^2 - |zeta|^2) / |z - zeta|^2 for z on the circle of radius r and |zeta| < r."""
    z = np.asarray(z, dtype=np.complex128)
    zeta = np.asarray(zeta, dtype=np.complex128)
    if np.any(np.abs(zeta) >= r):
        raise DomainError("zeta must lie strictly inside the disc")
    if np.any(np.abs(np.abs(z) - r) > 1e-12 * r):
        raise DomainError("z must lie on the circle of radius r")
    out = (r * r - np.abs(zeta) ** 2) / np.abs(z - zeta) ** 2
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class PoissonProbe:
    """Probe discs z_j + delta r D with z_j = kappa r e^{2 pi i j / N}.

    ``kappa = 1 - delta**0.25`` and ``N = floor(2 pi / delta)``.
    """

    delta: float
    r: float
    probe_points: np.ndarray
    kappa: float = field(init=False)
    n_discs: int = field(init=False)
    probe_centers: np.ndarray = field(init=False)

    def __post_init__(self):
        if not 0 < self.delta <= 0.25:
            raise DomainError("delta must lie in (0, 1/4]")
        if not self.r > 0:
            raise DomainError("r must be positive")
        kappa = 1.0 - self.delta**0.25
        n = math.floor(2 * math.pi / self.delta)
        centers = kappa * self.r * np.exp(2j * np.pi * np.arange(n) / n)
        pts = np.asarray(self.probe_points, dtype=np.complex128)
        if pts.shape != centers.shape:
            raise DomainError(f"expected {n} probe points, got {pts.size}")
        if np.any(np.abs(pts - centers) > self.delta * self.r * (1 + 1e-12)):
            raise DomainError("a probe point lies outside its disc")
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "n_discs", n)
        object.__setattr__(self, "probe_centers", centers)
        object.__setattr__(self, "probe_points", pts)


def make_probe(delta: float, r: float = 1.0, placement: str = "random",
               state: RngState | None = None) -> PoissonProbe:
    """Build a probe with points placed at the centers, uniformly at random, or adversarially.

    ``corner`` puts every point on its disc boundary at the spot nearest the
    outer circle.
    """
    if not 0 < delta <= 0.25:
        raise DomainError("delta must lie in (0, 1/4]")
    kappa = 1.0 - delta**0.25
    n = math.floor(2 * math.pi / delta)
    centers = kappa * r * np.exp(2j * np.pi * np.arange(n) / n)
    if placement == "center":
        pts = centers
    elif placement == "corner":
        pts = centers * (1 + delta / kappa)
    elif placement == "random":
        state = state or RngState(0)
        u, v = uniform_pairs(state.master_seed, state.stream_id,
                             np.uint64(state.counter) + np.arange(n, dtype=np.uint64))
        pts = centers + delta * r * np.sqrt(u) * np.exp(2j * np.pi * v)
    else:
        raise DomainError(f"unknown placement {placement!r}")
    return PoissonProbe(delta, r, pts)


def probe_deviation(probe: PoissonProbe, n_grid: int = 4096) -> float:
    """max over the circle of |mean_j P(z, zeta_j) - 1|."""
    z = circle_points(0j, probe.r, max(n_grid, 4096))
    total = np.zeros(z.size)
    for chunk in np.array_split(probe.probe_points, max(1, probe.n_discs // 256)):
        total += poisson_kernel(z[:, None], chunk[None, :], probe.r).sum(axis=1)
    return float(np.abs(total / probe.n_discs - 1.0).max())


def jensen_residual(gef: TruncatedGef, r: float, tol: float = 1e-10, max_points: int = 1 << 22) -> float:
    """|mean log|psi| on |z| = r - log|psi(0)| - sum log(r / |z_j|)|.

    The circle mean starts on the default grid and doubles until two
    successive values agree to ``tol``; a zero close to the circle slows
    trapezoid convergence.
    """
    zeta0 = gef.coefficients[0]
    if zeta0 == 0:
        raise DegenerateInputError("psi(0) = 0")
    check_inside(gef, 0j, r)
    zeros = find_zeros(gef, r).zeros
    jensen_sum = float(np.sum(np.log(r / np.abs(zeros)))) if zeros.size else 0.0

    def mean_log_ratio(n):
        # log|psi / psi(0)| keeps the constant part exact
        vals = np.abs(evaluate_many(gef, circle_points(0j, r, n)) / zeta0)
        if np.any(vals == 0):
            raise SingularGridError("a grid node is an exact zero of psi")
        return float(np.log(vals).mean())

    n = CircleGrid.for_radius(r).n_points
    mean = mean_log_ratio(n)
    while n < max_points:
        n *= 2
        finer = mean_log_ratio(n)
        converged = abs(finer - mean) < tol
        mean = finer
        if converged:
            break
    return abs(mean - jensen_sum)


def _disc_grid(z0: complex, rho: float):
    n_rad = max(32, math.ceil(8 * rho * (abs(z0) + rho)))
    n_ang = max(64, math.ceil(32 * rho * (abs(z0) + rho)))
    radii = rho * np.arange(1, n_rad + 1) / n_rad
    ang = np.exp(2j * np.pi * np.arange(n_ang) / n_ang)
    return np.concatenate([[z0], (z0 + radii[:, None] * ang[None, :]).ravel()])


def local_sup_log_modulus(gef: TruncatedGef, z0: complex, rho: float) -> float:
    """max of log|psi| over the closed disc z0 + rho D.

    Evaluated on a polar grid; the best boundary node is then polished along
    the boundary circle, where the maximum of a subharmonic function sits.
    """
    if not rho > 0:
        raise DomainError("rho must be positive")
    check_inside(gef, complex(z0), rho)
    pts = _disc_grid(complex(z0), rho)
    mod = np.abs(evaluate_many(gef, pts))
    best = float(mod.max())
    n_ang = max(64, math.ceil(32 * rho * (abs(z0) + rho)))
    boundary = pts[-n_ang:]
    j = int(np.argmax(np.abs(evaluate_many(gef, boundary))))
    step = 2 * np.pi / n_ang
    theta0 = np.angle(boundary[j] - z0)
    res = minimize_scalar(
        lambda t: -abs(evaluate_many(gef, np.array([z0 + rho * np.exp(1j * t)]))[0]),
        bounds=(theta0 - step, theta0 + step), method="bounded", options={"xatol": 1e-10},
    )
    best = max(best, -float(res.fun))
    if best == 0:
        return -math.inf
    return math.log(best)
