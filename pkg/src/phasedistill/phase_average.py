"""
Averages over independent Gaussian phase kicks.

Every integrand here depends on the phases only through rotated covariance
matrices, so it is pi-periodic in each phase. Two deterministic rules are
provided: Gauss-Hermite on the unbounded Gaussian (fast when sigma is small)
and the trapezoidal rule on one period against the wrapped Gaussian density
(spectrally accurate for periodic integrands once sigma is not tiny). Monte
Carlo serves as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

GAUSS_HERMITE = "gauss-hermite"
PERIODIC = "periodic"
MONTE_CARLO = "monte-carlo"
AUTO = "auto"

# below this sigma the wrapped density is too narrow for the periodic rule
PERIODIC_MIN_SIGMA = 0.25


class AccuracyError(RuntimeError):
    """Quadrature failed its convergence check."""


@dataclass(frozen=True)
class IntegrationConfig:
    method: str = AUTO
    nodes: int = 32
    samples: int = 1_000_000
    seed: int = 0
    tol: float = 1e-6
    check: bool = True
    chunk: int = 250_000

    def __post_init__(self):
        if self.method not in (AUTO, GAUSS_HERMITE, PERIODIC, MONTE_CARLO):
            raise ValueError(f"unknown integration method {self.method!r}")
        if self.method == MONTE_CARLO:
            if self.samples < 10_000:
                raise ValueError("Monte Carlo needs at least 1e4 samples")
        elif self.nodes < 8:
            raise ValueError("quadrature needs at least 8 nodes per dimension")


def gauss_hermite_rule(sigma: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    u, w = np.polynomial.hermite.hermgauss(n)
    return math.sqrt(2.0) * sigma * u, w / math.sqrt(math.pi)


def periodic_rule(sigma: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint nodes on [-pi/2, pi/2) weighted by the pi-wrapped Gaussian."""
    phi = -0.5 * math.pi + (np.arange(n) + 0.5) * math.pi / n
    reach = int(math.ceil(10 * sigma / math.pi)) + 1
    shifts = math.pi * np.arange(-reach, reach + 1)
    dens = np.exp(-0.5 * ((phi[:, None] + shifts) / sigma) ** 2).sum(axis=1)
    dens /= math.sqrt(2 * math.pi) * sigma
    w = dens * math.pi / n
    return phi, w / w.sum()


def rule_1d(sigma: float, n: int, method: str) -> tuple[np.ndarray, np.ndarray]:
    if sigma == 0:
        return np.zeros(1), np.ones(1)
    if method == AUTO:
        method = PERIODIC if sigma >= PERIODIC_MIN_SIGMA else GAUSS_HERMITE
    if method == GAUSS_HERMITE:
        return gauss_hermite_rule(sigma, n)
    if method == PERIODIC:
        return periodic_rule(sigma, n)
    raise ValueError(f"no deterministic rule for {method!r}")


def _tensor_chunks(phi1, w1, dims: int, chunk: int):
    """Yield (phases[P, dims], weights[P]) blocks of the tensor-product grid."""
    n = len(phi1)
    total = n**dims
    idx = np.arange(total)
    for start in range(0, total, chunk):
        block = idx[start:start + chunk]
        digits = np.empty((len(block), dims), dtype=int)
        rest = block
        for d in range(dims - 1, -1, -1):
            digits[:, d] = rest % n
            rest = rest // n
        yield phi1[digits], np.prod(w1[digits], axis=1)


Integrand = Callable[[np.ndarray], tuple[np.ndarray, ...]]


def _tensor_means(func: Integrand, sigma: float, dims: int, nodes: int,
                  method: str, chunk: int) -> np.ndarray:
    phi1, w1 = rule_1d(sigma, nodes, method)
    acc = None
    for phis, w in _tensor_chunks(phi1, w1, dims, chunk):
        vals = np.stack(func(phis))
        part = vals @ w
        acc = part if acc is None else acc + part
    return acc


def phase_means(func: Integrand, sigma: float, dims: int,
                integ: IntegrationConfig = IntegrationConfig()) -> np.ndarray:
    """E[func(phi)] for phi ~ N(0, sigma^2 I_dims), component by component.

    ``func`` maps an array of phase points (P, dims) to a tuple of (P,)
    arrays. With ``integ.check`` the deterministic rules are re-run with
    doubled node count and must agree to ``integ.tol`` relative to each
    mean; components that vanish by symmetry are measured against 1e-3 of
    the largest mean instead.
    """
    if integ.method == MONTE_CARLO:
        return monte_carlo_means(func, sigma, dims, integ)[0]
    means = _tensor_means(func, sigma, dims, integ.nodes, integ.method, integ.chunk)
    if integ.check and sigma > 0:
        fine = _tensor_means(func, sigma, dims, 2 * integ.nodes, integ.method, integ.chunk)
        scale = np.maximum(np.abs(fine), 1e-3 * np.max(np.abs(fine)))
        gap = np.max(np.abs(fine - means) / np.maximum(scale, 1e-300))
        if not gap <= integ.tol:
            raise AccuracyError(
                f"phase average not converged: node doubling {integ.nodes}->"
                f"{2 * integ.nodes} changes result by {gap:.2e} (sigma={sigma}, dims={dims})"
            )
        means = fine
    return means


def monte_carlo_means(func: Integrand, sigma: float, dims: int,
                      integ: IntegrationConfig) -> tuple[np.ndarray, np.ndarray]:
    """Sample means and their covariance matrix (for delta-method errors).

    Draws come from a counter-based generator keyed by the seed, in fixed-size
    chunks, so the result does not depend on how the work is scheduled.
    """
    total = integ.samples
    sums = None
    outer = None
    for i, start in enumerate(range(0, total, integ.chunk)):
        size = min(integ.chunk, total - start)
        gen = np.random.Generator(np.random.Philox(key=integ.seed, counter=[0, 0, 0, i]))
        phis = sigma * gen.standard_normal((size, dims))
        vals = np.stack(func(phis))
        s = vals.sum(axis=1)
        o = vals @ vals.T
        sums = s if sums is None else sums + s
        outer = o if outer is None else outer + o
    mean = sums / total
    cov = (outer / total - np.outer(mean, mean)) / (total - 1)
    return mean, cov


def ratio_with_error(func: Integrand, sigma: float, dims: int,
                     integ: IntegrationConfig) -> tuple[float, float]:
    """Monte Carlo estimate of E[f0]/E[f1] and its standard error."""
    mean, cov = monte_carlo_means(func, sigma, dims, integ)
    a, b = mean
    r = a / b
    grad = np.array([1.0 / b, -a / b**2])
    return float(r), float(math.sqrt(grad @ cov @ grad))

