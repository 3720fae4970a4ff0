"""
N-copy collective purification with zero-width homodyne conditioning.

N phase-diffused copies meet on a chain of N-1 beamsplitters; every output
except the last is homodyned and the last mode is kept when all measured
quadratures read zero. For fixed phases everything is Gaussian, so the kept
variance follows from covariance-matrix conditioning; the phase average is
weighted by the (unnormalized) conditioning probability density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .fock import PhaseNoiseModel, SqueezedVacuumSpec
from .phase_average import (AUTO, MONTE_CARLO, IntegrationConfig, phase_means,
                            ratio_with_error)

# tensor grids grow as nodes**N; beyond this the auto rule samples instead
MAX_TENSOR_DIMS = 4


def omega(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class InterferometerSpec:
    """Chain of beamsplitters with amplitude transmittances ``t``.

    Beamsplitter j mixes the running mode with input j + 1; its second output
    is measured as output mode j and the first continues. The last row of U
    holds the weights of the kept mode: U[N-1, l] = r_{l-1} prod_{j>=l} t_j
    (1-based, r_0 = 1).
    """

    t: tuple
    U: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return len(self.t) + 1


def build_interferometer(t: Sequence[float]) -> InterferometerSpec:
    t = tuple(float(v) for v in t)
    if not t:
        raise ValueError("need at least two copies (one beamsplitter)")
    for v in t:
        if not 0 < v < 1:
            raise ValueError(f"transmittances must lie in (0, 1), got {v}")
    N = len(t) + 1
    # rows: output modes; running mode kept in row N-1 until the end
    U = np.zeros((N, N))
    running = np.zeros(N)
    running[0] = 1.0
    for j, tj in enumerate(t, start=1):
        rj = math.sqrt(1.0 - tj * tj)
        incoming = np.zeros(N)
        incoming[j] = 1.0
        U[j - 1] = -rj * running + tj * incoming
        running = tj * running + rj * incoming
    U[N - 1] = running
    S = np.kron(U, np.eye(2))
    U.setflags(write=False)
    S.setflags(write=False)
    return InterferometerSpec(t, U, S)


def balanced_superposition_transmittances(N: int) -> list[float]:
    """t_j = sqrt(j/(j+1)): the kept mode is the uniform superposition."""
    if N < 2:
        raise ValueError("N must be at least 2")
    return [math.sqrt(j / (j + 1)) for j in range(1, N)]


def balanced_beamsplitter_transmittances(N: int) -> list[float]:
    if N < 2:
        raise ValueError("N must be at least 2")
    return [math.sqrt(0.5)] * (N - 1)


@dataclass(frozen=True)
class ConditioningSpec:
    """Measured quadrature angles of outputs 1..N-1 and common efficiency."""

    angles: tuple
    eta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        if not 0 < self.eta <= 1:
            raise ValueError(f"efficiency must lie in (0, 1], got {self.eta}")

    @classmethod
    def uniform(cls, N: int, angle: float = 0.0, eta: float = 1.0) -> "ConditioningSpec":
        return cls(tuple([angle] * (N - 1)), eta)


def _x_variances(phis: np.ndarray, sv: SqueezedVacuumSpec) -> np.ndarray:
    c2 = np.cos(phis) ** 2
    return sv.Vx * c2 + sv.Vp * (1.0 - c2)


def conditional_variance_x(phis, spec: InterferometerSpec,
                           sv: SqueezedVacuumSpec) -> tuple[np.ndarray, np.ndarray]:
    """Kept x variance and unnormalized acceptance weight for fixed phases.

    ``phis`` has shape (N,) or (P, N).
    """
    phis = np.asarray(phis, dtype=float)
    V = _x_variances(phis, sv)
    inv = np.sum(spec.U[-1] ** 2 / V, axis=-1)
    Vt = 1.0 / inv
    weight = np.sqrt(Vt / np.prod(V, axis=-1))
    return Vt, weight


def conditional_variance_general(phis, spec: InterferometerSpec,
                                 cond: ConditioningSpec,
                                 sv: SqueezedVacuumSpec) -> tuple[np.ndarray, np.ndarray]:
    """Kept x variance V_N = 1/[(Sigma_x^-1)_NN] and weight sqrt(V_N/|Sigma_x|).

    Sigma_x is the covariance of the measured quadratures q(theta_j) after
    detector loss, eta * Sigma_q + (1-eta)/2, with theta_N = 0 for the kept
    mode, so the kept-mode variance is what a detector of efficiency eta
    would record.
    """
    phis = np.asarray(phis, dtype=float)
    single = phis.ndim == 1
    phis = np.atleast_2d(phis)
    N = spec.N
    if phis.shape[1] != N or len(cond.angles) != N - 1:
        raise ValueError("phase vector, interferometer and conditioning sizes differ")
    c, s = np.cos(phis), np.sin(phis)
    xx = sv.Vx * c * c + sv.Vp * s * s
    pp = sv.Vx * s * s + sv.Vp * c * c
    xp = (sv.Vx - sv.Vp) * c * s
    theta = np.array(cond.angles + (0.0,))
    # detector j reads q(theta_j) = x cos(theta_j) + p sin(theta_j), the same
    # convention as the Fock-basis POVM
    ct, st = np.cos(theta), np.sin(theta)
    # e_j^T Sigma_l e_k with e_j = (cos, sin)(theta_j), as [l, (j, k)] maps
    UU = spec.U[:, None, :] * spec.U[None, :, :]          # [j, k, l]

    def lift(ang):
        return np.moveaxis(UU * ang[:, :, None], 2, 0).reshape(N, N * N)

    G = (xx @ lift(np.outer(ct, ct))
         + xp @ lift(np.outer(ct, st) + np.outer(st, ct))
         + pp @ lift(np.outer(st, st))).reshape(-1, N, N)
    sigma_x = cond.eta * G + 0.5 * (1.0 - cond.eta) * np.eye(N)
    # Schur complement of the measured block: V_N = s_NN - b^T A^-1 b and
    # |Sigma_x| = |A| V_N, so the weight is 1/sqrt|A|
    L = np.linalg.cholesky(sigma_x[:, :-1, :-1])
    y = np.linalg.solve(L, sigma_x[:, :-1, -1:])[..., 0]
    VN = sigma_x[:, -1, -1] - np.sum(y * y, axis=-1)
    weight = 1.0 / np.prod(np.diagonal(L, axis1=1, axis2=2), axis=-1)
    if single:
        return VN[0], weight[0]
    return VN, weight


def _weighted_ratio(cond_fn, noise: PhaseNoiseModel, N: int,
                    integ: IntegrationConfig) -> float:
    def moments(phis):
        V, w = cond_fn(phis)
        return V * w, w

    if noise.sigma == 0:
        V, _ = cond_fn(np.zeros((1, N)))
        return float(V[0])
    if integ.method == MONTE_CARLO or (integ.method == AUTO and N > MAX_TENSOR_DIMS):
        integ = replace(integ, method=MONTE_CARLO)
        return ratio_with_error(moments, noise.sigma, N, integ)[0]
    num, den = phase_means(moments, noise.sigma, N, integ)
    return float(num / den)


def collective_variance_x(spec: InterferometerSpec, sv: SqueezedVacuumSpec,
                          noise: PhaseNoiseModel,
                          integ: IntegrationConfig = IntegrationConfig()) -> float:
    """<V~^(3/2)/prod sqrt(V_j)> / <V~^(1/2)/prod sqrt(V_j)> over the phases."""
    return _weighted_ratio(lambda p: conditional_variance_x(p, spec, sv),
                           noise, spec.N, integ)


def collective_variance_general(spec: InterferometerSpec, cond: ConditioningSpec,
                                sv: SqueezedVacuumSpec, noise: PhaseNoiseModel,
                                integ: IntegrationConfig = IntegrationConfig()) -> float:
    return _weighted_ratio(lambda p: conditional_variance_general(p, spec, cond, sv),
                           noise, spec.N, integ)


def collective_variance_mc(spec: InterferometerSpec, cond: ConditioningSpec,
                           sv: SqueezedVacuumSpec, noise: PhaseNoiseModel,
                           samples: int = 1_000_000, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo estimate and standard error, for cross-checking quadrature."""
    integ = IntegrationConfig(method=MONTE_CARLO, samples=samples, seed=seed)

    def moments(phis):
        V, w = conditional_variance_general(phis, spec, cond, sv)
        return V * w, w

    return ratio_with_error(moments, noise.sigma, spec.N, integ)


def dephased_variance_x(sv: SqueezedVacuumSpec, noise: PhaseNoiseModel) -> float:
    """x variance of a single phase-diffused copy (no purification)."""
    e = math.exp(-2 * noise.sigma**2)
    return 0.5 * (1 + e) * sv.Vx + 0.5 * (1 - e) * sv.Vp
