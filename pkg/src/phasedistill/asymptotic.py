"""
Infinite-iteration limit of two-copy purification with zero-width conditioning.

Projection on a quadrature eigenstate is the r -> infinity limit of
projection on a squeezed vacuum. Conjugating the inputs by the squeezer turns
the protocol into vacuum-conditioned purification, whose fixed point is the
Gaussian state with Q-function matrix

    Gamma = <Gamma_phi sqrt|Gamma_phi|> / <sqrt|Gamma_phi|>,
    Gamma_phi = (S Sigma_phi S + I/2)^-1,

and the limiting covariance is S^-1 (Gamma^-1 - I/2) S^-1. The limit in r is
taken numerically along a schedule; for theta = 0 and ideal detection there
is also a closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fock import PhaseNoiseModel, SqueezedVacuumSpec
from .phase_average import AccuracyError, IntegrationConfig, phase_means

DEFAULT_R_SCHEDULE = (6.0, 8.0, 10.0, 12.0)
ASYMPTOTIC_INTEGRATION = IntegrationConfig(nodes=64, tol=1e-9)


@dataclass(frozen=True)
class AsymptoticResult:
    Vx_lim: float
    Vp_lim: float
    Sigma_lim: np.ndarray
    purity_lim: float
    as_verified: bool
    r_used: float
    convergence_gap: float
    physical: bool = True


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def attenuation_cm(Sigma, eta: float) -> np.ndarray:
    """Covariance matrix after a transmittance-eta loss."""
    if not 0 < eta <= 1:
        raise ValueError(f"efficiency must lie in (0, 1], got {eta}")
    Sigma = np.asarray(Sigma, dtype=float)
    return eta * Sigma + 0.5 * (1 - eta) * np.eye(Sigma.shape[-1])


def inverse_attenuation_cm(Sigma, eta: float) -> np.ndarray:
    """Formal inverse of :func:`attenuation_cm`; may leave the physical set."""
    if not 0 < eta <= 1:
        raise ValueError(f"efficiency must lie in (0, 1], got {eta}")
    Sigma = np.asarray(Sigma, dtype=float)
    return (Sigma - 0.5 * (1 - eta) * np.eye(Sigma.shape[-1])) / eta


def _purity(Sigma: np.ndarray) -> float:
    return 1.0 / (2.0 * math.sqrt(np.linalg.det(Sigma)))


def asymptotic_ideal(sv: SqueezedVacuumSpec, noise: PhaseNoiseModel,
                     integ: IntegrationConfig = ASYMPTOTIC_INTEGRATION) -> AsymptoticResult:
    """Closed form for x conditioning with ideal detectors.

    Vx_lim = <A>/<A^3>, Vp_lim = Vx Vp <A^3>/<A>, A = (Vx cos^2 + Vp sin^2)^(-1/2).
    """
    def moments(phis):
        c2 = np.cos(phis[:, 0]) ** 2
        A = (sv.Vx * c2 + sv.Vp * (1 - c2)) ** -0.5
        return A, A**3

    if noise.sigma == 0:
        a1, a3 = sv.Vx ** -0.5, sv.Vx ** -1.5
    else:
        a1, a3 = phase_means(moments, noise.sigma, 1, integ)
    Vx = float(a1 / a3)
    Vp = float(sv.Vx * sv.Vp * a3 / a1)
    Sigma = np.diag([Vx, Vp])
    return AsymptoticResult(Vx, Vp, Sigma, _purity(Sigma), as_verified=False,
                            r_used=math.inf, convergence_gap=0.0)


def squeezer(r: float, theta: float = 0.0) -> np.ndarray:
    """S_{r,theta} = R(theta) diag(e^r, e^-r) R(theta)^T."""
    R = rotation(theta)
    return R @ np.diag([math.exp(r), math.exp(-r)]) @ R.T


def _input_moments(phis: np.ndarray, sv: SqueezedVacuumSpec, eta: float):
    """Entries (xx, xp, pp) of the attenuated input CM rotated by phi."""
    c, s = np.cos(phis), np.sin(phis)
    loss = 0.5 * (1 - eta)
    xx = eta * (sv.Vx * c * c + sv.Vp * s * s) + loss
    pp = eta * (sv.Vx * s * s + sv.Vp * c * c) + loss
    xp = eta * (sv.Vx - sv.Vp) * c * s
    return xx, xp, pp


def _reduced_terms(phis, sv, theta, eta, eps):
    """Integrands of the rescaled Q-function matrix in the frame of theta.

    With eps = e^(-2r) and (a, b, d) the rotated input CM, Gamma_phi equals
    (eps/D) [[eps d + 1/2, -b], [-b, a/eps + 1/2]] with
    D = a/2 + eps (a d - b^2 + 1/4) + eps^2 d/2 and sqrt|Gamma_phi| is
    sqrt(eps/D). The returned integrands keep every entry O(1) so the r -> oo
    limit can be approached without cancellation.
    """
    a, b, d = _input_moments(phis[:, 0] - theta, sv, eta)
    D = 0.5 * a + eps * (a * d - b * b + 0.25) + 0.5 * eps * eps * d
    w = D ** -0.5
    return ((eps * d + 0.5) / D * w, -b / D * w, (a + 0.5 * eps) / D * w,
            (2 * (a * d - b * b) + eps * d) / (2 * D) * w, w)


def _reduced_moments(sv, noise, theta, eta, r, integ):
    if r < 0:
        raise ValueError("r must be non-negative")
    if not 0 < eta <= 1:
        raise ValueError(f"efficiency must lie in (0, 1], got {eta}")
    eps = math.exp(-2.0 * r)

    def terms(phis):
        return _reduced_terms(phis, sv, theta, eta, eps)

    if noise.sigma == 0:
        vals = np.array([float(v[0]) for v in terms(np.zeros((1, 1)))])
    else:
        vals = phase_means(terms, noise.sigma, 1, integ)
    g11, g12, g22, h, norm = vals
    return g11 / norm, g12 / norm, g22 / norm, h / norm, eps


def gamma_average(sv: SqueezedVacuumSpec, noise: PhaseNoiseModel, theta: float = 0.0,
                  eta: float = 1.0, r: float = 12.0,
                  integ: IntegrationConfig = ASYMPTOTIC_INTEGRATION) -> np.ndarray:
    """Averaged Q-function matrix <Gamma sqrt|Gamma|>/<sqrt|Gamma|> at squeezing r.

    Inputs are attenuated by eta before the squeezer S_{r,theta} acts.
    """
    g11, g12, g22, _, eps = _reduced_moments(sv, noise, theta, eta, r, integ)
    R = rotation(theta)
    G = np.array([[eps * g11, eps * g12], [eps * g12, g22]])
    return R @ G @ R.T


def limit_cm_at(sv: SqueezedVacuumSpec, noise: PhaseNoiseModel, theta: float = 0.0,
                eta: float = 1.0, r: float = 12.0,
                integ: IntegrationConfig = ASYMPTOTIC_INTEGRATION) -> np.ndarray:
    """Fixed-point CM S^-1 (Gamma^-1 - I/2) S^-1 at finite r (detector frame)."""
    g11, g12, g22, h, eps = _reduced_moments(sv, noise, theta, eta, r, integ)
    delta = g11 * g22 - eps * g12 * g12
    sxx = g22 / delta - 0.5 * eps
    sxp = -g12 / delta
    spp = (g11 * h + 0.5 * g12 * g12) / delta
    R = rotation(theta)
    return R @ np.array([[sxx, sxp], [sxp, spp]]) @ R.T


def limit_cm(Gamma: np.ndarray, r: float, theta: float = 0.0) -> np.ndarray:
    """Direct evaluation of S^-1 (Gamma^-1 - I/2) S^-1.

    Loses roughly e^(2r) * 1e-16 in the anti-squeezed entry; kept as an
    independent route for moderate r.
    """
    Sinv = squeezer(-r, theta)
    return Sinv @ (np.linalg.inv(Gamma) - 0.5 * np.eye(2)) @ Sinv


def asymptotic_general(sv: SqueezedVacuumSpec, noise: PhaseNoiseModel, theta: float = 0.0,
                       eta: float = 1.0, verify_eta: float | None = None,
                       r_schedule: Sequence[float] = DEFAULT_R_SCHEDULE,
                       tol: float = 1e-7,
                       integ: IntegrationConfig = ASYMPTOTIC_INTEGRATION) -> AsymptoticResult:
    """Limit state for conditioning angle theta and detector efficiency eta.

    The fixed point is found for the attenuated inputs, i.e. in the frame of
    the detector. With ``verify_eta`` given the actual state is reported as a
    detector of that efficiency would see it; otherwise the formal inverse
    loss map is applied and a non-physical outcome is flagged, not raised.
    """
    rs = [float(r) for r in r_schedule]
    if len(rs) < 2 or any(b <= a for a, b in zip(rs, rs[1:])):
        raise ValueError("r_schedule must be increasing with at least two entries")
    cms = [limit_cm_at(sv, noise, theta, eta, r, integ) for r in rs]
    gaps = [float(np.max(np.abs(b - a))) for a, b in zip(cms, cms[1:])]
    gap = gaps[-1]
    if gap > tol:
        raise AccuracyError(f"r-limit not converged: last gap {gap:.2e} > {tol:g}")
    # detector-frame limit; undo the loss to get the state itself
    observed = 0.5 * (cms[-1] + cms[-1].T)
    actual = inverse_attenuation_cm(observed, eta)
    if verify_eta is not None:
        Sigma = attenuation_cm(actual, verify_eta)
    else:
        Sigma = actual
    det = float(np.linalg.det(Sigma))
    physical = det >= 0.25 - 1e-10 and Sigma[0, 0] > 0
    purity = 1.0 / (2.0 * math.sqrt(det)) if det > 0 else math.nan
    return AsymptoticResult(
        Vx_lim=float(Sigma[0, 0]), Vp_lim=float(Sigma[1, 1]), Sigma_lim=Sigma,
        purity_lim=purity, as_verified=verify_eta is not None, r_used=rs[-1],
        convergence_gap=gap, physical=physical,
    )
