"""
Diagnostics of truncated single-mode states: moments, purity, fidelity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .fock import (FockDensityMatrix, SqueezedVacuumSpec, TruncationWarning,
                   phase_rotate, squeezed_vacuum_dm)


class DegenerateStateError(ValueError):
    pass


class NumericalPSDError(ValueError):
    pass


@dataclass(frozen=True)
class GaussianMoments:
    Vx: float
    Vp: float
    Cxp: float = 0.0
    mx: float = 0.0
    mp: float = 0.0

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.Vx, self.Cxp], [self.Cxp, self.Vp]])

    @property
    def determinant(self) -> float:
        return self.Vx * self.Vp - self.Cxp**2


def _annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), k=1)


def covariance_matrix(rho: FockDensityMatrix) -> GaussianMoments:
    tr = rho.trace
    if tr < 1e-12:
        raise DegenerateStateError(f"state trace {tr:.3e} too small for moments")
    r = rho.elements / tr
    a = _annihilation(rho.dim)
    ea = np.trace(r @ a)
    ea2 = np.trace(r @ a @ a)
    en = float(np.sum(np.diag(r).real * np.arange(rho.dim)))
    mx = math.sqrt(2.0) * float(ea.real)
    mp = math.sqrt(2.0) * float(ea.imag)
    x2 = en + 0.5 + float(ea2.real)
    p2 = en + 0.5 - float(ea2.real)
    xp = float(ea2.imag)
    return GaussianMoments(Vx=x2 - mx**2, Vp=p2 - mp**2, Cxp=xp - mx * mp, mx=mx, mp=mp)


def verified_variance(V: float, verify_eta: float = 1.0) -> float:
    """Variance as seen through a homodyne detector of efficiency verify_eta."""
    if not 0 < verify_eta <= 1:
        raise ValueError(f"verification efficiency must lie in (0, 1], got {verify_eta}")
    return verify_eta * V + 0.5 * (1 - verify_eta)


def quadrature_variance(rho: FockDensityMatrix, theta: float = 0.0,
                        verify_eta: float = 1.0) -> float:
    """Variance of x cos(theta) + p sin(theta) of the normalized state."""
    cm = covariance_matrix(rho)
    c, s = math.cos(theta), math.sin(theta)
    V = c * c * cm.Vx + s * s * cm.Vp + 2 * c * s * cm.Cxp
    return verified_variance(V, verify_eta)


def purity(rho: FockDensityMatrix) -> float:
    tr = rho.trace
    return float(np.sum(np.abs(rho.elements) ** 2) / tr**2)


def success_probability(rho: FockDensityMatrix) -> float:
    return rho.trace


def _principal_axes(cm: np.ndarray) -> tuple[float, float, float]:
    """Return (V1, V2, theta) with cm = R(-theta) diag(V1, V2) R(-theta)^T."""
    vals, vecs = np.linalg.eigh(cm)
    # eigh orders ascending; put the x-axis on the first eigenvector
    v = vecs[:, 0]
    phi = math.atan2(v[1], v[0])
    return float(vals[0]), float(vals[1]), phi


def gaussian_reference(rho: FockDensityMatrix, mean_tol: float = 1e-8,
                       heisenberg_tol: float = 1e-8) -> FockDensityMatrix:
    """Zero-mean Gaussian state with the same covariance matrix as ``rho``."""
    cm = covariance_matrix(rho)
    if max(abs(cm.mx), abs(cm.mp)) > mean_tol:
        raise ValueError(f"non-zero quadrature means ({cm.mx:.3e}, {cm.mp:.3e})")
    if cm.determinant < 0.25 - heisenberg_tol:
        raise ValueError(f"covariance determinant {cm.determinant:.6g} below 1/4")
    V1, V2, phi = _principal_axes(cm.matrix)
    if V1 * V2 < 0.25:
        # rounding only; the check above already bounded the violation
        V2 = 0.25 / V1
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        base = squeezed_vacuum_dm(SqueezedVacuumSpec(V1, V2), rho.cutoff)
    # phase_rotate(theta) maps the CM to R(theta)^T cm R(theta); the principal
    # x-axis at angle phi must return to the lab frame.
    ref = phase_rotate(base, -phi)
    return ref.with_label(f"gaussian_reference({rho.label})")


def _psd_sqrt(mat: np.ndarray, tol: float) -> np.ndarray:
    herm = 0.5 * (mat + mat.conj().T)
    vals, vecs = np.linalg.eigh(herm)
    if vals[0] < -tol:
        raise NumericalPSDError(f"eigenvalue {vals[0]:.3e} below -{tol:g}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def uhlmann_fidelity(rho1: FockDensityMatrix, rho2: FockDensityMatrix,
                     psd_tol: float = 1e-8) -> float:
    """F = (Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2 for normalized inputs.

    Evaluated as the squared nuclear norm of sqrt(rho1) sqrt(rho2), which is
    the same quantity and symmetric by construction.
    """
    if rho1.dim != rho2.dim:
        raise ValueError("fidelity needs states at the same cutoff")
    s1 = _psd_sqrt(rho1.elements, psd_tol)
    s2 = _psd_sqrt(rho2.elements, psd_tol)
    nuc = np.linalg.svd(s1 @ s2, compute_uv=False).sum()
    return float(nuc**2)


def gaussian_fidelity(rho: FockDensityMatrix, trace_tol: float = 1e-6) -> float:
    """Fidelity of the normalized state with its moment-matched Gaussian."""
    state = rho.normalized()
    ref = gaussian_reference(state)
    if ref.trace < 1 - trace_tol:
        warnings.warn(
            f"Gaussian reference keeps only {ref.trace:.8f} of its trace at cutoff {rho.cutoff}",
            TruncationWarning, stacklevel=2,
        )
    return uhlmann_fidelity(state, ref.normalized())
