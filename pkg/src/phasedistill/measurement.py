"""
Windowed homodyne conditioning: POVM element for |q(theta)| <= X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import FockDensityMatrix, loss_kraus_weights, quadrature_wavefunctions

RANDOMIZED = "randomized"


@dataclass(frozen=True)
class HomodynePOVM:
    elements: np.ndarray
    window: float = math.inf
    eta: float = 1.0
    angle: float | str = 0.0

    def __post_init__(self):
        C = np.array(self.elements, dtype=complex)
        C.setflags(write=False)
        object.__setattr__(self, "elements", C)

    @property
    def cutoff(self) -> int:
        return self.elements.shape[0] - 1

    @property
    def randomized(self) -> bool:
        return self.angle == RANDOMIZED

    def eigenvalues(self) -> np.ndarray:
        C = self.elements
        return np.linalg.eigvalsh(0.5 * (C + C.conj().T))


def _window_limit(cutoff: int) -> float:
    # Hermite functions up to `cutoff` are below 1e-16 beyond this point.
    return math.sqrt(2 * cutoff + 1) + 10.0


def window_rule(X: float, cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [-X, X].

    The window is clipped where all Hermite functions up to ``cutoff`` have
    decayed, split into panels no wider than 1, and given at least
    max(64, 4*cutoff) nodes in total.
    """
    half = min(X, _window_limit(cutoff))
    panels = max(1, int(math.ceil(2 * half)))
    per_panel = max(24, int(math.ceil(max(64, 4 * cutoff) / panels)))
    t, w = np.polynomial.legendre.leggauss(per_panel)
    edges = np.linspace(-half, half, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    hw = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + hw[:, None] * t).ravel()
    weights = (hw[:, None] * w).ravel()
    return nodes, weights


def window_povm(X: float, cutoff: int) -> HomodynePOVM:
    """C[m, n] = integral over [-X, X] of <m|x><x|n> dx."""
    if not X > 0:
        raise ValueError(f"window half-width must be positive, got {X}")
    dim = cutoff + 1
    if math.isinf(X):
        return HomodynePOVM(np.eye(dim), window=math.inf)
    x, w = window_rule(X, cutoff)
    psi = quadrature_wavefunctions(cutoff, x)
    C = (psi * w) @ psi.T
    m, n = np.indices(C.shape)
    C[(m + n) % 2 == 1] = 0.0
    C = 0.5 * (C + C.T)
    return HomodynePOVM(C, window=X)


def identity_povm(cutoff: int) -> HomodynePOVM:
    return HomodynePOVM(np.eye(cutoff + 1), window=math.inf)


def apply_efficiency(povm: HomodynePOVM, eta: float) -> HomodynePOVM:
    """Detector inefficiency as a transmittance-eta loss before an ideal detector."""
    B = loss_kraus_weights(povm.cutoff + 1, eta)
    if eta == 1:
        return povm
    C = povm.elements
    dim = C.shape[0]
    out = np.zeros_like(C)
    for a in range(dim):
        w = B[a:, a]
        out[a:, a:] += np.outer(w, w) * C[: dim - a, : dim - a]
    return HomodynePOVM(out, window=povm.window, eta=povm.eta * eta, angle=povm.angle)


def rotate_povm(povm: HomodynePOVM, theta: float) -> HomodynePOVM:
    """Condition on q(theta) = x cos(theta) + p sin(theta) instead of x."""
    if povm.randomized:
        return povm
    m, n = np.indices(povm.elements.shape)
    C = povm.elements * np.exp(1j * (m - n) * theta)
    return HomodynePOVM(C, window=povm.window, eta=povm.eta, angle=povm.angle + theta)


def randomize_povm(povm: HomodynePOVM) -> HomodynePOVM:
    """Average over a uniformly random quadrature angle: keep the diagonal."""
    C = np.diag(np.diag(povm.elements))
    return HomodynePOVM(C, window=povm.window, eta=povm.eta, angle=RANDOMIZED)


def conditioning_povm(X: float, cutoff: int, eta: float = 1.0,
                      angle: float | str = 0.0) -> HomodynePOVM:
    povm = apply_efficiency(window_povm(X, cutoff), eta)
    if angle == RANDOMIZED:
        return randomize_povm(povm)
    return rotate_povm(povm, float(angle))


def acceptance_probability(rho: FockDensityMatrix, povm: HomodynePOVM) -> float:
    if rho.dim != povm.elements.shape[0]:
        raise ValueError("state and POVM cutoffs differ")
    # Tr[rho C] = sum_mn rho[m, n] C[n, m]
    return float(np.sum(rho.elements * povm.elements.T).real)
