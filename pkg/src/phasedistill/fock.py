"""
Truncated Fock-space states and single-mode channels.

Quadrature convention: x = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2)),
so the vacuum has Vx = Vp = 1/2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

DEFAULT_CUTOFF = 40


class TruncationWarning(UserWarning):
    """Raised when a truncated state loses noticeable trace."""


@dataclass(frozen=True)
class FockDensityMatrix:
    """Single-mode density matrix truncated at ``cutoff`` photons.

    The trace is allowed to be below one; it carries the weight of a
    conditional (post-selected) preparation.
    """

    elements: np.ndarray
    label: str = ""

    def __post_init__(self):
        rho = np.array(self.elements, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError(f"density matrix must be square, got {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "elements", rho)

    @property
    def cutoff(self) -> int:
        return self.elements.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.elements).real)

    def normalized(self) -> "FockDensityMatrix":
        tr = self.trace
        if tr <= 0:
            raise ValueError("cannot normalize a state with non-positive trace")
        return FockDensityMatrix(self.elements / tr, self.label)

    def scaled(self, c: float) -> "FockDensityMatrix":
        return FockDensityMatrix(self.elements * c, self.label)

    def with_label(self, label: str) -> "FockDensityMatrix":
        return FockDensityMatrix(self.elements, label)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        rho = self.elements
        return bool(np.max(np.abs(rho - rho.conj().T), initial=0.0) <= tol)

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.elements + self.elements.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def odd_coherence(self) -> float:
        """Largest |rho[m, n]| with m - n odd."""
        m, n = np.indices(self.elements.shape)
        mask = (m - n) % 2 == 1
        return float(np.max(np.abs(self.elements[mask]), initial=0.0))


@dataclass(frozen=True)
class SqueezedVacuumSpec:
    """Zero-mean Gaussian state with diagonal covariance diag(Vx, Vp)."""

    Vx: float
    Vp: float

    def __post_init__(self):
        if not (self.Vx > 0 and self.Vp > 0):
            raise ValueError(f"variances must be positive, got Vx={self.Vx}, Vp={self.Vp}")
        if self.Vx * self.Vp < 0.25 - 1e-12:
            raise ValueError(
                f"Vx*Vp = {self.Vx * self.Vp:.6g} violates the uncertainty bound 1/4"
            )

    @property
    def purity(self) -> float:
        return 1.0 / (2.0 * math.sqrt(self.Vx * self.Vp))


@dataclass(frozen=True)
class PhaseNoiseModel:
    """Gaussian random phase with standard deviation ``sigma`` (radians)."""

    sigma: float

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")

    def fourier(self, n) -> np.ndarray:
        """Characteristic function f_n = exp(-n^2 sigma^2 / 2)."""
        n = np.asarray(n, dtype=float)
        return np.exp(-0.5 * n**2 * self.sigma**2)

    def density(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        if self.sigma == 0:
            raise ValueError("density undefined for sigma = 0")
        return np.exp(-0.5 * (phi / self.sigma) ** 2) / math.sqrt(2 * math.pi * self.sigma**2)


@dataclass(frozen=True)
class BeamsplitterTensor:
    """Fock-basis coefficients of the balanced beamsplitter.

    ``blocks[M]`` is the orthogonal matrix acting on the span of
    {|k, M-k>} (row: output k, column: input m1) for total photon number M.
    Only the rows and columns with both mode occupations <= cutoff are stored;
    ``offsets[M]`` gives the smallest occupation present in the block.
    """

    cutoff: int
    blocks: tuple = field(repr=False)
    offsets: tuple = field(repr=False)

    def coeff(self, m1: int, m2: int, a: int) -> float:
        """A^a_{m1,m2}: amplitude of |m1, m2> -> |m1 + a, m2 - a>."""
        M = m1 + m2
        k = m1 + a
        lo = self.offsets[M]
        if not (lo <= m1 <= M - lo and lo <= k <= M - lo):
            return 0.0
        return float(self.blocks[M][k - lo, m1 - lo])

    def full_block(self, M: int) -> np.ndarray:
        """Unitary block for total photon number M (requires M <= cutoff)."""
        if M > self.cutoff:
            raise ValueError("full block only available for M <= cutoff")
        return self.blocks[M]


def _bs_amplitude(m1: int, m2: int, a: int) -> float:
    # The d-sum alternates in sign and is an exact integer; evaluating it with
    # Python ints avoids the cancellation that ruins floating point at M > 30.
    s = 0
    for d in range(max(0, -a), min(m1, m2 - a) + 1):
        term = math.comb(m1, d) * math.comb(m2, d + a)
        s += -term if (d + a) % 2 else term
    if s == 0:
        return 0.0
    M = m1 + m2
    log_mag = (
        math.log(abs(s))
        + 0.5 * (math.lgamma(m1 + a + 1) + math.lgamma(m2 - a + 1)
                 - math.lgamma(m1 + 1) - math.lgamma(m2 + 1))
        - 0.5 * M * math.log(2.0)
    )
    return math.copysign(math.exp(log_mag), s)


@lru_cache(maxsize=8)
def bs_tensor(cutoff: int) -> BeamsplitterTensor:
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    blocks, offsets = [], []
    for M in range(2 * cutoff + 1):
        lo = max(0, M - cutoff)
        hi = min(M, cutoff)
        occ = range(lo, hi + 1)
        block = np.empty((len(occ), len(occ)))
        for j, m1 in enumerate(occ):
            for i, k in enumerate(occ):
                block[i, j] = _bs_amplitude(m1, M - m1, k - m1)
        block.setflags(write=False)
        blocks.append(block)
        offsets.append(lo)
    return BeamsplitterTensor(cutoff, tuple(blocks), tuple(offsets))


def squeezed_vacuum_dm(spec: SqueezedVacuumSpec, cutoff: int = DEFAULT_CUTOFF,
                       warn_tol: float = 1e-8) -> FockDensityMatrix:
    """Fock matrix of the zero-mean Gaussian state with CM diag(Vx, Vp).

    Works for any Vx*Vp >= 1/4, so squeezed thermal states are covered too.
    Elements come from the Taylor coefficients of the Q-function generating
    function; all factorials are handled in log space.
    """
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    vx = spec.Vx + 0.5
    vp = spec.Vp + 0.5
    U = 1.0 - 0.5 / vx - 0.5 / vp
    T = 0.25 / vx - 0.25 / vp
    if U < 0:
        # pure states give U = 0 up to rounding
        U = 0.0
    dim = cutoff + 1
    lg = [math.lgamma(k + 1) for k in range(dim + 1)]
    log_u = math.log(U) if U > 0 else None
    log_t = math.log(abs(T)) if T != 0 else None
    sign_t = -1.0 if T > 0 else 1.0  # sign of (-T)
    prefactor = -0.5 * math.log(vx * vp)

    rho = np.zeros((dim, dim))
    for m in range(dim):
        for n in range(m % 2, m + 1, 2):
            h = (m - n) // 2
            total = 0.0
            for j in range(n // 2 + 1):
                pu = n - 2 * j
                pt = h + 2 * j
                if pu > 0 and log_u is None:
                    continue
                if pt > 0 and log_t is None:
                    continue
                log_term = (0.5 * (lg[m] + lg[n]) + prefactor
                            - lg[j] - lg[pu] - lg[j + h])
                if pu:
                    log_term += pu * log_u
                if pt:
                    log_term += pt * log_t
                total += math.exp(log_term)
            value = total * (sign_t ** h)
            rho[m, n] = value
            rho[n, m] = value
    out = FockDensityMatrix(rho, label=f"gaussian(Vx={spec.Vx:g},Vp={spec.Vp:g})")
    deficit = 1.0 - out.trace
    if deficit > warn_tol:
        warnings.warn(
            f"cutoff {cutoff} keeps only 1 - {deficit:.3e} of the trace",
            TruncationWarning, stacklevel=2,
        )
    return out


def vacuum(cutoff: int = DEFAULT_CUTOFF) -> FockDensityMatrix:
    rho = np.zeros((cutoff + 1, cutoff + 1))
    rho[0, 0] = 1.0
    return FockDensityMatrix(rho, label="vacuum")


def fock_state(n: int, cutoff: int = DEFAULT_CUTOFF) -> FockDensityMatrix:
    if not 0 <= n <= cutoff:
        raise ValueError("photon number outside truncated space")
    rho = np.zeros((cutoff + 1, cutoff + 1))
    rho[n, n] = 1.0
    return FockDensityMatrix(rho, label=f"fock({n})")


def dephase(rho: FockDensityMatrix, noise: PhaseNoiseModel) -> FockDensityMatrix:
    """Average over Gaussian phase kicks: rho[m, n] *= f_{m-n}."""
    m, n = np.indices(rho.elements.shape)
    return FockDensityMatrix(rho.elements * noise.fourier(m - n),
                             f"{rho.label}|dephase({noise.sigma:g})")


def phase_rotate(rho: FockDensityMatrix, theta: float) -> FockDensityMatrix:
    """rho[m, n] *= exp(i (n - m) theta).

    The rotated state's x quadrature carries the statistics of
    x cos(theta) + p sin(theta) of the input.
    """
    m, n = np.indices(rho.elements.shape)
    return FockDensityMatrix(rho.elements * np.exp(1j * (n - m) * theta),
                             f"{rho.label}|rotate({theta:g})")


def loss_kraus_weights(dim: int, eta: float) -> np.ndarray:
    """B[m, a] = sqrt(binom(m, a)) eta^((m-a)/2) (1-eta)^(a/2), zero for a > m."""
    if not 0 < eta <= 1:
        raise ValueError(f"efficiency must lie in (0, 1], got {eta}")
    B = np.zeros((dim, dim))
    for m in range(dim):
        for a in range(m + 1):
            B[m, a] = math.sqrt(math.comb(m, a)) * eta ** ((m - a) / 2) * (1 - eta) ** (a / 2)
    return B


def attenuate(rho: FockDensityMatrix, eta: float) -> FockDensityMatrix:
    """Pure-loss channel with transmittance ``eta``."""
    B = loss_kraus_weights(rho.dim, eta)
    if eta == 1:
        return rho
    dim = rho.dim
    src = rho.elements
    out = np.zeros_like(src)
    for a in range(dim):
        w = B[a:, a]
        out[: dim - a, : dim - a] += np.outer(w, w) * src[a:, a:]
    return FockDensityMatrix(out, f"{rho.label}|loss({eta:g})")


def quadrature_wavefunctions(nmax: int, x) -> np.ndarray:
    """<x|n> for n = 0..nmax, shape (nmax + 1, *x.shape).

    Uses the normalized Hermite-function recurrence, so no factorials appear.
    """
    x = np.asarray(x, dtype=float)
    psi = np.empty((nmax + 1,) + x.shape)
    psi[0] = math.pi ** -0.25 * np.exp(-0.5 * x**2)
    if nmax >= 1:
        psi[1] = math.sqrt(2.0) * x * psi[0]
    for n in range(1, nmax):
        psi[n + 1] = (math.sqrt(2.0 / (n + 1)) * x * psi[n]
                      - math.sqrt(n / (n + 1)) * psi[n - 1])
    return psi


def quadrature_wavefunction(n: int, x: float) -> float:
    if n < 0:
        raise ValueError("n must be non-negative")
    return float(quadrature_wavefunctions(n, x)[n])
