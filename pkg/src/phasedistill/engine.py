"""
Two-copy purification map in the Fock basis.

Both copies pass a balanced beamsplitter; mode 1 is projected on the
conditioning POVM and mode 2 is kept. The beamsplitter conserves photon
number, so the contraction runs block by block over the total photon number
on each side of the two-mode density matrix.
"""

from __future__ import annotations

import numpy as np

from .fock import BeamsplitterTensor, FockDensityMatrix
from .measurement import HomodynePOVM


def _mix(rho: np.ndarray, bs: BeamsplitterTensor) -> np.ndarray:
    """Two-mode density matrix after the beamsplitter, W[k, p, l, q].

    k, l index the measured mode and p, q the kept mode. Entries whose
    photon numbers exceed the cutoff are dropped.
    """
    c = bs.cutoff
    dim = c + 1
    # left action: W1[k, p, n1, n2] = sum_m1 B^M[k, m1] rho[m1, n1] rho[M-m1, n2]
    left = np.zeros((dim, dim, dim, dim), dtype=complex)
    for M, (block, lo) in enumerate(zip(bs.blocks, bs.offsets)):
        occ = np.arange(lo, M - lo + 1)
        pairs = rho[occ][:, :, None] * rho[M - occ][:, None, :]
        left[occ, M - occ] = np.tensordot(block, pairs, axes=1)
    # right action with the conjugate (real) block on (n1, n2)
    out = np.zeros_like(left)
    for L, (block, lo) in enumerate(zip(bs.blocks, bs.offsets)):
        occ = np.arange(lo, L - lo + 1)
        cols = left[:, :, occ, L - occ]
        out[:, :, occ, L - occ] = cols @ block.T
    return out


def purify_step(rho: FockDensityMatrix, bs: BeamsplitterTensor,
                povm: HomodynePOVM) -> tuple[FockDensityMatrix, float]:
    """One unnormalized purification step on two copies of ``rho``.

    Returns the conditional output state, whose trace is the joint weight
    Tr[rho]^2 times the acceptance probability, and the two-mode trace lost to
    truncation after the beamsplitter.
    """
    if not (rho.cutoff == bs.cutoff == povm.cutoff):
        raise ValueError(
            f"cutoff mismatch: state {rho.cutoff}, beamsplitter {bs.cutoff}, "
            f"POVM {povm.cutoff}"
        )
    W = _mix(rho.elements, bs)
    # kept-mode state: sum_{k,l} C[l, k] W[k, p, l, q]
    out = np.einsum("lk,kplq->pq", povm.elements, W, optimize=True)
    out = 0.5 * (out + out.conj().T)
    kept = float(np.einsum("kpkp->", W).real)
    deficit = rho.trace**2 - kept
    return FockDensityMatrix(out, f"{rho.label}|purify"), deficit
