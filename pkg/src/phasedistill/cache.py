"""
On-disk cache of iterated states, keyed by a content hash of the parameters.

File layout (little endian):

    8s   magic b"PDRHO\\x00\\x00\\x01"
    u32  format version
    u32  cutoff
    32s  sha256 of the producing state key
    f64  trace deficit of the producing step
    f64  (cutoff+1)^2 complex entries as (re, im) pairs, row major
    32s  sha256 of everything above

Any mismatch makes the entry a miss.
"""

from __future__ import annotations

import hashlib
import logging
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .fock import FockDensityMatrix

log = logging.getLogger(__name__)

MAGIC = b"PDRHO\x00\x00\x01"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sII32sd")
_DIGEST = 32


def encode_state(key: str, rho: FockDensityMatrix, deficit: float) -> bytes:
    head = _HEADER.pack(MAGIC, FORMAT_VERSION, rho.cutoff, bytes.fromhex(key), float(deficit))
    payload = np.ascontiguousarray(rho.elements, dtype="<c16").tobytes()
    body = head + payload
    return body + hashlib.sha256(body).digest()


def decode_state(key: str, blob: bytes) -> tuple[FockDensityMatrix, float] | None:
    if len(blob) < _HEADER.size + _DIGEST:
        return None
    body, digest = blob[:-_DIGEST], blob[-_DIGEST:]
    if hashlib.sha256(body).digest() != digest:
        return None
    magic, version, cutoff, stored_key, deficit = _HEADER.unpack_from(body)
    if magic != MAGIC or version != FORMAT_VERSION or stored_key != bytes.fromhex(key):
        return None
    dim = cutoff + 1
    payload = body[_HEADER.size:]
    if len(payload) != 16 * dim * dim:
        return None
    elements = np.frombuffer(payload, dtype="<c16").reshape(dim, dim).astype(complex)
    return FockDensityMatrix(elements, f"cached:{key[:12]}"), deficit


class StateCache:
    """Directory of ``<key>.rho`` files; safe for concurrent writers."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0

    def path(self, key: str) -> Path:
        return self.root / f"{key}.rho"

    def get(self, key: str):
        try:
            blob = self.path(key).read_bytes()
        except OSError:
            self.misses += 1
            return None
        try:
            hit = decode_state(key, blob)
        except (struct.error, ValueError):
            hit = None
        if hit is None:
            log.warning("ignoring unreadable cache entry %s", self.path(key).name)
            self.misses += 1
            return None
        self.hits += 1
        return hit

    def put(self, key: str, rho: FockDensityMatrix, deficit: float) -> None:
        blob = encode_state(key, rho, deficit)
        fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(blob)
            os.replace(tmp, self.path(key))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
