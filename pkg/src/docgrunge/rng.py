"""Deterministic counter-based random streams.

Every pipeline node draws from its own substream, keyed by
``(base_seed, phase, node_index)``.  A substream is a splitmix64 sequence
evaluated at an incrementing counter, so generation is stateless apart from
the counter, vectorizes cleanly, and two substreams never interleave: using
more randomness in one node cannot shift the values any other node sees.

All arithmetic is 64-bit integer (wrapping), and uniform doubles are built
from the high 53 bits, so streams are bit-identical across platforms.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_SEED_FOLD = 0x9AE16A3B2F90404F

# numpy scalar copies of the constants; mixing python ints into uint64 arrays
# is promotion-sensitive across numpy versions, so keep everything uint64.
_NP_GAMMA = np.uint64(_GAMMA)
_NP_M1 = np.uint64(0xBF58476D1CE4E5B9)
_NP_M2 = np.uint64(0x94D049BB133111EB)
_NP_S30 = np.uint64(30)
_NP_S27 = np.uint64(27)
_NP_S31 = np.uint64(31)


def mix64(z: int) -> int:
    """Finalizer of splitmix64: avalanche a 64-bit value."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_key(*parts: int) -> int:
    """Fold integer parts into one stream key. Order-sensitive."""
    h = _SEED_FOLD
    for p in parts:
        h = mix64(((h ^ (p & _MASK64)) + _GAMMA) & _MASK64)
    return h


def hash_text(text: str) -> int:
    """FNV-1a over UTF-8 bytes; stable across runs and platforms."""
    h = 0xCBF29CE484222325
    for b in text.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & _MASK64
    return h


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> _NP_S30)
    z = z * _NP_M1
    z = z ^ (z >> _NP_S27)
    z = z * _NP_M2
    return z ^ (z >> _NP_S31)


class Substream:
    """One independent random sequence, identified by a 64-bit key.

    Draws advance an internal counter; value ``i`` of the stream is
    ``mix64(key + (i+1)*GAMMA)`` so any block of values can be produced in
    one vectorized pass.
    """

    __slots__ = ("key", "_counter")

    def __init__(self, key: int):
        self.key = key & _MASK64
        self._counter = 0

    def spawn(self, *parts: int) -> "Substream":
        """Child stream; independent of this stream's counter position."""
        return Substream(derive_key(self.key, *parts))

    @property
    def position(self) -> int:
        return self._counter

    def _block(self, n: int) -> np.ndarray:
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        return _mix_array(np.uint64(self.key) + idx * _NP_GAMMA)

    def u64(self, shape=None) -> np.ndarray | int:
        """Raw 64-bit values."""
        if shape is None:
            return int(self._block(1)[0])
        n = int(np.prod(shape)) if not np.isscalar(shape) else int(shape)
        out = self._block(n)
        return out.reshape(shape) if not np.isscalar(shape) else out

    def uniform(self, shape=None) -> np.ndarray | float:
        """Doubles in [0, 1), from the high 53 bits."""
        raw = self.u64(shape)
        if shape is None:
            return (raw >> 11) * 2.0**-53
        return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def uniform_in(self, low: float, high: float, shape=None):
        """Doubles in [low, high)."""
        u = self.uniform(shape)
        return low + (high - low) * u

    def integers(self, low: int, high: int, shape=None):
        """Integers in [low, high). Plain modulo; bias is ~2**-64 * span."""
        span = high - low
        if span <= 0:
            raise ValueError(f"empty integer range [{low}, {high})")
        raw = self.u64(shape)
        if shape is None:
            return low + raw % span
        offsets = (raw % np.uint64(span)).astype(np.int64)
        return np.int64(low) + offsets

    def choice(self, n: int) -> int:
        """One index in [0, n)."""
        return int(self.integers(0, n))

    def normalish(self, shape=None):
        """Approximate standard normal (Irwin-Hall, 12 uniforms).

        Uses only +,* on dyadic rationals, so results are bit-stable across
        platforms, unlike transcendental-based samplers.
        """
        if shape is None:
            return float(np.sum(self.uniform(12)) - 6.0)
        n = int(np.prod(shape))
        u = self.uniform(n * 12).reshape(n, 12)
        return (u.sum(axis=1) - 6.0).reshape(shape)
