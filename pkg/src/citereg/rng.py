"""Deterministic, splittable random streams.

A stream is keyed by ``(master_seed, stream_id)`` and backed by the Philox
counter-based generator, so any stream can be opened in O(1) without
advancing through the ones before it.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_TWO_PI = 2.0 * math.pi


class RngStream:
    """One independent stream of uniform and standard-normal variates."""

    __slots__ = ("master_seed", "stream_id", "_gen")

    def __init__(self, master_seed: int, stream_id: int = 0):
        if stream_id < 0:
            raise ValueError("stream_id must be non-negative")
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        key = np.array([self.master_seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self) -> str:
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"

    def uniforms(self, size: int) -> np.ndarray:
        """``size`` uniform variates on [0, 1)."""
        return self._gen.random(size)

    def normals(self, size: int) -> np.ndarray:
        """``size`` standard normal variates (Box-Muller on paired uniforms)."""
        pairs = (size + 1) // 2
        u = self._gen.random(2 * pairs)
        radius = np.sqrt(-2.0 * np.log1p(-u[:pairs]))
        angle = _TWO_PI * u[pairs:]
        z = np.concatenate((radius * np.cos(angle), radius * np.sin(angle)))
        return z[:size]

    def next_uniform(self) -> float:
        return float(self._gen.random())

    def next_normal(self) -> float:
        return float(self.normals(1)[0])


def new_stream(master_seed: int, stream_id: int = 0) -> RngStream:
    return RngStream(master_seed, stream_id)


def next_uniform(s: RngStream) -> float:
    return s.next_uniform()


def next_normal(s: RngStream) -> float:
    return s.next_normal()
