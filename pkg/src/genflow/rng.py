"""Deterministic counter-based RNG with named substreams.

One master seed expands into an arbitrary tree of independent streams.
A stream's key is sha256 over (parent key, label); draw number i is
sha256(key, i). Because every stream is addressed by its label path and
draws are counter-indexed, inserting a new derived stream or taking extra
draws on one stream can never perturb any sibling stream — which is what
keeps whole-run transcripts reproducible when calls are added.
"""

from __future__ import annotations

import hashlib
from typing import Sequence, TypeVar

_T = TypeVar("_T")

_ROOT_PREFIX = b"genflow.rng.v1:"
_TWO_64 = 2**64


class Substream:
    """A single deterministic stream; derive() splits off children."""

    __slots__ = ("_key", "_counter")

    def __init__(self, seed: int | None = None, *, _key: bytes | None = None) -> None:
        if _key is None:
            if seed is None:
                raise ValueError("a master seed is required for a root stream")
            _key = hashlib.sha256(_ROOT_PREFIX + str(int(seed)).encode("ascii")).digest()
        self._key = _key
        self._counter = 0

    def derive(self, *labels: object) -> "Substream":
        """Child stream addressed by the given label path."""
        key = self._key
        for label in labels:
            encoded = str(label).encode("utf-8")
            key = hashlib.sha256(key + len(encoded).to_bytes(4, "big") + encoded).digest()
        return Substream(_key=key)

    def _next_u64(self) -> int:
        block = hashlib.sha256(self._key + self._counter.to_bytes(8, "big")).digest()
        self._counter += 1
        return int.from_bytes(block[:8], "big")

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        return self._next_u64() / _TWO_64

    def randint(self, low: int, high: int) -> int:
        """Uniform integer in [low, high] inclusive.

        Modulo reduction; bias is < span/2^64, negligible for the spans
        used here (all far below 2^32).
        """
        if low > high:
            raise ValueError("low must be <= high")
        return low + self._next_u64() % (high - low + 1)

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def choice(self, seq: Sequence[_T]) -> _T:
        if not seq:
            raise ValueError("cannot choose from an empty sequence")
        return seq[self.randint(0, len(seq) - 1)]

    def seed64(self) -> int:
        """One u64 draw, for handing an integer seed to a sub-component."""
        return self._next_u64()
