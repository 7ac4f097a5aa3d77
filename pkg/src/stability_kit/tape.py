"""Deterministic randomness tapes with hierarchical stream addressing.

Every random draw in this package comes off a RandomTape. A tape is
identified by a 128-bit root seed plus a path of call indices; the bit
stream at each (seed, path) is the concatenation of keyed BLAKE2b blocks,
so distinct paths never share bits and every draw is reproducible from
the seed alone.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

__all__ = ["Seed", "RandomTape", "derive_stream", "draw_bits", "draw_unit"]

_BLOCK_BYTES = 64
_BLOCK_BITS = _BLOCK_BYTES * 8
_MAX_DRAW_BITS = 1 << 20


@dataclass(frozen=True)
class Seed:
    """Root randomness for an entire run; a 128-bit unsigned integer."""

    value: int

    def __post_init__(self):
        if not isinstance(self.value, int):
            raise TypeError("seed value must be an integer")
        if not 0 <= self.value < (1 << 128):
            raise ValueError("seed value must fit in 128 bits")

    @classmethod
    def from_hex(cls, text: str) -> "Seed":
        s = text.strip().lower()
        if s.startswith("0x"):
            s = s[2:]
        if s == "" or len(s) > 32:
            raise ValueError(f"seed hex must be 1..32 hex digits, got {text!r}")
        return cls(int(s, 16))

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(16, "big")

    def hex(self) -> str:
        return f"{self.value:032x}"


def _pack_path(path: tuple) -> bytes:
    # Fixed 8-byte fields; the message length then encodes the path length,
    # so (path, counter) -> block input is injective.
    return b"".join(i.to_bytes(8, "little") for i in path)


class RandomTape:
    """One addressable bit stream plus a read cursor.

    The identity (root seed, path) is immutable; deriving a child never
    touches the parent. Draws advance this object's private cursor, and
    ``clone()`` copies the cursor, so two clones replay the same sequence.
    Do not share one tape object across threads mid-draw; derive a child
    stream per trial instead.
    """

    __slots__ = ("_key", "_path", "_prefix", "_cursor", "_blk_index", "_blk_big")

    def __init__(self, seed: Seed, path: tuple = ()):
        self._key = seed.to_bytes() if isinstance(seed, Seed) else bytes(seed)
        if len(self._key) != 16:
            raise ValueError("tape key must be 16 bytes")
        self._path = tuple(path)
        self._prefix = _pack_path(self._path)
        self._cursor = 0
        self._blk_index = -1
        self._blk_big = 0

    @property
    def path(self) -> tuple:
        return self._path

    @property
    def offset_bits(self) -> int:
        return self._cursor

    def block(self, index: int) -> bytes:
        """Raw 64-byte block ``index`` of this stream; pure, ignores the cursor."""
        h = hashlib.blake2b(
            self._prefix + index.to_bytes(8, "little"),
            key=self._key,
            digest_size=_BLOCK_BYTES,
        )
        return h.digest()

    def clone(self) -> "RandomTape":
        t = RandomTape.__new__(RandomTape)
        t._key = self._key
        t._path = self._path
        t._prefix = self._prefix
        t._cursor = self._cursor
        t._blk_index = self._blk_index
        t._blk_big = self._blk_big
        return t

    def derive(self, index: int) -> "RandomTape":
        if index < 0:
            raise ValueError("stream index must be non-negative")
        return RandomTape(Seed(int.from_bytes(self._key, "big")), self._path + (index,))

    def seek_bytes(self, offset: int) -> "RandomTape":
        """Move the cursor to a byte position and return self.

        Stream content is a pure function of (seed, path, position), so
        repositioning is always safe; it just changes which bits the next
        read returns.
        """
        if offset < 0:
            raise ValueError("offset must be non-negative")
        self._cursor = offset * 8
        return self

    # -- bit-level reads ---------------------------------------------------

    def _read_int(self, nbits: int) -> int:
        """Next ``nbits`` of the stream as an integer, most significant first."""
        if nbits == 0:
            return 0
        start = self._cursor
        end = start + nbits
        first = start // _BLOCK_BITS
        last = (end - 1) // _BLOCK_BITS
        if first == last == self._blk_index:
            big = self._blk_big
            total = _BLOCK_BITS
        else:
            buf = b"".join(self.block(i) for i in range(first, last + 1))
            big = int.from_bytes(buf, "big")
            total = len(buf) * 8
            self._blk_index = last
            self._blk_big = big & ((1 << _BLOCK_BITS) - 1)
        lo = start - first * _BLOCK_BITS
        self._cursor = end
        return (big >> (total - lo - nbits)) & ((1 << nbits) - 1)

    def draw_bits(self, count: int) -> str:
        if count == 0:
            return ""
        if count < 0 or count > _MAX_DRAW_BITS:
            raise ValueError("draw_bits count must be in [0, 2^20]")
        return format(self._read_int(count), f"0{count}b")

    def draw_unit(self, precision_bits: int) -> float:
        if not 1 <= precision_bits <= 64:
            raise ValueError("precision_bits must be in [1, 64]")
        return self._read_int(precision_bits) / (1 << precision_bits)

    # -- aligned fast paths (internal hot loops) ---------------------------
    # These consume 64-bit fields so the stream layout stays byte aligned
    # and the vectorized replay in the harness can slice it with numpy.

    def u53_int(self) -> int:
        """Top 53 bits of the next 64-bit field."""
        return self._read_int(64) >> 11

    def u53(self) -> float:
        """Uniform float in [0, 1) with 53 fractional bits; consumes 64 bits."""
        return (self._read_int(64) >> 11) * 2.0**-53

    def randint_below(self, bound: int) -> int:
        """Uniform integer in [0, bound); bias below bound * 2^-53."""
        return (self.u53_int() * bound) >> 53

    def read_bytes(self, n: int) -> bytes:
        return self._read_int(8 * n).to_bytes(n, "big")

    def __repr__(self):
        return f"RandomTape(path={list(self._path)}, offset={self._cursor})"


def derive_stream(tape: RandomTape, index: int) -> RandomTape:
    """Child tape at ``parent path ++ [index]``; never perturbs the parent."""
    return tape.derive(index)


def draw_bits(tape: RandomTape, count: int) -> str:
    """Next ``count`` stream bits as a '0'/'1' string; advances the cursor."""
    return tape.draw_bits(count)


def draw_unit(tape: RandomTape, precision_bits: int) -> float:
    """Next ``precision_bits`` bits read as a fixed-point value in [0, 1)."""
    return tape.draw_unit(precision_bits)
