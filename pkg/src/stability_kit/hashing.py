"""Pairwise-independent affine hashing over GF(2).

Hash h(x) = A.x xor b with a uniformly drawn bit matrix and offset. Rows
are bit-packed into machine words; applying a hash is a word AND, a
popcount, and a parity per output bit. The offset term matters: without
it the family is only pairwise independent away from x = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .tape import RandomTape

__all__ = ["GF2AffineHash", "sample_hash", "apply", "enumerate_family", "pairwise_joint_counts"]


def _check_dims(in_bits: int, out_bits: int):
    if not (1 <= in_bits <= 64) or not (1 <= out_bits <= 64):
        raise ValueError("hash dimension out of range")


@dataclass(frozen=True)
class GF2AffineHash:
    in_bits: int
    out_bits: int
    rows: tuple  # rows[j] is the bit mask of matrix row j, row 0 first
    offset: int  # out_bits wide, row-0 bit most significant

    def __post_init__(self):
        _check_dims(self.in_bits, self.out_bits)
        if len(self.rows) != self.out_bits:
            raise ValueError("row count must equal out_bits")
        for r in self.rows:
            if not 0 <= r < (1 << self.in_bits):
                raise ValueError("row mask wider than in_bits")
        if not 0 <= self.offset < (1 << self.out_bits):
            raise ValueError("offset wider than out_bits")

    @classmethod
    def from_lists(cls, matrix, offset_bits) -> "GF2AffineHash":
        """Build from explicit 0/1 lists, first list element = leftmost bit."""
        rows = tuple(int("".join(str(v) for v in row), 2) for row in matrix)
        off = int("".join(str(v) for v in offset_bits), 2)
        return cls(len(matrix[0]), len(matrix), rows, off)

    def apply_int(self, x: int) -> int:
        out = 0
        for row in self.rows:
            out = (out << 1) | ((row & x).bit_count() & 1)
        return out ^ self.offset

    def apply_vector(self, xs: np.ndarray) -> np.ndarray:
        """Hash every element of a uint64 array at once."""
        out = np.zeros(len(xs), dtype=np.uint64)
        for row in self.rows:
            bit = np.bitwise_count(xs & np.uint64(row)) & np.uint64(1)
            out = (out << np.uint64(1)) | bit
        return out ^ np.uint64(self.offset)


def sample_hash(in_bits: int, out_bits: int, tape: RandomTape) -> GF2AffineHash:
    """Uniform (A, b) off the tape; rows first, then the offset."""
    _check_dims(in_bits, out_bits)
    rows = tuple(tape._read_int(in_bits) for _ in range(out_bits))
    return GF2AffineHash(in_bits, out_bits, rows, tape._read_int(out_bits))


def apply(h: GF2AffineHash, x: str) -> str:
    if len(x) != h.in_bits:
        raise ValueError("hash input length mismatch")
    return format(h.apply_int(int(x, 2) if x else 0), f"0{h.out_bits}b")


def enumerate_family(in_bits: int, out_bits: int) -> Iterator[GF2AffineHash]:
    """Every (A, b) in the family; 2^(in*out + out) members."""
    _check_dims(in_bits, out_bits)
    row_space = 1 << in_bits
    for packed in range(row_space ** out_bits):
        rows, rest = [], packed
        for _ in range(out_bits):
            rows.append(rest % row_space)
            rest //= row_space
        for off in range(1 << out_bits):
            yield GF2AffineHash(in_bits, out_bits, tuple(rows), off)


def pairwise_joint_counts(in_bits: int, out_bits: int) -> np.ndarray:
    """Exact joint hit counts over the full family.

    Returns an integer array J with J[x, y, u, v] = #{(A,b) : h(x)=u, h(y)=v}
    for all ordered input pairs, computed by enumerating every matrix and
    folding the offset in as an XOR of both coordinates. Pairwise
    independence says every entry with x != y equals |family| / 2^(2*out).
    """
    _check_dims(in_bits, out_bits)
    n_in = 1 << in_bits
    n_out = 1 << out_bits
    xs = np.arange(n_in, dtype=np.uint64)
    # parity[r, x] of r & x for all row masks r
    parity = (np.bitwise_count(xs[:, None] & xs[None, :]) & 1).astype(np.uint64)
    n_mat = n_in**out_bits
    a_idx = np.arange(n_mat, dtype=np.uint64)
    hx = np.zeros((n_mat, n_in), dtype=np.uint64)
    for j in range(out_bits):
        row_j = (a_idx // (n_in**j)) % n_in
        hx |= parity[row_j] << np.uint64(out_bits - 1 - j)
    joint = np.zeros((n_in, n_in, n_out, n_out), dtype=np.int64)
    for x in range(n_in):
        vx = hx[:, x]
        for y in range(n_in):
            vy = hx[:, y]
            for b in range(n_out):
                idx = ((vx ^ np.uint64(b)) << np.uint64(out_bits)) | (vy ^ np.uint64(b))
                joint[x, y] += np.bincount(idx.astype(np.int64), minlength=n_out * n_out).reshape(
                    n_out, n_out
                )
    return joint
