"""Truth-table circuits, their induced output distributions, and brute-force
function inversion.

A circuit here is literally its truth table (the scales involved never
exceed 2^20 inputs), which makes exact induced distributions a bincount
and inversion a single scan for the least preimage. The inverter is
deterministic, so it is replicable for free; an injected-failure variant
exists to stress the analysis that assumes ideal inverter behavior.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .distributions import BOT, FiniteDistribution
from .hashing import GF2AffineHash
from .tape import RandomTape, derive_stream

__all__ = [
    "TruthTableCircuit",
    "InverterOracle",
    "induced_distribution",
    "invert",
    "compose_hash_check",
    "parse_circuit",
    "emit_circuit",
    "random_circuit",
]

_MAX_IN = 20
_MAX_OUT = 16  # base circuits; composed band probes may go up to 32


@dataclass(frozen=True)
class TruthTableCircuit:
    in_bits: int
    out_bits: int
    table: np.ndarray  # uint32, one entry per input value, length 2^in_bits

    def __post_init__(self):
        if not 1 <= self.in_bits <= _MAX_IN:
            raise ValueError(f"circuit in_bits must be in [1, {_MAX_IN}]")
        if not 1 <= self.out_bits <= 32:
            raise ValueError("circuit out_bits must be in [1, 32]")
        t = np.asarray(self.table, dtype=np.uint32)
        if t.shape != (1 << self.in_bits,):
            raise ValueError("table length must be exactly 2^in_bits")
        if t.size and int(t.max()) >= (1 << self.out_bits):
            raise ValueError("table entry wider than out_bits")
        object.__setattr__(self, "table", t)
        t.setflags(write=False)

    def eval_int(self, r: int) -> int:
        return int(self.table[r])

    def fingerprint(self) -> bytes:
        h = hashlib.blake2b(self.table.tobytes(), digest_size=16)
        return bytes([self.in_bits, self.out_bits]) + h.digest()


@dataclass
class InverterOracle:
    """Brute-force least-preimage inverter, optionally with injected failures.

    The plain strategy never fails. The failure strategy marks a fixed
    round(failure_rate * #image targets) subset of the image as failing,
    chosen by a shuffle driven entirely by the tape passed to invert, so
    the failing set is deterministic per seed.
    """

    strategy: str = "brute-force"
    failure_rate: float = 0.0
    _fail_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.strategy not in ("brute-force", "brute-force-with-failure"):
            raise ValueError("unknown inverter strategy")
        if self.strategy == "brute-force" and self.failure_rate != 0.0:
            raise ValueError("brute-force strategy has zero failure rate")
        if not 0.0 <= self.failure_rate <= 1.0:
            raise ValueError("failure_rate must be in [0, 1]")

    def failing_targets(self, c: TruthTableCircuit, tape: RandomTape) -> frozenset:
        if self.strategy == "brute-force" or self.failure_rate == 0.0:
            return frozenset()
        key = (c.fingerprint(), tape.path)
        hit = self._fail_cache.get(key)
        if hit is not None:
            return hit
        image = sorted(set(int(v) for v in c.table))
        want = round(self.failure_rate * len(image))
        shuffler = derive_stream(tape, 0)
        # Fisher-Yates on the sorted image, then take a prefix
        for i in range(len(image) - 1, 0, -1):
            j = shuffler.randint_below(i + 1)
            image[i], image[j] = image[j], image[i]
        failing = frozenset(image[:want])
        self._fail_cache[key] = failing
        return failing


def induced_distribution(c: TruthTableCircuit) -> FiniteDistribution:
    """Output law under a uniform input; exact rational probabilities."""
    counts = np.bincount(c.table, minlength=1 << c.out_bits)
    denom = 1 << c.in_bits
    support = [(int(y), Fraction(int(n), denom)) for y, n in enumerate(counts) if n]
    return FiniteDistribution([y for y, _ in support], [p for _, p in support])


def invert_int(oracle: InverterOracle, c: TruthTableCircuit, y: int, tape: RandomTape):
    """Least preimage of y as an integer, or BOT."""
    if y in oracle.failing_targets(c, tape):
        return BOT
    hits = np.nonzero(c.table == np.uint32(y))[0]
    if len(hits) == 0:
        return BOT
    return int(hits[0])


def invert(oracle: InverterOracle, c: TruthTableCircuit, y: str, tape: RandomTape):
    """Lexicographically least m-bit preimage string of the n-bit target y, or BOT."""
    if len(y) != c.out_bits:
        raise ValueError("target length must equal circuit out_bits")
    r = invert_int(oracle, c, int(y, 2), tape)
    return BOT if r is BOT else format(r, f"0{c.in_bits}b")


def compose_hash_check(
    c: TruthTableCircuit, h1: GF2AffineHash, h2: GF2AffineHash, ell: int
) -> TruthTableCircuit:
    """Circuit r -> h1(C(r)) || h2(r), the inversion target of the band probe.

    h1 must hash the circuit's n output bits down to ell+k bits and h2 the
    m input bits to m-ell+k, producing a combined m -> m+2k table.
    """
    m, n = c.in_bits, c.out_bits
    if not 0 <= ell <= m:
        raise ValueError("level index out of range")
    if h1.in_bits != n:
        raise ValueError(f"h1 dimension mismatch: expected in_bits={n}, got {h1.in_bits}")
    k = h1.out_bits - ell
    if k < 0:
        raise ValueError(f"h1 dimension mismatch: out_bits={h1.out_bits} below level {ell}")
    if h2.in_bits != m:
        raise ValueError(f"h2 dimension mismatch: expected in_bits={m}, got {h2.in_bits}")
    if h2.out_bits != m - ell + k:
        raise ValueError(
            f"h2 dimension mismatch: expected out_bits={m - ell + k}, got {h2.out_bits}"
        )
    rs = np.arange(1 << m, dtype=np.uint64)
    left = h1.apply_vector(c.table.astype(np.uint64))
    right = h2.apply_vector(rs)
    table = (left << np.uint64(h2.out_bits)) | right
    out_bits = h1.out_bits + h2.out_bits
    return TruthTableCircuit(m, out_bits, table.astype(np.uint32))


def parse_circuit(text: str) -> TruthTableCircuit:
    lines = text.splitlines()
    if len(lines) < 2:
        raise ValueError("line 1: truncated circuit file")
    if lines[0].strip() != "CIRC 1":
        raise ValueError("line 1: malformed header, expected 'CIRC 1'")
    parts = lines[1].split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise ValueError("line 2: malformed dimensions, expected '<m> <n>'")
    m, n = int(parts[0]), int(parts[1])
    if not 1 <= m <= _MAX_IN or not 1 <= n <= _MAX_OUT:
        raise ValueError("line 2: dimensions out of range")
    rows = lines[2:]
    while rows and rows[-1] == "":
        rows.pop()
    if len(rows) != 1 << m:
        lineno = 3 + min(len(rows), 1 << m)
        raise ValueError(f"line {lineno}: expected {1 << m} rows, got {len(rows)}")
    table = np.zeros(1 << m, dtype=np.uint32)
    for i, row in enumerate(rows):
        lineno = i + 3
        if not row or any(ch not in "01" for ch in row):
            raise ValueError(f"line {lineno}: entry is not a binary string")
        if len(row) > n:
            raise ValueError(f"line {lineno}: entry wider than {n} bits")
        table[i] = int(row, 2)
    return TruthTableCircuit(m, n, table)


def emit_circuit(c: TruthTableCircuit) -> str:
    rows = "\n".join(format(int(v), f"0{c.out_bits}b") for v in c.table)
    return f"CIRC 1\n{c.in_bits} {c.out_bits}\n{rows}\n"


def random_circuit(m: int, n: int, tape: RandomTape) -> TruthTableCircuit:
    """Uniform truth table drawn off the tape; two bytes consumed per entry."""
    raw = tape.read_bytes(2 << m)
    vals = np.frombuffer(raw, dtype=">u2").astype(np.uint32) & np.uint32((1 << n) - 1)
    return TruthTableCircuit(m, n, vals)
