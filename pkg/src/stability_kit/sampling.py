"""Correlated sampling.

Two samplers live here. ``consistent_sample`` works on an explicit finite
distribution: a shared-tape rejection loop whose marginal is exact and
whose disagreement probability across two distributions is at most
2*d/(1+d) for d the total variation distance. ``sample_implicit`` never
sees probabilities at all: it samples the output distribution of a
truth-table circuit using only circuit evaluations and a function
inversion oracle, hashing outputs into a slack band and accepting a
candidate when its inner-trial frequency lands in that band.

Randomness layout: the implicit sampler reads two child streams of its
tape. Stream 0 holds one fixed-width header record per outer round (the
band scale, the level, the output hash, and the target cell); stream 1
holds one fixed-width record per inner trial, T2 records per round, at a
byte position computed from the round index. Every record position is a
pure function of (round, trial), so two circuits run against clones of
one tape consume identical bits at every logical step no matter how
their rounds resolve, and rounds whose candidate set is empty can skip
their trial records outright without disturbing anything downstream.

Budgets: the theory-faithful parameters grow like 2^k with k tied to
log(m/nu) and are far too large to Monte Carlo on a desk machine, so
``SamplerBudget`` separates the plain constructor (any positive budget)
from ``from_theory`` (the bound-enforcing parameterization). The
verification suites run calibrated desk budgets; the bounds themselves
are validated directly on ``from_theory`` outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuits import InverterOracle, TruthTableCircuit, compose_hash_check, invert_int
from .distributions import BOT, FiniteDistribution
from .hashing import GF2AffineHash
from .tape import RandomTape, derive_stream

__all__ = [
    "SamplerBudget",
    "consistent_sample",
    "hash_probe",
    "sieve_candidate",
    "sample_implicit",
    "sample_implicit_int",
]

_ROUND_CAP = 1 << 24
_MAX_SUPPORT = 1 << 20
_HEADER_CHUNK = 32


@dataclass(frozen=True)
class SamplerBudget:
    """Implicit-sampler budgets: slack bits plus outer/inner loop counts.

    The plain constructor accepts any positive finite budget (desk scale).
    ``from_theory`` computes the guarantee-carrying parameterization and
    ``validate_theory`` checks the three lower bounds, naming the violated
    one.
    """

    nu: float
    slack_bits: int
    outer_rounds: int
    inner_trials: int
    c0: int = 4
    c1: int = 2
    c2: int = 16

    def __post_init__(self):
        if not 0.0 < self.nu < 0.5:
            raise ValueError("nu must be in (0, 0.5)")
        for name in ("slack_bits", "outer_rounds", "inner_trials", "c0", "c1", "c2"):
            v = getattr(self, name)
            if not isinstance(v, int) or v <= 0:
                raise ValueError(f"{name} must be a positive integer")

    @classmethod
    def from_theory(cls, m: int, nu: float, c0: int = 4, c1: int = 2, c2: int = 16) -> "SamplerBudget":
        if not 0.0 < nu < 0.5:
            raise ValueError("nu must be in (0, 0.5)")
        if m < 1:
            raise ValueError("m must be positive")
        k = math.ceil(math.log2(m) + math.log2(1.0 / nu)) + c0
        t1 = math.ceil(c1 * m * k * (1 << k) * math.log(1.0 / nu))
        t2 = math.ceil(c2 * (1 << k) * nu**-2 * math.log(t1 / nu))
        return cls(nu, k, t1, t2, c0, c1, c2)

    def validate_theory(self, m: int):
        k_floor = math.ceil(math.log2(m) + math.log2(1.0 / self.nu)) + self.c0
        if self.slack_bits < k_floor:
            raise ValueError(f"slack_bits below theory bound: {self.slack_bits} < {k_floor}")
        t1_floor = self.c1 * m * self.slack_bits * (1 << self.slack_bits) * math.log(1.0 / self.nu)
        if self.outer_rounds < t1_floor:
            raise ValueError(
                f"outer_rounds below theory bound: {self.outer_rounds} < {math.ceil(t1_floor)}"
            )
        t2_floor = (
            self.c2 * (1 << self.slack_bits) * self.nu**-2 * math.log(self.outer_rounds / self.nu)
        )
        if self.inner_trials < t2_floor:
            raise ValueError(
                f"inner_trials below theory bound: {self.inner_trials} < {math.ceil(t2_floor)}"
            )


# ---------------------------------------------------------------------------
# explicit-distribution sampler


def consistent_sample(p: FiniteDistribution, tape: RandomTape):
    """First (y, h) rejection hit on the tape; marginal exactly p.

    Two distributions sampled with clones of one tape share every (y, h)
    draw, which is what caps their disagreement at 2*d/(1+d). The outcome
    ORDER therefore matters: pair-coupled callers must present aligned
    outcome lists.
    """
    outcomes = p.outcomes
    n = len(outcomes)
    if n > _MAX_SUPPORT:
        raise ValueError("support size exceeds 2^20")
    probs = [float(x) for x in p.probs]
    for _ in range(_ROUND_CAP):
        y = tape.randint_below(n)
        h = tape.u53()
        if h < probs[y]:
            return outcomes[y]
    raise RuntimeError("consistent sampler exhausted")


# ---------------------------------------------------------------------------
# circuit-implicit sampler

# Bitsliced parity table: _par_table(n)[r] has bit y set iff parity(r & y)=1,
# so matching h1(y) == u over all 2^n outputs is a handful of word ops.
@lru_cache(maxsize=None)
def _par_table(n: int) -> tuple:
    size = 1 << n
    table = []
    for r in range(size):
        acc = 0
        for y in range(size):
            acc |= ((r & y).bit_count() & 1) << y
        table.append(acc)
    return tuple(table)


def _match_set(h1_rows, offset: int, u: int, n: int) -> int:
    """Bitmask of outputs y with h1(y) == u, via the bitsliced parity table."""
    par = _par_table(n)
    acc = (1 << (1 << n)) - 1
    target = u ^ offset
    width = len(h1_rows)
    for j, row in enumerate(h1_rows):
        bits = par[row]
        if (target >> (width - 1 - j)) & 1:
            acc &= bits
        else:
            acc &= ~bits
        if not acc:
            return 0
    return acc


class _CircuitIndex:
    """Per-circuit precomputation shared by every sampler round."""

    __slots__ = ("counts", "image_mask", "image_vals", "preimages", "band_masks", "n", "m")

    def __init__(self, c: TruthTableCircuit):
        self.m, self.n = c.in_bits, c.out_bits
        counts = np.bincount(c.table, minlength=1 << c.out_bits)
        self.counts = counts
        mask = 0
        for y, cnt in enumerate(counts):
            if cnt:
                mask |= 1 << y
        self.image_mask = mask
        self.image_vals = np.nonzero(counts)[0].astype(np.uint64)
        order = np.argsort(c.table, kind="stable")
        starts = np.searchsorted(c.table[order], np.arange(1 << c.out_bits))
        ends = np.searchsorted(c.table[order], np.arange(1 << c.out_bits), side="right")
        self.preimages = [
            [int(r) for r in np.sort(order[starts[y] : ends[y]])] for y in range(1 << c.out_bits)
        ]
        # density band per level: 2^(-ell-4) <= count/2^m <= 2^(-ell+4),
        # checked exactly in integers
        self.band_masks = []
        for ell in range(c.in_bits + 1):
            bm = 0
            for y, cnt in enumerate(counts):
                if cnt == 0:
                    continue
                lo_ok = int(cnt) << (ell + 4) >= (1 << c.in_bits)
                hi_ok = int(cnt) << ell <= 1 << (c.in_bits + 4)
                if lo_ok and hi_ok:
                    bm |= 1 << y
            self.band_masks.append(bm)


_INDEX_CACHE: dict = {}


def _circuit_index(c: TruthTableCircuit) -> _CircuitIndex:
    key = c.fingerprint()
    idx = _INDEX_CACHE.get(key)
    if idx is None:
        idx = _CircuitIndex(c)
        if len(_INDEX_CACHE) > 256:
            _INDEX_CACHE.clear()
        _INDEX_CACHE[key] = idx
    return idx


# --- record geometry --------------------------------------------------------
# Records are padded to multiples of 8 bytes so chunks reshape cleanly.


def _round_up8(x: int) -> int:
    return x + (-x) % 8


def _header_geometry(m: int, n: int, k: int):
    rowbytes = (n + 7) // 8
    fieldbytes = 2 if (m + k) <= 16 else 4
    rec = _round_up8(16 + (m + k) * rowbytes + 2 * fieldbytes)
    return rowbytes, fieldbytes, rec


def _trial_geometry(m: int, k: int):
    rowbytes = (m + 7) // 8
    fieldbytes = 2 if (m + k) <= 16 else 4
    rec = _round_up8((m + k) * rowbytes + 2 * fieldbytes)
    return rowbytes, fieldbytes, rec


def _fold_field(mat: np.ndarray) -> np.ndarray:
    """Big-endian fold of a (rows, fieldbytes) byte matrix into int64."""
    out = np.zeros(mat.shape[0], dtype=np.int64)
    for col in range(mat.shape[1]):
        out = (out << 8) | mat[:, col].astype(np.int64)
    return out


def _rows_as_ints(row_bytes: bytes, count: int, rowbytes: int, mask: int) -> tuple:
    if rowbytes == 1:
        return tuple(b & mask for b in row_bytes[:count])
    return tuple(
        int.from_bytes(row_bytes[i * rowbytes : (i + 1) * rowbytes], "big") & mask
        for i in range(count)
    )


# --- the inner sieve --------------------------------------------------------


def _sieve_trials(c: TruthTableCircuit, k: int, t2: int, ell: int, beta: float,
                  h1, u: int, oracle: InverterOracle,
                  buf: bytes, candidates, oracle_tape: RandomTape):
    """Tally t2 fixed-width trial records and return the unique band element.

    candidates is the increasing list of (r, C(r)) with h1(C(r)) == u; the
    fast path answers each probe as "least candidate whose h2 value hits
    the target", which equals brute-force inversion of the composed
    circuit. A failure-injecting oracle disables the shortcut and goes
    through the real composed inversion per trial, with its failure
    shuffles driven by oracle_tape.
    """
    m, n = c.in_bits, c.out_bits
    w = m - ell + k
    rowbytes, fieldbytes, rec = _trial_geometry(m, k)
    a = np.frombuffer(buf, dtype=np.uint8).reshape(t2, rec)
    base = (m + k) * rowbytes
    wmask = (1 << w) - 1
    offs = _fold_field(a[:, base : base + fieldbytes]) & wmask
    vs = _fold_field(a[:, base + fieldbytes : base + 2 * fieldbytes]) & wmask
    counts = np.zeros(1 << n, dtype=np.int64)
    if oracle.strategy == "brute-force":
        if not candidates:
            return BOT
        if rowbytes == 1:
            rows = a[:, :w]
        else:
            wide = a[:, : w * rowbytes].reshape(t2, w, rowbytes)
            rows = _fold_field(wide.reshape(t2 * w, rowbytes)).reshape(t2, w)
        mask_m = np.int64((1 << m) - 1)
        rows = rows.astype(np.int64) & mask_m
        weights = (1 << np.arange(w - 1, -1, -1, dtype=np.int64))
        assigned = np.full(t2, -1, dtype=np.int64)
        for r, y in candidates:
            par = (np.bitwise_count(rows & np.int64(r)) & 1).astype(np.int64)
            h2r = par @ weights
            take = ((h2r ^ offs) == vs) & (assigned < 0)
            if take.any():
                assigned[take] = y
        hit = assigned >= 0
        if hit.any():
            counts = np.bincount(assigned[hit], minlength=1 << n)
    else:
        for i in range(t2):
            rows_i = _rows_as_ints(a[i, : w * rowbytes].tobytes(), w, rowbytes, (1 << m) - 1)
            h2 = GF2AffineHash(m, w, rows_i, int(offs[i]))
            y = hash_probe(c, ell, h1, u, h2, int(vs[i]), oracle, oracle_tape)
            if y is not BOT:
                counts[y] += 1
    lo = (beta / 2.0) * 2.0**-k * t2
    hi = beta * 2.0**-k * t2
    band = [y for y in np.nonzero(counts)[0] if lo < counts[y] <= hi]
    if len(band) == 1:
        return int(band[0])
    return BOT


def hash_probe(c: TruthTableCircuit, ell: int, h1: GF2AffineHash, u, h2: GF2AffineHash, v,
               oracle: InverterOracle, tape: RandomTape):
    """One band probe: invert u||v through h1(C(r)) || h2(r), return C(r') or BOT."""
    as_bits = isinstance(u, str)
    u_int = int(u, 2) if as_bits else u
    v_int = int(v, 2) if isinstance(v, str) else v
    f = compose_hash_check(c, h1, h2, ell)
    r = invert_int(oracle, f, (u_int << h2.out_bits) | v_int, tape)
    if r is BOT:
        return BOT
    y = c.eval_int(r)
    return format(y, f"0{c.out_bits}b") if as_bits else y


def _candidates_for(c: TruthTableCircuit, idx: _CircuitIndex, h1: GF2AffineHash, u: int):
    """Increasing (r, C(r)) pairs with h1(C(r)) == u."""
    if c.out_bits <= 8:
        hits = _match_set(h1.rows, h1.offset, u, c.out_bits) & idx.image_mask
        pairs = []
        rest = hits
        while rest:
            y = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            pairs.extend((r, y) for r in idx.preimages[y])
        pairs.sort()
        return pairs
    hy = h1.apply_vector(idx.image_vals)
    pairs = []
    for y in idx.image_vals[hy == np.uint64(u)]:
        pairs.extend((r, int(y)) for r in idx.preimages[int(y)])
    pairs.sort()
    return pairs


def sieve_candidate(c: TruthTableCircuit, budget: SamplerBudget, ell: int, beta: float,
                    h1: GF2AffineHash, u, oracle: InverterOracle, tape: RandomTape):
    """Run the inner-trial tally off `tape` and return the unique band element.

    Consumes inner_trials fixed-width records from the tape, each holding a
    fresh output-side hash and target cell. Accepts u as a bit string or an
    integer and mirrors that in the return type (BOT aside).
    """
    if not 0 <= ell <= c.in_bits:
        raise ValueError("level index out of range")
    as_bits = isinstance(u, str)
    if as_bits and len(u) != ell + budget.slack_bits:
        raise ValueError("u length must equal level + slack_bits")
    u_int = int(u, 2) if as_bits else u
    idx = _circuit_index(c)
    _, _, rec = _trial_geometry(c.in_bits, budget.slack_bits)
    oracle_tape = derive_stream(tape, 0)
    buf = tape.read_bytes(budget.inner_trials * rec)
    cands = _candidates_for(c, idx, h1, u_int)
    y = _sieve_trials(c, budget.slack_bits, budget.inner_trials, ell, beta, h1, u_int,
                      oracle, buf, cands, oracle_tape)
    if y is BOT or not as_bits:
        return y
    return format(y, f"0{c.out_bits}b")


def sample_implicit_int(c: TruthTableCircuit, nu: float, oracle: InverterOracle,
                        tape: RandomTape, budget: SamplerBudget | None = None,
                        stats: dict | None = None):
    """Implicit sampler returning the raw integer output value (or BOT)."""
    m, n = c.in_bits, c.out_bits
    if not 0.0 < nu < 0.5:
        raise ValueError("nu must be in (0, 0.5)")
    if budget is None:
        budget = SamplerBudget.from_theory(m, nu)
    k = budget.slack_bits
    t1, t2 = budget.outer_rounds, budget.inner_trials
    idx = _circuit_index(c)
    fast = oracle.strategy == "brute-force"
    bitsliced = n <= 8
    rowbytes, fieldbytes, hrec = _header_geometry(m, n, k)
    _, _, trec = _trial_geometry(m, k)
    mask_n = (1 << n) - 1
    rows_base, field_base = 16, 16 + (m + k) * rowbytes
    headers = derive_stream(tape, 0)
    trials = derive_stream(tape, 1)
    oracle_tape = derive_stream(tape, 2)
    if stats is not None:
        stats.setdefault("rounds", 0)
        stats.setdefault("work_rounds", 0)
        stats.setdefault("unique_ok", 0)
        stats.setdefault("returned_round", None)
    for chunk_start in range(0, t1, _HEADER_CHUNK):
        chunk = min(_HEADER_CHUNK, t1 - chunk_start)
        buf = headers.read_bytes(chunk * hrec)
        a = np.frombuffer(buf, dtype=np.uint8).reshape(chunk, hrec)
        u64 = a[:, :16].copy().view(">u8")
        betas = 1.0 + (u64[:, 0] >> np.uint64(11)) * 2.0**-53
        ells = ((u64[:, 1] >> np.uint64(11)) * np.uint64(m + 1)) >> np.uint64(53)
        for i in range(chunk):
            t = chunk_start + i
            ell = int(ells[i])
            width = ell + k
            wmask = (1 << width) - 1
            rows = _rows_as_ints(
                a[i, rows_base : rows_base + width * rowbytes].tobytes(), width, rowbytes, mask_n
            )
            off = int.from_bytes(
                a[i, field_base : field_base + fieldbytes].tobytes(), "big") & wmask
            u = int.from_bytes(
                a[i, field_base + fieldbytes : field_base + 2 * fieldbytes].tobytes(), "big") & wmask
            h1 = None
            if bitsliced:
                match = _match_set(rows, off, u, n)
                cands = None
            else:
                h1 = GF2AffineHash(n, width, rows, off)
                cands = _candidates_for(c, idx, h1, u)
                match = 0
                for _, y in cands:
                    match |= 1 << y
            if stats is not None:
                stats["rounds"] += 1
                if (match & idx.band_masks[ell]).bit_count() <= 1:
                    stats["unique_ok"] += 1
            hits = match & idx.image_mask
            if fast and hits == 0:
                continue
            if cands is None:
                pairs = []
                rest = hits
                while rest:
                    y = (rest & -rest).bit_length() - 1
                    rest &= rest - 1
                    pairs.extend((r, y) for r in idx.preimages[y])
                pairs.sort()
                cands = pairs
            if stats is not None:
                stats["work_rounds"] += 1
            if not fast and h1 is None:
                h1 = GF2AffineHash(n, width, rows, off)
            trials.seek_bytes(t * t2 * trec)
            tbuf = trials.read_bytes(t2 * trec)
            y = _sieve_trials(c, k, t2, ell, float(betas[i]), h1, u, oracle, tbuf,
                              cands, oracle_tape)
            if y is not BOT:
                if stats is not None:
                    stats["returned_round"] = t
                return y
    return BOT


def sample_implicit(c: TruthTableCircuit, nu: float, oracle: InverterOracle, tape: RandomTape,
                    budget: SamplerBudget | None = None, stats: dict | None = None):
    """Sample C's output distribution via inversion only; n-bit string or BOT."""
    y = sample_implicit_int(c, nu, oracle, tape, budget=budget, stats=stats)
    return y if y is BOT else format(y, f"0{c.out_bits}b")
