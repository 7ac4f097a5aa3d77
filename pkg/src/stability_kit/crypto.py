"""Quadratic-residuosity encryption and the replicability separation.

Everything here runs at desk scale (primes up to 64 bits) because the
point is the reduction's mechanics, not cryptographic strength: a
replicable solver for ciphertext identification hands an adversary a
distinguisher, and the DP solver shows the gap is real. Small moduli keep
the exact distribution claims checkable by enumerating the unit group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2

from .distributions import BOT, FiniteDistribution
from .tape import RandomTape, derive_stream

__all__ = [
    "GMPublicKey",
    "GMKeys",
    "GMCiphertext",
    "keygen",
    "enc",
    "dec",
    "verify",
    "rerandomize",
    "rerandomize_distribution",
    "dp_rand_enc",
    "rand_enc_output_distribution",
    "rand_enc_algorithm",
    "selection_ratio_bound",
    "rand_enc_failure_probability",
    "make_cheat_solver",
    "adversary",
]

_MAX_ENUM_N = 1 << 14


def _legendre(a: int, p: int) -> int:
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else int(r)


@dataclass(frozen=True)
class GMPublicKey:
    n: int
    x: int


@dataclass(frozen=True)
class GMKeys:
    """Public (n, x) plus the factorization. x is a non-residue mod both
    primes, so its Jacobi symbol mod n is +1 and residues of the two
    plaintext classes are computationally indistinguishable at scale."""

    p: int
    q: int
    x: int

    def __post_init__(self):
        if self.p == self.q:
            raise ValueError("primes must be distinct")
        for r in (self.p, self.q):
            if r < 3 or r % 2 == 0 or not gmpy2.is_prime(r):
                raise ValueError("p and q must be odd primes")
        if _legendre(self.x, self.p) != -1 or _legendre(self.x, self.q) != -1:
            raise ValueError("x must be a non-residue modulo both primes")

    @property
    def n(self) -> int:
        return self.p * self.q

    @property
    def pk(self) -> GMPublicKey:
        return GMPublicKey(self.n, self.x)


@dataclass(frozen=True)
class GMCiphertext:
    value: int
    modulus: int

    def __post_init__(self):
        if not 0 <= self.value < self.modulus:
            raise ValueError("ciphertext value must be reduced mod the modulus")


def keygen(prime_bits: int, tape: RandomTape, max_tries: int = 4096) -> GMKeys:
    """Fresh keys with primes of exactly prime_bits bits.

    The non-residue x is found by rejection against the secret
    factorization; KeyGen may use the factors it just created.
    """
    if not 4 <= prime_bits <= 64:
        raise ValueError("prime_bits must be in [4, 64]")
    half = 1 << (prime_bits - 1)

    def draw_prime(avoid: int = 0) -> int:
        for _ in range(max_tries):
            cand = (half | tape.randint_below(half)) | 1
            if cand != avoid and gmpy2.is_prime(cand):
                return cand
        raise RuntimeError("prime search exhausted")

    p = draw_prime()
    q = draw_prime(avoid=p)
    n = p * q
    for _ in range(max_tries):
        x = 1 + tape.randint_below(n - 1)
        if math.gcd(x, n) != 1:
            continue
        if _legendre(x, p) == -1 and _legendre(x, q) == -1:
            return GMKeys(p=p, q=q, x=x)
    raise RuntimeError("non-residue search exhausted")


def _unit(n: int, tape: RandomTape) -> int:
    while True:
        u = 1 + tape.randint_below(n - 1)
        if math.gcd(u, n) == 1:
            return u


def enc(pk: GMPublicKey, b: int, tape: RandomTape) -> GMCiphertext:
    if b not in (0, 1):
        raise ValueError("plaintext must be a bit")
    u = _unit(pk.n, tape)
    value = (u * u) % pk.n
    if b:
        value = (value * pk.x) % pk.n
    return GMCiphertext(value, pk.n)


def dec(keys: GMKeys, c: GMCiphertext):
    """Plaintext bit, or BOT when the value shares a factor with n."""
    if c.modulus != keys.n:
        raise ValueError("ciphertext modulus does not match the key")
    if math.gcd(c.value, keys.n) != 1:
        return BOT
    return 0 if _legendre(c.value, keys.p) == 1 else 1


def verify(pk: GMPublicKey, c: GMCiphertext) -> bool:
    return c.modulus == pk.n and math.gcd(c.value, pk.n) == 1


def rerandomize(pk: GMPublicKey, c: GMCiphertext, tape: RandomTape) -> GMCiphertext:
    u = _unit(pk.n, tape)
    return GMCiphertext((c.value * u * u) % pk.n, pk.n)


def _unit_group(n: int) -> list:
    if n > _MAX_ENUM_N:
        raise ValueError("unit-group enumeration capped at n <= 2^14")
    return [u for u in range(1, n) if math.gcd(u, n) == 1]


def rerandomize_distribution(pk: GMPublicKey, c: GMCiphertext) -> FiniteDistribution:
    """Exact law of rerandomize(pk, c): uniform over c times the squares."""
    units = _unit_group(pk.n)
    counts: dict = {}
    for u in units:
        v = (c.value * u * u) % pk.n
        counts[v] = counts.get(v, 0) + 1
    total = len(units)
    items = sorted(counts.items())
    return FiniteDistribution(
        [GMCiphertext(v, pk.n) for v, _ in items],
        [Fraction(k, total) for _, k in items])


# ---------------------------------------------------------------------------
# the DP solver for ciphertext identification


def dp_rand_enc(pk: GMPublicKey, sample: list, eps: float, beta: float,
                tape: RandomTape, stats: dict | None = None) -> GMCiphertext:
    """Pick one ciphertext from the sample padded with k fresh encryptions
    of each bit, then rerandomize the pick.

    Padding caps the per-class selection ratio across neighbors at
    (k+1)/k <= e^eps; rerandomization erases which pool element was
    chosen, so the bound applies to every output event.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not 0 < beta < 1:
        raise ValueError("beta must be in (0, 1)")
    k = math.ceil(1.0 / eps)
    valid = [c for c in sample if verify(pk, c)]
    pad_tape = derive_stream(tape, 1)
    pads = [enc(pk, 0, derive_stream(pad_tape, i)) for i in range(k)]
    pads += [enc(pk, 1, derive_stream(pad_tape, k + i)) for i in range(k)]
    pool = valid + pads
    idx = derive_stream(tape, 0).randint_below(len(pool))
    out = rerandomize(pk, pool[idx], derive_stream(tape, 2))
    if stats is not None:
        stats.update({"k": k, "valid": len(valid), "pool": len(pool)})
    return out


def selection_ratio_bound(eps: float) -> Fraction:
    k = math.ceil(1.0 / eps)
    return Fraction(k + 1, k)


def rand_enc_failure_probability(m: int, eps: float) -> Fraction:
    """Chance the output decrypts to the wrong bit on a clean sample of m
    same-plaintext ciphertexts: exactly the mass of the opposite pads."""
    k = math.ceil(1.0 / eps)
    return Fraction(k, m + 2 * k)


def rand_enc_output_distribution(pk: GMPublicKey, sample: list, eps: float) -> FiniteDistribution:
    """Exact output law of dp_rand_enc on a fixed sample.

    Each pool slot contributes a uniform over its square-coset: fresh pads
    of bit b land uniformly on the coset of x^b, and rerandomizing any
    element spreads it uniformly over its own coset.
    """
    k = math.ceil(1.0 / eps)
    units = _unit_group(pk.n)
    squares: dict = {}
    for u in units:
        v = (u * u) % pk.n
        squares[v] = squares.get(v, 0) + 1
    total = len(units)
    valid = [c for c in sample if verify(pk, c)]
    pool_size = len(valid) + 2 * k
    mass: dict = {}

    def add_coset(base: int, weight: Fraction):
        for v, cnt in squares.items():
            w = (base * v) % pk.n
            mass[w] = mass.get(w, Fraction(0)) + weight * Fraction(cnt, total)

    slot = Fraction(1, pool_size)
    for c in valid:
        add_coset(c.value, slot)
    add_coset(1, slot * k)          # pads encrypting 0
    add_coset(pk.x, slot * k)       # pads encrypting 1
    items = sorted(mass.items())
    return FiniteDistribution(
        [GMCiphertext(v, pk.n) for v, _ in items],
        [p for _, p in items])


def rand_enc_algorithm(pk: GMPublicKey, eps: float, beta: float, m: int):
    """dp_rand_enc packaged with its exact law (enumerable moduli only)."""
    from .transforms import StatAlgorithm

    return StatAlgorithm(
        run=lambda s, tape: dp_rand_enc(pk, s, eps, beta, tape),
        sample_size=m,
        output_space=(),
        exact_output_distribution=lambda s: rand_enc_output_distribution(pk, s, eps),
    )


# ---------------------------------------------------------------------------
# the adversary


def make_cheat_solver(keys: GMKeys):
    """Test-only replicable solver that peeks at the secret key.

    Decrypts the first valid sample element and answers with a canonical
    tape-derived encryption of that bit: perfectly replicable, always
    correct, and exactly what no efficient honest solver can be.
    """

    def solver(pk: GMPublicKey, sample: list, tape: RandomTape) -> GMCiphertext:
        b = 0
        for c in sample:
            if verify(pk, c):
                b = dec(keys, c)
                break
        return enc(pk, b, derive_stream(tape, b))

    return solver


def adversary(pk: GMPublicKey, challenge: GMCiphertext, solver, m: int,
              tape: RandomTape) -> int:
    """Residuosity distinguisher from any replicable solver.

    Feeds the solver a sample of rerandomized zero-encryptions and a
    sample of rerandomized challenge copies, with the same coin tape.
    Equal outputs mean the solver saw the same plaintext both times.
    """
    solver_tape = derive_stream(tape, 0)
    base0 = enc(pk, 0, derive_stream(tape, 1))
    zeros_tape = derive_stream(tape, 2)
    chall_tape = derive_stream(tape, 3)
    sample0 = [rerandomize(pk, base0, derive_stream(zeros_tape, i)) for i in range(m)]
    samplec = [rerandomize(pk, challenge, derive_stream(chall_tape, i)) for i in range(m)]
    y0 = solver(pk, sample0, solver_tape.clone())
    yc = solver(pk, samplec, solver_tape.clone())
    return 0 if y0 == yc else 1
