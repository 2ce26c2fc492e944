"""Exact prime-exponent arithmetic for positive integers.

Positive integers are represented by their prime factorizations
(``PrimeExponentVector``), so products, LCMs and GCDs are coordinatewise
integer operations with no overflow anywhere.
"""

from __future__ import annotations

from functools import lru_cache
from math import isqrt, log
from typing import Iterable, Iterator, Mapping

__all__ = [
    "sieve_primes",
    "is_prime",
    "log_prime",
    "PrimeExponentVector",
    "ONE",
    "factorize",
    "multiplicity",
    "multiply",
    "lcm",
    "gcd",
    "log_value",
]

# bases give a deterministic Miller-Rabin test for n < 3.3e24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def sieve_primes(limit: int) -> list[int]:
    """All primes <= limit, ascending."""
    if limit < 2:
        return []
    mark = bytearray([1]) * (limit + 1)
    mark[0] = mark[1] = 0
    for p in range(2, isqrt(limit) + 1):
        if mark[p]:
            mark[p * p :: p] = bytes(len(range(p * p, limit + 1, p)))
    return [i for i in range(2, limit + 1) if mark[i]]


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    """Deterministic primality test (Miller-Rabin with fixed bases)."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=None)
def log_prime(p: int) -> float:
    """Memoized natural log of a prime."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return log(p)


class PrimeExponentVector:
    """Immutable finitely supported map prime -> positive exponent.

    Encodes the integer  prod p^e  exactly; the zero vector encodes 1.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = dict(entries)
        for p, e in items.items():
            if not isinstance(p, int) or not is_prime(p):
                raise ValueError(f"key {p!r} is not a prime")
            if not isinstance(e, int) or e <= 0:
                raise ValueError(f"exponent for {p} must be a positive int, got {e!r}")
        self._entries = dict(sorted(items.items()))

    @classmethod
    def _raw(cls, sorted_entries: dict[int, int]) -> "PrimeExponentVector":
        # internal: entries already validated and sorted
        v = object.__new__(cls)
        v._entries = sorted_entries
        return v

    def multiplicity(self, p: int) -> int:
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        return self._entries.get(p, 0)

    def items(self) -> Iterator[tuple[int, int]]:
        return iter(self._entries.items())

    def support(self) -> tuple[int, ...]:
        return tuple(self._entries)

    def value(self) -> int:
        out = 1
        for p, e in self._entries.items():
            out *= p**e
        return out

    def log_value(self) -> float:
        return sum(e * log_prime(p) for p, e in self._entries.items())

    def __mul__(self, other: "PrimeExponentVector") -> "PrimeExponentVector":
        if not isinstance(other, PrimeExponentVector):
            return NotImplemented
        merged = dict(self._entries)
        for p, e in other._entries.items():
            merged[p] = merged.get(p, 0) + e
        return PrimeExponentVector._raw(dict(sorted(merged.items())))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PrimeExponentVector):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        return hash(tuple(self._entries.items()))

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        body = ", ".join(f"{p}: {e}" for p, e in self._entries.items())
        return f"PrimeExponentVector({{{body}}})"


ONE = PrimeExponentVector()


def factorize(n: int) -> PrimeExponentVector:
    """Exact factorization of a positive integer by trial division."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"factorize expects a positive integer, got {n!r}")
    entries: dict[int, int] = {}
    rest = n
    for p in (2, 3, 5):
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        if e:
            entries[p] = e
    # wheel over 6k +- 1 candidates up to sqrt(rest)
    d = 7
    step = 4
    while d * d <= rest:
        e = 0
        while rest % d == 0:
            rest //= d
            e += 1
        if e:
            entries[d] = e
        d += step
        step = 6 - step
    if rest > 1:
        entries[rest] = entries.get(rest, 0) + 1
    return PrimeExponentVector._raw(dict(sorted(entries.items())))


def multiplicity(v: PrimeExponentVector, p: int) -> int:
    """Exponent of prime p in v (0 when p is absent)."""
    return v.multiplicity(p)


def multiply(a: PrimeExponentVector, b: PrimeExponentVector) -> PrimeExponentVector:
    """Product of the encoded integers: exponents add coordinatewise."""
    return a * b


def lcm(vectors: Iterable[PrimeExponentVector]) -> PrimeExponentVector:
    """Coordinatewise max; empty input gives the vector of 1."""
    out: dict[int, int] = {}
    for v in vectors:
        for p, e in v.items():
            if e > out.get(p, 0):
                out[p] = e
    return PrimeExponentVector._raw(dict(sorted(out.items())))


def gcd(vectors: Iterable[PrimeExponentVector]) -> PrimeExponentVector:
    """Coordinatewise min over a nonempty collection."""
    it = iter(vectors)
    try:
        first = next(it)
    except StopIteration:
        raise ValueError("gcd of an empty collection is undefined") from None
    out = dict(first.items())
    for v in it:
        for p in list(out):
            e = v.multiplicity(p)
            if e < out[p]:
                if e == 0:
                    del out[p]
                else:
                    out[p] = e
    return PrimeExponentVector._raw(dict(sorted(out.items())))


def log_value(v: PrimeExponentVector) -> float:
    """Natural log of the encoded integer, sum of e * log p."""
    return v.log_value()
