"""Prime sieve, factorization, and exponent-vector arithmetic."""

import math

import numpy as np
import pytest

from primewalks.primes import (
    PrimeExponentVector,
    factorize,
    gcd,
    is_prime,
    lcm,
    log_prime,
    multiplicity,
    multiply,
    sieve_primes,
)


def spf_table(limit):
    """Smallest-prime-factor table by the classic sieve, as an oracle."""
    spf = list(range(limit + 1))
    for i in range(2, int(limit**0.5) + 1):
        if spf[i] == i:
            for j in range(i * i, limit + 1, i):
                if spf[j] == j:
                    spf[j] = i
    return spf


def factorize_oracle(n, spf):
    out = {}
    while n > 1:
        p = spf[n]
        out[p] = out.get(p, 0) + 1
        n //= p
    return out


def test_sieve_against_spf_table():
    spf = spf_table(10000)
    want = [i for i in range(2, 10001) if spf[i] == i]
    assert sieve_primes(10000) == want
    assert sieve_primes(2) == [2]
    assert sieve_primes(1) == []
    assert sieve_primes(0) == []


def test_is_prime_against_sieve():
    spf = spf_table(20000)
    for n in range(0, 20001):
        assert is_prime(n) == (n >= 2 and spf[n] == n), n


def test_is_prime_large_values():
    # Miller-Rabin territory: known primes and composites beyond the sieve.
    for p in (10**9 + 7, 10**9 + 9, 2**31 - 1, 999999937):
        assert is_prime(p)
    for n in (10**9 + 8, 2**31, 3215031751, 999999937 * 3):
        assert not is_prime(n)
    # Carmichael numbers fool Fermat tests; they must fail here.
    for n in (561, 1105, 1729, 2465, 2821, 6601, 8911, 41041, 825265):
        assert not is_prime(n)


def test_factorize_small_range_exactly():
    spf = spf_table(5000)
    for n in range(1, 5001):
        got = dict(factorize(n).items())
        assert got == factorize_oracle(n, spf), n


def test_factorize_roundtrip_random():
    rng = np.random.default_rng(7)
    for _ in range(300):
        n = int(rng.integers(1, 10**12))
        v = factorize(n)
        prod = 1
        for p, e in v.items():
            assert is_prime(p)
            assert e >= 1
            prod *= p**e
        assert prod == n
        assert v.value() == n


def test_factorize_structured_values():
    assert dict(factorize(1).items()) == {}
    assert dict(factorize(2**20).items()) == {2: 20}
    assert dict(factorize(3**5 * 5**3).items()) == {3: 5, 5: 3}
    # semiprime with both factors beyond the trial-division wheel
    p, q = 10007, 10009
    assert dict(factorize(p * q).items()) == {p: 1, q: 1}
    # large prime survivor
    assert dict(factorize(2 * 999999937).items()) == {2: 1, 999999937: 1}
    with pytest.raises(ValueError):
        factorize(0)
    with pytest.raises(ValueError):
        factorize(-6)


def test_exponent_vector_operations():
    a = PrimeExponentVector({2: 3, 5: 1})
    b = PrimeExponentVector({2: 1, 3: 2})
    assert (a * b).value() == a.value() * b.value()
    assert multiply(a, b) == a * b
    assert multiplicity(a, 2) == 3
    assert multiplicity(a, 7) == 0
    assert a.support() == (2, 5)
    assert len(a) == 2
    assert bool(a) and not bool(PrimeExponentVector())
    assert math.isclose(a.log_value(), math.log(40), rel_tol=1e-15)
    with pytest.raises(ValueError):
        PrimeExponentVector({4: 1})
    with pytest.raises(ValueError):
        PrimeExponentVector({2: -1})
    with pytest.raises(ValueError):
        PrimeExponentVector({2: 0})  # entries are strictly positive


def test_lcm_gcd_against_integer_oracle():
    rng = np.random.default_rng(11)
    for _ in range(200):
        nums = [int(rng.integers(1, 10**6)) for _ in range(4)]
        vecs = [factorize(n) for n in nums]
        want_lcm = math.lcm(*nums)
        want_gcd = math.gcd(*nums)
        assert lcm(vecs).value() == want_lcm
        assert gcd(vecs).value() == want_gcd
    assert lcm([]).value() == 1
    with pytest.raises(ValueError):
        gcd([])
    assert gcd([factorize(8), factorize(27)]).value() == 1


def test_log_prime_cached_values():
    for p in (2, 3, 97, 101, 10007):
        assert log_prime(p) == math.log(p)
    with pytest.raises(ValueError):
        log_prime(6)
