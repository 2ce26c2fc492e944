"""Exponent-vector arithmetic: factorization, LCM and GCD without big integers."""

import math

from primewalks.primes import (
    PrimeExponentVector,
    factorize,
    gcd,
    is_prime,
    lcm,
    sieve_primes,
)

# Every positive integer is a finite exponent vector over the primes.
v = factorize(360)
print("360 =", v)                      # 2^3 * 3^2 * 5
print("value back:", v.value())
print("exponent of 2:", v.multiplicity(2))
print("exponent of 7:", v.multiplicity(7))

# Multiplication of integers is addition of exponent vectors.
w = factorize(75)                      # 3 * 5^2
print("360 * 75 =", (v * w).value(), "=", v * w)

# LCM and GCD are coordinatewise max and min in exponent space. No
# bignum arithmetic is ever needed, which is what lets the walks below
# run for thousands of steps.
a, b = factorize(12), factorize(18)
print("lcm(12, 18) =", lcm([a, b]).value())
print("gcd(12, 18) =", gcd([a, b]).value())
assert lcm([a, b]).value() == math.lcm(12, 18)

# log of a value is available directly from the exponents, so sizes can
# grow far past float range without overflow.
huge = PrimeExponentVector({2: 5000, 3: 2500})
print("log(2^5000 * 3^2500) =", round(huge.log_value(), 3))

# Primality and sieving round out the toolkit.
print("first primes:", sieve_primes(30))
print("is_prime(10007):", is_prime(10007))
