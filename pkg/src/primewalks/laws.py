"""Step laws for multiplicative walks and their exact distributional queries.

Each law describes one positive-integer step. Beyond sampling, laws answer
exact questions used as oracles: prime-multiplicity tails
P{lambda_p(step) >= k}, divisibility probabilities P{m | step}, and
series-based log moments with explicit truncation bounds.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .primes import ONE, PrimeExponentVector, factorize, is_prime, log_prime, sieve_primes

__all__ = [
    "ConfigError",
    "zeta",
    "zeta_log_moment",
    "zeta_tail",
    "StepLaw",
    "ZetaLaw",
    "GeometricLaw",
    "ZeroTruncatedPoissonLaw",
    "PrimePowerLaw",
    "ParetoExponentLaw",
    "ConstantLaw",
    "TableLaw",
    "ProductLaw",
    "JointStepLaw",
    "IndependentCoupling",
    "IdenticalCoupling",
    "PerturbationOnly",
    "JointTableCoupling",
    "joint_table_from_csv",
    "IntegerDraws",
    "PrimePowerDraws",
    "CompositeDraws",
    "multiplicity_row",
    "MomentSummary",
    "compute_moments",
    "frequent_rare_primes",
    "NegligibilityReport",
    "check_negligibility",
    "law_from_spec",
    "coupling_from_spec",
]


class ConfigError(ValueError):
    """Invalid law or experiment configuration."""


# --- zeta sums -------------------------------------------------------------

_EM_TERMS = 4096  # direct terms before the Euler-Maclaurin tail correction


def zeta_log_moment(s: float, r: int, kmin: int = 1) -> float:
    """Sum of log(k)^r * k^(-s) over k >= kmin, for s > 1 and r in {0,1,2}.

    Direct summation of the first few thousand terms plus an
    Euler-Maclaurin tail (integral + f(N)/2 - f'(N)/12), accurate to
    well below 1e-12 for s >= 1.05.
    """
    if s <= 1:
        raise ConfigError(f"zeta sums require s > 1, got {s}")
    if r not in (0, 1, 2):
        raise ValueError("r must be 0, 1 or 2")
    n = kmin + _EM_TERMS
    k = np.arange(kmin, n, dtype=np.float64)
    if r == 0:
        head = float(np.sum(k**-s))
    else:
        head = float(np.sum(np.log(k) ** r * k**-s))
    x = float(n)
    ln = math.log(x)
    a = s - 1.0
    if r == 0:
        integral = x**-a / a
    elif r == 1:
        integral = x**-a * (ln / a + 1.0 / a**2)
    else:
        integral = x**-a * (ln**2 / a + 2.0 * ln / a**2 + 2.0 / a**3)
    f_n = ln**r * x**-s
    fp_n = x ** (-s - 1) * (r * ln ** (r - 1) - s * ln**r) if r else -s * x ** (-s - 1)
    return head + integral + f_n / 2.0 - fp_n / 12.0


def zeta(s: float) -> float:
    """Riemann zeta on the real axis, s > 1."""
    return zeta_log_moment(s, 0)


def zeta_tail(s: float, kmin: int) -> float:
    """Sum of k^(-s) over k >= kmin."""
    if kmin < 1:
        raise ValueError("kmin must be >= 1")
    return zeta_log_moment(s, 0, kmin)


# --- vectorized draw containers ---------------------------------------------


@dataclass(frozen=True)
class IntegerDraws:
    """A block of draws materialized as int64 values."""

    values: np.ndarray

    def multiplicity_of(self, p: int) -> np.ndarray:
        return multiplicity_row(self.values, p)

    def log_values(self) -> np.ndarray:
        return np.log(self.values.astype(np.float64))


@dataclass(frozen=True)
class PrimePowerDraws:
    """Draws of the form prime**exponent, kept unmaterialized.

    Exponents may be float64 (exact integers below 2**53); values of the
    form p**K would overflow any fixed width.
    """

    primes: np.ndarray
    exps: np.ndarray

    def multiplicity_of(self, p: int) -> np.ndarray:
        return np.where(self.primes == p, self.exps, 0)

    def log_values(self) -> np.ndarray:
        return self.exps * np.log(self.primes.astype(np.float64))


@dataclass(frozen=True)
class CompositeDraws:
    """Componentwise product of independent draw blocks."""

    parts: tuple

    def multiplicity_of(self, p: int) -> np.ndarray:
        out = self.parts[0].multiplicity_of(p)
        for part in self.parts[1:]:
            out = out + part.multiplicity_of(p)
        return out

    def log_values(self) -> np.ndarray:
        out = self.parts[0].log_values()
        for part in self.parts[1:]:
            out = out + part.log_values()
        return out


def multiplicity_row(values: np.ndarray, p: int) -> np.ndarray:
    """Exponent of prime p in each entry of an int64 array."""
    out = np.zeros(values.shape, dtype=np.int64)
    idx = np.nonzero(values % p == 0)[0]
    if idx.size == 0:
        return out
    rem = values[idx] // p
    out[idx] = 1
    while True:
        again = rem % p == 0
        if not again.any():
            return out
        idx = idx[again]
        rem = rem[again] // p
        out[idx] += 1


# --- step laws ---------------------------------------------------------------


class StepLaw:
    """One positive-integer multiplicative step."""

    def sample(self, rng: np.random.Generator) -> int:
        raise NotImplementedError

    def sample_pev(self, rng: np.random.Generator) -> PrimeExponentVector:
        return factorize(self.sample(rng))

    def sample_rows(self, rng: np.random.Generator, size: int):
        raise NotImplementedError

    def lambda_tail(self, p: int, k: int) -> float:
        """Exact P{lambda_p(step) >= k}; 1.0 for k = 0."""
        raise NotImplementedError

    def divisibility_prob(self, m: PrimeExponentVector) -> float:
        """Exact P{m divides step}."""
        raise NotImplementedError

    def log_moments(self, tol: float = 1e-10) -> tuple[float, float, float]:
        """(E[log step], Var[log step], truncation error bound)."""
        raise NotImplementedError

    def prime_support(self) -> frozenset[int] | None:
        """Primes the step can contain; None means unrestricted."""
        return None

    def lambda_mean(self, p: int, tol: float = 1e-12) -> float:
        """E[lambda_p(step)] by tail summation."""
        total = 0.0
        for k in range(1, 100000):
            t = self.lambda_tail(p, k)
            total += t
            if t < tol * max(total, 1.0) and t < tol:
                return total
        raise ArithmeticError(f"lambda_mean series did not converge for p={p}")

    def lambda_mean_sq(self, p: int, tol: float = 1e-12) -> float:
        """E[lambda_p(step)^2] via sum of (2k-1) * tail(k)."""
        total = 0.0
        for k in range(1, 100000):
            t = (2 * k - 1) * self.lambda_tail(p, k)
            total += t
            if t < tol * max(total, 1.0) and t < tol:
                return total
        raise ArithmeticError(f"lambda_mean_sq series did not converge for p={p}")

    def lambda_mean_array(self, primes: np.ndarray) -> np.ndarray | None:
        """Vectorized E[lambda_p] over a prime array, when closed-form."""
        return None

    def lambda_cov(self, p: int, q: int, tol: float = 1e-12) -> float:
        """Cov(lambda_p, lambda_q) for distinct primes, by double tail sum."""
        mp = self.lambda_mean(p, tol)
        mq = self.lambda_mean(q, tol)
        if math.isinf(mp) or math.isinf(mq):
            raise ArithmeticError("covariance undefined with infinite means")
        # E[XY] = sum_{k,l >= 1} P{X >= k, Y >= l}, each term a divisibility prob
        exy = 0.0
        for k in range(1, 200):
            row = 0.0
            for l in range(1, 200):
                term = self.divisibility_prob(PrimeExponentVector({p: k, q: l}))
                row += term
                if term < tol * 1e-3:
                    break
            exy += row
            if row < tol * 1e-3:
                break
        return exy - mp * mq

    def spec(self) -> dict:
        raise NotImplementedError

    def describe(self) -> str:
        kind = self.spec()
        params = ", ".join(f"{k}={v}" for k, v in kind.items() if k != "kind")
        return f"{kind['kind']}({params})"


@dataclass(frozen=True)
class ZetaLaw(StepLaw):
    """P{step = k} = k^(-alpha)/zeta(alpha); multiplicities are independent
    geometric(p^(-alpha)) across primes."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 1:
            raise ConfigError(f"zeta law needs alpha > 1, got {self.alpha}")

    @cached_property
    def _zeta(self) -> float:
        return zeta(self.alpha)

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.zipf(self.alpha))

    def sample_rows(self, rng: np.random.Generator, size: int) -> IntegerDraws:
        return IntegerDraws(rng.zipf(self.alpha, size))

    def lambda_tail(self, p: int, k: int) -> float:
        _check_tail_args(p, k)
        return 1.0 if k == 0 else float(p) ** (-k * self.alpha)

    def divisibility_prob(self, m: PrimeExponentVector) -> float:
        if not m:
            return 1.0
        return math.exp(-self.alpha * m.log_value())

    def log_moments(self, tol: float = 1e-10) -> tuple[float, float, float]:
        z = self._zeta
        mu = zeta_log_moment(self.alpha, 1) / z
        second = zeta_log_moment(self.alpha, 2) / z
        return mu, second - mu * mu, 1e-13

    def lambda_mean(self, p: int, tol: float = 1e-12) -> float:
        q = float(p) ** -self.alpha
        return q / (1.0 - q)

    def lambda_mean_sq(self, p: int, tol: float = 1e-12) -> float:
        q = float(p) ** -self.alpha
        return q * (1.0 + q) / (1.0 - q) ** 2

    def lambda_mean_array(self, primes: np.ndarray) -> np.ndarray:
        q = primes.astype(np.float64) ** -self.alpha
        return q / (1.0 - q)

    def lambda_cov(self, p: int, q: int, tol: float = 1e-12) -> float:
        return 0.0  # multiplicities are mutually independent across primes

    def spec(self) -> dict:
        return {"kind": "zeta", "alpha": self.alpha}


@dataclass(frozen=True)
class GeometricLaw(StepLaw):
    """P{step = k} = beta^(k-1) * (1 - beta) on k = 1, 2, ..."""

    beta: float

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ConfigError(f"geometric law needs beta in (0,1), got {self.beta}")

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.geometric(1.0 - self.beta))

    def sample_rows(self, rng: np.random.Generator, size: int) -> IntegerDraws:
        return IntegerDraws(rng.geometric(1.0 - self.beta, size))

    def _divisible(self, m: int) -> float:
        # P{m | step} = (1-beta) beta^(m-1) / (1 - beta^m)
        if m == 1:
            return 1.0
        try:
            mf = float(m)
        except OverflowError:
            return 0.0
        log_bm = mf * math.log(self.beta)
        if log_bm < -700.0:
            return 0.0
        bm = math.exp(log_bm)
        return (1.0 - self.beta) * (bm / self.beta) / (1.0 - bm)

    def lambda_tail(self, p: int, k: int) -> float:
        _check_tail_args(p, k)
        return 1.0 if k == 0 else self._divisible(p**k)

    def divisibility_prob(self, m: PrimeExponentVector) -> float:
        return self._divisible(m.value())

    def log_moments(self, tol: float = 1e-10) -> tuple[float, float, float]:
        b = self.beta
        mu = second = 0.0
        w = 1.0 - b  # pmf at k, updated multiplicatively
        k = 1
        while True:
            lk = math.log(k)
            mu += lk * w
            second += lk * lk * w
            # remainder bound using log^r k <= k:
            # sum_{j>k} j beta^(j-1) (1-beta) = beta^k ((k+1)(1-beta)+beta)/(1-beta)
            rem = b**k * ((k + 1) * (1.0 - b) + b) / (1.0 - b)
            if rem < tol:
                return mu, second - mu * mu, rem
            k += 1
            w *= b

    def spec(self) -> dict:
        return {"kind": "geometric", "beta": self.beta}


@dataclass(frozen=True)
class ZeroTruncatedPoissonLaw(StepLaw):
    """Poisson(rate) conditioned to be >= 1."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ConfigError(f"truncated poisson needs rate > 0, got {self.rate}")

    def sample(self, rng: np.random.Generator) -> int:
        while True:
            x = int(rng.poisson(self.rate))
            if x > 0:
                return x

    def sample_rows(self, rng: np.random.Generator, size: int) -> IntegerDraws:
        out = rng.poisson(self.rate, size)
        while True:
            zero = np.nonzero(out == 0)[0]
            if zero.size == 0:
                return IntegerDraws(out)
            out[zero] = rng.poisson(self.rate, zero.size)

    def _divisible(self, m: int) -> float:
        # P{m | step} = (e^rate - 1)^-1 * sum_{j>=1} rate^(jm) / (jm)!
        if m == 1:
            return 1.0
        if m > 10**15:
            return 0.0  # rate^m/m! underflows far earlier at any desk-scale rate
        log_rate = math.log(self.rate)
        total = 0.0
        for j in range(1, 10000):
            jm = float(j) * float(m)
            log_term = jm * log_rate - math.lgamma(jm + 1.0)
            if log_term < -745.0:
                break
            term = math.exp(log_term)
            total += term
            if term < total * 1e-18:
                break
        return total / math.expm1(self.rate)

    def lambda_tail(self, p: int, k: int) -> float:
        _check_tail_args(p, k)
        return 1.0 if k == 0 else self._divisible(p**k)

    def divisibility_prob(self, m: PrimeExponentVector) -> float:
        return self._divisible(m.value())

    def log_moments(self, tol: float = 1e-10) -> tuple[float, float, float]:
        lam = self.rate
        norm = math.expm1(lam)
        mu = second = 0.0
        log_lam = math.log(lam)
        k = 1
        while True:
            w = math.exp(k * log_lam - math.lgamma(k + 1.0)) / norm
            lk = math.log(k)
            mu += lk * w
            second += lk * lk * w
            if k > 2 * lam + 4 and w * lk * lk * 3.0 < tol:
                # terms decay faster than 2^-1 here; remainder < 3 * last term
                return mu, second - mu * mu, w * lk * lk * 3.0
            k += 1

    def spec(self) -> dict:
        return {"kind": "truncated_poisson", "rate": self.rate}


@dataclass(frozen=True)
class PrimePowerLaw(StepLaw):
    """Step = p**K: prime p with probability weights[p], independently
    P{K = k} proportional to k^(-tail_exponent).

    With tail_exponent <= 2 the exponent K has infinite mean.
    """

    weights: tuple[tuple[int, float], ...]
    tail_exponent: float = 2.0

    def __init__(self, weights: Mapping[int, float] | Iterable[tuple[int, float]], tail_exponent: float = 2.0):
        pairs = tuple(sorted(dict(weights).items()))
        if not pairs:
            raise ConfigError("prime power law needs a nonempty weight map")
        for p, g in pairs:
            if not is_prime(p):
                raise ConfigError(f"prime power law weight key {p} is not prime")
            if not g > 0:
                raise ConfigError(f"weight for prime {p} must be positive")
        if abs(sum(g for _, g in pairs) - 1.0) > 1e-12:
            raise ConfigError("prime power law weights must sum to 1 within 1e-12")
        if not tail_exponent > 1:
            raise ConfigError(f"tail_exponent must exceed 1, got {tail_exponent}")
        object.__setattr__(self, "weights", pairs)
        object.__setattr__(self, "tail_exponent", tail_exponent)

    @cached_property
    def _zeta_s(self) -> float:
        return zeta(self.tail_exponent)

    @cached_property
    def _cum_weights(self) -> np.ndarray:
        return np.cumsum([g for _, g in self.weights])

    @cached_property
    def _prime_arr(self) -> np.ndarray:
        return np.array([p for p, _ in self.weights], dtype=np.int64)

    def _draw_parts(self, rng: np.random.Generator) -> tuple[int, int]:
        i = int(np.searchsorted(self._cum_weights, rng.random(), side="right"))
        i = min(i, len(self.weights) - 1)
        k = int(rng.zipf(self.tail_exponent))
        return self.weights[i][0], k

    def sample(self, rng: np.random.Generator) -> int:
        p, k = self._draw_parts(rng)
        return p**k

    def sample_pev(self, rng: np.random.Generator) -> PrimeExponentVector:
        p, k = self._draw_parts(rng)
        return PrimeExponentVector({p: k})

    def sample_rows(self, rng: np.random.Generator, size: int) -> PrimePowerDraws:
        idx = np.searchsorted(self._cum_weights, rng.random(size), side="right")
        idx = np.minimum(idx, len(self.weights) - 1)
        return PrimePowerDraws(self._prime_arr[idx], rng.zipf(self.tail_exponent, size))

    def lambda_tail(self, p: int, k: int) -> float:
        _check_tail_args(p, k)
        if k == 0:
            return 1.0
        g = dict(self.weights).get(p)
        if g is None:
            return 0.0
        return g * zeta_tail(self.tail_exponent, k) / self._zeta_s

    def divisibility_prob(self, m: PrimeExponentVector) -> float:
        if not m:
            return 1.0
        if len(m) > 1:
            return 0.0
        ((p, k),) = m.items()
        return self.lambda_tail(p, k)

    def prime_support(self) -> frozenset[int]:
        return frozenset(p for p, _ in self.weights)

    def log_moments(self, tol: float = 1e-10) -> tuple[float, float, float]:
        s = self.tail_exponent
        mean_k = zeta(s - 1) / self._zeta_s if s > 2 else math.inf
        mean_k2 = zeta(s - 2) / self._zeta_s if s > 3 else math.inf
        mean_logp = sum(g * log_prime(p) for p, g in self.weights)
        mean_log2p = sum(g * log_prime(p) ** 2 for p, g in self.weights)
        mu = mean_logp * mean_k
        second = mean_log2p * mean_k2
        var = second - mu * mu if math.isfinite(second) else math.inf
        return mu, var, 1e-13

    def lambda_mean(self, p: int, tol: float = 1e-12) -> float:
        g = dict(self.weights).get(p)
        if not g:
            return 0.0
        s = self.tail_exponent
        return g * zeta(s - 1) / self._zeta_s if s > 2 else math.inf

    def lambda_mean_sq(self, p: int, tol: float = 1e-12) -> float:
        g = dict(self.weights).get(p)
        if not g:
            return 0.0
        s = self.tail_exponent
        return g * zeta(s - 2) / self._zeta_s if s > 3 else math.inf

    def spec(self) -> dict:
        return {
            "kind": "prime_power",
            "weights": {str(p): g for p, g in self.weights},
            "tail_exponent": self.tail_exponent,
        }


@dataclass(frozen=True)
class ParetoExponentLaw(StepLaw):
    """Step = prime**K with P{K >= k} = k^(-alpha), alpha in (0,1).

    The multiplicity of `prime` is regularly varying with index alpha and
    infinite mean; the exact sampler is K = floor(U^(-1/alpha)).
    """

    prime: int
    alpha: float

    def __post_init__(self):
        if not is_prime(self.prime):
            raise ConfigError(f"{self.prime} is not prime")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"pareto exponent law needs alpha in (0,1), got {self.alpha}")

    def _draw_k(self, rng: np.random.Generator) -> int:
        u = rng.random()
        while u == 0.0:
            u = rng.random()
        return int(u ** (-1.0 / self.alpha))

    def sample(self, rng: np.random.Generator) -> int:
        return self.prime ** self._draw_k(rng)

    def sample_pev(self, rng: np.random.Generator) -> PrimeExponentVector:
        return PrimeExponentVector({self.prime: self._draw_k(rng)})

    def sample_rows(self, rng: np.random.Generator, size: int) -> PrimePowerDraws:
        u = rng.random(size)
        u[u == 0.0] = 0.5  # probability-zero guard
        exps = np.floor(u ** (-1.0 / self.alpha))
        return PrimePowerDraws(np.full(size, self.prime, dtype=np.int64), exps)

    def lambda_tail(self, p: int, k: int) -> float:
        _check_tail_args(p, k)
        if k == 0:
            return 1.0
        return float(k) ** -self.alpha if p == self.prime else 0.0

    def divisibility_prob(self, m: PrimeExponentVector) -> float:
        if not m:
            return 1.0
        if len(m) > 1:
            return 0.0
        ((p, k),) = m.items()
        return self.lambda_tail(p, k)

    def prime_support(self) -> frozenset[int]:
        return frozenset((self.prime,))

    def log_moments(self, tol: float = 1e-10) -> tuple[float, float, float]:
        return math.inf, math.inf, 0.0

    def lambda_mean(self, p: int, tol: float = 1e-12) -> float:
        return math.inf if p == self.prime else 0.0

    def lambda_mean_sq(self, p: int, tol: float = 1e-12) -> float:
        return math.inf if p == self.prime else 0.0

    def spec(self) -> dict:
        return {"kind": "pareto_exponent", "prime": self.prime, "alpha": self.alpha}


@dataclass(frozen=True)
class ConstantLaw(StepLaw):
    """Degenerate step equal to a fixed positive integer."""

    value: int

    def __post_init__(self):
        if not isinstance(self.value, int) or self.value < 1:
            raise ConfigError(f"constant law needs a positive integer, got {self.value!r}")

    @cached_property
    def _pev(self) -> PrimeExponentVector:
        return factorize(self.value)

    def sample(self, rng: np.random.Generator) -> int:
        return self.value

    def sample_pev(self, rng: np.random.Generator) -> PrimeExponentVector:
        return self._pev

    def sample_rows(self, rng: np.random.Generator, size: int) -> IntegerDraws:
        return IntegerDraws(np.full(size, self.value, dtype=np.int64))

    def lambda_tail(self, p: int, k: int) -> float:
        _check_tail_args(p, k)
        return 1.0 if self._pev.multiplicity(p) >= k else 0.0

    def divisibility_prob(self, m: PrimeExponentVector) -> float:
        return 1.0 if self.value % m.value() == 0 else 0.0

    def prime_support(self) -> frozenset[int]:
        return frozenset(self._pev.support())

    def log_moments(self, tol: float = 1e-10) -> tuple[float, float, float]:
        return math.log(self.value), 0.0, 0.0

    def lambda_mean(self, p: int, tol: float = 1e-12) -> float:
        return float(self._pev.multiplicity(p))

    def lambda_mean_sq(self, p: int, tol: float = 1e-12) -> float:
        return float(self._pev.multiplicity(p) ** 2)

    def lambda_cov(self, p: int, q: int, tol: float = 1e-12) -> float:
        return 0.0

    def spec(self) -> dict:
        return {"kind": "constant", "value": self.value}


class TableLaw(StepLaw):
    """Finitely supported law given by an explicit pmf."""

    __slots__ = ("support", "masses", "_cum", "_pevs")

    def __init__(self, pmf: Mapping[int, float], mass_tol: float = 1e-12):
        items = sorted(dict(pmf).items())
        if not items:
            raise ConfigError("table law needs a nonempty pmf")
        for v, w in items:
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"table law support must be positive integers, got {v!r}")
            if not w > 0:
                raise ConfigError(f"mass for {v} must be positive")
        total = math.fsum(w for _, w in items)
        if abs(total - 1.0) > mass_tol:
            raise ConfigError(f"table law masses sum to {total!r}, not 1 within {mass_tol}")
        self.support = tuple(v for v, _ in items)
        self.masses = tuple(w for _, w in items)
        self._cum = np.cumsum(self.masses)
        self._pevs = tuple(factorize(v) for v in self.support)

    def sample(self, rng: np.random.Generator) -> int:
        i = int(np.searchsorted(self._cum, rng.random(), side="right"))
        return self.support[min(i, len(self.support) - 1)]

    def sample_rows(self, rng: np.random.Generator, size: int) -> IntegerDraws:
        idx = np.searchsorted(self._cum, rng.random(size), side="right")
        idx = np.minimum(idx, len(self.support) - 1)
        return IntegerDraws(np.array(self.support, dtype=np.int64)[idx])

    def lambda_tail(self, p: int, k: int) -> float:
        _check_tail_args(p, k)
        if k == 0:
            return 1.0
        return math.fsum(w for v, w in zip(self._pevs, self.masses) if v.multiplicity(p) >= k)

    def divisibility_prob(self, m: PrimeExponentVector) -> float:
        mv = m.value()
        return math.fsum(w for v, w in zip(self.support, self.masses) if v % mv == 0)

    def prime_support(self) -> frozenset[int]:
        out: set[int] = set()
        for pev in self._pevs:
            out.update(pev.support())
        return frozenset(out)

    def log_moments(self, tol: float = 1e-10) -> tuple[float, float, float]:
        mu = math.fsum(w * math.log(v) for v, w in zip(self.support, self.masses))
        second = math.fsum(w * math.log(v) ** 2 for v, w in zip(self.support, self.masses))
        return mu, second - mu * mu, 0.0

    def lambda_cov(self, p: int, q: int, tol: float = 1e-12) -> float:
        exy = math.fsum(
            w * v.multiplicity(p) * v.multiplicity(q) for v, w in zip(self._pevs, self.masses)
        )
        return exy - self.lambda_mean(p) * self.lambda_mean(q)

    def __eq__(self, other):
        if not isinstance(other, TableLaw):
            return NotImplemented
        return self.support == other.support and self.masses == other.masses

    def __hash__(self):
        return hash((self.support, self.masses))

    def spec(self) -> dict:
        return {"kind": "table", "pmf": {str(v): w for v, w in zip(self.support, self.masses)}}


@dataclass(frozen=True)
class ProductLaw(StepLaw):
    """Product of independent component steps; multiplicities add."""

    factors: tuple[StepLaw, ...]

    def __init__(self, factors: Sequence[StepLaw]):
        factors = tuple(factors)
        if len(factors) < 2:
            raise ConfigError("product law needs at least two factors")
        object.__setattr__(self, "factors", factors)

    def sample(self, rng: np.random.Generator) -> int:
        out = 1
        for f in self.factors:
            out *= f.sample(rng)
        return out

    def sample_pev(self, rng: np.random.Generator) -> PrimeExponentVector:
        out = ONE
        for f in self.factors:
            out = out * f.sample_pev(rng)
        return out

    def sample_rows(self, rng: np.random.Generator, size: int) -> CompositeDraws:
        return CompositeDraws(tuple(f.sample_rows(rng, size) for f in self.factors))

    def _pmf_of(self, law: StepLaw, p: int, tol: float) -> list[float]:
        # pmf of lambda_p(law) truncated where the tail drops below tol
        tails = [1.0]
        for k in range(1, 400):
            t = law.lambda_tail(p, k)
            tails.append(t)
            if t < tol:
                break
        pmf = [tails[i] - tails[i + 1] for i in range(len(tails) - 1)]
        pmf.append(tails[-1])
        return pmf

    def lambda_tail(self, p: int, k: int) -> float:
        _check_tail_args(p, k)
        if k == 0:
            return 1.0
        pmf = [1.0]
        for f in self.factors:
            fp = self._pmf_of(f, p, 1e-16)
            out = [0.0] * (len(pmf) + len(fp) - 1)
            for i, a in enumerate(pmf):
                if a == 0.0:
                    continue
                for j, b in enumerate(fp):
                    out[i + j] += a * b
            pmf = out
        return max(0.0, 1.0 - math.fsum(pmf[:k])) if k <= len(pmf) else 0.0

    def divisibility_prob(self, m: PrimeExponentVector) -> float:
        if not m:
            return 1.0
        # assign each constrained prime to the unique factor able to produce it
        buckets: dict[int, dict[int, int]] = {}
        supports = [f.prime_support() for f in self.factors]
        for p, e in m.items():
            owners = [i for i, s in enumerate(supports) if s is None or p in s]
            if not owners:
                return 0.0
            if len(owners) > 1:
                raise ConfigError(
                    f"divisibility for prime {p} is ambiguous: several product factors can produce it"
                )
            buckets.setdefault(owners[0], {})[p] = e
        prob = 1.0
        for i, constraint in buckets.items():
            prob *= self.factors[i].divisibility_prob(PrimeExponentVector(constraint))
        return prob

    def prime_support(self) -> frozenset[int] | None:
        out: set[int] = set()
        for f in self.factors:
            s = f.prime_support()
            if s is None:
                return None
            out.update(s)
        return frozenset(out)

    def log_moments(self, tol: float = 1e-10) -> tuple[float, float, float]:
        mu = var = err = 0.0
        for f in self.factors:
            m, v, e = f.log_moments(tol)
            mu, var, err = mu + m, var + v, err + e
        return mu, var, err

    def lambda_mean(self, p: int, tol: float = 1e-12) -> float:
        return sum(f.lambda_mean(p, tol) for f in self.factors)

    def lambda_mean_sq(self, p: int, tol: float = 1e-12) -> float:
        # E[(sum X_i)^2] with independent nonnegative components
        means = [f.lambda_mean(p, tol) for f in self.factors]
        seconds = [f.lambda_mean_sq(p, tol) for f in self.factors]
        if any(math.isinf(x) for x in means + seconds):
            return math.inf
        total = sum(seconds)
        for i, a in enumerate(means):
            for b in means[i + 1 :]:
                total += 2.0 * a * b
        return total

    def spec(self) -> dict:
        return {"kind": "product", "factors": [f.spec() for f in self.factors]}


def _check_tail_args(p: int, k: int) -> None:
    if not is_prime(int(p)):
        raise ValueError(f"{p} is not prime")
    if not isinstance(k, (int, np.integer)) or k < 0:
        raise ValueError(f"k must be a nonnegative integer, got {k!r}")


# --- joint couplings of (factor, perturbation) --------------------------------


class JointStepLaw:
    """Joint law of one (factor, perturbation) step pair."""

    def factor_marginal(self) -> StepLaw:
        raise NotImplementedError

    def perturbation_marginal(self) -> StepLaw:
        raise NotImplementedError

    def sample_pair(self, rng: np.random.Generator) -> tuple[int, int]:
        raise NotImplementedError

    def sample_pair_pev(
        self, rng: np.random.Generator
    ) -> tuple[PrimeExponentVector, PrimeExponentVector]:
        raise NotImplementedError

    def sample_pair_rows(self, rng: np.random.Generator, size: int) -> tuple:
        """(factor draws, perturbation draws); blocks may be shared."""
        raise NotImplementedError

    def joint_count_tail(self, constraints: Mapping[int, tuple[int, int]]) -> float:
        """P{lambda_q(factor) >= k_q and lambda_q(perturbation) >= l_q for all q}.

        `constraints` maps primes to (k_q, l_q); the answer reduces to
        divisibility probabilities of the two constraint products.
        """
        k_vec, l_vec = _constraint_vectors(constraints)
        return self._joint_tail(k_vec, l_vec)

    def _joint_tail(self, k_vec: PrimeExponentVector, l_vec: PrimeExponentVector) -> float:
        raise NotImplementedError

    def excess_moments(self, p: int, tol: float = 1e-12) -> tuple[float, float]:
        """E[(lambda_p(pert) - lambda_p(factor))^+] and its second moment."""
        raise NotImplementedError

    def spec(self) -> dict:
        raise NotImplementedError

    def describe(self) -> str:
        s = self.spec()
        return s["coupling"]


def _constraint_vectors(
    constraints: Mapping[int, tuple[int, int]]
) -> tuple[PrimeExponentVector, PrimeExponentVector]:
    k_entries: dict[int, int] = {}
    l_entries: dict[int, int] = {}
    for p, (k, l) in constraints.items():
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        if not isinstance(k, int) or not isinstance(l, int) or k < 0 or l < 0:
            raise ValueError(f"constraint exponents must be nonnegative ints, got {(k, l)!r}")
        if k > 0:
            k_entries[p] = k
        if l > 0:
            l_entries[p] = l
    return PrimeExponentVector(k_entries), PrimeExponentVector(l_entries)


def _truncated_pmf(law: StepLaw, p: int, tol: float = 1e-15) -> list[float]:
    tails = [1.0]
    for k in range(1, 400):
        t = law.lambda_tail(p, k)
        tails.append(t)
        if t < tol:
            break
    pmf = [tails[i] - tails[i + 1] for i in range(len(tails) - 1)]
    pmf.append(tails[-1])
    return pmf


@dataclass(frozen=True)
class IndependentCoupling(JointStepLaw):
    """Factor and perturbation drawn independently."""

    factor: StepLaw
    perturbation: StepLaw

    def factor_marginal(self) -> StepLaw:
        return self.factor

    def perturbation_marginal(self) -> StepLaw:
        return self.perturbation

    def sample_pair(self, rng: np.random.Generator) -> tuple[int, int]:
        x = self.factor.sample(rng)
        return x, self.perturbation.sample(rng)

    def sample_pair_pev(self, rng):
        x = self.factor.sample_pev(rng)
        return x, self.perturbation.sample_pev(rng)

    def sample_pair_rows(self, rng: np.random.Generator, size: int) -> tuple:
        x = self.factor.sample_rows(rng, size)
        return x, self.perturbation.sample_rows(rng, size)

    def _joint_tail(self, k_vec, l_vec) -> float:
        return self.factor.divisibility_prob(k_vec) * self.perturbation.divisibility_prob(l_vec)

    def excess_moments(self, p: int, tol: float = 1e-12) -> tuple[float, float]:
        if math.isinf(self.perturbation.lambda_mean_sq(p, tol)):
            return math.inf, math.inf
        pmf_x = _truncated_pmf(self.factor, p)
        pmf_y = _truncated_pmf(self.perturbation, p)
        first = second = 0.0
        for y, wy in enumerate(pmf_y):
            if wy == 0.0 or y == 0:
                continue
            for x, wx in enumerate(pmf_x[:y]):
                d = y - x
                first += wy * wx * d
                second += wy * wx * d * d
        return first, second

    def spec(self) -> dict:
        return {
            "coupling": "independent",
            "factor": self.factor.spec(),
            "perturbation": self.perturbation.spec(),
        }


@dataclass(frozen=True)
class IdenticalCoupling(JointStepLaw):
    """Perturbation equals the factor almost surely."""

    law: StepLaw

    def factor_marginal(self) -> StepLaw:
        return self.law

    def perturbation_marginal(self) -> StepLaw:
        return self.law

    def sample_pair(self, rng: np.random.Generator) -> tuple[int, int]:
        x = self.law.sample(rng)
        return x, x

    def sample_pair_pev(self, rng):
        x = self.law.sample_pev(rng)
        return x, x

    def sample_pair_rows(self, rng: np.random.Generator, size: int) -> tuple:
        x = self.law.sample_rows(rng, size)
        return x, x

    def _joint_tail(self, k_vec, l_vec) -> float:
        from .primes import lcm

        return self.law.divisibility_prob(lcm([k_vec, l_vec]))

    def excess_moments(self, p: int, tol: float = 1e-12) -> tuple[float, float]:
        return 0.0, 0.0

    def spec(self) -> dict:
        return {"coupling": "identical", "law": self.law.spec()}


@dataclass(frozen=True)
class PerturbationOnly(JointStepLaw):
    """Factor fixed at 1; only the perturbation varies."""

    perturbation: StepLaw

    def factor_marginal(self) -> StepLaw:
        return ConstantLaw(1)

    def perturbation_marginal(self) -> StepLaw:
        return self.perturbation

    def sample_pair(self, rng: np.random.Generator) -> tuple[int, int]:
        return 1, self.perturbation.sample(rng)

    def sample_pair_pev(self, rng):
        return ONE, self.perturbation.sample_pev(rng)

    def sample_pair_rows(self, rng: np.random.Generator, size: int) -> tuple:
        ones = IntegerDraws(np.ones(size, dtype=np.int64))
        return ones, self.perturbation.sample_rows(rng, size)

    def _joint_tail(self, k_vec, l_vec) -> float:
        if k_vec:
            return 0.0
        return self.perturbation.divisibility_prob(l_vec)

    def excess_moments(self, p: int, tol: float = 1e-12) -> tuple[float, float]:
        return self.perturbation.lambda_mean(p, tol), self.perturbation.lambda_mean_sq(p, tol)

    def spec(self) -> dict:
        return {"coupling": "perturbation_only", "perturbation": self.perturbation.spec()}


class JointTableCoupling(JointStepLaw):
    """Finitely supported joint pmf over (factor, perturbation) pairs."""

    __slots__ = ("cells", "_cum", "_pairs")

    def __init__(self, cells: Mapping[tuple[int, int], float], mass_tol: float = 1e-12):
        items = sorted(dict(cells).items())
        if not items:
            raise ConfigError("joint table needs a nonempty cell map")
        for (i, j), w in items:
            if not isinstance(i, int) or not isinstance(j, int) or i < 1 or j < 1:
                raise ConfigError(f"joint table support must be positive integer pairs, got {(i, j)!r}")
            if not w > 0:
                raise ConfigError(f"mass for cell {(i, j)} must be positive")
        total = math.fsum(w for _, w in items)
        if abs(total - 1.0) > mass_tol:
            raise ConfigError(f"joint table masses sum to {total!r}, not 1 within {mass_tol}")
        self.cells = tuple((pair, w) for pair, w in items)
        self._pairs = np.array([pair for pair, _ in items], dtype=np.int64)
        self._cum = np.cumsum([w for _, w in items])

    def _marginal(self, axis: int) -> TableLaw:
        agg: dict[int, float] = {}
        for (i, j), w in self.cells:
            v = (i, j)[axis]
            agg[v] = agg.get(v, 0.0) + w
        return TableLaw(agg, mass_tol=1e-9)

    def factor_marginal(self) -> TableLaw:
        return self._marginal(0)

    def perturbation_marginal(self) -> TableLaw:
        return self._marginal(1)

    def sample_pair(self, rng: np.random.Generator) -> tuple[int, int]:
        i = int(np.searchsorted(self._cum, rng.random(), side="right"))
        pair = self.cells[min(i, len(self.cells) - 1)][0]
        return pair

    def sample_pair_pev(self, rng):
        x, y = self.sample_pair(rng)
        return factorize(x), factorize(y)

    def sample_pair_rows(self, rng: np.random.Generator, size: int) -> tuple:
        idx = np.searchsorted(self._cum, rng.random(size), side="right")
        idx = np.minimum(idx, len(self.cells) - 1)
        return IntegerDraws(self._pairs[idx, 0]), IntegerDraws(self._pairs[idx, 1])

    def _joint_tail(self, k_vec, l_vec) -> float:
        kv = k_vec.value()
        lv = l_vec.value()
        return math.fsum(w for (i, j), w in self.cells if i % kv == 0 and j % lv == 0)

    def excess_moments(self, p: int, tol: float = 1e-12) -> tuple[float, float]:
        first = second = 0.0
        for (i, j), w in self.cells:
            d = factorize(j).multiplicity(p) - factorize(i).multiplicity(p)
            if d > 0:
                first += w * d
                second += w * d * d
        return first, second

    def spec(self) -> dict:
        return {
            "coupling": "joint_table",
            "cells": {f"{i},{j}": w for (i, j), w in self.cells},
        }


def joint_table_from_csv(path: str) -> JointTableCoupling:
    """Load a joint table from CSV rows (i, j, w); masses must sum to 1 +- 1e-9."""
    cells: dict[tuple[int, int], float] = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            if row[0].strip().lower() in ("i", "factor"):
                continue  # header
            i, j, w = int(row[0]), int(row[1]), float(row[2])
            cells[(i, j)] = cells.get((i, j), 0.0) + w
    return JointTableCoupling(cells, mass_tol=1e-9)


# --- moments and condition checks --------------------------------------------


@dataclass(frozen=True)
class MomentSummary:
    """Series-computed moments of one step law."""

    mu_log: float
    sigma2_log: float
    mean_counts: dict[int, float]
    var_counts: dict[int, float]
    cov_counts: dict[tuple[int, int], float]
    truncation_error: float


def compute_moments(law: StepLaw, prime_limit: int = 100, tol: float = 1e-10) -> MomentSummary:
    """Log moments plus per-prime multiplicity moments for p <= prime_limit.

    Covariances are reported only for prime pairs with finite means (they
    are exactly 0 for the zeta law, whose multiplicities are independent).
    """
    mu, var, err = law.log_moments(tol)
    primes = sieve_primes(prime_limit)
    mean_counts: dict[int, float] = {}
    var_counts: dict[int, float] = {}
    for p in primes:
        m = law.lambda_mean(p, tol)
        mean_counts[p] = m
        var_counts[p] = law.lambda_mean_sq(p, tol) - m * m if math.isfinite(m) else math.inf
    cov_counts: dict[tuple[int, int], float] = {}
    for a, p in enumerate(primes):
        for q in primes[a + 1 :]:
            if math.isfinite(mean_counts[p]) and math.isfinite(mean_counts[q]):
                cov_counts[(p, q)] = law.lambda_cov(p, q, tol)
    return MomentSummary(mu, var, mean_counts, var_counts, cov_counts, err)


def frequent_rare_primes(
    law: StepLaw, n: int, prime_limit: int
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split primes <= prime_limit by the hit-probability threshold n^(-1/2).

    Frequent primes satisfy P{lambda_p(step) > 0} >= n^(-1/2); the rest are
    rare.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    threshold = 1.0 / math.sqrt(n)
    frequent: list[int] = []
    rare: list[int] = []
    for p in sieve_primes(prime_limit):
        (frequent if law.lambda_tail(p, 1) >= threshold else rare).append(p)
    return tuple(frequent), tuple(rare)


def frequent_boundary(law: StepLaw, n: int, prime_limit: int = 100_000) -> float:
    """Prime scale where P{lambda_p(step) > 0} crosses the n^(-1/2) threshold.

    Log-log interpolation between the last frequent prime and the first
    rare prime above it; exact for power-law hit probabilities (the zeta
    law gives n^(1/(2 alpha))). Returns 1.0 when every prime is rare and
    prime_limit when none is.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    threshold = 1.0 / math.sqrt(n)
    frequent, rare = frequent_rare_primes(law, n, prime_limit)
    if not frequent:
        return 1.0
    p1 = frequent[-1]
    above = [p for p in rare if p > p1]
    if not above:
        return float(prime_limit)
    p2 = above[0]
    h1 = law.lambda_tail(p1, 1)
    h2 = law.lambda_tail(p2, 1)
    if h2 <= 0.0 or h1 <= h2:
        return float(p1)
    frac = (math.log(threshold) - math.log(h1)) / (math.log(h2) - math.log(h1))
    return float(math.exp(math.log(p1) + frac * (math.log(p2) - math.log(p1))))


@dataclass(frozen=True)
class NegligibilityReport:
    """Numerical check that perturbations cannot shift the log-LCM limit.

    Each row holds, for one n: the largest frequent prime, the rare-prime
    remainder sum_p E[lambda_p(pert)] log p, its ratio to n^(-1/2), and the
    same remainder/ratio built from the excess moments
    E[(lambda_p(pert) - lambda_p(factor))^+]. A decreasing ratio column is
    consistent with the remainder being o(n^(-1/2)); the verdict uses the
    excess form (exactly 0 under an identical coupling), which is what the
    transfer theorem actually requires.
    """

    prime_limit: int
    second_moment_sum: float
    rows: tuple[tuple[int, int, float, float, float, float], ...]
    trend: str
    excess_trend: str
    consistent: bool

    def to_dict(self) -> dict:
        return {
            "prime_limit": self.prime_limit,
            "second_moment_sum": self.second_moment_sum,
            "rows": [
                {
                    "n": n,
                    "frequent_prime_max": boundary,
                    "rare_remainder": rem,
                    "ratio_to_sqrt_n": ratio,
                    "rare_excess_remainder": erem,
                    "excess_ratio_to_sqrt_n": eratio,
                }
                for (n, boundary, rem, ratio, erem, eratio) in self.rows
            ],
            "trend": self.trend,
            "excess_trend": self.excess_trend,
            "consistent": self.consistent,
        }


def _ratio_trend(ratios: Sequence[float]) -> str:
    if all(r < 1e-300 for r in ratios):
        return "zero"
    if all(b < a for a, b in zip(ratios, ratios[1:])):
        return "decreasing"
    if all(b > a for a, b in zip(ratios, ratios[1:])):
        return "increasing"
    return "mixed"


def check_negligibility(
    coupling: JointStepLaw,
    n_grid: Sequence[int],
    prime_limit: int = 100000,
    tol: float = 1e-12,
) -> NegligibilityReport:
    """Evaluate the perturbation-negligibility conditions on a grid of n.

    All sums are truncated at prime_limit. Reported: the second-moment
    excess sum sum_p E[((lambda_p(pert)-lambda_p(factor))^+)^2] log p, and
    per n the rare-prime remainders (perturbation-mean form and excess
    form) with their ratios to n^(-1/2). This reports evidence, it proves
    nothing.
    """
    n_grid = sorted(set(int(n) for n in n_grid))
    if not n_grid or n_grid[0] < 1:
        raise ValueError("n_grid must hold positive integers")
    factor = coupling.factor_marginal()
    pert = coupling.perturbation_marginal()
    primes = np.array(sieve_primes(prime_limit), dtype=np.int64)
    logs = np.log(primes.astype(np.float64))

    # per-prime perturbation means, vectorized when the law provides it
    means = pert.lambda_mean_array(primes)
    if means is None:
        means = np.array([pert.lambda_mean(int(p), tol) for p in primes])

    if isinstance(coupling, IdenticalCoupling):  # excess is identically 0
        excess_first = np.zeros(len(primes))
        second_sum = 0.0
    else:
        excess_first = np.empty(len(primes))
        second_sum = 0.0
        for i, (p, lp) in enumerate(zip(primes.tolist(), logs.tolist())):
            first, sec = coupling.excess_moments(p, tol)
            excess_first[i] = first
            second_sum += sec * lp

    # hit probabilities of the factor law decide frequent vs rare
    hit = np.array([factor.lambda_tail(int(p), 1) for p in primes])
    weighted = means * logs
    excess_weighted = excess_first * logs

    rows = []
    for n in n_grid:
        threshold = 1.0 / math.sqrt(n)
        rare = hit < threshold
        boundary = int(primes[~rare][-1]) if (~rare).any() else 0
        remainder = float(np.sum(weighted[rare]))
        excess_rem = float(np.sum(excess_weighted[rare]))
        rows.append(
            (n, boundary, remainder, remainder * math.sqrt(n), excess_rem, excess_rem * math.sqrt(n))
        )

    trend = _ratio_trend([r[3] for r in rows])
    excess_trend = _ratio_trend([r[5] for r in rows])
    return NegligibilityReport(
        prime_limit=prime_limit,
        second_moment_sum=second_sum,
        rows=tuple(rows),
        trend=trend,
        excess_trend=excess_trend,
        consistent=excess_trend in ("zero", "decreasing"),
    )


# --- config parsing -----------------------------------------------------------


def _require(spec: Mapping, key: str, context: str):
    if key not in spec:
        raise ConfigError(f"{context}: missing required field {key!r}")
    return spec[key]


def law_from_spec(spec: Mapping) -> StepLaw:
    """Build a step law from a config mapping with a 'kind' discriminator."""
    if not isinstance(spec, Mapping):
        raise ConfigError(f"law spec must be a mapping, got {type(spec).__name__}")
    kind = _require(spec, "kind", "law spec")
    if kind == "zeta":
        return ZetaLaw(float(_require(spec, "alpha", "zeta law")))
    if kind == "geometric":
        return GeometricLaw(float(_require(spec, "beta", "geometric law")))
    if kind == "truncated_poisson":
        return ZeroTruncatedPoissonLaw(float(_require(spec, "rate", "truncated poisson law")))
    if kind == "prime_power":
        weights = {int(p): float(w) for p, w in _require(spec, "weights", "prime power law").items()}
        return PrimePowerLaw(weights, float(spec.get("tail_exponent", 2.0)))
    if kind == "pareto_exponent":
        return ParetoExponentLaw(
            int(_require(spec, "prime", "pareto exponent law")),
            float(_require(spec, "alpha", "pareto exponent law")),
        )
    if kind in ("constant", "degenerate"):
        return ConstantLaw(int(_require(spec, "value", "constant law")))
    if kind == "table":
        pmf = {int(v): float(w) for v, w in _require(spec, "pmf", "table law").items()}
        return TableLaw(pmf)
    if kind == "product":
        factors = [law_from_spec(f) for f in _require(spec, "factors", "product law")]
        return ProductLaw(factors)
    raise ConfigError(f"unknown law kind {kind!r}")


def coupling_from_spec(spec: Mapping) -> JointStepLaw:
    """Build a joint step law from a config mapping with a 'coupling' field."""
    if not isinstance(spec, Mapping):
        raise ConfigError(f"coupling spec must be a mapping, got {type(spec).__name__}")
    coupling = _require(spec, "coupling", "coupling spec")
    if coupling == "independent":
        return IndependentCoupling(
            law_from_spec(_require(spec, "factor", "independent coupling")),
            law_from_spec(_require(spec, "perturbation", "independent coupling")),
        )
    if coupling == "identical":
        return IdenticalCoupling(law_from_spec(_require(spec, "law", "identical coupling")))
    if coupling == "perturbation_only":
        return PerturbationOnly(
            law_from_spec(_require(spec, "perturbation", "perturbation_only coupling"))
        )
    if coupling == "joint_table":
        if "csv" in spec:
            return joint_table_from_csv(spec["csv"])
        cells_raw = _require(spec, "cells", "joint table coupling")
        cells: dict[tuple[int, int], float] = {}
        for key, w in cells_raw.items():
            i, j = (int(part) for part in str(key).split(","))
            cells[(i, j)] = float(w)
        return JointTableCoupling(cells, mass_tol=1e-9)
    raise ConfigError(f"unknown coupling {coupling!r}")
