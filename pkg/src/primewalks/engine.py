"""Vectorized per-replica reducers for walk statistics.

The streaming walk in `walks` is the readable reference lane; experiments
need thousands of replicas at n ~ 10^4 steps, which this module serves by
drawing whole step rows per replica and reducing them with numpy. Every
reducer is a pure function of the draw rows, and each replica owns a
counter-based random stream derived from (seed, replica index), so
results are independent of scheduling and thread count.

Step indexing: row position k-1 holds step k. For a prime p,
S_k = sum of factor exponents over steps <= k, and the perturbed count at
step k is T_k = S_{k-1} + (perturbation exponent at step k). The log of
LCM(perturbed products 1..K) is sum_p max_{k<=K} T_k(p) log p, which the
full reducer evaluates by splitting primes into a small band (p <= 97,
dense rows) and survivors (p > 97, occurrence lists; a residual below
97^2 after stripping the band is itself prime).
"""

from __future__ import annotations

import math
from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .laws import CompositeDraws, IntegerDraws, JointStepLaw, PrimePowerDraws
from .primes import factorize, is_prime, sieve_primes

__all__ = [
    "SMALL_PRIMES",
    "replica_rng",
    "prefix_at",
    "shifted_prefix",
    "perturbed_row",
    "perturbed_at",
    "max_perturbed_at",
    "log_product_at",
    "lambda_row",
    "log_lcm_at",
    "run_replicas",
]

SMALL_PRIMES: tuple[int, ...] = tuple(sieve_primes(97))
_SMALL_LOGS = {p: math.log(p) for p in SMALL_PRIMES}
_SMALL_SQ = 97 * 97


def replica_rng(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for one replica."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, index))))


def _check_k_idx(k_idx, n: int) -> np.ndarray:
    idx = np.asarray(k_idx, dtype=np.int64)
    if idx.ndim != 1 or idx.size == 0:
        raise ValueError("k_idx must be a nonempty 1-d index list")
    if (idx < 1).any() or (idx > n).any():
        raise ValueError("k_idx entries must lie in [1, n]")
    if (np.diff(idx) < 0).any():
        raise ValueError("k_idx must be nondecreasing")
    return idx


def prefix_at(row: np.ndarray, k_idx) -> np.ndarray:
    """S_K for each K in k_idx: prefix sums of one exponent row."""
    idx = _check_k_idx(k_idx, row.size)
    return np.cumsum(row)[idx - 1]


def shifted_prefix(row: np.ndarray) -> np.ndarray:
    """S_{k-1} aligned at position k-1 (zero at the first step)."""
    out = np.empty_like(row)
    out[0] = 0
    np.cumsum(row[:-1], out=out[1:])
    return out


def perturbed_row(f_row: np.ndarray, e_row: np.ndarray) -> np.ndarray:
    """T_k = S_{k-1} + perturbation exponent, aligned at position k-1."""
    return shifted_prefix(f_row) + e_row


def perturbed_at(f_row: np.ndarray, e_row: np.ndarray, k_idx) -> np.ndarray:
    """T_K for each K in k_idx."""
    idx = _check_k_idx(k_idx, f_row.size)
    return perturbed_row(f_row, e_row)[idx - 1]


def max_perturbed_at(f_row: np.ndarray, e_row: np.ndarray, k_idx) -> np.ndarray:
    """max_{k<=K} T_k for each K in k_idx."""
    idx = _check_k_idx(k_idx, f_row.size)
    return np.maximum.accumulate(perturbed_row(f_row, e_row))[idx - 1]


def log_product_at(log_row: np.ndarray, k_idx) -> np.ndarray:
    """log of the product of the first K factors, per K in k_idx."""
    idx = _check_k_idx(k_idx, log_row.size)
    return np.cumsum(log_row)[idx - 1]


def lambda_row(draws, p: int) -> np.ndarray:
    """Exponent row of one prime across a block of draws."""
    return draws.multiplicity_of(p)


# --- full log-LCM reducer ------------------------------------------------------


def _flatten(draws) -> tuple[list[np.ndarray], list[tuple[np.ndarray, np.ndarray]]]:
    """Split a draw container into integer-value parts and (prime, exp) parts."""
    if isinstance(draws, IntegerDraws):
        return [draws.values], []
    if isinstance(draws, PrimePowerDraws):
        return [], [(draws.primes, draws.exps)]
    if isinstance(draws, CompositeDraws):
        ints: list[np.ndarray] = []
        powers: list[tuple[np.ndarray, np.ndarray]] = []
        for part in draws.parts:
            i, q = _flatten(part)
            ints.extend(i)
            powers.extend(q)
        return ints, powers
    raise TypeError(f"unsupported draw container {type(draws).__name__}")


def _strip_prime(vals: np.ndarray, p: int) -> np.ndarray:
    """Divide p fully out of vals in place, returning the exponent row."""
    out = np.zeros(vals.shape, dtype=np.int64)
    idx = np.nonzero(vals % p == 0)[0]
    while idx.size:
        vals[idx] //= p
        out[idx] += 1
        idx = idx[vals[idx] % p == 0]
    return out


def _survivors(vals: np.ndarray, into: dict[int, list[tuple[int, float]]]) -> None:
    """Factor residuals (all prime factors > 97) into occurrence lists."""
    positions = np.nonzero(vals > 1)[0]
    for pos in positions.tolist():
        v = int(vals[pos])
        if v < _SMALL_SQ or is_prime(v):
            into.setdefault(v, []).append((pos, 1.0))
            continue
        for q, e in factorize(v).items():
            into.setdefault(q, []).append((pos, float(e)))


def _power_survivors(
    primes: np.ndarray, exps: np.ndarray, into: dict[int, list[tuple[int, float]]]
) -> None:
    mask = ~np.isin(primes, SMALL_PRIMES)
    for pos in np.nonzero(mask)[0].tolist():
        into.setdefault(int(primes[pos]), []).append((pos, float(exps[pos])))


def _survivor_max(
    f_hits: list[tuple[int, float]],
    e_hits: list[tuple[int, float]],
    k_idx: np.ndarray,
) -> np.ndarray:
    """max_{k<=K} T_k for one rare prime given its occurrence lists.

    Hits are (0-based position, exponent). With S_j = sum of factor
    exponents at positions < j, the candidates at horizon K are S_{K-1}
    (position K-1 exclusive) and S_q + e over perturbation hits (q, e)
    with q <= K-1.
    """
    f_hits = sorted(f_hits)
    f_pos = [q for q, _ in f_hits]
    f_cum = [0.0]
    for _, e in f_hits:
        f_cum.append(f_cum[-1] + e)

    def s_before(pos: int) -> float:
        return f_cum[bisect_left(f_pos, pos)]

    e_hits = sorted(e_hits)
    out = np.zeros(k_idx.size)
    for i, k in enumerate(k_idx.tolist()):
        best = s_before(k - 1)
        for q, e in e_hits:
            if q > k - 1:
                break
            cand = s_before(q) + e
            if cand > best:
                best = cand
        out[i] = best
    return out


def log_lcm_at(f_draws, e_draws, k_idx) -> np.ndarray:
    """log LCM of the perturbed products 1..K, for each K in k_idx.

    Accepts the draw containers of one replica (factor row, perturbation
    row). Small primes go through dense exponent rows; larger primes are
    rare enough to handle via occurrence lists after stripping the small
    band out of the integer values.
    """
    f_ints, f_powers = _flatten(f_draws)
    e_ints, e_powers = _flatten(e_draws)
    n_set = {arr.shape[0] for arr in f_ints + e_ints}
    n_set.update(arr.shape[0] for arr, _ in f_powers + e_powers)
    if len(n_set) != 1:
        raise ValueError("factor and perturbation rows must have equal length")
    n = n_set.pop()
    idx = _check_k_idx(k_idx, n)

    f_vals = [v.astype(np.int64, copy=True) for v in f_ints]
    e_vals = [v.astype(np.int64, copy=True) for v in e_ints]

    total = np.zeros(idx.size)
    for p in SMALL_PRIMES:
        f_row = None
        for vals in f_vals:
            r = _strip_prime(vals, p)
            f_row = r if f_row is None else f_row + r
        for primes, exps in f_powers:
            r = np.where(primes == p, exps, 0)
            f_row = r if f_row is None else f_row + r
        e_row = None
        for vals in e_vals:
            r = _strip_prime(vals, p)
            e_row = r if e_row is None else e_row + r
        for primes, exps in e_powers:
            r = np.where(primes == p, exps, 0)
            e_row = r if e_row is None else e_row + r
        if f_row is None:
            f_row = np.zeros(n, dtype=np.int64)
        if e_row is None:
            e_row = np.zeros(n, dtype=np.int64)
        if not f_row.any() and not e_row.any():
            continue
        m = np.maximum.accumulate(perturbed_row(f_row, e_row))[idx - 1]
        total += m * _SMALL_LOGS[p]

    f_surv: dict[int, list[tuple[int, float]]] = {}
    e_surv: dict[int, list[tuple[int, float]]] = {}
    for vals in f_vals:
        _survivors(vals, f_surv)
    for primes, exps in f_powers:
        _power_survivors(primes, exps, f_surv)
    for vals in e_vals:
        _survivors(vals, e_surv)
    for primes, exps in e_powers:
        _power_survivors(primes, exps, e_surv)

    for p in sorted(set(f_surv) | set(e_surv)):
        m = _survivor_max(f_surv.get(p, []), e_surv.get(p, []), idx)
        total += m * math.log(p)
    return total


def run_replicas(
    fn: Callable[[int, np.random.Generator], np.ndarray],
    m: int,
    seed: int,
    threads: int = 1,
) -> list:
    """Evaluate fn(replica_index, stream) for indices 0..m-1.

    Results land in a list addressed by replica index, so the outcome is
    identical for any thread count; each replica's stream depends only on
    (seed, index).
    """
    if m < 1:
        raise ValueError("need at least one replica")
    out: list = [None] * m
    if threads <= 1:
        for r in range(m):
            out[r] = fn(r, replica_rng(seed, r))
        return out

    block = max(1, math.ceil(m / (4 * threads)))
    spans = [(lo, min(lo + block, m)) for lo in range(0, m, block)]

    def work(span):
        lo, hi = span
        for r in range(lo, hi):
            out[r] = fn(r, replica_rng(seed, r))

    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(work, spans))
    return out
