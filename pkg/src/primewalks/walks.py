"""Streaming simulation of multiplicative perturbed random walks.

A walk multiplies i.i.d. integer factors into a running product; each step
also exposes a perturbed product (previous product times that step's
perturbation). Everything is tracked in prime-exponent space, so the
integers themselves are never materialized: the state carries the exponent
vector of the current product, the running per-prime maxima of the
perturbed-product exponents, and the logs derived from them. The log of
the least common multiple of all perturbed products seen so far is the
max-weighted sum over primes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .laws import JointStepLaw
from .primes import ONE, PrimeExponentVector, factorize, log_prime

__all__ = [
    "WalkState",
    "WalkSnapshot",
    "walk_init",
    "walk_step",
    "run_trajectory",
    "product_count",
    "max_perturbed_count",
    "write_trace_csv",
]


def _as_pev(value) -> PrimeExponentVector:
    if isinstance(value, PrimeExponentVector):
        return value
    if isinstance(value, (int, np.integer)):
        return factorize(int(value))
    raise TypeError(f"expected positive integer or exponent vector, got {type(value).__name__}")


@dataclass(frozen=True)
class WalkState:
    """State of a perturbed multiplicative walk after n steps.

    product_exponents holds the exponent vector of the product of the
    first n factors; perturbed_max maps each prime to the largest exponent
    it has attained in any perturbed product so far; last_factor is the
    most recent factor (its support is where the product exponents last
    moved, which the next step needs to refresh the maxima). log_product
    and log_lcm are maintained incrementally. trace, when enabled, records
    (step, log_product, log_perturbed, log_lcm) per step.
    """

    n: int
    product_exponents: PrimeExponentVector
    perturbed_max: Mapping[int, int]
    log_product: float
    log_lcm: float
    last_factor: PrimeExponentVector
    trace: tuple[tuple[int, float, float, float], ...] | None

    def product_count(self, p: int) -> int:
        """Exponent of p in the current product."""
        return self.product_exponents.multiplicity(p)

    def max_perturbed_count(self, p: int) -> int:
        """Running maximum exponent of p over all perturbed products."""
        return self.perturbed_max.get(p, 0)


@dataclass(frozen=True)
class WalkSnapshot:
    """Mid-trajectory record at one step index.

    product_counts and max_counts are restricted to the primes requested
    by the caller (empty when none were).
    """

    k: int
    log_product: float
    log_lcm: float
    product_counts: Mapping[int, int]
    max_counts: Mapping[int, int]


def walk_init(trace: bool = False) -> WalkState:
    """Fresh walk: empty product, zero logs, no maxima."""
    return WalkState(
        n=0,
        product_exponents=ONE,
        perturbed_max={},
        log_product=0.0,
        log_lcm=0.0,
        last_factor=ONE,
        trace=() if trace else None,
    )


def walk_step(state: WalkState, factor, perturbation) -> WalkState:
    """Advance one step: observe the perturbed product, then multiply.

    The perturbed product of step n+1 is the current product times
    `perturbation`; its exponents update the running maxima. Afterwards
    `factor` is multiplied into the product. Both arguments may be
    positive integers or prime-exponent vectors.

    Only primes in the supports of `perturbation` and of the previous
    step's factor can raise a maximum: for any other prime p the new
    perturbed exponent equals the product exponent from two steps back,
    which the previous perturbed product already dominated.
    """
    pert = _as_pev(perturbation)
    fact = _as_pev(factor)
    exps = state.product_exponents

    perturbed_max = dict(state.perturbed_max)
    log_lcm = state.log_lcm
    candidates = set(pert.support())
    candidates.update(state.last_factor.support())
    for p in sorted(candidates):
        cand = exps.multiplicity(p) + pert.multiplicity(p)
        old = perturbed_max.get(p, 0)
        if cand > old:
            perturbed_max[p] = cand
            log_lcm += (cand - old) * log_prime(p)

    log_perturbed = state.log_product + pert.log_value()
    new_exps = exps * fact
    log_product = state.log_product + fact.log_value()
    n = state.n + 1

    trace = state.trace
    if trace is not None:
        trace = trace + ((n, log_product, log_perturbed, log_lcm),)

    return WalkState(
        n=n,
        product_exponents=new_exps,
        perturbed_max=perturbed_max,
        log_product=log_product,
        log_lcm=log_lcm,
        last_factor=fact,
        trace=trace,
    )


def product_count(state: WalkState, p: int) -> int:
    """Exponent of p in the product after n steps."""
    return state.product_count(p)


def max_perturbed_count(state: WalkState, p: int) -> int:
    """Largest exponent of p over the perturbed products of the first n steps."""
    return state.max_perturbed_count(p)


def run_trajectory(
    joint: JointStepLaw,
    n: int,
    rng: np.random.Generator,
    record_at: Sequence[int] | None = None,
    snapshot_primes: Sequence[int] | None = None,
    trace: bool = False,
) -> tuple[WalkState, list[WalkSnapshot]]:
    """Drive a walk for n steps with pairs drawn from a joint step law.

    record_at lists step indices (sorted, each <= n) at which to record a
    snapshot; snapshot_primes selects the primes whose counts the
    snapshots carry. Returns the final state and the snapshots in order.
    """
    if n < 0:
        raise ValueError("step count must be nonnegative")
    record = list(record_at) if record_at is not None else []
    if record != sorted(record):
        raise ValueError("record_at must be sorted")
    if record and (record[0] < 0 or record[-1] > n):
        raise ValueError("record_at indices must lie in [0, n]")
    primes = tuple(snapshot_primes) if snapshot_primes is not None else ()

    # Trace rows accumulate in a list and attach to the final state once;
    # per-step tuple concatenation would be quadratic in n.
    state = walk_init(trace=False)
    rows: list[tuple[int, float, float, float]] | None = [] if trace else None
    snapshots: list[WalkSnapshot] = []
    pos = 0
    while pos < len(record) and record[pos] == 0:
        snapshots.append(_snapshot(state, primes))
        pos += 1
    for k in range(1, n + 1):
        fact, pert = joint.sample_pair_pev(rng)
        prev_log_product = state.log_product
        state = walk_step(state, fact, pert)
        if rows is not None:
            rows.append((k, state.log_product, prev_log_product + pert.log_value(), state.log_lcm))
        while pos < len(record) and record[pos] == k:
            snapshots.append(_snapshot(state, primes))
            pos += 1
    if rows is not None:
        state = replace(state, trace=tuple(rows))
    return state, snapshots


def _snapshot(state: WalkState, primes: tuple[int, ...]) -> WalkSnapshot:
    return WalkSnapshot(
        k=state.n,
        log_product=state.log_product,
        log_lcm=state.log_lcm,
        product_counts={p: state.product_count(p) for p in primes},
        max_counts={p: state.max_perturbed_count(p) for p in primes},
    )


def write_trace_csv(state: WalkState, path) -> None:
    """Write the recorded per-step trace as CSV.

    Columns: k, log_product, log_perturbed, log_lcm. Requires a state
    built with tracing enabled.
    """
    if state.trace is None:
        raise ValueError("state has no trace; start the walk with trace=True")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "log_product", "log_perturbed", "log_lcm"])
        for row in state.trace:
            writer.writerow([row[0], repr(row[1]), repr(row[2]), repr(row[3])])
