"""Streaming walk: hand cases, big-integer oracle, invariants."""

import math

import numpy as np
import pytest

from primewalks.laws import (
    ConstantLaw,
    GeometricLaw,
    IdenticalCoupling,
    IndependentCoupling,
    JointTableCoupling,
    PerturbationOnly,
    TableLaw,
    ZetaLaw,
)
from primewalks.primes import PrimeExponentVector, factorize
from primewalks.walks import (
    max_perturbed_count,
    product_count,
    run_trajectory,
    walk_init,
    walk_step,
    write_trace_csv,
)

BOUNDED_COUPLINGS = [
    IdenticalCoupling(TableLaw({1: 0.3, 2: 0.3, 6: 0.2, 12: 0.2})),
    IndependentCoupling(TableLaw({1: 0.5, 4: 0.5}), TableLaw({1: 0.2, 6: 0.4, 35: 0.4})),
    IndependentCoupling(GeometricLaw(0.6), TableLaw({2: 0.5, 9: 0.5})),
    PerturbationOnly(TableLaw({1: 0.25, 8: 0.5, 15: 0.25})),
    JointTableCoupling({(1, 2): 0.25, (4, 6): 0.25, (6, 4): 0.25, (12, 35): 0.25}),
]


def drive_with_oracle(joint, n, rng):
    """Run a walk while tracking products and perturbed values as big ints."""
    state = walk_init()
    running_product = 1
    product_values = []
    perturbed_values = []
    for _ in range(n):
        fact, pert = joint.sample_pair_pev(rng)
        state = walk_step(state, fact, pert)
        perturbed_values.append(running_product * pert.value())
        running_product *= fact.value()
        product_values.append(running_product)
    return state, product_values, perturbed_values


def test_hand_trajectory_degenerate():
    # factor = perturbation = 2 every step: product 2^n, perturbed products
    # 2^1..2^n, LCM = 2^n
    state = walk_init(trace=True)
    for _ in range(4):
        state = walk_step(state, 2, 2)
    assert state.n == 4
    assert product_count(state, 2) == 4
    assert max_perturbed_count(state, 2) == 4
    assert math.isclose(state.log_product, 4 * math.log(2), rel_tol=1e-15)
    assert math.isclose(state.log_lcm, 4 * math.log(2), rel_tol=1e-15)
    assert len(state.trace) == 4
    ks, log_products, log_perturbeds, log_lcms = zip(*state.trace)
    assert ks == (1, 2, 3, 4)
    assert log_lcms == tuple(sorted(log_lcms))


def test_hand_trajectory_perturbation_only():
    # factor 1, perturbation 6: every perturbed product is 6, LCM stays 6
    state = walk_init()
    for _ in range(5):
        state = walk_step(state, 1, 6)
    assert state.log_product == 0.0
    assert math.isclose(state.log_lcm, math.log(6), rel_tol=1e-15)
    assert max_perturbed_count(state, 2) == 1
    assert max_perturbed_count(state, 3) == 1
    assert max_perturbed_count(state, 5) == 0


def test_hand_trajectory_mixed_steps():
    # step 1: perturbed = 1 * 12 = 12, product = 2
    # step 2: perturbed = 2 * 9 = 18,  product = 2 * 5 = 10
    # step 3: perturbed = 10 * 2 = 20, product = 10 * 1 = 10
    state = walk_init()
    state = walk_step(state, 2, 12)
    state = walk_step(state, 5, 9)
    state = walk_step(state, 1, 2)
    want_lcm = math.lcm(12, 18, 20)
    assert math.isclose(state.log_lcm, math.log(want_lcm), rel_tol=1e-12)
    assert math.isclose(state.log_product, math.log(10), rel_tol=1e-15)
    assert dict(state.product_exponents.items()) == {2: 1, 5: 1}
    assert state.max_perturbed_count(2) == 2
    assert state.max_perturbed_count(3) == 2
    assert state.max_perturbed_count(5) == 1


def test_exponent_inputs_match_integer_inputs():
    a = walk_step(walk_init(), 12, 18)
    b = walk_step(walk_init(), factorize(12), PrimeExponentVector({2: 1, 3: 2}))
    assert a.product_exponents == b.product_exponents
    assert a.perturbed_max == b.perturbed_max
    assert math.isclose(a.log_product, b.log_product, rel_tol=1e-15)
    with pytest.raises(TypeError):
        walk_step(walk_init(), 2.5, 1)


def test_trajectories_against_big_integer_oracle():
    # the walk never materializes integers; rebuild them here and compare
    # every tracked quantity exactly
    rng = np.random.default_rng(77)
    for joint in BOUNDED_COUPLINGS:
        for rep in range(12):
            n = int(rng.integers(1, 40))
            state, product_values, perturbed_values = drive_with_oracle(joint, n, rng)
            assert state.n == n
            # product exponents and log
            want_product = factorize(product_values[-1])
            assert state.product_exponents == want_product
            assert math.isclose(state.log_product, math.log(product_values[-1]), rel_tol=1e-12, abs_tol=1e-12)
            # running maxima equal exponentwise max over factorized perturbed values
            want_max = {}
            for v in perturbed_values:
                for p, e in factorize(v).items():
                    want_max[p] = max(want_max.get(p, 0), e)
            got_max = {p: e for p, e in state.perturbed_max.items() if e > 0}
            assert got_max == want_max
            # log LCM identity
            want_lcm = math.lcm(*perturbed_values)
            assert math.isclose(state.log_lcm, math.log(want_lcm), rel_tol=1e-12, abs_tol=1e-12)
            # prefix products divide later ones, so their LCM is the last one
            acc = 1
            for v in product_values:
                acc = math.lcm(acc, v)
            assert acc == product_values[-1]


def test_perturbed_max_dominates_shifted_product():
    # the running perturbed maximum dominates the product exponents one step
    # back: the last perturbed product contains that whole product
    rng = np.random.default_rng(123)
    joint = IndependentCoupling(TableLaw({2: 0.5, 3: 0.5}), TableLaw({1: 0.5, 5: 0.5}))
    for _ in range(20):
        state = walk_init()
        prev = walk_init()
        n = int(rng.integers(2, 30))
        for _ in range(n):
            prev = state
            fact, pert = joint.sample_pair_pev(rng)
            state = walk_step(state, fact, pert)
        for p in (2, 3, 5):
            assert state.max_perturbed_count(p) >= prev.product_count(p)


def test_run_trajectory_snapshots_and_determinism():
    joint = IdenticalCoupling(ZetaLaw(2.0))
    state1, snaps = run_trajectory(
        joint, 30, np.random.default_rng(5), record_at=[0, 10, 30], snapshot_primes=[2, 3]
    )
    state2, _ = run_trajectory(joint, 30, np.random.default_rng(5))
    assert state1.product_exponents == state2.product_exponents
    assert state1.log_lcm == state2.log_lcm
    assert [s.k for s in snaps] == [0, 10, 30]
    assert snaps[0].log_product == 0.0
    assert snaps[0].product_counts == {2: 0, 3: 0}
    last = snaps[-1]
    assert last.log_product == state1.log_product
    assert last.product_counts == {2: state1.product_count(2), 3: state1.product_count(3)}
    assert last.max_counts == {2: state1.max_perturbed_count(2), 3: state1.max_perturbed_count(3)}
    # snapshots are weakly monotone in the log columns
    assert snaps[0].log_lcm <= snaps[1].log_lcm <= snaps[2].log_lcm


def test_run_trajectory_validation():
    joint = IdenticalCoupling(ConstantLaw(2))
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        run_trajectory(joint, -1, rng)
    with pytest.raises(ValueError):
        run_trajectory(joint, 5, rng, record_at=[3, 1])
    with pytest.raises(ValueError):
        run_trajectory(joint, 5, rng, record_at=[6])


def test_identical_coupling_log_identities():
    # with one shared draw per step the perturbed product is the full
    # product, so the LCM of perturbed products equals the product itself
    state, _ = run_trajectory(
        IdenticalCoupling(ZetaLaw(2.0)), 200, np.random.default_rng(11), trace=True
    )
    assert math.isclose(state.log_lcm, state.log_product, rel_tol=1e-12, abs_tol=1e-12)
    for k, log_prod, log_pert, log_lcm in state.trace:
        assert math.isclose(log_pert, log_prod, rel_tol=1e-12, abs_tol=1e-12)
        assert math.isclose(log_lcm, log_prod, rel_tol=1e-12, abs_tol=1e-12)


def test_law_of_large_numbers_for_log_product():
    law = ZetaLaw(3.0)
    mu, var, _ = law.log_moments()
    n = 20000
    state, _ = run_trajectory(IdenticalCoupling(law), n, np.random.default_rng(21))
    se = math.sqrt(var / n)
    assert abs(state.log_product / n - mu) < 5 * se


def test_trace_csv_round_trip(tmp_path):
    import csv as csvmod

    state, _ = run_trajectory(
        IndependentCoupling(TableLaw({2: 0.5, 3: 0.5}), TableLaw({1: 0.5, 6: 0.5})),
        25,
        np.random.default_rng(8),
        trace=True,
    )
    path = tmp_path / "trace.csv"
    write_trace_csv(state, path)
    with open(path, newline="") as fh:
        rows = list(csvmod.reader(fh))
    assert rows[0] == ["k", "log_product", "log_perturbed", "log_lcm"]
    assert len(rows) == 26  # header + one row per step
    got = [(int(r[0]), float(r[1]), float(r[2]), float(r[3])) for r in rows[1:]]
    assert got == list(state.trace)  # repr round-trips floats exactly
    lcm_col = [r[3] for r in got]
    assert lcm_col == sorted(lcm_col)
    with pytest.raises(ValueError):
        write_trace_csv(walk_init(), tmp_path / "no.csv")
