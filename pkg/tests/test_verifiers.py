import math

import pytest

from privbuy.core import NeighborRelation
from privbuy.losses import tight_dp_loss, zero_loss
from privbuy.mechanisms import alg1, alg1_prime, exact_sum, pay_declared
from privbuy.verifiers import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    AccuracySpec,
    DistinguishabilityQuery,
    check_accuracy,
    check_distinguishable,
    check_dp,
    check_ir,
    check_truthful,
    wilson_interval,
)

from conftest import profile

GEN, MON = NeighborRelation.GENERAL, NeighborRelation.MONOTONIC
LN2 = math.log(2.0)


# --- individual rationality --------------------------------------------------

def test_ir_budget_mechanism_passes_tight_monotonic():
    mech = alg1(8.0, 0.5, 4)
    theta = mech.params.theta
    model = tight_dp_loss(mech, MON)
    x = profile([1, 0, 1, 1], [theta / 2, theta, 5 * theta, 0.0])
    results = check_ir(mech, model, x)
    assert all(r.verdict == PASS for r in results)
    assert all(r.margin >= 0 for r in results)


def test_ir_pay_declared_passes_tight_general():
    mech = pay_declared(0.5, 3)
    model = tight_dp_loss(mech, GEN)
    x = profile([1, 0, 1], [2.0, 0.0, 0.5])
    assert all(r.verdict == PASS for r in check_ir(mech, model, x))


def test_ir_exact_sum_fails_tight_general():
    mech = exact_sum(2)
    model = tight_dp_loss(mech, GEN)
    x = profile([1, 0], [1.0, 0.0])
    results = check_ir(mech, model, x)
    assert results[0].verdict == FAIL
    assert results[0].margin == -math.inf  # infinite loss against zero pay
    assert results[1].verdict == PASS  # indifferent player loses nothing


# --- truthfulness ------------------------------------------------------------

def test_truthful_deviation_equal_to_truth_passes():
    mech = alg1(8.0, 0.5, 2)
    model = tight_dp_loss(mech, MON)
    x = profile([1, 0], [1.0, 0.0])
    r = check_truthful(mech, model, x, 0, deviations=[1.0])
    assert r.verdict == PASS and r.margin == 0.0


def test_truthful_budget_mechanism_low_valuation():
    mech = alg1(8.0, 0.5, 4)
    theta = mech.params.theta
    model = tight_dp_loss(mech, MON)
    for v in (0.0, theta / 2, theta):
        x = profile([1, 1, 0, 0], [v, 0.0, 0.0, theta * 3])
        r = check_truthful(mech, model, x, 0, deviations=[0.0, theta, 2 * theta])
        assert r.verdict == PASS, r


def test_untruthful_budget_mechanism_high_valuation_bit_zero():
    # a beyond-threshold bit-0 player gains B/n by declaring low; the prime
    # variant closes exactly this hole
    mech = alg1(8.0, 0.5, 4)
    prime = alg1_prime(8.0, 0.5, 4)
    model = tight_dp_loss(mech, MON)
    model_prime = tight_dp_loss(prime, MON)
    x = profile([0, 1, 0, 0], [10.0, 0.0, 0.0, 0.0])
    assert check_truthful(mech, model, x, 0).verdict == FAIL
    assert check_truthful(prime, model_prime, x, 0).verdict == PASS


def test_pay_declared_untruthful_with_witness():
    mech = pay_declared(0.5, 2)
    model = tight_dp_loss(mech, GEN)
    x = profile([1, 0], [1.0, 0.0])
    r = check_truthful(mech, model, x, 0, deviations=[100.0])
    assert r.verdict == FAIL
    assert "100" in r.witness
    assert r.margin == pytest.approx(-99.0 * 0.5)  # payment gap, law unchanged


def test_truthful_requires_deviations():
    mech = alg1(8.0, 0.5, 2)
    with pytest.raises(ValueError):
        check_truthful(mech, zero_loss(), profile([1, 0], [0.0, 0.0]), 0, deviations=[])


# --- accuracy ----------------------------------------------------------------

def test_accuracy_exact_budget_mechanism():
    # n=4, eps=0.5, gamma*n=4: exact two-sided tail 2 a^4/(1+a) ~ 0.16849
    # (oracle: 2*exp(-2)/(1+exp(-0.5))), under the bound 2 exp(-2) ~ 0.27067
    n, eps = 4, 0.5
    mech = alg1(8.0, eps, n)
    x = profile([1, 1, 1, 1], [0.0] * 4)
    gamma = 4.0 / n
    beta = 2.0 * math.exp(-eps * gamma * n)
    r = check_accuracy(mech, x, AccuracySpec(gamma, gamma, beta))
    assert r.verdict == PASS
    a = math.exp(-eps)
    exact_tail = 2.0 * a**4 / (1.0 + a)
    assert beta - r.margin == pytest.approx(exact_tail, abs=1e-10)


def test_accuracy_exact_sum_zero_beta():
    mech = exact_sum(3)
    x = profile([1, 0, 1], [0.0] * 3)
    r = check_accuracy(mech, x, AccuracySpec(1e-9, 1e-9, 0.0))
    assert r.verdict == PASS and r.margin == 0.0


def test_accuracy_fail_and_inconclusive():
    mech = alg1(8.0, LN2, 2)
    x = profile([1, 1], [0.0, 0.0])
    # Pr[|noise| >= 1] = 2/3 > 1/3: certified fail
    assert check_accuracy(mech, x, AccuracySpec(0.5, 0.5, 1.0 / 3.0)).verdict == FAIL
    # with a coarse truncation the enclosure straddles a beta placed inside it
    coarse = check_accuracy(mech, x, AccuracySpec(0.5, 0.5, 2.0 / 3.0 - 0.003), mass_tol=0.01)
    assert coarse.verdict == INCONCLUSIVE


def test_accuracy_monte_carlo():
    mech = alg1(8.0, LN2, 2)
    x = profile([1, 1], [0.0, 0.0])
    passed = check_accuracy(mech, x, AccuracySpec(0.5, 0.5, 0.9), method="monte_carlo", trials=4000, seed=3)
    assert passed.verdict == PASS
    failed = check_accuracy(mech, x, AccuracySpec(0.5, 0.5, 0.3), method="monte_carlo", trials=4000, seed=3)
    assert failed.verdict == FAIL
    # beta at the true rate (2/3) sits inside the Wilson interval
    straddle = check_accuracy(mech, x, AccuracySpec(0.5, 0.5, 2.0 / 3.0), method="monte_carlo", trials=4000, seed=3)
    assert straddle.verdict == INCONCLUSIVE
    with pytest.raises(ValueError):
        check_accuracy(mech, x, AccuracySpec(0.5, 0.5, 0.5), method="bogus")


def test_accuracy_spec_validation():
    with pytest.raises(ValueError):
        AccuracySpec(-0.1, 0.5, 0.5)
    with pytest.raises(ValueError):
        AccuracySpec(0.5, 0.5, 1.5)


def test_wilson_interval_sane():
    lo, hi = wilson_interval(50, 100)
    assert 0.0 <= lo < 0.5 < hi <= 1.0
    lo0, hi0 = wilson_interval(0, 100)
    assert lo0 == 0.0 and hi0 < 0.15
    with pytest.raises(ValueError):
        wilson_interval(0, 0)


# --- distinguishability --------------------------------------------------------

def test_high_valuation_player_never_monotonically_distinguishable():
    mech = alg1(8.0, 0.5, 4)
    x = profile([1, 0, 0, 0], [5.0, 0.0, 0.0, 0.0])
    for delta in (1e-6, 0.1, 0.9):
        r = check_distinguishable(mech, x, DistinguishabilityQuery(0, delta, MON))
        assert r.verdict == "not_distinguishable"


def test_low_valuation_player_generally_distinguishable():
    mech = alg1(8.0, LN2, 4)
    theta = mech.params.theta
    x = profile([1, 0, 0, 0], [theta / 2, 0.0, 0.0, 0.0])
    r = check_distinguishable(mech, x, DistinguishabilityQuery(0, 0.3, GEN))
    assert r.verdict == "distinguishable"
    assert r.margin == pytest.approx(1.0 / 3.0 - 0.3, abs=1e-9)


def test_delta_above_one_never_distinguishable():
    mech = exact_sum(2)
    x = profile([1, 0], [1.0, 0.0])
    r = check_distinguishable(mech, x, DistinguishabilityQuery(0, 1.01, GEN))
    assert r.verdict == "not_distinguishable"


def test_distinguishability_inconclusive_reports_refinement():
    mech = alg1(8.0, LN2, 2)
    x = profile([1, 0], [0.0, 0.0])
    # unit-shift distance is 1/3; a coarse truncation straddles delta placed just above
    r = check_distinguishable(mech, x, DistinguishabilityQuery(0, 0.3338, GEN), mass_tol=0.01)
    assert r.verdict == INCONCLUSIVE
    assert "refine mass_tol" in r.witness


def test_not_distinguishable_stable_under_refinement():
    mech = alg1(8.0, 0.5, 2)
    x = profile([1, 0], [5.0, 0.0])
    q = DistinguishabilityQuery(0, 0.2, MON)
    for tol in (1e-6, 1e-9, 1e-12):
        assert check_distinguishable(mech, x, q, mass_tol=tol).verdict == "not_distinguishable"


def test_query_validation():
    with pytest.raises(ValueError):
        DistinguishabilityQuery(0, 0.0, GEN)


# --- dp level ----------------------------------------------------------------

def test_dp_check_budget_mechanism():
    eps = 0.5
    mech = alg1(8.0, eps, 3)
    x = profile([1, 0, 1], [0.0, 1.0, 9.0])
    results = check_dp(mech, x, eps)
    assert all(r.verdict == PASS for r in results)
    tight = check_dp(mech, x, eps / 3.0)
    assert any(r.verdict == FAIL for r in tight)
