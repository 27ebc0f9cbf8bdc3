"""Checkers for individual rationality, truthfulness, accuracy, DP level,
and distinguishability, evaluated against exact output laws.

Every comparison is interval-sound: a check passes or fails only when the
certified enclosure lies strictly on one side of the threshold; otherwise
the verdict is "inconclusive" together with the truncation refinement that
would settle it. Truncation can therefore never flip a verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .core import InputProfile, Mechanism, NeighborRelation
from .distributions import DEFAULT_MASS_TOL, Interval, dp_level
from .losses import LossModel, loss_expectation, neighbor_distances

# two-sided 99% normal quantile for Wilson intervals
Z99 = 2.5758293035489004

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class AccuracySpec:
    """Asymmetric accuracy target: the published count must land in the open
    window ((bbar - alpha) n, (bbar + alpha_prime) n) except with
    probability at most beta."""

    alpha: float
    alpha_prime: float
    beta: float

    def __post_init__(self):
        if self.alpha < 0 or self.alpha_prime < 0:
            raise ValueError("alpha and alpha_prime must be >= 0")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")


@dataclass(frozen=True)
class DistinguishabilityQuery:
    """Can some admissible neighbor move player i's output law by >= delta?

    delta above 1 is allowed and trivially never distinguishable.
    """

    player: int
    delta: float
    relation: NeighborRelation

    def __post_init__(self):
        if not self.delta > 0.0:
            raise ValueError(f"delta must be > 0, got {self.delta}")


@dataclass(frozen=True)
class CheckResult:
    """One verdict row. margin is the signed distance to the threshold on
    the sound side (>= 0 for pass); witness carries the deciding neighbor,
    deviation, or refinement hint."""

    check: str
    mechanism: str
    profile: str
    player: Optional[int]
    verdict: str
    margin: float
    witness: str = ""

    def as_row(self) -> list:
        return [
            self.check,
            self.mechanism,
            self.profile,
            "" if self.player is None else self.player,
            self.verdict,
            repr(self.margin),
            self.witness,
        ]

    def to_json_dict(self) -> dict:
        return {
            "check": self.check,
            "mechanism": self.mechanism,
            "profile": self.profile,
            "player": self.player,
            "verdict": self.verdict,
            "margin": self.margin,
            "witness": self.witness,
        }


def check_ir(
    mech: Mechanism,
    model: LossModel,
    x: InputProfile,
    mass_tol: float = DEFAULT_MASS_TOL,
    profile_id: str = "",
) -> list[CheckResult]:
    """Individual rationality: expected payment covers the expected loss of a
    truthful declaration, for every player."""
    mech.require_profile(x)
    pays = mech.pay_vector(x)
    out = []
    for i, p in enumerate(x.players):
        loss = loss_expectation(model, mech, x, i, p.valuation, mass_tol)
        if pays[i] >= loss.hi:
            verdict, margin = PASS, pays[i] - loss.hi
        elif pays[i] < loss.lo:
            verdict, margin = FAIL, pays[i] - loss.lo
        else:
            verdict, margin = INCONCLUSIVE, pays[i] - loss.hi
        out.append(
            CheckResult("ir", mech.name, profile_id, i, verdict, margin, f"pay={pays[i]:g} loss={loss}")
        )
    return out


def check_truthful(
    mech: Mechanism,
    model: LossModel,
    x: InputProfile,
    i: int,
    deviations=None,
    mass_tol: float = DEFAULT_MASS_TOL,
    profile_id: str = "",
) -> CheckResult:
    """No deviation in the grid beats the truthful declaration.

    Deviations producing a byte-identical output law and payment situation
    are settled exactly (the utility gap is the payment difference); models
    that respect identical output distributions guarantee the loss terms
    cancel. Everything else is compared interval-soundly: the truth's
    utility lower bound against the deviation's upper bound.
    """
    mech.require_profile(x)
    truth = x.players[i].valuation
    devs = tuple(deviations) if deviations is not None else mech.deviation_valuations(x, i)
    if not devs:
        raise ValueError("deviations must be nonempty")

    truth_pay = mech.expected_pay(x, i)
    truth_dist = mech.output_dist(x.with_valuation(i, truth), mass_tol)
    truth_loss = None  # computed lazily; identical-law deviations never need it

    # one certified profitable deviation fails the check no matter what the
    # other deviations' enclosures look like, so verdicts are bucketed
    by_verdict = {PASS: [], FAIL: [], INCONCLUSIVE: []}
    for dev in devs:
        dev_profile = x.with_valuation(i, dev)
        dev_pay = mech.expected_pay(dev_profile, i)
        dev_dist = mech.output_dist(dev_profile, mass_tol)
        if dev_dist == truth_dist and model.respects_identical_output_dists:
            margin = truth_pay - dev_pay
            verdict = PASS if margin >= 0.0 else FAIL
        else:
            if truth_loss is None:
                truth_loss = loss_expectation(model, mech, x, i, truth, mass_tol)
            dev_loss = loss_expectation(model, mech, x, i, dev, mass_tol)
            margin = (truth_pay - truth_loss.hi) - (dev_pay - dev_loss.lo)
            if margin >= 0.0:
                verdict = PASS
            elif (truth_pay - truth_loss.lo) < (dev_pay - dev_loss.hi):
                verdict, margin = FAIL, (truth_pay - truth_loss.lo) - (dev_pay - dev_loss.hi)
            else:
                verdict = INCONCLUSIVE
        by_verdict[verdict].append((margin, dev))

    if by_verdict[FAIL]:
        margin, dev = min(by_verdict[FAIL])
        witness = f"profitable deviation v'={dev:g} (gain {-margin:g})"
        return CheckResult("truthful", mech.name, profile_id, i, FAIL, margin, witness)
    if by_verdict[INCONCLUSIVE]:
        margin, dev = min(by_verdict[INCONCLUSIVE])
        witness = f"deviation v'={dev:g} straddles; refine mass_tol"
        return CheckResult("truthful", mech.name, profile_id, i, INCONCLUSIVE, margin, witness)
    margin, dev = min(by_verdict[PASS])
    return CheckResult("truthful", mech.name, profile_id, i, PASS, margin, f"tightest deviation v'={dev:g}")


def wilson_interval(successes: int, trials: int, z: float = Z99) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def check_accuracy(
    mech: Mechanism,
    x: InputProfile,
    spec: AccuracySpec,
    method: str = "exact",
    trials: int = 10000,
    seed: int = 0,
    mass_tol: float = DEFAULT_MASS_TOL,
    profile_id: str = "",
) -> CheckResult:
    """Probability that the count leaves the accuracy window, against beta.

    Exact mode sums the stored atoms outside the open window and treats the
    truncation mass as one-sided slack. Monte Carlo mode uses a Wilson 99%
    interval on the seeded empirical rate; a straddle is inconclusive.
    """
    mech.require_profile(x)
    bbar_n = x.bit_sum()
    lo_edge = bbar_n - spec.alpha * x.n
    hi_edge = bbar_n + spec.alpha_prime * x.n

    if method == "exact":
        dist = mech.output_dist(x, mass_tol)
        out_lo = math.fsum(p for k, p in zip(dist.support, dist.probs) if k <= lo_edge or k >= hi_edge)
        out = Interval(out_lo, min(1.0, out_lo + dist.truncation_mass))
        detail = f"Pr[outside ({lo_edge:g}, {hi_edge:g})] in {out}"
    elif method == "monte_carlo":
        import random

        rng = random.Random(seed)
        misses = sum(
            1
            for _ in range(trials)
            if not lo_edge < mech.sample(x, rng).count < hi_edge
        )
        w = wilson_interval(misses, trials)
        out = Interval(w[0], w[1])
        detail = f"empirical {misses}/{trials}, wilson99 {out}"
    else:
        raise ValueError(f"unknown accuracy method {method!r}")

    if out.hi <= spec.beta:
        verdict, margin = PASS, spec.beta - out.hi
    elif out.lo > spec.beta:
        verdict, margin = FAIL, spec.beta - out.lo
    else:
        verdict, margin = INCONCLUSIVE, spec.beta - out.hi
    return CheckResult("accuracy", mech.name, profile_id, None, verdict, margin, detail)


def check_distinguishable(
    mech: Mechanism,
    x: InputProfile,
    query: DistinguishabilityQuery,
    mass_tol: float = DEFAULT_MASS_TOL,
    profile_id: str = "",
) -> CheckResult:
    """Whether some admissible neighbor's law is >= delta away.

    "distinguishable" needs a certified lower bound at or above delta;
    "not_distinguishable" needs every neighbor certified below. Verdicts
    carry the maximizing neighbor as witness; straddles report the
    mass_tol refinement that would settle them.
    """
    mech.require_profile(x)
    i, delta = query.player, query.delta
    pairs = neighbor_distances(mech, x, i, query.relation, mass_tol)
    if not pairs:
        return CheckResult(
            "distinguishability", mech.name, profile_id, i, "not_distinguishable", delta, "no admissible neighbors"
        )
    by_lo = max(pairs, key=lambda pd: pd[1].lo)
    by_hi = max(pairs, key=lambda pd: pd[1].hi)
    if by_lo[1].lo >= delta:
        nbr = by_lo[0].players[i]
        return CheckResult(
            "distinguishability", mech.name, profile_id, i,
            "distinguishable", by_lo[1].lo - delta, f"neighbor type {nbr}, distance {by_lo[1]}",
        )
    if by_hi[1].hi < delta:
        nbr = by_hi[0].players[i]
        return CheckResult(
            "distinguishability", mech.name, profile_id, i,
            "not_distinguishable", delta - by_hi[1].hi, f"closest neighbor type {nbr}, distance {by_hi[1]}",
        )
    needed = min((delta - d.lo) for _, d in pairs if d.hi >= delta > d.lo) / 2.0
    return CheckResult(
        "distinguishability", mech.name, profile_id, i,
        INCONCLUSIVE, by_hi[1].hi - delta, f"straddles delta={delta:g}; refine mass_tol to <= {needed:.3g}",
    )


def check_dp(
    mech: Mechanism,
    x: InputProfile,
    bound: float,
    relation: NeighborRelation = NeighborRelation.GENERAL,
    mass_tol: float = DEFAULT_MASS_TOL,
    profile_id: str = "",
    slack: float = 1e-9,
) -> list[CheckResult]:
    """Pure-DP level of the count law across each player's admissible
    neighbors, against ``bound`` (plus float slack)."""
    mech.require_profile(x)
    base = mech.output_dist(x, mass_tol)
    out = []
    for i in range(x.n):
        worst, worst_nbr = 0.0, None
        for nbr in mech.neighbor_profiles(x, i, relation):
            level = dp_level(base, mech.output_dist(nbr, mass_tol))
            if level > worst:
                worst, worst_nbr = level, nbr
        verdict = PASS if worst <= bound + slack else FAIL
        witness = f"worst neighbor {worst_nbr.players[i]}" if worst_nbr is not None else "no neighbors"
        out.append(CheckResult("dp", mech.name, profile_id, i, verdict, bound - worst, witness))
    return out
