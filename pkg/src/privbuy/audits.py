"""Executable hybrid-argument audits.

Each audit walks a chain of inputs that differ one player at a time,
verifies the claims the corresponding impossibility argument makes along
the chain (payment caps, truthfulness for privacy-indifferent players,
individual rationality via non-distinguishability), and then tests the
accuracy conclusion, all against exact output laws. When the audited
mechanism breaks a claim, the report pinpoints the first broken premise in
argument order (payments, truthfulness-for-indifferent, IR, accuracy) with
a concrete witnessing hybrid.

Audits are deterministic: fixed parameters and mass_tol reproduce the
report bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .core import InputProfile, Mechanism, NeighborRelation, PlayerType
from .distributions import DEFAULT_MASS_TOL, Interval, statistical_distance
from .losses import LossModel, loss_expectation, max_neighbor_distance
from .verifiers import (
    FAIL,
    INCONCLUSIVE,
    AccuracySpec,
    CheckResult,
    DistinguishabilityQuery,
    check_accuracy,
    check_distinguishable,
)

# verdicts, in argument order
PAYMENTS_VIOLATED = "payments_violated"
TRUTHFULNESS_VIOLATED = "truthfulness_violated"
IR_VIOLATED = "ir_violated"
IMPOSSIBILITY_RESPECTED = "impossibility_respected"
ACCURACY_SACRIFICED = "accuracy_sacrificed"
ACCURACY_VIOLATED = "accuracy_violated"
THEOREM_CONTRADICTED = "theorem_contradicted"

_NONTRIVIAL = AccuracySpec(0.5, 0.5, 1.0 / 3.0)  # "non-trivial accuracy"


@dataclass(frozen=True)
class HybridChain:
    """A hybrid-argument chain record.

    ``inputs`` are the chain hybrids (consecutive ones differ in exactly one
    player's type); ``payments`` and ``thresholds`` hold the per-step payment
    caps and threshold valuations; ``step_distances`` are certified
    enclosures between consecutive hybrids' count laws and ``end_to_end``
    between the first and last. ``probes`` holds auxiliary
    payment-measurement inputs for the adaptive chains (empty when the
    probes are part of ``inputs`` itself).
    """

    inputs: tuple[InputProfile, ...]
    payments: tuple[float, ...]
    thresholds: tuple[float, ...]
    step_distances: tuple[Interval, ...]
    end_to_end: Interval
    probes: tuple[InputProfile, ...] = ()

    def __post_init__(self):
        if len(self.inputs) < 2:
            raise ValueError("a chain needs at least two inputs")
        if len(self.step_distances) != len(self.inputs) - 1:
            raise ValueError("need one step distance per consecutive pair")
        for a, b in zip(self.inputs, self.inputs[1:]):
            if a.n != b.n or sum(pa != pb for pa, pb in zip(a.players, b.players)) != 1:
                raise ValueError("consecutive chain inputs must differ in exactly one player")
        total = math.fsum(d.hi for d in self.step_distances)
        if self.end_to_end.lo > total + 1e-12:  # triangle inequality, float headroom
            raise ValueError(f"end-to-end distance {self.end_to_end.lo} exceeds step sum {total}")

    def to_json_dict(self) -> dict:
        return {
            "inputs": [x.to_json_dict() for x in self.inputs],
            "payments": list(self.payments),
            "thresholds": list(self.thresholds),
            "step_distances": [[d.lo, d.hi] for d in self.step_distances],
            "end_to_end": [self.end_to_end.lo, self.end_to_end.hi],
            "probes": [x.to_json_dict() for x in self.probes],
        }


@dataclass(frozen=True)
class AuditReport:
    """Outcome of one audit: the chain, the verdict, and a claim-by-claim log."""

    audit: str
    mechanism: str
    verdict: str
    chain: Optional[HybridChain]
    failing_step: Optional[int]
    witness: str
    accuracy: tuple[CheckResult, ...]
    details: tuple[str, ...]
    params: tuple[tuple[str, float], ...]

    def to_json_dict(self) -> dict:
        return {
            "audit": self.audit,
            "mechanism": self.mechanism,
            "verdict": self.verdict,
            "chain": None if self.chain is None else self.chain.to_json_dict(),
            "failing_step": self.failing_step,
            "witness": self.witness,
            "accuracy": [r.to_json_dict() for r in self.accuracy],
            "details": list(self.details),
            "params": {k: v for k, v in self.params},
        }


@dataclass(frozen=True)
class TradeoffParams:
    """Parameters of the payment/accuracy tradeoff audit.

    ``max_pay`` is the known cap on what the mechanism pays any player who
    declares valuation 0. eta bounds the fraction of high-valuation players,
    eta + 2*gamma <= 1, and beta must stay below 1/2 - (max_pay/tau)*gamma*n
    (the n-dependent part is validated by the audit).
    """

    tau: float
    gamma: float
    eta: float
    beta: float
    max_pay: float

    def __post_init__(self):
        for name in ("tau", "gamma", "eta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
        if not (math.isfinite(self.max_pay) and self.max_pay >= 0):
            raise ValueError(f"max_pay must be finite and >= 0, got {self.max_pay!r}")
        if self.eta + 2.0 * self.gamma > 1.0:
            raise ValueError(f"need eta + 2*gamma <= 1, got {self.eta + 2 * self.gamma}")
        if not (0.0 <= self.beta < 0.5):
            raise ValueError(f"beta must satisfy 0 <= beta < 1/2 - (max_pay/tau)*gamma*n, got {self.beta!r}")

    def beta_cap(self, n: int) -> float:
        return 0.5 - (self.max_pay / self.tau) * self.gamma * n

    def counts_for(self, n: int) -> tuple[int, int]:
        """(h, 2*gamma*n) as exact integers; rejects non-integer splits and
        beta at or above the n-dependent cap."""
        h = self.eta * n
        g2 = 2.0 * self.gamma * n
        if abs(h - round(h)) > 1e-9 or abs(g2 - round(g2)) > 1e-9:
            raise ValueError(f"eta*n={h} and 2*gamma*n={g2} must be integers")
        if not self.beta < self.beta_cap(n):
            raise ValueError(f"beta={self.beta} must be < 1/2 - (max_pay/tau)*gamma*n = {self.beta_cap(n)}")
        return int(round(h)), int(round(g2))


def _zeros(n: int) -> InputProfile:
    return InputProfile.from_arrays([0] * n, [0.0] * n)


def _consecutive_distances(mech: Mechanism, inputs, mass_tol):
    laws = [mech.output_dist(x, mass_tol) for x in inputs]
    steps = tuple(statistical_distance(a, b) for a, b in zip(laws, laws[1:]))
    return steps, statistical_distance(laws[0], laws[-1])


def _require_increasing_model(model: LossModel, relation: NeighborRelation, delta: float):
    if not model.respects_indifference:
        raise ValueError("audit needs a model that respects indifference")
    if not model.increasing_for_delta or model.threshold_fn is None:
        raise ValueError("audit needs an increasing model with a threshold function")
    if model.relation is not None and model.relation is not relation:
        raise ValueError(f"model is bound to {model.relation}, audit needs {relation}")
    if model.delta is not None and model.delta != delta:
        raise ValueError(f"model delta {model.delta} differs from audit delta {delta}")


def _escape_note(mech: Mechanism, max_seen: float) -> list[str]:
    # A mechanism advertising a distinguishability budget C keeps every
    # player's neighbor distance below C/n; loss models that stay bounded
    # below C/n-distinguishability cannot force it into the argument.
    cap = getattr(mech, "distinguishability_budget", math.inf)
    if not math.isfinite(cap):
        return []
    ratio = cap / mech.player_count
    if max_seen < ratio:
        return [
            f"note: max observed neighbor distance {max_seen:.6g} < C/n = {ratio:.6g}; "
            "the flag above only binds loss models that grow below C/n-distinguishability"
        ]
    return [f"note: max observed neighbor distance {max_seen:.6g} >= C/n = {ratio:.6g}"]


def audit_general_impossibility(
    mech: Mechanism,
    model: LossModel,
    n: Optional[int] = None,
    delta: Optional[float] = None,
    mass_tol: float = DEFAULT_MASS_TOL,
) -> AuditReport:
    """Chain from all-zeros to all-ones through 2n+1 inputs: flip player i's
    bit to 1 with valuation L, then drop the valuation back to 0.

    For a mechanism satisfying the premises, every probe input must be
    non-distinguishable, so the end-to-end distance stays below 2n*delta <=
    1/3 and (1/2, 1/3)-accuracy must break on an endpoint. Otherwise the
    report names the first broken premise.
    """
    n = mech.player_count if n is None else n
    if n != mech.player_count:
        raise ValueError(f"n={n} does not match mechanism player count {mech.player_count}")
    delta = 1.0 / (6 * n) if delta is None else delta
    if not 0.0 < delta <= 1.0 / (6 * n):
        raise ValueError(f"delta must be in (0, 1/(6n)], got {delta}")
    _require_increasing_model(model, NeighborRelation.GENERAL, delta)

    details: list[str] = []
    pay_cap = -math.inf
    for mask in range(2**n):
        x = InputProfile.from_arrays([(mask >> j) & 1 for j in range(n)], [0.0] * n)
        pay_cap = max(pay_cap, max(mech.pay_vector(x)))
    details.append(f"payment cap over all-indifferent inputs: P = {pay_cap:g}")
    if not math.isfinite(pay_cap):
        return AuditReport(
            "general_impossibility", mech.name, PAYMENTS_VIOLATED, None, None,
            "mechanism pays unboundedly even when all players are indifferent",
            (), tuple(details), (("delta", delta), ("n", float(n))),
        )

    threshold = max(
        model.threshold_fn(pay_cap, tuple((mask >> j) & 1 for j in range(n)), (0.0,) * (n - 1))
        for mask in range(2**n)
    )
    details.append(f"threshold valuation: L = {threshold:g}")

    inputs = [_zeros(n)]
    for i in range(n):
        probe = inputs[-1].with_player(i, PlayerType(1, threshold))
        inputs.append(probe)
        inputs.append(probe.with_valuation(i, 0.0))

    truth_viol: list[int] = []
    ir_viol: list[tuple[int, str]] = []
    unsettled: list[int] = []
    max_seen = 0.0
    for i in range(n):
        probe, after = inputs[2 * i + 1], inputs[2 * i + 2]
        pay_probe = mech.expected_pay(probe, i)
        pay_after = mech.expected_pay(after, i)
        ok = pay_probe <= pay_after <= pay_cap
        details.append(
            f"step {i}: truthful-for-indifferent claim pay {pay_probe:g} <= {pay_after:g} <= P: "
            + ("ok" if ok else "VIOLATED")
        )
        if not ok:
            truth_viol.append(i)
        res = check_distinguishable(
            mech, probe, DistinguishabilityQuery(i, delta, NeighborRelation.GENERAL), mass_tol
        )
        max_seen = max(max_seen, max_neighbor_distance(mech, probe, i, NeighborRelation.GENERAL, mass_tol).hi)
        if res.verdict == "distinguishable":
            loss = loss_expectation(model, mech, probe, i, threshold, mass_tol)
            detail = (
                f"step {i}: probe hybrid is {delta:g}-distinguishable for player {i} ({res.witness}); "
                f"model loss {loss} > P = {pay_cap:g} >= pay {pay_probe:g}: IR VIOLATED"
            )
            details.append(detail)
            ir_viol.append((i, detail))
        elif res.verdict == INCONCLUSIVE:
            unsettled.append(i)
            details.append(f"step {i}: distinguishability inconclusive ({res.witness})")
        else:
            details.append(f"step {i}: not {delta:g}-distinguishable for player {i}")

    steps, end = _consecutive_distances(mech, inputs, mass_tol)
    chain = HybridChain(tuple(inputs), (pay_cap,) * n, (threshold,) * n, steps, end)
    accuracy = (
        check_accuracy(mech, inputs[0], _NONTRIVIAL, mass_tol=mass_tol, profile_id="all_zeros"),
        check_accuracy(mech, inputs[-1], _NONTRIVIAL, mass_tol=mass_tol, profile_id="all_ones"),
    )
    params = (("delta", delta), ("n", float(n)), ("P", pay_cap), ("L", threshold))
    details.extend(_escape_note(mech, max_seen))

    if truth_viol:
        i = truth_viol[0]
        return AuditReport(
            "general_impossibility", mech.name, TRUTHFULNESS_VIOLATED, chain, i,
            f"indifferent player {i} gains by declaring L at chain input {2 * i + 1}",
            accuracy, tuple(details), params,
        )
    if ir_viol:
        i, detail = ir_viol[0]
        return AuditReport(
            "general_impossibility", mech.name, IR_VIOLATED, chain, i,
            f"chain input {2 * i + 1} = {inputs[2 * i + 1]}: {detail}",
            accuracy, tuple(details), params,
        )
    if unsettled:
        i = unsettled[0]
        return AuditReport(
            "general_impossibility", mech.name, INCONCLUSIVE, chain, i,
            f"distinguishability straddles delta at step {i}; refine mass_tol",
            accuracy, tuple(details), params,
        )

    details.append(
        f"all probes indistinguishable, so end-to-end distance {end} stays below 2n*delta = {2 * n * delta:g} <= 1/3"
    )
    failed = [r for r in (accuracy[1], accuracy[0]) if r.verdict == FAIL]
    if failed:
        details.append(f"(1/2, 1/3)-accuracy fails on {failed[0].profile}: the impossibility is respected")
        return AuditReport(
            "general_impossibility", mech.name, IMPOSSIBILITY_RESPECTED, chain, None,
            f"accuracy fails on {failed[0].profile}: {failed[0].witness}",
            accuracy, tuple(details), params,
        )
    if any(r.verdict == INCONCLUSIVE for r in accuracy):
        return AuditReport(
            "general_impossibility", mech.name, INCONCLUSIVE, chain, None,
            "endpoint accuracy inconclusive; refine mass_tol", accuracy, tuple(details), params,
        )
    return AuditReport(
        "general_impossibility", mech.name, THEOREM_CONTRADICTED, chain, None,
        "chain and both endpoint accuracies hold; this should be impossible",
        accuracy, tuple(details), params,
    )


def audit_monotonic_impossibility(
    mech: Mechanism,
    model: LossModel,
    n: Optional[int] = None,
    delta: Optional[float] = None,
    mass_tol: float = DEFAULT_MASS_TOL,
) -> AuditReport:
    """Adaptive chain ruling out accuracy for all valuations even under
    monotonic-only distinguishability.

    Step i measures P_i = pay of player i when they flip their bit to 1 at
    valuation 0, derives the threshold L_i = T(P_i, .) from the model, and
    raises the valuation to L_i. Non-distinguishability of every hybrid
    forces the all-zeros and all-ones-at-L laws within n*delta <= 1/3, so a
    surviving mechanism must give up (1/2, 1/3)-accuracy on an endpoint.
    """
    n = mech.player_count if n is None else n
    if n != mech.player_count:
        raise ValueError(f"n={n} does not match mechanism player count {mech.player_count}")
    delta = 1.0 / (3 * n) if delta is None else delta
    if not 0.0 < delta <= 1.0 / (3 * n):
        raise ValueError(f"delta must be in (0, 1/(3n)], got {delta}")
    _require_increasing_model(model, NeighborRelation.MONOTONIC, delta)

    details: list[str] = []
    hybrids = [_zeros(n)]
    probes: list[InputProfile] = []
    pays: list[float] = []
    thresholds: list[float] = []
    truth_viol: list[int] = []
    ir_viol: list[tuple[int, str]] = []
    unsettled: list[int] = []
    max_seen = 0.0

    x = hybrids[0]
    for i in range(n):
        probe = x.with_player(i, PlayerType(1, 0.0))
        pay_i = mech.expected_pay(probe, i)
        if not math.isfinite(pay_i):
            # no finite threshold exists, so the chain cannot be continued
            details.append(f"step {i}: payment at the probe input is not finite: VIOLATED")
            return AuditReport(
                "monotonic_impossibility", mech.name, PAYMENTS_VIOLATED, None, i,
                f"payment not finite at step {i}", (), tuple(details),
                (("delta", delta), ("n", float(n))),
            )
        level = model.threshold_fn(pay_i, probe.bits, probe.valuations[:i] + probe.valuations[i + 1 :])
        after = probe.with_valuation(i, level)
        pay_after = mech.expected_pay(after, i)
        ok = pay_after <= pay_i
        details.append(
            f"step {i}: P_{i} = {pay_i:g}, L_{i} = {level:g}; "
            f"truthful-for-indifferent claim pay {pay_after:g} <= P_{i}: " + ("ok" if ok else "VIOLATED")
        )
        if not ok:
            truth_viol.append(i)
        res = check_distinguishable(
            mech, after, DistinguishabilityQuery(i, delta, NeighborRelation.MONOTONIC), mass_tol
        )
        max_seen = max(max_seen, max_neighbor_distance(mech, after, i, NeighborRelation.MONOTONIC, mass_tol).hi)
        if res.verdict == "distinguishable":
            loss = loss_expectation(model, mech, after, i, level, mass_tol)
            detail = (
                f"step {i}: hybrid is {delta:g}-monotonically-distinguishable for player {i} "
                f"({res.witness}); model loss {loss} > P_{i} = {pay_i:g} >= pay {pay_after:g}: IR VIOLATED"
            )
            details.append(detail)
            ir_viol.append((i, detail))
        elif res.verdict == INCONCLUSIVE:
            unsettled.append(i)
            details.append(f"step {i}: distinguishability inconclusive ({res.witness})")
        else:
            details.append(f"step {i}: not {delta:g}-monotonically-distinguishable for player {i}")
        probes.append(probe)
        pays.append(pay_i)
        thresholds.append(level)
        hybrids.append(after)
        x = after

    steps, end = _consecutive_distances(mech, hybrids, mass_tol)
    chain = HybridChain(tuple(hybrids), tuple(pays), tuple(thresholds), steps, end, probes=tuple(probes))
    accuracy = (
        check_accuracy(mech, hybrids[0], _NONTRIVIAL, mass_tol=mass_tol, profile_id="all_zeros"),
        check_accuracy(mech, hybrids[-1], _NONTRIVIAL, mass_tol=mass_tol, profile_id="all_ones_at_L"),
    )
    params = (("delta", delta), ("n", float(n)))
    details.extend(_escape_note(mech, max_seen))

    if truth_viol:
        i = truth_viol[0]
        return AuditReport(
            "monotonic_impossibility", mech.name, TRUTHFULNESS_VIOLATED, chain, i,
            f"indifferent player {i} gains by declaring L_{i} at hybrid {i + 1}",
            accuracy, tuple(details), params,
        )
    if ir_viol:
        i, detail = ir_viol[0]
        return AuditReport(
            "monotonic_impossibility", mech.name, IR_VIOLATED, chain, i,
            f"hybrid {i + 1} = {hybrids[i + 1]}: {detail}", accuracy, tuple(details), params,
        )
    if unsettled:
        i = unsettled[0]
        return AuditReport(
            "monotonic_impossibility", mech.name, INCONCLUSIVE, chain, i,
            f"distinguishability straddles delta at step {i}; refine mass_tol",
            accuracy, tuple(details), params,
        )

    details.append(
        f"chain completes: end-to-end distance {end} stays below n*delta = {n * delta:g} <= 1/3"
    )
    failed = [r for r in (accuracy[1], accuracy[0]) if r.verdict == FAIL]
    if failed:
        details.append(
            f"(1/2, 1/3)-accuracy fails on {failed[0].profile}: accuracy is sacrificed on "
            "high-valuation inputs while IR and claimed truthfulness survive"
        )
        return AuditReport(
            "monotonic_impossibility", mech.name, ACCURACY_SACRIFICED, chain, None,
            f"accuracy fails on {failed[0].profile}: {failed[0].witness}",
            accuracy, tuple(details), params,
        )
    if any(r.verdict == INCONCLUSIVE for r in accuracy):
        return AuditReport(
            "monotonic_impossibility", mech.name, INCONCLUSIVE, chain, None,
            "endpoint accuracy inconclusive; refine mass_tol", accuracy, tuple(details), params,
        )
    return AuditReport(
        "monotonic_impossibility", mech.name, THEOREM_CONTRADICTED, chain, None,
        "chain and both endpoint accuracies hold; this should be impossible",
        accuracy, tuple(details), params,
    )


def audit_payment_accuracy_tradeoff(
    mech: Mechanism,
    model: LossModel,
    params: TradeoffParams,
    mass_tol: float = DEFAULT_MASS_TOL,
) -> AuditReport:
    """With payments to zero-valuation declarers capped at P, accuracy cannot
    beat ([eta+gamma, gamma], beta) once beta < 1/2 - (P/tau)*gamma*n.

    The chain flips h = eta*n players to valuation L and another 2*gamma*n
    to valuation tau. Growing-with-distance losses plus IR cap each step's
    law movement at P/L resp. P/tau, so the hybrid laws cannot track the
    drifting accuracy windows A(i) and some hybrid must fail accuracy.
    """
    n = mech.player_count
    if not model.growing_with_sd or model.relation is not NeighborRelation.MONOTONIC:
        raise ValueError("audit needs a model growing with statistical distance for monotonic neighbors")
    if not model.respects_indifference:
        raise ValueError("audit needs a model that respects indifference")
    h, g2 = params.counts_for(n)
    if h + g2 < 1:
        raise ValueError("chain needs at least one step (eta*n + 2*gamma*n >= 1)")
    cap = params.max_pay
    denom = 1.0 - 2.0 * (cap / params.tau) * params.gamma * n - 2.0 * params.beta
    # the argument works for any L at or above the bound; flooring at tau
    # keeps step valuations positive even when the cap is 0
    level = max(cap * h / denom, params.tau) if h > 0 else params.tau

    details = [
        f"h = {h} players at L = {level:g}, {g2} players at tau = {params.tau:g}, payment cap P = {cap:g}"
    ]
    hybrids = [_zeros(n)]
    probes: list[InputProfile] = []
    observed_pays: list[float] = []
    highs: list[float] = []
    pay_viol: list[int] = []
    truth_viol: list[int] = []
    ir_viol: list[tuple[int, str]] = []
    unsettled: list[int] = []

    x = hybrids[0]
    for i in range(h + g2):
        probe = x.with_player(i, PlayerType(1, 0.0))
        pay_probe = mech.expected_pay(probe, i)
        if not pay_probe <= cap:
            pay_viol.append(i)
            details.append(f"step {i}: pay {pay_probe:g} to a zero-valuation declarer exceeds P = {cap:g}: VIOLATED")
        high = level if i < h else params.tau
        after = probe.with_valuation(i, high)
        pay_after = mech.expected_pay(after, i)
        if not pay_after <= pay_probe:
            truth_viol.append(i)
            details.append(f"step {i}: indifferent player gains by declaring {high:g} ({pay_probe:g} -> {pay_after:g}): VIOLATED")
        probes.append(probe)
        observed_pays.append(pay_probe)
        highs.append(high)
        hybrids.append(after)
        x = after

    steps, end = _consecutive_distances(mech, hybrids, mass_tol)
    for i, d in enumerate(steps):
        bound = cap / highs[i]
        if d.lo >= bound:
            detail = (
                f"step {i}: law moved by {d} although IR plus growing-with-distance losses cap it "
                f"below P/v = {bound:g}: IR VIOLATED"
            )
            details.append(detail)
            ir_viol.append((i, detail))
        elif d.hi >= bound:
            unsettled.append(i)
            details.append(f"step {i}: step distance {d} straddles the cap P/v = {bound:g}")
        else:
            details.append(f"step {i}: step distance {d} < P/v = {bound:g}: ok")

    chain = HybridChain(
        tuple(hybrids), tuple(observed_pays), tuple(highs), steps, end, probes=tuple(probes)
    )
    acc_spec = AccuracySpec(params.eta + params.gamma, params.gamma, params.beta)
    accuracy = tuple(
        check_accuracy(mech, hyb, acc_spec, mass_tol=mass_tol, profile_id=f"hybrid_{idx}")
        for idx, hyb in enumerate(hybrids)
    )
    report_params = (
        ("beta", params.beta), ("eta", params.eta), ("gamma", params.gamma),
        ("tau", params.tau), ("P", cap), ("L", level), ("n", float(n)),
    )

    if pay_viol:
        i = pay_viol[0]
        return AuditReport(
            "payment_accuracy_tradeoff", mech.name, PAYMENTS_VIOLATED, chain, i,
            f"payment cap premise fails at step {i}", accuracy, tuple(details), report_params,
        )
    if truth_viol:
        i = truth_viol[0]
        return AuditReport(
            "payment_accuracy_tradeoff", mech.name, TRUTHFULNESS_VIOLATED, chain, i,
            f"truthfulness-for-indifferent fails at step {i}", accuracy, tuple(details), report_params,
        )
    if ir_viol:
        i, detail = ir_viol[0]
        return AuditReport(
            "payment_accuracy_tradeoff", mech.name, IR_VIOLATED, chain, i, detail,
            accuracy, tuple(details), report_params,
        )
    if unsettled:
        i = unsettled[0]
        return AuditReport(
            "payment_accuracy_tradeoff", mech.name, INCONCLUSIVE, chain, i,
            f"step distance straddles its cap at step {i}; refine mass_tol",
            accuracy, tuple(details), report_params,
        )

    drift_bound = h * (cap / level if level > 0 else 0.0) + g2 * cap / params.tau
    details.append(
        f"premises hold: end-to-end distance {end} < h*P/L + 2*gamma*n*P/tau = {drift_bound:g} <= {1.0 - 2.0 * params.beta:g}"
    )
    failed = [r for r in accuracy if r.verdict == FAIL]
    if failed:
        worst = failed[-1]
        details.append(f"([eta+gamma, gamma], beta)-accuracy fails at {worst.profile}: {worst.witness}")
        return AuditReport(
            "payment_accuracy_tradeoff", mech.name, ACCURACY_VIOLATED, chain,
            int(worst.profile.rsplit("_", 1)[1]), f"{worst.profile}: {worst.witness}",
            accuracy, tuple(details), report_params,
        )
    if any(r.verdict == INCONCLUSIVE for r in accuracy):
        return AuditReport(
            "payment_accuracy_tradeoff", mech.name, INCONCLUSIVE, chain, None,
            "a hybrid accuracy check straddles beta; refine mass_tol",
            accuracy, tuple(details), report_params,
        )
    return AuditReport(
        "payment_accuracy_tradeoff", mech.name, THEOREM_CONTRADICTED, chain, None,
        "premises and accuracy hold at every hybrid; this should be impossible",
        accuracy, tuple(details), report_params,
    )
