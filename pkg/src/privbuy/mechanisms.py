"""Concrete mechanisms: the budget-threshold mechanism and its variant that
also pays high-valuation bit-0 players, uniform subsampling, and two
baselines (pay-as-declared, exact sum).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .core import InputProfile, Mechanism, PlayerType
from .distributions import (
    DEFAULT_MASS_TOL,
    CountDistribution,
    GeomParams,
    sample_geom,
    shifted_geom_dist,
)


@dataclass(frozen=True)
class BudgetParams:
    """Budget B > 0 split evenly as B/n, with noise parameter epsilon.

    The participation threshold is theta = B/(2 eps n): players declaring at
    most theta have their bit counted and are paid B/n. The tie 2 eps v ==
    B/n is included (IEEE <=).
    """

    budget: float
    epsilon: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.budget) and self.budget > 0):
            raise ValueError(f"budget must be finite and > 0, got {self.budget!r}")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be finite and > 0, got {self.epsilon!r}")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")

    @property
    def theta(self) -> float:
        return self.budget / (2.0 * self.epsilon * self.n)

    @property
    def per_player_pay(self) -> float:
        return self.budget / self.n

    def qualifies(self, valuation: float) -> bool:
        return 2.0 * self.epsilon * valuation <= self.budget / self.n


@dataclass(frozen=True)
class SubsampleParams:
    """Flat payment P >= 0, subset size 1 <= k <= n, and the contextual
    distinguishability budget C with k < C (infinity when unconstrained)."""

    flat_pay: float
    sample_size: int
    n: int
    distinguishability_budget: float = math.inf

    def __post_init__(self):
        if not (math.isfinite(self.flat_pay) and self.flat_pay >= 0):
            raise ValueError(f"flat_pay must be finite and >= 0, got {self.flat_pay!r}")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        if not (isinstance(self.sample_size, int) and 1 <= self.sample_size <= self.n):
            raise ValueError(f"sample_size must be in [1, n], got {self.sample_size!r}")
        c = self.distinguishability_budget
        if math.isfinite(c) and not self.sample_size < c:
            raise ValueError(f"sample_size {self.sample_size} must be < budget C {c}")


class BudgetMechanism(Mechanism):
    """Count the bits of everyone declaring at most theta, pay them B/n,
    add geometric noise.

    With ``pay_all_zero_bits`` every bit-0 player is paid B/n regardless of
    declaration (making them truthful too). That variant's payment depends
    on the data bit, which reveals the bit to whoever pays and may be
    impractical where payment precedes data access.
    """

    def __init__(self, params: BudgetParams, pay_all_zero_bits: bool = False):
        self.params = params
        self.pay_all_zero_bits = pay_all_zero_bits
        self.name = "alg1_prime" if pay_all_zero_bits else "alg1"
        self.player_count = params.n
        self.geom = GeomParams(params.epsilon)

    @property
    def cache_token(self) -> tuple:
        return (self.name, self.params.budget, self.params.epsilon, self.params.n)

    def counted_bit_sum(self, x: InputProfile) -> int:
        """Sum of b'_i where b'_i = b_i if the player qualifies, else 0."""
        q = self.params.qualifies
        return sum(p.bit for p in x.players if q(p.valuation))

    def output_dist(self, x: InputProfile, mass_tol: float = DEFAULT_MASS_TOL) -> CountDistribution:
        self.require_profile(x)
        return shifted_geom_dist(self.geom, self.counted_bit_sum(x), mass_tol)

    def log_pmf(self, x: InputProfile, count: int) -> float:
        self.require_profile(x)
        c = self.counted_bit_sum(x)
        return self.geom.log_norm - self.params.epsilon * abs(count - c)

    def log_pmf_table(self, x: InputProfile, support) -> tuple[float, ...]:
        self.require_profile(x)
        c = self.counted_bit_sum(x)
        ln, eps = self.geom.log_norm, self.params.epsilon
        return tuple(ln - eps * abs(s - c) for s in support)

    def pay_vector(self, x: InputProfile) -> tuple[float, ...]:
        self.require_profile(x)
        share, q = self.params.per_player_pay, self.params.qualifies
        return tuple(
            share if q(p.valuation) or (self.pay_all_zero_bits and p.bit == 0) else 0.0
            for p in x.players
        )

    def _sample_count(self, x: InputProfile, rng: random.Random) -> int:
        return self.counted_bit_sum(x) + sample_geom(self.geom, rng)

    def candidate_types(self, x: InputProfile, i: int) -> tuple[PlayerType, ...]:
        # The law and the payments to others depend on player i's type only
        # through "qualifying bit-1 or not". The valuations below put an
        # admissible representative in each class for both relations, for
        # any real v_i (including negative ones).
        v = x.players[i].valuation
        theta = self.params.theta
        vals = dict.fromkeys((0.0, theta, 2.0 * theta, v, min(v, 0.0), max(v, 2.0 * theta)))
        return tuple(PlayerType(b, w) for w in vals for b in (0, 1))

    def deviation_valuations(self, x: InputProfile, i: int) -> tuple[float, ...]:
        theta = self.params.theta
        return tuple(dict.fromkeys((0.0, theta, 2.0 * theta, x.players[i].valuation)))

    def claimed_truthful_players(self, x: InputProfile) -> tuple[int, ...]:
        q = self.params.qualifies
        return tuple(
            i
            for i, p in enumerate(x.players)
            if q(p.valuation) or (self.pay_all_zero_bits and p.bit == 0)
        )


@lru_cache(maxsize=None)
def _subsample_law(n: int, k: int, ones: int) -> CountDistribution:
    """Exact law of round_half_even(n*m/k) with m hypergeometric(n, ones, k)."""
    total = math.comb(n, k)
    atoms: dict[int, float] = {}
    for m in range(max(0, k - (n - ones)), min(k, ones) + 1):
        weight = Fraction(math.comb(ones, m) * math.comb(n - ones, k - m), total)
        count = round(Fraction(n * m, k))
        atoms[count] = atoms.get(count, 0.0) + float(weight)
    return CountDistribution.from_atoms(atoms, 0.0)


class SubsampleMechanism(Mechanism):
    """Pay everyone the flat amount, average the bits of a uniform size-k
    subset, and publish the rescaled (rounded half-even) count. Declarations
    are ignored entirely, which is what makes it trivially truthful."""

    def __init__(self, params: SubsampleParams):
        self.params = params
        self.name = "subsample"
        self.player_count = params.n

    @property
    def cache_token(self) -> tuple:
        p = self.params
        return (self.name, p.flat_pay, p.sample_size, p.n, p.distinguishability_budget)

    @property
    def distinguishability_budget(self) -> float:
        return self.params.distinguishability_budget

    def output_dist(self, x: InputProfile, mass_tol: float = DEFAULT_MASS_TOL) -> CountDistribution:
        self.require_profile(x)
        return _subsample_law(self.params.n, self.params.sample_size, x.bit_sum())

    def log_pmf(self, x: InputProfile, count: int) -> float:
        p = self.output_dist(x).prob(count)
        return math.log(p) if p > 0.0 else -math.inf

    def pay_vector(self, x: InputProfile) -> tuple[float, ...]:
        self.require_profile(x)
        return (self.params.flat_pay,) * self.params.n

    def _sample_count(self, x: InputProfile, rng: random.Random) -> int:
        n, k = self.params.n, self.params.sample_size
        chosen = rng.sample(range(n), k)
        m = sum(x.players[j].bit for j in chosen)
        return round(Fraction(n * m, k))

    def candidate_types(self, x: InputProfile, i: int) -> tuple[PlayerType, ...]:
        p = x.players[i]
        return tuple(
            dict.fromkeys(
                (
                    PlayerType(1 - p.bit, p.valuation),
                    PlayerType(1 - p.bit, 0.0),
                    PlayerType(p.bit, p.valuation + 1.0),
                )
            )
        )


class PayDeclaredMechanism(Mechanism):
    """Pay each player their declared valuation times epsilon and publish the
    noisy sum of all bits. Individually rational under DP-bounded losses but
    completely untruthful: declaring higher never changes the law and always
    raises the payment."""

    def __init__(self, epsilon: float, n: int):
        if not (math.isfinite(epsilon) and epsilon > 0):
            raise ValueError(f"epsilon must be finite and > 0, got {epsilon!r}")
        if not (isinstance(n, int) and n >= 1):
            raise ValueError(f"n must be an integer >= 1, got {n!r}")
        self.epsilon = epsilon
        self.name = "pay_declared"
        self.player_count = n
        self.geom = GeomParams(epsilon)

    @property
    def cache_token(self) -> tuple:
        return (self.name, self.epsilon, self.player_count)

    def output_dist(self, x: InputProfile, mass_tol: float = DEFAULT_MASS_TOL) -> CountDistribution:
        self.require_profile(x)
        return shifted_geom_dist(self.geom, x.bit_sum(), mass_tol)

    def log_pmf(self, x: InputProfile, count: int) -> float:
        self.require_profile(x)
        return self.geom.log_norm - self.epsilon * abs(count - x.bit_sum())

    def log_pmf_table(self, x: InputProfile, support) -> tuple[float, ...]:
        self.require_profile(x)
        c = x.bit_sum()
        ln, eps = self.geom.log_norm, self.epsilon
        return tuple(ln - eps * abs(s - c) for s in support)

    def pay_vector(self, x: InputProfile) -> tuple[float, ...]:
        self.require_profile(x)
        return tuple(p.valuation * self.epsilon for p in x.players)

    def _sample_count(self, x: InputProfile, rng: random.Random) -> int:
        return x.bit_sum() + sample_geom(self.geom, rng)

    def candidate_types(self, x: InputProfile, i: int) -> tuple[PlayerType, ...]:
        p = x.players[i]
        return tuple(
            dict.fromkeys(
                (
                    PlayerType(1 - p.bit, p.valuation),
                    PlayerType(1 - p.bit, 0.0),
                    PlayerType(p.bit, p.valuation + 1.0),
                )
            )
        )

    def deviation_valuations(self, x: InputProfile, i: int) -> tuple[float, ...]:
        v = x.players[i].valuation
        return tuple(dict.fromkeys((0.0, v + 1.0, 100.0 * (abs(v) + 1.0), v)))

    def claimed_truthful_players(self, x: InputProfile) -> tuple[int, ...]:
        return ()


class ExactSumMechanism(Mechanism):
    """Publish the exact bit sum and pay a flat amount (zero by default).
    The canonical counterexample fed to the impossibility audits."""

    def __init__(self, n: int, flat_pay: float = 0.0):
        if not (isinstance(n, int) and n >= 1):
            raise ValueError(f"n must be an integer >= 1, got {n!r}")
        if not (math.isfinite(flat_pay) and flat_pay >= 0):
            raise ValueError(f"flat_pay must be finite and >= 0, got {flat_pay!r}")
        self.flat_pay = flat_pay
        self.name = "exact_sum"
        self.player_count = n

    @property
    def cache_token(self) -> tuple:
        return (self.name, self.flat_pay, self.player_count)

    def output_dist(self, x: InputProfile, mass_tol: float = DEFAULT_MASS_TOL) -> CountDistribution:
        self.require_profile(x)
        return CountDistribution((x.bit_sum(),), (1.0,), 0.0)

    def log_pmf(self, x: InputProfile, count: int) -> float:
        self.require_profile(x)
        return 0.0 if count == x.bit_sum() else -math.inf

    def pay_vector(self, x: InputProfile) -> tuple[float, ...]:
        self.require_profile(x)
        return (self.flat_pay,) * self.player_count

    def _sample_count(self, x: InputProfile, rng: random.Random) -> int:
        return x.bit_sum()

    def candidate_types(self, x: InputProfile, i: int) -> tuple[PlayerType, ...]:
        p = x.players[i]
        return tuple(
            dict.fromkeys(
                (
                    PlayerType(1 - p.bit, p.valuation),
                    PlayerType(1 - p.bit, 0.0),
                    PlayerType(p.bit, p.valuation + 1.0),
                )
            )
        )


def alg1(budget: float, epsilon: float, n: int) -> BudgetMechanism:
    return BudgetMechanism(BudgetParams(budget, epsilon, n))


def alg1_prime(budget: float, epsilon: float, n: int) -> BudgetMechanism:
    return BudgetMechanism(BudgetParams(budget, epsilon, n), pay_all_zero_bits=True)


def subsample(flat_pay: float, sample_size: int, n: int, distinguishability_budget: float = math.inf) -> SubsampleMechanism:
    return SubsampleMechanism(SubsampleParams(flat_pay, sample_size, n, distinguishability_budget))


def pay_declared(epsilon: float, n: int) -> PayDeclaredMechanism:
    return PayDeclaredMechanism(epsilon, n)


def exact_sum(n: int, flat_pay: float = 0.0) -> ExactSumMechanism:
    return ExactSumMechanism(n, flat_pay)


def max_zero_valuation_pay(mech: Mechanism) -> float:
    """Max payment the mechanism makes to any player declaring valuation 0,
    over all bit vectors. Exact 2^n scan; fine at audit scale."""
    n = mech.player_count
    best = -math.inf
    for mask in range(2**n):
        x = InputProfile.from_arrays([(mask >> j) & 1 for j in range(n)], [0.0] * n)
        best = max(best, max(mech.pay_vector(x)))
    return best
