"""Domain types: players, profiles, outcomes, neighbor relations, mechanisms.

All types are immutable values and safe to share. Player indices are
0-based throughout the package.
"""

from __future__ import annotations

import math
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

from .distributions import DEFAULT_MASS_TOL, CountDistribution


@dataclass(frozen=True)
class PlayerType:
    """One player's private information: a data bit and a privacy valuation.

    The bit cannot be falsified, only withheld; the valuation converts
    privacy loss into currency. Negative valuations are allowed (a player
    may want to lose privacy), NaN/inf are not.
    """

    bit: int
    valuation: float

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValueError(f"bit must be 0 or 1, got {self.bit!r}")
        object.__setattr__(self, "bit", int(self.bit))
        v = float(self.valuation)
        if not math.isfinite(v):
            raise ValueError(f"valuation must be finite, got {self.valuation!r}")
        object.__setattr__(self, "valuation", v)

    def __str__(self) -> str:
        return f"({self.bit}, {self.valuation:g})"


def monotonically_related(a: PlayerType, c: PlayerType) -> bool:
    """Opposite-bit pair where the bit-1 side has the weakly larger valuation.

    Encodes "bit 1 is the sensitive value": a bit-1 player only worries about
    being told apart from bit-0 types with valuations at most their own.
    Symmetric; equal-bit pairs are never related.
    """
    if a.bit == c.bit:
        return False
    one, zero = (a, c) if a.bit == 1 else (c, a)
    return zero.valuation <= one.valuation


class NeighborRelation(Enum):
    GENERAL = "general"
    MONOTONIC = "monotonic"

    def admits(self, current: PlayerType, candidate: PlayerType) -> bool:
        """Whether replacing ``current`` by ``candidate`` forms an admissible
        i-neighbor under this relation (the unchanged type never does)."""
        if self is NeighborRelation.GENERAL:
            return candidate != current
        return monotonically_related(current, candidate)


@dataclass(frozen=True)
class InputProfile:
    """The full game input: an ordered tuple of player types, n >= 1."""

    players: tuple[PlayerType, ...]

    def __post_init__(self):
        players = tuple(self.players)
        if not players:
            raise ValueError("a profile needs at least one player")
        object.__setattr__(self, "players", players)

    @classmethod
    def from_arrays(cls, bits, valuations) -> "InputProfile":
        bits, valuations = list(bits), list(valuations)
        if len(bits) != len(valuations):
            raise ValueError("bits and valuations must have equal length")
        return cls(tuple(PlayerType(b, v) for b, v in zip(bits, valuations)))

    @property
    def n(self) -> int:
        return len(self.players)

    @cached_property
    def bits(self) -> tuple[int, ...]:
        return tuple(p.bit for p in self.players)

    @cached_property
    def valuations(self) -> tuple[float, ...]:
        return tuple(p.valuation for p in self.players)

    def bit_sum(self) -> int:
        return sum(self.bits)

    def with_player(self, i: int, player: PlayerType) -> "InputProfile":
        if not 0 <= i < self.n:
            raise IndexError(f"player index {i} out of range for n={self.n}")
        return InputProfile(self.players[:i] + (player,) + self.players[i + 1 :])

    def with_valuation(self, i: int, valuation: float) -> "InputProfile":
        return self.with_player(i, PlayerType(self.players[i].bit, valuation))

    def to_json_dict(self) -> dict:
        return {"bits": list(self.bits), "valuations": list(self.valuations)}

    @classmethod
    def from_json_dict(cls, d: dict) -> "InputProfile":
        return cls.from_arrays(d["bits"], d["valuations"])

    def __str__(self) -> str:
        return "(" + ", ".join(str(p) for p in self.players) + ")"


@dataclass(frozen=True)
class Outcome:
    """A realized mechanism outcome: the published count and all payments."""

    count: int
    payments: tuple[float, ...]

    def payments_excluding(self, i: int) -> tuple[float, ...]:
        return self.payments[:i] + self.payments[i + 1 :]


def i_neighbor_profiles(
    x: InputProfile,
    i: int,
    relation: NeighborRelation,
    candidate_types,
) -> list[InputProfile]:
    """Profiles obtained by swapping player i's type for an admissible candidate.

    Candidates equal to the current type are dropped, as are duplicates. With
    the monotonic relation only monotonically related candidates survive.
    The caller supplies a candidate set that is distribution-complete for the
    mechanism at hand, which makes suprema over the (infinite) type space
    exactly computable.
    """
    if not 0 <= i < x.n:
        raise IndexError(f"player index {i} out of range for n={x.n}")
    current = x.players[i]
    out, seen = [], set()
    for cand in candidate_types:
        if cand in seen or not relation.admits(current, cand):
            continue
        seen.add(cand)
        out.append(x.with_player(i, cand))
    return out


class Mechanism(ABC):
    """A mechanism: a randomized published count plus a payment rule.

    Bundled mechanisms have deterministic payments and a count law that is
    exactly representable (a shifted geometric, a scaled hypergeometric, or a
    point mass), so every verifier below works from closed forms.
    ``sample`` exists for Monte Carlo cross-checks only.
    """

    name: str
    player_count: int

    @property
    @abstractmethod
    def cache_token(self) -> tuple:
        """Hashable identity pinning every parameter the laws depend on."""

    def require_profile(self, x: InputProfile) -> None:
        if x.n != self.player_count:
            raise ValueError(f"profile has {x.n} players, mechanism expects {self.player_count}")

    @abstractmethod
    def output_dist(self, x: InputProfile, mass_tol: float = DEFAULT_MASS_TOL) -> CountDistribution:
        """Exact law of the published count under declarations ``x``."""

    @abstractmethod
    def log_pmf(self, x: InputProfile, count: int) -> float:
        """Exact ln Pr[count] under declarations ``x`` (-inf off support)."""

    def log_pmf_table(self, x: InputProfile, support) -> tuple[float, ...]:
        return tuple(self.log_pmf(x, s) for s in support)

    @abstractmethod
    def pay_vector(self, x: InputProfile) -> tuple[float, ...]:
        """Deterministic payments to all players under declarations ``x``."""

    def expected_pay(self, x: InputProfile, i: int) -> float:
        self.require_profile(x)
        return self.pay_vector(x)[i]

    @abstractmethod
    def _sample_count(self, x: InputProfile, rng: random.Random) -> int: ...

    def sample(self, x: InputProfile, rng) -> Outcome:
        """Draw one outcome; ``rng`` is a seed int or a random.Random."""
        if isinstance(rng, int):
            rng = random.Random(rng)
        self.require_profile(x)
        return Outcome(self._sample_count(x, rng), self.pay_vector(x))

    @abstractmethod
    def candidate_types(self, x: InputProfile, i: int) -> tuple[PlayerType, ...]:
        """Canonical finite candidate set, distribution-complete for this
        mechanism: every output-law class reachable by changing player i's
        type has an admissible representative here, for both relations."""

    def deviation_valuations(self, x: InputProfile, i: int) -> tuple[float, ...]:
        """Default deviation grid: canonical candidate valuations plus truth."""
        vals = [t.valuation for t in self.candidate_types(x, i)]
        vals.append(x.players[i].valuation)
        return tuple(dict.fromkeys(vals))

    def claimed_truthful_players(self, x: InputProfile) -> tuple[int, ...]:
        """Players for whom this mechanism claims truthfulness."""
        return tuple(range(x.n))

    def neighbor_profiles(self, x: InputProfile, i: int, relation: NeighborRelation) -> list[InputProfile]:
        return i_neighbor_profiles(x, i, relation, self.candidate_types(x, i))
