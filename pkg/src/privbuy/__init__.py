"""privbuy: mechanisms for buying private data bits, with exact verifiers
and executable hybrid-argument audits."""

__version__ = "0.1.0"

from .audits import (
    AuditReport,
    HybridChain,
    TradeoffParams,
    audit_general_impossibility,
    audit_monotonic_impossibility,
    audit_payment_accuracy_tradeoff,
)
from .core import (
    InputProfile,
    Mechanism,
    NeighborRelation,
    Outcome,
    PlayerType,
    i_neighbor_profiles,
    monotonically_related,
)
from .distributions import (
    DEFAULT_MASS_TOL,
    CountDistribution,
    GeomParams,
    Interval,
    dp_level,
    geom_pmf,
    geom_tail,
    sample_geom,
    shifted_geom_dist,
    statistical_distance,
)
from .losses import (
    LossModel,
    growing_sd_loss,
    growing_sd_model,
    increasing_threshold_model,
    loss_expectation,
    max_neighbor_distance,
    tight_dp_loss,
    zero_loss,
)
from .mechanisms import (
    BudgetParams,
    SubsampleParams,
    alg1,
    alg1_prime,
    exact_sum,
    max_zero_valuation_pay,
    pay_declared,
    subsample,
)
from .verifiers import (
    AccuracySpec,
    CheckResult,
    DistinguishabilityQuery,
    check_accuracy,
    check_distinguishable,
    check_dp,
    check_ir,
    check_truthful,
    wilson_interval,
)

__all__ = [
    "AccuracySpec",
    "AuditReport",
    "BudgetParams",
    "CheckResult",
    "CountDistribution",
    "DEFAULT_MASS_TOL",
    "DistinguishabilityQuery",
    "GeomParams",
    "HybridChain",
    "InputProfile",
    "Interval",
    "LossModel",
    "Mechanism",
    "NeighborRelation",
    "Outcome",
    "PlayerType",
    "SubsampleParams",
    "TradeoffParams",
    "alg1",
    "alg1_prime",
    "audit_general_impossibility",
    "audit_monotonic_impossibility",
    "audit_payment_accuracy_tradeoff",
    "check_accuracy",
    "check_distinguishable",
    "check_dp",
    "check_ir",
    "check_truthful",
    "dp_level",
    "exact_sum",
    "geom_pmf",
    "geom_tail",
    "growing_sd_loss",
    "growing_sd_model",
    "i_neighbor_profiles",
    "increasing_threshold_model",
    "loss_expectation",
    "max_neighbor_distance",
    "max_zero_valuation_pay",
    "monotonically_related",
    "pay_declared",
    "sample_geom",
    "shifted_geom_dist",
    "statistical_distance",
    "subsample",
    "tight_dp_loss",
    "wilson_interval",
    "zero_loss",
]
