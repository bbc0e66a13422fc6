"""Relative entropy between sampling with and without replacement from a coloured urn."""

from .bounds import (
    BoundReport,
    NotApplicable,
    bound_report,
    crossover_s_star,
    exact_binary_divergence,
    hm_bounds,
    limit_expressions,
    proof_step_diagnostics,
    prop12_upper,
    sigma_stats,
    stam_bounds,
    thm1_upper,
)
from .definetti import (
    MixingMeasure,
    definetti_bounds,
    definetti_divergence,
    mixing_from_iid,
    mk_from_mixture,
    pk_from_mixture,
)
from .divergence import divergence_report, relative_entropy, total_variation
from .numerics import RealInterval, u_sandwich, u_value
from .oracle import PrecisionError, certified_divergence
from .urn import UrnSpec, hypergeometric_pmf, multinomial_pmf

__version__ = "0.1.0"
