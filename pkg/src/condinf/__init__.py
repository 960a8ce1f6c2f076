"""Conditional infima of lattice-valued random elements on finite filtered spaces."""

from .conditional import (
    cond_inf,
    cond_inf_at_stopping_time,
    cond_sup,
    ess_sup,
    ess_sup_by_phi,
    inf_process,
    sample_at,
)
from .convex import POLYTOPES, Polytope2, contains, hull, join, meet, phi_convex
from .lattice import (
    NEG_END,
    POS_END,
    REALS,
    DedekindExtension,
    ExtendedReal,
    Lattice,
    PowerSet,
    dedekind_extend,
    lattice_from_spec,
    order_indicator,
)
from .martingale import (
    ReconstructionInput,
    is_martingale,
    is_supermartingale,
    lazy_walk_1d,
    lazy_walk_2d,
    reconstruct,
    tree_martingale,
    verify_running_max_recovery,
)
from .montecarlo import ely_estimate, ny_check, ny_rhs, simulate_exp_martingale
from .recovery import (
    check_conditional_improvement,
    check_ncr,
    check_no_sure_improvement,
    check_recovery_i,
    check_sticky,
    check_sticky_monotone,
    convex_hull_process,
    entry_functional,
    integral_functional,
    running_max,
    visit_functional,
    visited_sites_process,
)
from .report import CheckResult, Report
from .space import (
    AdaptedProcess,
    FiniteFilteredSpace,
    StoppingTime,
    cond_expectation,
    gen_martingale,
    gen_space,
    gen_stopping_time,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptedProcess",
    "CheckResult",
    "DedekindExtension",
    "ExtendedReal",
    "FiniteFilteredSpace",
    "Lattice",
    "NEG_END",
    "POLYTOPES",
    "POS_END",
    "Polytope2",
    "PowerSet",
    "REALS",
    "ReconstructionInput",
    "Report",
    "StoppingTime",
    "check_conditional_improvement",
    "check_ncr",
    "check_no_sure_improvement",
    "check_recovery_i",
    "check_sticky",
    "check_sticky_monotone",
    "cond_expectation",
    "cond_inf",
    "cond_inf_at_stopping_time",
    "cond_sup",
    "contains",
    "convex_hull_process",
    "dedekind_extend",
    "ely_estimate",
    "entry_functional",
    "ess_sup",
    "ess_sup_by_phi",
    "gen_martingale",
    "gen_space",
    "gen_stopping_time",
    "hull",
    "inf_process",
    "integral_functional",
    "is_martingale",
    "is_supermartingale",
    "join",
    "lattice_from_spec",
    "lazy_walk_1d",
    "lazy_walk_2d",
    "meet",
    "ny_check",
    "ny_rhs",
    "order_indicator",
    "phi_convex",
    "reconstruct",
    "running_max",
    "sample_at",
    "simulate_exp_martingale",
    "tree_martingale",
    "validate",
    "verify_running_max_recovery",
    "visit_functional",
    "visited_sites_process",
]
