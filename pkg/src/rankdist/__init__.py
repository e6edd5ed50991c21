"""Rank distributions of random matrices over finite fields.

Exact finite-size pmfs and certified limiting pmfs for six matrix
ensembles, characterization pairs and solution bounds, total-variation
distances verified against explicit windows, finite-field samplers with a
fast GF(2) rank path, and the rank-evolution chain.
"""

from .qseries import (
    IntervalRat,
    QProductSpec,
    check_product_inequalities,
    default_qprod_trunc,
    finite_qproduct,
    infinite_qproduct,
    qbinomial,
)
from .ensembles import (
    Ensemble,
    HERMITIAN,
    LimitPmf,
    RankPmf,
    SKEWCENTRO_EVEN,
    SKEWCENTRO_ODD,
    SYMMETRIC,
    UNIFORM,
    ZERODIAG_EVEN,
    ZERODIAG_ODD,
    field_realizable,
    finite_pmf,
    limit_pmf,
    rank_count_qbinomial,
    skewcentro_even_reduction,
    support_max,
    uniform,
)
from .stein import (
    LIMIT,
    SteinPair,
    SteinSolution,
    characterization_check,
    moment_identities,
    stein_pair,
    stein_solution,
    stein_sup_norm,
    verify_solution_bounds,
)
from .tvbounds import TvResult, theorem_window, tv_distance, tv_grid, verify_tv_theorem
from .gfmatrix import (
    FieldSpec,
    MatrixGF,
    empirical_pmf,
    enumerate_ensemble,
    field_for,
    field_spec,
    rank,
    rng_stream,
    sample,
)
from .markov import build_chain, simulate_chain_vs_matrix, verify_stationarity

__version__ = "0.1.0"

__all__ = [
    "IntervalRat",
    "QProductSpec",
    "check_product_inequalities",
    "default_qprod_trunc",
    "finite_qproduct",
    "infinite_qproduct",
    "qbinomial",
    "Ensemble",
    "HERMITIAN",
    "LimitPmf",
    "RankPmf",
    "SKEWCENTRO_EVEN",
    "SKEWCENTRO_ODD",
    "SYMMETRIC",
    "UNIFORM",
    "ZERODIAG_EVEN",
    "ZERODIAG_ODD",
    "field_realizable",
    "finite_pmf",
    "limit_pmf",
    "rank_count_qbinomial",
    "skewcentro_even_reduction",
    "support_max",
    "uniform",
    "LIMIT",
    "SteinPair",
    "SteinSolution",
    "characterization_check",
    "moment_identities",
    "stein_pair",
    "stein_solution",
    "stein_sup_norm",
    "verify_solution_bounds",
    "TvResult",
    "theorem_window",
    "tv_distance",
    "tv_grid",
    "verify_tv_theorem",
    "FieldSpec",
    "MatrixGF",
    "empirical_pmf",
    "enumerate_ensemble",
    "field_for",
    "field_spec",
    "rank",
    "rng_stream",
    "sample",
    "build_chain",
    "simulate_chain_vs_matrix",
    "verify_stationarity",
]
