"""Stochastic matching sparsification with local-computation machinery.

The package splits into: stochastic graphs and seeded randomness
(:mod:`~stochmatch.graph`), deterministic maximum matching and
fractional-matching certificates (:mod:`~stochmatch.matching`), the
multi-realization sparsifier H and q-value estimation
(:mod:`~stochmatch.sparsifier`), the instrumented local-computation
runtime (:mod:`~stochmatch.lca`), truncated greedy MIS
(:mod:`~stochmatch.mis`), augmenting hyperwalks and the recursive
matching with its query twin (:mod:`~stochmatch.hyperwalk`), and the
analysis pipeline with claim verification (:mod:`~stochmatch.analysis`).
"""

from .graph import (
    ENUM_CAP,
    EdgeCountExceeded,
    Graph,
    GraphFormatError,
    Realization,
    SeedContext,
    enumerate_realizations,
    gnp_graph,
    load_graph,
    parse_graph_text,
    sample_realization,
    subgraph,
    write_graph_text,
)
from .matching import (
    BLOSSOM_SET_CAP,
    CapExceeded,
    CertificateReport,
    FractionalMatching,
    check_blossom,
    fractional_size,
    is_matching,
    matched_vertices,
    matching_number,
    matching_size_expectation_exact,
    maximum_matching,
    vertex_load,
    violates_vertex_caps,
)
from .sparsifier import (
    QProfile,
    SparsifierParams,
    build_H,
    derive_R,
    estimate_q,
    max_degree_of,
    select_thresholds,
)
from .lca import (
    CorrelatedBoundReport,
    CorrelationEstimate,
    LcaOracle,
    NaturalityViolation,
    ProbeTrace,
    QueryLedger,
    Site,
    check_correlated_bound,
    estimate_delta,
    gather_ledger,
    ledger_to_csv,
    run_lca,
    site_tape,
    sweep_ledger,
)
from .mis import (
    TmisBudget,
    TmisOutcome,
    TruncatedGreedyMis,
    gmis_member,
    tmis_member,
    tmis_query,
    tmis_set,
    vertex_rank,
)
from .hyperwalk import (
    BMatchingLca,
    BParams,
    EnumerationTooLarge,
    Hyperwalk,
    Profile,
    ResourceGuard,
    UnsaturationTable,
    WalkIndex,
    apply_hyperwalk,
    b_generic,
    build_unsaturation_table,
    degree_in_profile,
    enumerate_hyperwalks,
    enumerate_hyperwalks_containing,
    is_augmenting,
    out_query_ceiling,
    validate_profile,
    walk_vertices,
)
from .analysis import (
    ClaimCheck,
    ClaimReport,
    CrucialSetup,
    DeltaTable,
    MatchProbTable,
    MissingTableEntry,
    PipelineRun,
    PipelineSetup,
    RatioEstimate,
    build_delta_table,
    build_f,
    build_match_prob_table,
    build_x,
    compute_MC,
    estimate_ratio,
    ratio_sweep,
    match_targets_from_q,
    prepare_crucial,
    prepare_pipeline,
    round_x,
    run_pipeline,
    scale_values,
    verify_claims,
)

__version__ = "0.1.0"
