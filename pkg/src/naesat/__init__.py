"""Random NAE-K-SAT laboratory.

Instances and reductions, sequential local decimation with pluggable local
rules (unit clause, exact counting marginals, three-state survey messages),
balance and coupling checks, influence-range diagnostics, solution-geometry
censuses, first-moment bounds, and interpolation experiments.
"""

from .errors import (
    CorruptInstanceError,
    FormulaParseError,
    InvalidParametersError,
    NaesatError,
    TooLargeError,
    WindowUnreachableError,
)
from .bp import (
    Marginal,
    bp_messages,
    bp_rule,
    count_root_split,
    count_satisfying,
    exact_marginal,
)
from .decimation import (
    BalanceReport,
    LocalRule,
    OrderingZ,
    RunTrace,
    StepRecord,
    check_balance,
    constant_rule,
    draw_ordering,
    draw_seeds,
    ordering_from_weights,
    read_trace_jsonl,
    run,
    unit_clause_rule,
    write_trace_jsonl,
)
from .harness import (
    ExperimentConfig,
    ResultRecord,
    density_sweep,
    estimate_alpha,
    isotonic_decreasing,
    record_to_dict,
    rng_streams,
    rule_from_config,
    stream,
    sweep_trend,
    wilson_interval,
    worker_count,
    write_records_csv,
    write_records_json,
)
from .influence import (
    GrowthReport,
    InfluenceSet,
    ball_growth,
    diff_set,
    influence_range,
    max_influence_stats,
    variable_graph,
    write_growth_csv,
    write_histogram_csv,
)
from .overlap import (
    CensusResult,
    FirstMomentBound,
    OverlapParams,
    TupleReport,
    assignment_to_mask,
    blend,
    census,
    default_params,
    enumerate_satisfying,
    first_moment_bound,
    interpolate,
    is_satisfiable,
    mask_to_assignment,
    pair_unsat_prob,
    write_tuple_report,
)
from .sp import (
    SPInit,
    SPState,
    WFields,
    decide,
    draw_sp_init,
    dump_trajectory,
    run_surveys,
    sp_fields,
    sp_init,
    sp_iterate,
    sp_rule,
    swap_init,
)
from .instance import (
    MINUS,
    NEUTRAL,
    PLUS,
    Clause,
    Formula,
    Literal,
    Neighborhood,
    complement,
    evaluate,
    evaluate_clause,
    generate,
    hamming,
    load_formula,
    neighborhood,
    parse,
    random_neighborhood,
    random_reduced_formula,
    reduce,
    save_formula,
    serialize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
