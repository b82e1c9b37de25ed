"""Augmented constraint-extrapolation solver for composite nonsmooth,
stochastic, convex function-constrained optimization, with last-iterate
output and a sparse-QCQP benchmark harness."""

from .problem import (
    AggregateConstants,
    Ball,
    ConstraintProfile,
    DomainError,
    PrimalDualPoint,
    ProblemInstance,
    SmoothnessProfile,
    aggregate_constants,
    eval_objective,
    feasibility_gap,
    lagrangian,
    optimality_gap,
)
from .prox import (
    ProxRequest,
    UnsupportedCompositeError,
    composite_prox,
    negative_part,
    positive_part,
    project_l2_ball,
    prox_l1_over_ball,
    soft_threshold,
)
from .schedules import (
    CONVEX,
    STRONGLY_CONVEX,
    ConditionReport,
    Schedule,
    ScheduleParams,
    StepSizes,
    build_schedule,
    convex_schedule,
    h_star,
    iteration_bound,
    strongly_convex_schedule,
    verify_conditions,
)
from .solver import (
    InnerWorkspace,
    InternalConsistencyError,
    IterationReport,
    RunResult,
    SolverState,
    apply_F,
    build_workspace,
    init,
    inner_fixed_point,
    momentum_point,
    recover_s_y,
    run,
    step,
)
from .qcqp import (
    NoisyOracleConfig,
    QcqpInstance,
    UnreliableReferenceError,
    derive_constants,
    generate_qcqp,
    instance_from_spec,
    instance_spec,
    load_instance,
    noisy_gradient,
    power_iteration_norm,
    reference_solution,
    save_instance,
    solve_with_convex_solver,
    sparsity_level,
    to_problem,
)
from .experiments import (
    ExperimentConfig,
    InsufficientDataError,
    fit_rate,
    histogram,
    run_experiment,
    run_seed,
    sweep,
)
from .trace import CSV_COLUMNS, RunTrace, TraceRow, read_trace_rows, trace_from_run, write_trace_csv

__version__ = "0.1.0"
