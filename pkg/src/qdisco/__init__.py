"""qdisco: compile, distribute, execute and score QAOA workloads on
simulated noisy QPU fleets."""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    ConfigError,
    DimensionError,
    NoRegionError,
    PartitionError,
    PlacementError,
    QdiscoError,
    SchemaError,
)
from .problem import (
    ProblemGraph,
    ProblemInstance,
    SpinAssignment,
    SpinPolynomial,
    brute_force_optimum,
    evaluate_cost,
    labs_to_spin_polynomial,
    maxcut_to_spin_polynomial,
    parse_problem_json,
)
from .hardware import ErrorProfile, Fleet, QpuModel, load_calibration, synthesize_topology
from .simulator import (
    NoiseSpec,
    QaoaParams,
    ShotCounts,
    StateVector,
    apply_mixer,
    apply_phase,
    build_qaoa_state,
    expectation,
    noisy_sample,
    sample,
    uniform_state,
)
from .compiler import (
    FilteredGraph,
    Placement,
    SamplingRegion,
    enumerate_regions,
    filter_by_threshold,
    map_circuit,
    region_fidelity,
    select_regions,
)
from .decomposer import Partition, balanced_mincut, extract_subproblems, merge_solutions
from .optimizer import OptimizationTrace, OptimizerConfig, optimize
from .hscore import (
    HScoreReport,
    ReferenceDistribution,
    accuracy,
    benchmark_qpu,
    build_reference,
    h_score,
    score,
)
from .orchestrator import ExecutionPlan, RunResult, execute, plan, speedup_report

__all__ = [
    "__version__",
    "QdiscoError",
    "DimensionError",
    "CapacityError",
    "SchemaError",
    "PlacementError",
    "NoRegionError",
    "PartitionError",
    "ConfigError",
    "SpinPolynomial",
    "SpinAssignment",
    "ProblemGraph",
    "ProblemInstance",
    "evaluate_cost",
    "maxcut_to_spin_polynomial",
    "labs_to_spin_polynomial",
    "brute_force_optimum",
    "parse_problem_json",
    "QpuModel",
    "Fleet",
    "ErrorProfile",
    "load_calibration",
    "synthesize_topology",
    "QaoaParams",
    "StateVector",
    "ShotCounts",
    "NoiseSpec",
    "uniform_state",
    "apply_phase",
    "apply_mixer",
    "build_qaoa_state",
    "expectation",
    "sample",
    "noisy_sample",
    "FilteredGraph",
    "SamplingRegion",
    "Placement",
    "filter_by_threshold",
    "enumerate_regions",
    "select_regions",
    "region_fidelity",
    "map_circuit",
    "Partition",
    "balanced_mincut",
    "extract_subproblems",
    "merge_solutions",
    "OptimizerConfig",
    "OptimizationTrace",
    "optimize",
    "ReferenceDistribution",
    "HScoreReport",
    "accuracy",
    "build_reference",
    "score",
    "h_score",
    "benchmark_qpu",
    "ExecutionPlan",
    "RunResult",
    "plan",
    "execute",
    "speedup_report",
]
