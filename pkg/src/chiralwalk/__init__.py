"""Continuous-time and chiral quantum walks with zero-transfer planning."""
from .chiral import (
    BranchPhaseSums,
    ChiralPhaseAssignment,
    apply_phases,
    branch_phase_sums,
    gauge_amplitudes,
    plan_zero_transfer,
    zero_transfer_residual,
)
from .estimator import (
    OmegaEstimate,
    OmegaEstimator,
    ReferenceTable,
    build_probe,
    build_reference,
    estimate_omega,
)
from .graph import (
    BranchDecomposition,
    GraphFamilyParams,
    HermitianGraph,
    complete_graph,
    cycle_graph,
    merged_star_type1,
    merged_star_type2,
    new_graph,
    passive_edge_graph,
    path_graph,
    spanning_branch_subgraph,
)
from .lindblad import DensityMatrix, LindbladSet, build_superoperator, qsw_evolve, standard_lindblads
from .unitary import (
    ProbabilityTrace,
    SpectralPropagator,
    StateVector,
    basis_state,
    build_propagator,
    check_trs,
    evolve,
    taylor_oracle,
    trace_probabilities,
    uniform_state,
)

__all__ = [
    "apply_phases",
    "basis_state",
    "branch_phase_sums",
    "BranchDecomposition",
    "BranchPhaseSums",
    "build_probe",
    "build_propagator",
    "build_reference",
    "build_superoperator",
    "check_trs",
    "ChiralPhaseAssignment",
    "complete_graph",
    "cycle_graph",
    "DensityMatrix",
    "estimate_omega",
    "evolve",
    "gauge_amplitudes",
    "GraphFamilyParams",
    "HermitianGraph",
    "LindbladSet",
    "merged_star_type1",
    "merged_star_type2",
    "new_graph",
    "OmegaEstimate",
    "OmegaEstimator",
    "passive_edge_graph",
    "path_graph",
    "plan_zero_transfer",
    "ProbabilityTrace",
    "qsw_evolve",
    "ReferenceTable",
    "spanning_branch_subgraph",
    "SpectralPropagator",
    "standard_lindblads",
    "StateVector",
    "taylor_oracle",
    "trace_probabilities",
    "uniform_state",
    "zero_transfer_residual",
]

__version__ = "0.1.0"
