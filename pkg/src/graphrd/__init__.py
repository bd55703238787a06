"""Rate-distortion analysis of block-model and independent-edge graph sources.

Closed-form curves under edge Hamming distortion, the reverse water-filling
allocations behind them, a numerical oracle to certify both on small
instances, and a Monte Carlo of the achievability test channel.
"""

from .models import (
    ErParams,
    Graph,
    InhomErParams,
    LabelVector,
    SbmParams,
    er_entropy,
    inhomogeneous_er_entropy,
    pair_arrays,
    pair_count,
    pair_index,
    params_from_json,
    sbm_conditional_entropy,
    sbm_entropy_interval,
    shannon_entropy,
    validate_er,
    validate_inhom_er,
    validate_labels,
    validate_sbm,
)
from .numerics import (
    binary_entropy,
    binary_entropy_values,
    entropy_matrix,
    quadratic_form,
    solve_monotone_piecewise,
    water_level_bisection,
)
from .oracle import (
    DiscreteRdProblem,
    InstanceTooLargeError,
    OracleResult,
    blahut_arimoto,
    conditional_sbm_oracle,
    joint_graph_rdf_oracle,
    product_source_problem,
)
from .rdf import (
    RateInterval,
    RdCurvePoint,
    distortion_boundary,
    er_rdf,
    inhomogeneous_er_rdf,
    rd_point,
    rdf_curve,
    sbm_conditional_rdf,
    sbm_rdf_interval,
)
from .simulate import (
    RngSpec,
    SimReport,
    TestChannel,
    apply_test_channel,
    hamming_distortion,
    monte_carlo_distortion,
    read_graph,
    read_labels,
    sample_graph,
    sample_labels,
    write_graph,
    write_labels,
)
from .waterfill import (
    ErAllocation,
    InfeasibleDistortionError,
    SbmAllocation,
    er_distortion_boundary,
    er_kkt_certificate,
    sbm_distortion_boundary,
    sbm_independence_boundary,
    sbm_kkt_certificate,
    solve_er_waterfill,
    solve_sbm_waterfill,
)

__all__ = [
    "DiscreteRdProblem",
    "ErAllocation",
    "ErParams",
    "Graph",
    "InfeasibleDistortionError",
    "InhomErParams",
    "InstanceTooLargeError",
    "LabelVector",
    "OracleResult",
    "RateInterval",
    "RdCurvePoint",
    "RngSpec",
    "SbmAllocation",
    "SbmParams",
    "SimReport",
    "TestChannel",
    "apply_test_channel",
    "binary_entropy",
    "binary_entropy_values",
    "blahut_arimoto",
    "conditional_sbm_oracle",
    "distortion_boundary",
    "entropy_matrix",
    "er_distortion_boundary",
    "er_entropy",
    "er_kkt_certificate",
    "er_rdf",
    "hamming_distortion",
    "inhomogeneous_er_entropy",
    "inhomogeneous_er_rdf",
    "joint_graph_rdf_oracle",
    "monte_carlo_distortion",
    "pair_arrays",
    "pair_count",
    "pair_index",
    "params_from_json",
    "product_source_problem",
    "quadratic_form",
    "rd_point",
    "rdf_curve",
    "read_graph",
    "read_labels",
    "sample_graph",
    "sample_labels",
    "sbm_conditional_entropy",
    "sbm_conditional_rdf",
    "sbm_distortion_boundary",
    "sbm_entropy_interval",
    "sbm_independence_boundary",
    "sbm_kkt_certificate",
    "sbm_rdf_interval",
    "shannon_entropy",
    "solve_er_waterfill",
    "solve_monotone_piecewise",
    "solve_sbm_waterfill",
    "validate_er",
    "validate_inhom_er",
    "validate_labels",
    "validate_sbm",
    "water_level_bisection",
    "write_graph",
    "write_labels",
]
