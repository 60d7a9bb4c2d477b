"""Retrodictive probabilities for sequences of projective measurements."""

from .qla import (
    DensityOperator,
    Ket,
    ProjectiveDecomposition,
    Projector,
    coarsen,
    projector_from_ket,
    pvm_from_kets,
    rotate_fixing_axis,
)
from .retrodict import (
    ClassicalModel,
    DiscrepancyReport,
    RetrodictionQuery,
    abl,
    abl_coarse,
    abl_fine,
    classical_retrodict,
    corrected_bayes,
    corrected_marginal,
    margenau_discrepancy,
    margenau_scenario,
    naive_bayes,
    naive_marginal,
    oracle_conditional,
    rotated_basis_comparison,
    rotated_scenario,
    three_box_scenario,
)
from .sequence import (
    EventAtom,
    JointDistribution,
    MeasurementPlan,
    UndefinedConditional,
    ZeroProbabilityBranch,
    conditional,
    event_probability,
    joint_distribution,
    luders_update,
)

__version__ = "0.1.0"

__all__ = [
    "DensityOperator",
    "Ket",
    "ProjectiveDecomposition",
    "Projector",
    "coarsen",
    "projector_from_ket",
    "pvm_from_kets",
    "rotate_fixing_axis",
    "ClassicalModel",
    "DiscrepancyReport",
    "RetrodictionQuery",
    "abl",
    "abl_coarse",
    "abl_fine",
    "classical_retrodict",
    "corrected_bayes",
    "corrected_marginal",
    "margenau_discrepancy",
    "margenau_scenario",
    "naive_bayes",
    "naive_marginal",
    "oracle_conditional",
    "rotated_basis_comparison",
    "rotated_scenario",
    "three_box_scenario",
    "EventAtom",
    "JointDistribution",
    "MeasurementPlan",
    "UndefinedConditional",
    "ZeroProbabilityBranch",
    "conditional",
    "event_probability",
    "joint_distribution",
    "luders_update",
]
