"""Exact simulation and numeric certification of a query-optimal NAND formula evaluator.

The engine parses a read-once binary NAND formula, attaches a tail path to the
root of its even-depth normal form, builds a weighted adjacency operator, and
decides the formula value by simulated phase estimation of the product of two
reflections (one about the operator's kernel, one about the leaves reading 1).
A verification suite certifies every structural and spectral property the
decision procedure relies on, at explicit numeric tolerances.
"""

from .formula import (
    FormulaSyntaxError,
    FormulaTree,
    FormulaValidationError,
    evaluate_classical,
    format_formula,
    generate_balanced,
    normalize_even_depth,
    parse_assignment,
    parse_formula,
    tree_stats,
)
from .tree import (
    AugmentedTree,
    SizeCapError,
    TailLengthWarning,
    attach_tail,
    build_hamiltonian,
    restrict_to_subtree,
)
from .spectral import (
    EigenDecomposition,
    ReflectionPair,
    ProductSpectrum,
    build_reflections,
    eigendecompose,
    min_relevant_phase,
    product_spectrum,
    projection_gap,
    two_reflection_angle_check,
)
from .certificates import (
    Certificate,
    CertificateError,
    EnumerationCapError,
    build_psi_0,
    build_psi_c,
    build_psi_c1c2,
    enumerate_certificates,
    sprime_basis,
)
from .qpe import (
    Decision,
    QpeConfig,
    QpeOutcome,
    decide,
    run_qpe,
    scaling_run,
    theta_min_for,
)
from .verify import BoundsError, bounds_table, run_suite, tail_threshold_check
from .corpus import balanced_instances, general_instances

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "FormulaTree",
    "FormulaSyntaxError",
    "FormulaValidationError",
    "parse_formula",
    "format_formula",
    "parse_assignment",
    "evaluate_classical",
    "normalize_even_depth",
    "generate_balanced",
    "tree_stats",
    "AugmentedTree",
    "SizeCapError",
    "TailLengthWarning",
    "attach_tail",
    "build_hamiltonian",
    "restrict_to_subtree",
    "EigenDecomposition",
    "ReflectionPair",
    "ProductSpectrum",
    "eigendecompose",
    "build_reflections",
    "product_spectrum",
    "min_relevant_phase",
    "projection_gap",
    "two_reflection_angle_check",
    "Certificate",
    "CertificateError",
    "EnumerationCapError",
    "enumerate_certificates",
    "build_psi_c",
    "build_psi_0",
    "build_psi_c1c2",
    "sprime_basis",
    "QpeConfig",
    "QpeOutcome",
    "Decision",
    "run_qpe",
    "decide",
    "scaling_run",
    "theta_min_for",
    "BoundsError",
    "bounds_table",
    "tail_threshold_check",
    "run_suite",
    "balanced_instances",
    "general_instances",
]
