"""Toolkit for operator-algebra structure, tensor product structures, and holonomic control.

Given operationally available observables on a finite-dimensional state
space, the package decomposes the *-algebra they generate into its block
structure, certifies virtual bipartitions, quantifies entanglement
relative to any tensor product structure, builds parity-sector and
bosonic-mode structures, and probes controllability on degenerate
eigenspaces through loop holonomies.
"""

from .algebra import (
    BipartitionCertificate,
    Block,
    FactorCheck,
    OperatorAlgebra,
    StructureDecomposition,
    algebra_residuals,
    center,
    check_bipartition,
    close_algebra,
    commutant,
    commutant_block_residual,
    is_factor,
    join,
    structure_decompose,
)
from .bosonic import (
    FockSpace,
    ModeSet,
    build_fock,
    ccr_residual,
    mode_entanglement,
    rotate_single_particle,
    single_excitation_state,
    transform_modes,
)
from .errors import (
    BranchCutError,
    ContractViolationError,
    DegenerateInputError,
    DegeneracyError,
    DimensionMismatchError,
    ParitySetError,
    PathSingularityError,
    ToleranceError,
    TpskitError,
    TruncationBoundaryError,
)
from .holonomy import (
    IsoDegenerateOperator,
    LoopPath,
    RefinementLadder,
    UnitaryFamily,
    builtin_family,
    connection_at,
    exponential_family,
    holonomy_algebra_span,
    holonomy_nonabelian_witness,
    loop_holonomy,
    principal_log_unitary,
    refinement_ladder,
    tabulated_family,
)
from .numerics import DEFAULT_TOL, Tolerance
from .opfile import OperatorSpecFile, SpecFileError, load_spec, parse_spec
from .parity import (
    ParitySet,
    SyndromeDecomposition,
    classify_operator,
    conjugate_parity_set,
    pauli_string_matrix,
    syndrome_decompose,
    validate_parity_set,
)
from .tps import (
    TPS,
    EntanglementMeasure,
    EntanglingPowerEstimate,
    ProductVerdict,
    entanglement,
    entangling_power,
    is_product,
    local_algebra,
    multiplicative_partitions,
    tps_distance,
    tps_equivalent,
)

__version__ = "0.1.0"

__all__ = [
    "BipartitionCertificate",
    "Block",
    "BranchCutError",
    "ContractViolationError",
    "DEFAULT_TOL",
    "DegenerateInputError",
    "DegeneracyError",
    "DimensionMismatchError",
    "EntanglementMeasure",
    "EntanglingPowerEstimate",
    "FactorCheck",
    "FockSpace",
    "IsoDegenerateOperator",
    "LoopPath",
    "ModeSet",
    "OperatorAlgebra",
    "OperatorSpecFile",
    "ParitySet",
    "ParitySetError",
    "PathSingularityError",
    "ProductVerdict",
    "RefinementLadder",
    "SpecFileError",
    "StructureDecomposition",
    "SyndromeDecomposition",
    "TPS",
    "Tolerance",
    "ToleranceError",
    "TpskitError",
    "TruncationBoundaryError",
    "UnitaryFamily",
    "algebra_residuals",
    "build_fock",
    "builtin_family",
    "ccr_residual",
    "center",
    "check_bipartition",
    "classify_operator",
    "close_algebra",
    "commutant",
    "commutant_block_residual",
    "conjugate_parity_set",
    "connection_at",
    "entanglement",
    "entangling_power",
    "exponential_family",
    "holonomy_algebra_span",
    "holonomy_nonabelian_witness",
    "is_factor",
    "is_product",
    "join",
    "load_spec",
    "local_algebra",
    "loop_holonomy",
    "mode_entanglement",
    "multiplicative_partitions",
    "parse_spec",
    "pauli_string_matrix",
    "principal_log_unitary",
    "refinement_ladder",
    "rotate_single_particle",
    "single_excitation_state",
    "structure_decompose",
    "syndrome_decompose",
    "tabulated_family",
    "tps_distance",
    "tps_equivalent",
    "transform_modes",
    "validate_parity_set",
    "__version__",
]
