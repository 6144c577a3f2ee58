"""Pairing witnesses for fermionic and bosonic many-particle states."""

__version__ = "0.1.0"

from .fock import (
    FockSector,
    InvalidDimensionError,
    SectorTooLargeError,
    SparseOperator,
    StateVector,
    Statistics,
    apply_annihilator,
    apply_creator,
    apply_general_annihilator,
    apply_general_creator,
    assemble_operator,
    basis_state,
    enumerate_sector,
    product_state,
    vacuum,
)
from .pairing import QSpec, qdagq_operator
from .canonical import CanonicalForm, antisymmetric_canonical, build_qspec, canonicalize, takagi
from .spectral import (
    brute_force_spectrum,
    harmonic_kernel_basis,
    ladder_eigenstate,
    lambda_max,
    lambda_max_boson,
    lambda_max_fermion,
    sl2r_check,
    su2_check,
)
from .separability import (
    BoundKind,
    BoundResult,
    ProductKind,
    ProductStateSpec,
    boson_type1_bound,
    boson_type2_bound,
    expectation_qdagq,
    fermion_sep_bound,
    overlap_matrices,
    permutation_maximizer,
    type1_bound_oracle,
)
from .witness import Verdict, WitnessReport, detectability_ratio, evaluate_witness, witness_matrix
