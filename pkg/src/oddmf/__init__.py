"""Graded matrix factorizations over sign-commutative polynomial rings.

Exact rational arithmetic throughout; see the README for a tour.
"""

__version__ = "0.1.0"

from oddmf.ring import (  # noqa: E402
    ANY_DEGREE,
    INHOMOGENEOUS,
    DegreeVector,
    ParseError,
    Ring,
    RingElem,
    RingError,
    RingMap,
    graded_piece_basis,
    parse_expr,
)
from oddmf.mf import (  # noqa: E402
    MatrixFactorization,
    MfError,
    MfMorphism,
    base_change,
    cone,
    direct_sum,
    koszul_factorization,
    loop_factorization,
    shift,
    standard_contraction,
    tensor,
    totalize,
    trivial_mf,
    validate_mf,
)
from oddmf.homalg import (  # noqa: E402
    ContractionCertificate,
    ExtTable,
    IsoCertificate,
    NotFound,
    TruncatedComplex,
    check_exact_sequence,
    cohomology_dims,
    ext_product,
    find_contraction,
    find_iso,
    hom_complex,
    is_quasi_iso,
)
from oddmf.cover import (  # noqa: E402
    CoverError,
    CoverSpec,
    apply_fm_back,
    apply_fm_forward,
    build_adjoint_N,
    build_kernel_M,
    build_sides,
    check_counit,
    check_generators,
    check_involution,
    check_unit,
)
from oddmf.scenarios import (  # noqa: E402
    ScenarioError,
    ScenarioReport,
    load_builtin,
    load_scenario,
    parse_scenario,
    run_scenario,
)

__all__ = [
    "ANY_DEGREE",
    "INHOMOGENEOUS",
    "ContractionCertificate",
    "CoverError",
    "CoverSpec",
    "DegreeVector",
    "ExtTable",
    "IsoCertificate",
    "MatrixFactorization",
    "MfError",
    "MfMorphism",
    "NotFound",
    "ParseError",
    "Ring",
    "RingElem",
    "RingError",
    "RingMap",
    "ScenarioError",
    "ScenarioReport",
    "TruncatedComplex",
    "apply_fm_back",
    "apply_fm_forward",
    "base_change",
    "build_adjoint_N",
    "build_kernel_M",
    "build_sides",
    "check_counit",
    "check_exact_sequence",
    "check_generators",
    "check_involution",
    "check_unit",
    "cohomology_dims",
    "cone",
    "direct_sum",
    "ext_product",
    "find_contraction",
    "find_iso",
    "graded_piece_basis",
    "hom_complex",
    "is_quasi_iso",
    "koszul_factorization",
    "load_builtin",
    "load_scenario",
    "loop_factorization",
    "parse_expr",
    "parse_scenario",
    "run_scenario",
    "shift",
    "standard_contraction",
    "tensor",
    "totalize",
    "trivial_mf",
    "validate_mf",
]
