"""Chain geometries over finite rings with a distinguished subfield."""

__version__ = "0.1.0"

from .algebra import (
    FiniteField,
    FiniteRing,
    SubfieldEmbedding,
    SubgroupOfUnits,
    core_field,
    coset_transversal,
    embed_identity,
    embed_quadratic,
    factor_prime_power,
    make_field,
    make_matrix_ring,
    normalizer,
    ring_from_field,
)
from .chains import (
    ChainGeometry,
    all_chains,
    chains_through_standard_triple,
    chains_through_triple,
    is_chain_space,
    is_sharply_3_transitive,
    maximal_distant_cliques,
    standard_chain,
    triple_intersection,
    triple_stabilizer_acts_trivially,
)
from .incidence import (
    IncidenceStructure,
    check_cs1,
    check_cs2,
    check_cs3,
    from_chain_geometry,
    is_chain_space_axiomatic,
    structure,
    structure_from_json,
)
from .projline import (
    Mat2,
    PLPoint,
    ProjectiveLine,
    act,
    act_permutation,
    build_projective_line,
    canonical_pair,
    canonical_point,
    distant,
    gl2_generators,
    gl2_invertible,
    is_point,
    transitivity_witness,
)
from .residue import (
    AffineSpaceModel,
    Residue,
    TraceSpace,
    affine_space,
    compatibility_classes,
    compatible_at_infinity,
    double_compatibility,
    missing_parallel_classes,
    partial_affine_check,
    residue_at,
    residue_at_infinity,
    trace_space,
    verify_trace_isomorphism,
)
