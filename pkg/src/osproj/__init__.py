"""Completely bounded projections onto fixed-point subspaces of semigroup
actions on finite-dimensional matrix spaces.

The package constructs idempotent projections P with Ran P = X^S by
averaging the action against a computable invariant mean (uniform counting,
exact circle quadrature, or the mean-ergodic limit), and verifies the
properties the construction guarantees: P o P = P, generator invariance,
range identity, the cb-norm bound cb(P) <= sup_s cb(alpha_s), complete
positivity and bimodule behavior where the action provides them, and the
dual projection onto invariant states.
"""

from .actions import (
    CoefficientSample,
    SemigroupAction,
    SemigroupDesc,
    build_circle_action,
    build_conjugation_action,
    build_cyclic_action,
    build_free_monoid_action,
    build_superop_action,
    circle_desc,
    cyclic_desc,
    dual_action,
    finite_group_desc,
    finite_group_from_permutations,
    free_monoid_desc,
)
from .apps import (
    IsotropyResult,
    PlainNormResult,
    RepProblem,
    ToeplitzProblem,
    WeylResult,
    cp_fixed_projection,
    isotropy_lie_algebra,
    plain_norm_projection,
    toeplitz_projection,
    verify_conditional_expectation,
    verify_module_property,
    weyl_unitarize,
)
from .averaging import (
    MeanStrategy,
    ProjectionReport,
    average_circle,
    average_dual,
    average_ergodic,
    average_uniform,
)
from .cbnorm import (
    CbNormResult,
    CbUpperResult,
    cb_norm,
    cb_norm_cp,
    cb_norm_lower,
    cb_norm_upper,
)
from .errors import (
    ConfigError,
    EmptyMatrixError,
    HomomorphismError,
    IllConditionedError,
    NotCompletelyPositiveError,
    NotHermitianError,
    OsprojError,
    PowerBoundError,
    QuadratureError,
    SdpError,
    ShapeError,
    VerificationError,
)
from .fixedpoints import (
    FixedSubspace,
    SubspaceMatch,
    commutant,
    fixed_subspace,
    subspace_match,
)
from .linalg import (
    SubspaceBasis,
    herm_eig,
    kron,
    null_space,
    op_norm,
    read_matrix_text,
    svd,
    write_matrix_text,
)
from .sdp import SdpProblem, SdpSolution, solve_sdp
from .superop import (
    SuperOp,
    amplify,
    apply,
    choi_of,
    compose,
    conjugation,
    dual_of,
    from_choi,
    from_kraus,
    identity,
    kraus_of,
    pinching,
    read_superop_text,
    similarity,
    transpose_map,
    write_superop_text,
)

__version__ = "0.1.0"
