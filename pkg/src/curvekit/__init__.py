"""curvekit: local curvature estimation for point clouds and latent layers."""

__version__ = "0.1.0"

from .caml import (
    CurvatureResult,
    LocalFrame,
    TaylorFit,
    build_design_matrix,
    build_frame,
    design_matrix,
    estimate_point_curvature,
    fit_taylor,
    frame_from_basis,
    principal_curvatures,
)
from .dimension import (
    IdEstimate,
    SpectrumSummary,
    pc_id,
    relative_difference,
    round_id_for_caml,
    twonn_id,
)
from .manifolds import (
    EllipsoidSpec,
    QuadraticPatchSpec,
    ellipsoid_gauss_curvature,
    sample_ellipsoid,
    sample_quadratic_patch,
    sample_sphere,
)
from .metrics import (
    RiemannTensor,
    gaussian_curvature_2d,
    mamc,
    mapc,
    marc,
    masc,
    riemann_tensor,
    sectional_curvature,
)
from .neighborhoods import (
    NeighborhoodBatch,
    SvdTruncationPlan,
    affine_neighborhood,
    knn_neighborhood,
    mean_distance_to_center,
    svd_neighborhood,
)
from .profile import (
    GapReport,
    LayerProfile,
    ProfileConfig,
    build_profile,
    curvature_histogram,
    nmapc_gap,
    subsample_stability,
)
from .tensor_io import (
    ImageTensor,
    LayerBundle,
    Tensor2D,
    load_bundle,
    load_image,
    load_tensor,
    save_bundle,
    save_image,
    save_tensor,
)

__all__ = [name for name in dir() if not name.startswith("_")]
