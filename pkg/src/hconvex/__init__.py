"""Quaternionic convexity on voxelized compacts in H^n."""

__version__ = "0.1.0"

from .cubical import AcyclicityResult, BettiVector, CubicalComplex, betti, betti_of, build_complex, is_acyclic
from .hconv import (
    DirectionSample,
    QuasiconvexReport,
    UnboundedInWindow,
    conjugate,
    hcomb,
    hcomb_n,
    hextremal_points,
    hhull,
    hull_via_conjugate_n1,
    quasiconvex_check,
    strong_convexity_evidence,
)
from .quat import Functional, HLine, HPoint, Quaternion, annihilating_functional, line_eval, pair, qinv, qmul
from .voxel import Frame, GridSpec, SceneSet, VoxelSet, boolean_ops, hausdorff_cells, line_section, product, project_image, rasterize

__all__ = [
    "AcyclicityResult",
    "BettiVector",
    "CubicalComplex",
    "DirectionSample",
    "Frame",
    "Functional",
    "GridSpec",
    "HLine",
    "HPoint",
    "QuasiconvexReport",
    "Quaternion",
    "SceneSet",
    "UnboundedInWindow",
    "VoxelSet",
    "annihilating_functional",
    "betti",
    "betti_of",
    "boolean_ops",
    "build_complex",
    "conjugate",
    "hausdorff_cells",
    "hcomb",
    "hcomb_n",
    "hextremal_points",
    "hhull",
    "hull_via_conjugate_n1",
    "is_acyclic",
    "line_eval",
    "line_section",
    "pair",
    "product",
    "project_image",
    "qinv",
    "qmul",
    "quasiconvex_check",
    "rasterize",
    "strong_convexity_evidence",
]
