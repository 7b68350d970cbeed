"""Directional plate landmark deployment for moving-camera coverage.

The package models where a pinhole camera can usefully observe wall-mounted
plate landmarks (resolution, field of view, focus, occlusion), scores
deployments by the probability of seeing at least n landmarks from every
reachable position, optimizes deployments with an elitist genetic search,
and demonstrates the result by feeding an SE(3) pose observer only the
landmarks the camera model reports as measurable.
"""

from . import coverage, deployment, ega, geometry, observer, pdf_estimation
from .coverage import (
    CapSet,
    CoverageParams,
    OrientationGrid,
    OrientationPdf,
    cell_counts,
    coverage_caps,
    coverage_probabilities,
    coverage_strength,
    focus_criterion,
    focus_depths,
    fov_criterion,
    nple_probability,
    occlusion_criterion,
    resolution_criterion,
    strengths_grid,
)
from .deployment import (
    CoverageMap,
    Deployment,
    DeploymentMetrics,
    Scene,
    Wall,
    cost,
    evaluate_coverage,
    generate_random,
    generate_uniform,
    load_deployment,
    load_scene,
    make_scene,
    metrics,
    save_deployment,
    standard_walls,
)
from .ega import EgaParams, GeneSpace, GenStats
from .errors import SchemaError, TrajectoryOutOfRegionError
from .geometry import (
    CameraIntrinsics,
    Landmark,
    Pose6,
    fov_half_angles,
    frobenius_error,
    landmark_normal,
    local_to_world,
    normal_to_angles,
    pose_to_se3,
    rotation_from_angles,
    se3_inverse,
    se3_step,
    twist,
    world_to_local,
    wrap_angle,
)
from .observer import (
    ObserverConfig,
    ObserverTrace,
    TrajectorySpec,
    load_trajectory,
    random_walk_trajectory,
)
from .pdf_estimation import (
    AngleSamples,
    estimate_orientation_pdf,
    load_samples_csv,
    random_interval_resample,
)

__version__ = "0.1.0"

__all__ = [
    "AngleSamples",
    "CameraIntrinsics",
    "CapSet",
    "CoverageMap",
    "CoverageParams",
    "Deployment",
    "DeploymentMetrics",
    "EgaParams",
    "GenStats",
    "GeneSpace",
    "Landmark",
    "ObserverConfig",
    "ObserverTrace",
    "OrientationGrid",
    "OrientationPdf",
    "Pose6",
    "Scene",
    "SchemaError",
    "TrajectoryOutOfRegionError",
    "TrajectorySpec",
    "Wall",
    "cell_counts",
    "cost",
    "coverage",
    "coverage_caps",
    "coverage_probabilities",
    "coverage_strength",
    "deployment",
    "ega",
    "errors",
    "estimate_orientation_pdf",
    "evaluate_coverage",
    "focus_criterion",
    "focus_depths",
    "fov_criterion",
    "fov_half_angles",
    "frobenius_error",
    "generate_random",
    "generate_uniform",
    "geometry",
    "landmark_normal",
    "load_deployment",
    "load_samples_csv",
    "load_scene",
    "load_trajectory",
    "local_to_world",
    "make_scene",
    "metrics",
    "normal_to_angles",
    "nple_probability",
    "observer",
    "occlusion_criterion",
    "pdf_estimation",
    "pose_to_se3",
    "random_interval_resample",
    "random_walk_trajectory",
    "resolution_criterion",
    "rotation_from_angles",
    "save_deployment",
    "se3_inverse",
    "se3_step",
    "standard_walls",
    "strengths_grid",
    "twist",
    "world_to_local",
    "wrap_angle",
]
