"""Visibility criteria, coverage strength, and multiple-coverage probability.

A landmark is covered by a camera pose when four criteria hold at once:
adequate image resolution, containment in the field of view, containment in
the depth-of-field, and an unobstructed front-side line of sight.  Coverage
strength is the product of the four terms (the binary ones gate the
resolution value).  Sweeping the camera orientation over a yaw/pitch grid
turns per-landmark coverage into spherical caps, and integrating an
orientation density over the cells where at least ``n`` caps overlap gives
the n-fold coverage probability of a position.

The scalar criteria are the reference semantics.  The batched kernel at the
bottom evaluates the same expressions with the same operation ordering, so
both paths produce bitwise identical strengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import (
    CameraIntrinsics,
    Landmark,
    Pose6,
    cm_to_mm,
    landmark_normal,
    rotation_from_angles,
    world_to_local,
)


@dataclass
class CoverageParams:
    """Coverage thresholds: strength cutoff, blur tolerance (px), fold count."""

    thold: float
    delta: float
    n: int

    def __post_init__(self):
        if not (self.thold >= 0 and math.isfinite(self.thold)):
            raise ValueError("thold must be finite and non-negative")
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ValueError("delta must be a positive pixel count")
        if self.n < 0:
            raise ValueError("n must be non-negative")


# ---------------------------------------------------------------------------
# Orientation grid and orientation density


@dataclass(eq=False)
class OrientationGrid:
    """Discrete camera orientations: yaw samples x pitch samples.

    Yaw samples are cell left edges starting at -pi; pitch samples are cell
    centers inside [-pi/2, pi/2].  Cell (i, j) has flat index
    ``i * n_pitch + j``.
    """

    yaw: np.ndarray
    pitch: np.ndarray

    def __post_init__(self):
        self.yaw = np.asarray(self.yaw, dtype=float)
        self.pitch = np.asarray(self.pitch, dtype=float)
        if self.yaw.ndim != 1 or self.yaw.size == 0:
            raise ValueError("yaw samples must be a non-empty 1-d array")
        if self.pitch.ndim != 1 or self.pitch.size == 0:
            raise ValueError("pitch samples must be a non-empty 1-d array")
        if np.any(np.diff(self.yaw) <= 0) or np.any(np.diff(self.pitch) <= 0):
            raise ValueError("orientation samples must be strictly increasing")
        if self.yaw[0] < -math.pi or self.yaw[-1] >= math.pi:
            raise ValueError("yaw samples must lie in [-pi, pi)")
        if self.pitch[0] < -math.pi / 2 or self.pitch[-1] > math.pi / 2:
            raise ValueError("pitch samples must lie in [-pi/2, pi/2]")
        self._rotations = None

    @classmethod
    def from_cells(cls, n_yaw: int, n_pitch: int) -> "OrientationGrid":
        if n_yaw < 1 or n_pitch < 1:
            raise ValueError("cell counts must be at least 1")
        yaw = -math.pi + np.arange(n_yaw) * (2.0 * math.pi / n_yaw)
        pitch = -math.pi / 2 + (np.arange(n_pitch) + 0.5) * (math.pi / n_pitch)
        return cls(yaw, pitch)

    @classmethod
    def from_steps(cls, yaw_step: float, pitch_step: float) -> "OrientationGrid":
        n_yaw = round(2.0 * math.pi / yaw_step)
        n_pitch = round(math.pi / pitch_step)
        return cls.from_cells(n_yaw, n_pitch)

    @property
    def n_yaw(self) -> int:
        return self.yaw.size

    @property
    def n_pitch(self) -> int:
        return self.pitch.size

    @property
    def n_cells(self) -> int:
        return self.yaw.size * self.pitch.size

    def cell_angles(self, index: int) -> tuple[float, float]:
        i, j = divmod(index, self.n_pitch)
        return float(self.yaw[i]), float(self.pitch[j])

    def rotations(self) -> np.ndarray:
        """World-to-camera rotations for every cell, shape (n_cells, 3, 3)."""
        if self._rotations is None:
            mats = np.empty((self.n_cells, 3, 3))
            for g in range(self.n_cells):
                a, b = self.cell_angles(g)
                mats[g] = rotation_from_angles(a, b, 0.0)
            self._rotations = mats
        return self._rotations


_WEIGHT_SUM_TOL = 1e-9


@dataclass(eq=False)
class OrientationPdf:
    """Probability mass per orientation cell, flat-indexed like the grid."""

    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.ndim != 1 or self.weights.size == 0:
            raise ValueError("weights must be a non-empty 1-d array")
        if np.any(self.weights < 0):
            raise ValueError("weights must be non-negative")
        total = math.fsum(self.weights.tolist())
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1, got {total}")

    @classmethod
    def uniform(cls, grid: OrientationGrid) -> "OrientationPdf":
        g = grid.n_cells
        return cls(np.full(g, 1.0 / g))

    @classmethod
    def solid_angle(cls, grid: OrientationGrid) -> "OrientationPdf":
        """Weights proportional to each cell's solid angle on the sphere."""
        cos_pitch = np.cos(grid.pitch)
        w = np.repeat(cos_pitch[None, :], grid.n_yaw, axis=0).ravel()
        return cls(w / w.sum())


# ---------------------------------------------------------------------------
# Scalar visibility criteria


def focus_depths(intrinsics: CameraIntrinsics, delta: float) -> tuple[float, float]:
    """Near and far in-focus depths (mm) for a blur tolerance of ``delta`` px.

    The far depth is infinite when the denominator is non-positive
    (everything beyond the near depth stays sharp), which always happens for
    a lens focused at infinity.
    """
    if not (delta > 0 and math.isfinite(delta)):
        raise ValueError("delta must be a positive pixel count")
    coc = delta * min(intrinsics.s_u, intrinsics.s_v)
    f, d_a, d_s = intrinsics.f, intrinsics.d_a, intrinsics.d_s
    if intrinsics.infinite_focus:
        return d_a * f / coc, math.inf
    near = d_a * d_s * f / (d_a * f + coc * (d_s - f))
    denom_far = d_a * f - coc * (d_s - f)
    if denom_far <= 0:
        return near, math.inf
    return near, d_a * d_s * f / denom_far


def resolution_criterion(
    landmark: Landmark, camera_pose: Pose6, intrinsics: CameraIntrinsics
) -> float:
    """Image resolution of the landmark in px/mm; requires positive depth."""
    z = cm_to_mm(world_to_local(landmark.position, camera_pose)[2])
    if z <= 0:
        raise ValueError("resolution undefined for non-positive camera depth")
    return intrinsics.magnification / (z * max(intrinsics.s_u, intrinsics.s_v))


def fov_criterion(
    landmark: Landmark, camera_pose: Pose6, intrinsics: CameraIntrinsics
) -> int:
    """1 when the landmark projects inside the image on all sides."""
    s = world_to_local(landmark.position, camera_pose)
    x, y, z = float(s[0]), float(s[1]), float(s[2])
    if z <= 0:
        return 0
    r2 = x * x + y * y
    lim = z * intrinsics.min_fov_tan
    return 1 if r2 <= lim * lim else 0


def focus_criterion(
    landmark: Landmark,
    camera_pose: Pose6,
    intrinsics: CameraIntrinsics,
    delta: float,
) -> int:
    """1 when the landmark depth falls inside the depth-of-field."""
    z = cm_to_mm(world_to_local(landmark.position, camera_pose)[2])
    near, far = focus_depths(intrinsics, delta)
    return 1 if near <= z <= far else 0


def occlusion_criterion(k: int, landmarks: Sequence[Landmark], camera_position) -> int:
    """1 when landmark ``k`` shows its front side and no other plate blocks it.

    A plate ``j`` blocks when it sits strictly between camera and target and
    the sight line passes within the target's virtual diameter ``nu`` of it.
    Plates behind the target or at identical range never block.
    """
    target = landmarks[k]
    p = np.asarray(camera_position, dtype=float)
    wx = p[0] - target.position[0]
    wy = p[1] - target.position[1]
    wz = p[2] - target.position[2]
    nk = math.sqrt((wx * wx + wy * wy) + wz * wz)
    if nk == 0.0:
        raise ValueError("camera position coincides with the landmark")
    n = landmark_normal(target)
    facing = (n[0] * wx + n[1] * wy) + n[2] * wz
    if facing <= 0:
        return 0
    akx, aky, akz = -wx, -wy, -wz
    for j, other in enumerate(landmarks):
        if j == k:
            continue
        ajx = other.position[0] - p[0]
        ajy = other.position[1] - p[1]
        ajz = other.position[2] - p[2]
        dot = (ajx * akx + ajy * aky) + ajz * akz
        if dot <= 0:
            continue
        nj = math.sqrt((ajx * ajx + ajy * ajy) + ajz * ajz)
        if not nj < nk:
            continue
        c = dot / (nj * nk)
        s2 = 1.0 - c * c
        if s2 < 0.0:
            s2 = 0.0
        if nj * math.sqrt(s2) <= target.nu:
            return 0
    return 1


def coverage_strength(
    k: int,
    landmarks: Sequence[Landmark],
    camera_pose: Pose6,
    intrinsics: CameraIntrinsics,
    delta: float,
) -> float:
    """Product of the four criteria for landmark ``k``; 0 when any gate fails.

    The field-of-view gate runs first so the resolution term is only
    evaluated at positive depth.  Roll leaves every factor unchanged.
    """
    if fov_criterion(landmarks[k], camera_pose, intrinsics) == 0:
        return 0.0
    if focus_criterion(landmarks[k], camera_pose, intrinsics, delta) == 0:
        return 0.0
    if occlusion_criterion(k, landmarks, camera_pose.position) == 0:
        return 0.0
    return resolution_criterion(landmarks[k], camera_pose, intrinsics)


# ---------------------------------------------------------------------------
# Caps and coverage probability


@dataclass(eq=False)
class CapSet:
    """Per-landmark orientation masks at one camera position.

    ``masks[k, g]`` is True when landmark k's coverage strength at cell g
    reaches the threshold; ``nple`` marks cells where at least ``n`` masks
    overlap.
    """

    masks: np.ndarray
    n: int
    nple: np.ndarray

    def __post_init__(self):
        self.masks = np.asarray(self.masks, dtype=bool)
        self.nple = np.asarray(self.nple, dtype=bool)
        if self.masks.ndim != 2:
            raise ValueError("masks must be a (landmark, cell) matrix")
        if self.nple.shape != (self.masks.shape[1],):
            raise ValueError("nple mask length must match the cell count")
        if self.n < 0:
            raise ValueError("n must be non-negative")

    @property
    def counts(self) -> np.ndarray:
        return self.masks.sum(axis=0)


def _landmark_arrays(landmarks: Sequence[Landmark]):
    k = len(landmarks)
    positions = np.empty((k, 3))
    normals = np.empty((k, 3))
    nus = np.empty(k)
    for i, lm in enumerate(landmarks):
        positions[i] = lm.position
        normals[i] = landmark_normal(lm)
        nus[i] = lm.nu
    return positions, normals, nus


def strengths_grid(
    points: np.ndarray,
    rotations: np.ndarray,
    landmarks: Sequence[Landmark],
    intrinsics: CameraIntrinsics,
    delta: float,
) -> np.ndarray:
    """Coverage strengths for every (position, rotation, landmark) triple.

    ``points`` is (B, 3) in cm, ``rotations`` is (G, 3, 3) world-to-camera.
    Returns (B, G, K).  Expressions and operation order mirror the scalar
    criteria exactly; a camera position coinciding with a landmark yields
    strength 0 instead of the scalar path's error.
    """
    points = np.asarray(points, dtype=float)
    B = points.shape[0]
    G = rotations.shape[0]
    K = len(landmarks)
    if K == 0:
        return np.zeros((B, G, 0))
    positions, normals, nus = _landmark_arrays(landmarks)

    d = positions[None, :, :] - points[:, None, :]  # (B, K, 3) landmark - camera
    dx = d[:, None, :, 0]
    dy = d[:, None, :, 1]
    dz = d[:, None, :, 2]
    r = rotations[None, :, :, :]
    x = (r[:, :, 0, 0, None] * dx + r[:, :, 0, 1, None] * dy) + r[:, :, 0, 2, None] * dz
    y = (r[:, :, 1, 0, None] * dx + r[:, :, 1, 1, None] * dy) + r[:, :, 1, 2, None] * dz
    z = (r[:, :, 2, 0, None] * dx + r[:, :, 2, 1, None] * dy) + r[:, :, 2, 2, None] * dz

    r2 = x * x + y * y
    lim = z * intrinsics.min_fov_tan
    in_fov = (z > 0) & (r2 <= lim * lim)

    z_mm = cm_to_mm(z)
    near, far = focus_depths(intrinsics, delta)
    in_focus = (z_mm >= near) & (z_mm <= far)

    s_max = max(intrinsics.s_u, intrinsics.s_v)
    with np.errstate(divide="ignore", invalid="ignore"):
        resolution = intrinsics.magnification / (z_mm * s_max)

    visible = in_fov & in_focus & _occlusion_grid(points, positions, normals, nus)[:, None, :]
    return np.where(visible, resolution, 0.0)


def _occlusion_grid(
    points: np.ndarray, positions: np.ndarray, normals: np.ndarray, nus: np.ndarray
) -> np.ndarray:
    """Orientation-independent occlusion pass for every (position, landmark)."""
    w = points[:, None, :] - positions[None, :, :]  # (B, K, 3) camera - landmark
    wx, wy, wz = w[..., 0], w[..., 1], w[..., 2]
    facing = (normals[None, :, 0] * wx + normals[None, :, 1] * wy) + normals[None, :, 2] * wz

    ax, ay, az = -wx, -wy, -wz  # landmark - camera
    ranges = np.sqrt((ax * ax + ay * ay) + az * az)  # (B, K)
    dots = (
        (ax[:, :, None] * ax[:, None, :] + ay[:, :, None] * ay[:, None, :])
        + az[:, :, None] * az[:, None, :]
    )  # (B, j, k)
    nj = ranges[:, :, None]
    nk = ranges[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        c = dots / (nj * nk)
    s2 = 1.0 - c * c
    s2 = np.maximum(s2, 0.0)
    with np.errstate(invalid="ignore"):
        perp = nj * np.sqrt(s2)
    blocked_pair = (dots > 0) & (nj < nk) & (perp <= nus[None, None, :])
    k_idx = np.arange(positions.shape[0])
    blocked_pair[:, k_idx, k_idx] = False
    blocked = blocked_pair.any(axis=1)
    return (facing > 0) & ~blocked


def measurable(strengths: np.ndarray, thold: float) -> np.ndarray:
    """Strength-threshold mask; a zero strength is never measurable."""
    if thold > 0:
        return strengths >= thold
    return strengths > 0.0


def coverage_caps(
    point,
    landmarks: Sequence[Landmark],
    grid: OrientationGrid,
    intrinsics: CameraIntrinsics,
    params: CoverageParams,
) -> CapSet:
    """Spherical-cap masks for one camera position over the orientation grid."""
    p = np.asarray(point, dtype=float).reshape(1, 3)
    strengths = strengths_grid(p, grid.rotations(), landmarks, intrinsics, params.delta)
    masks = measurable(strengths[0], params.thold).T  # (K, G)
    counts = masks.sum(axis=0)
    return CapSet(masks=masks, n=params.n, nple=counts >= params.n)


def nple_probability(caps: CapSet, pdf: OrientationPdf) -> float:
    """Probability that a random orientation covers at least n landmarks."""
    if pdf.weights.size != caps.nple.size:
        raise ValueError(
            f"pdf has {pdf.weights.size} cells but cap set has {caps.nple.size}"
        )
    return math.fsum(pdf.weights[caps.nple].tolist())


def cell_counts(
    points: np.ndarray,
    landmarks: Sequence[Landmark],
    grid: OrientationGrid,
    intrinsics: CameraIntrinsics,
    params: CoverageParams,
) -> np.ndarray:
    """Covered-landmark counts per (position, cell), shape (B, G)."""
    strengths = strengths_grid(
        np.asarray(points, dtype=float), grid.rotations(), landmarks, intrinsics, params.delta
    )
    return measurable(strengths, params.thold).sum(axis=2)


def coverage_probabilities(
    points: np.ndarray,
    landmarks: Sequence[Landmark],
    grid: OrientationGrid,
    pdf: OrientationPdf,
    intrinsics: CameraIntrinsics,
    params: CoverageParams,
) -> np.ndarray:
    """n-fold coverage probability for a batch of positions."""
    counts = cell_counts(points, landmarks, grid, intrinsics, params)
    weights = pdf.weights
    out = np.empty(counts.shape[0])
    for b in range(counts.shape[0]):
        out[b] = math.fsum(weights[counts[b] >= params.n].tolist())
    return out
