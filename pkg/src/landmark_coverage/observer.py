"""Gradient pose observer on SE(3) driven by landmark position measurements.

The camera state is a rigid transform X whose rotation block holds the
camera axes expressed in the world frame and whose translation is the camera
position, so X^-1 maps world points into the camera frame. The observer
integrates the commanded body twist minus a correction built from the
mismatch between predicted and measured camera-frame landmark positions;
the correction is the twist-space projection of the error cost gradient.

Which landmarks feed the correction is controlled by the visibility mode:
'ideal' uses all of them, 'camera-model' keeps only those whose coverage
strength at the true pose reaches the measurement threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coverage import measurable, strengths_grid
from .deployment import Scene, _as_landmarks
from .errors import SchemaError, TrajectoryOutOfRegionError
from .geometry import (
    Pose6,
    is_rigid_transform,
    pose_to_se3,
    se3_inverse,
    se3_step,
    twist,
)


def landmark_homogeneous(landmarks) -> np.ndarray:
    """Landmark positions as homogeneous columns, shape (4, K)."""
    items = _as_landmarks(landmarks)
    out = np.ones((4, len(items)))
    for i, lm in enumerate(items):
        out[:3, i] = lm.position
    return out


def project_to_twist(a: np.ndarray) -> np.ndarray:
    """Orthogonal projection of a 4x4 matrix onto twist form."""
    a = np.asarray(a, dtype=float)
    out = np.zeros((4, 4))
    r = a[:3, :3]
    out[:3, :3] = (r - r.T) / 2.0
    out[:3, 3] = a[:3, 3]
    return out


def observer_cost(x_hat, x, c_h, k_i: float) -> float:
    """Half the gain-weighted squared mismatch of camera-frame landmarks."""
    err = (se3_inverse(x_hat) - se3_inverse(x)) @ c_h
    return 0.5 * k_i * float(np.sum(err * err))


def epsilon(x_hat, x, c_h, k_i: float) -> np.ndarray:
    """Correction twist: projected gradient of the mismatch cost."""
    if c_h.shape[1] == 0:
        return np.zeros((4, 4))
    inv_hat = se3_inverse(x_hat)
    c_hat = inv_hat @ c_h
    err = c_hat - se3_inverse(x) @ c_h
    return project_to_twist(-k_i * (err @ c_hat.T))


def outputs(x, c_h) -> np.ndarray:
    """Sum of camera-frame landmark coordinates, shape (4,)."""
    if c_h.shape[1] == 0:
        return np.zeros(4)
    return (se3_inverse(x) @ c_h).sum(axis=1)


def injection(x_hat, x, c_h, k0: float) -> np.ndarray:
    """Rank-one output-feedback term built from the summed outputs."""
    if k0 == 0.0 or c_h.shape[1] == 0:
        return np.zeros((4, 4))
    c_hat = se3_inverse(x_hat) @ c_h
    y_hat = c_hat.sum(axis=1)
    y = outputs(x, c_h)
    c_bar = y_hat / c_h.shape[1]
    return k0 * project_to_twist(np.outer(y_hat - y, c_bar))


@dataclass
class ObserverConfig:
    k_i: float = 1.0
    k0: float = 0.0
    dt: float = 0.01
    visibility: str = "ideal"
    use_estimate_for_visibility: bool = False

    def __post_init__(self):
        if not (self.k_i >= 0 and math.isfinite(self.k_i)):
            raise ValueError("gain k_i must be finite and non-negative")
        if not math.isfinite(self.k0):
            raise ValueError("gain k0 must be finite")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError("dt must be a positive time step")
        if self.visibility not in ("ideal", "camera-model"):
            raise ValueError("visibility must be 'ideal' or 'camera-model'")


def observer_step(x_hat, x, u, c_vis, config: ObserverConfig) -> np.ndarray:
    """One integration step of the estimate under twist u."""
    correction = epsilon(x_hat, x, c_vis, config.k_i) + injection(
        x_hat, x, c_vis, config.k0
    )
    return se3_step(x_hat, u - correction, config.dt)


@dataclass(eq=False)
class TrajectorySpec:
    """Piecewise-constant body twists applied from an initial pose."""

    initial: np.ndarray
    segments: list[tuple[float, np.ndarray]]

    def __post_init__(self):
        self.initial = np.asarray(self.initial, dtype=float)
        if not is_rigid_transform(self.initial, tol=1e-8):
            raise ValueError("initial pose must be a rigid transform")
        if not self.segments:
            raise ValueError("at least one trajectory segment is required")
        cleaned = []
        for duration, u in self.segments:
            if not (duration > 0 and math.isfinite(duration)):
                raise ValueError("segment durations must be positive")
            cleaned.append((float(duration), np.asarray(u, dtype=float)))
        self.segments = cleaned

    @property
    def duration(self) -> float:
        return math.fsum(d for d, _ in self.segments)

    def step_twists(self, dt: float) -> list[np.ndarray]:
        steps = []
        for duration, u in self.segments:
            steps.extend([u] * max(1, round(duration / dt)))
        return steps


@dataclass(eq=False)
class ObserverTrace:
    """Per-step record of a simulated run; index 0 is the initial state."""

    t: np.ndarray
    x: np.ndarray
    x_hat: np.ndarray
    er: np.ndarray
    visible: np.ndarray
    qualified: np.ndarray

    @property
    def qualified_time_ratio(self) -> float:
        return float(np.mean(self.qualified)) if self.qualified.size else 0.0

    @property
    def final_error(self) -> float:
        return float(self.er[-1])


def pose_strengths(x, landmarks, intrinsics, delta: float) -> np.ndarray:
    """Coverage strengths of all landmarks seen from the pose X."""
    x = np.asarray(x, dtype=float)
    r_c = np.ascontiguousarray(x[:3, :3].T)
    return strengths_grid(
        x[:3, 3][None, :], r_c[None, :, :], _as_landmarks(landmarks), intrinsics, delta
    )[0, 0]


def simulate(
    scene: Scene,
    deployment,
    trajectory: TrajectorySpec,
    config: ObserverConfig,
    x_hat0=None,
) -> ObserverTrace:
    """Integrate the true pose and the observer estimate along a trajectory.

    Every sampled camera position must stay inside the reachable region;
    leaving it raises TrajectoryOutOfRegionError.
    """
    landmarks = _as_landmarks(deployment)
    c_h = landmark_homogeneous(landmarks)
    k = c_h.shape[1]
    n = scene.params.n
    x = np.array(trajectory.initial, dtype=float)
    x_hat = np.array(trajectory.initial if x_hat0 is None else x_hat0, dtype=float)
    if not is_rigid_transform(x_hat, tol=1e-8):
        raise ValueError("initial estimate must be a rigid transform")
    steps = trajectory.step_twists(config.dt)
    count = len(steps) + 1

    t = np.arange(count) * config.dt
    xs = np.empty((count, 4, 4))
    x_hats = np.empty((count, 4, 4))
    er = np.empty(count)
    visible = np.zeros((count, k), dtype=bool)
    qualified = np.zeros(count, dtype=bool)

    for i in range(count):
        position = x[:3, 3]
        if not scene.contains_reachable(position):
            raise TrajectoryOutOfRegionError(
                f"camera position {position.tolist()} left the reachable region at t={t[i]:.4f}"
            )
        xs[i] = x
        x_hats[i] = x_hat
        diff = x_hat - x
        er[i] = float(np.sum(diff * diff))
        if config.visibility == "ideal":
            mask = np.ones(k, dtype=bool)
        else:
            source = x_hat if config.use_estimate_for_visibility else x
            strengths = pose_strengths(
                source, landmarks, scene.intrinsics, scene.params.delta
            )
            mask = measurable(strengths, scene.params.thold)
        visible[i] = mask
        qualified[i] = int(mask.sum()) >= n
        if i < len(steps):
            u = steps[i]
            x_hat = observer_step(x_hat, x, u, c_h[:, mask], config)
            x = se3_step(x, u, config.dt)

    return ObserverTrace(t=t, x=xs, x_hat=x_hats, er=er, visible=visible, qualified=qualified)


def random_walk_trajectory(
    scene: Scene,
    duration: float,
    seed: int,
    segment_duration: float = 0.5,
    lin_speed: float = 30.0,
    ang_speed: float = 0.6,
    initial=None,
    margin: float = 0.0,
    dt: float = 0.01,
) -> TrajectorySpec:
    """A containment-checked random walk through the reachable region.

    Candidate segments are rejected until their integrated positions stay
    at least margin inside the region; after repeated rejections the segment
    steers straight toward the region center, which always stays inside.
    When no initial pose is given the walk starts at the region center with
    a seed-drawn orientation, so a batch of seeds samples the same yaw and
    pitch space the coverage probability integrates over.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    if segment_duration <= 0:
        raise ValueError("segment duration must be positive")
    rng = np.random.default_rng(seed)
    if initial is None:
        yaw = float(rng.uniform(-np.pi, np.pi))
        pitch = float(rng.uniform(-np.pi / 2.0, np.pi / 2.0))
        x0 = pose_to_se3(Pose6(scene.center, yaw=yaw, pitch=pitch))
    else:
        x0 = np.asarray(initial, dtype=float)
    lo, hi = scene.reachable_bounds()
    lo = lo + margin
    hi = hi - margin
    if np.any(lo >= hi):
        raise ValueError("margin leaves no room inside the reachable region")

    def segment_ok(x, u, n_steps):
        cur = x
        for _ in range(n_steps):
            cur = se3_step(cur, u, dt)
            p = cur[:3, 3]
            if np.any(p < lo) or np.any(p > hi):
                return None
        return cur

    segments = []
    x = x0
    elapsed = 0.0
    while elapsed < duration - 1e-9:
        seg = min(segment_duration, duration - elapsed)
        n_steps = max(1, round(seg / dt))
        chosen = None
        for _ in range(40):
            axis = rng.normal(size=3)
            norm = float(np.linalg.norm(axis))
            omega = (axis / norm) * float(rng.uniform(0.0, ang_speed)) if norm > 0 else np.zeros(3)
            direction = rng.normal(size=3)
            norm = float(np.linalg.norm(direction))
            linear = (direction / norm) * float(rng.uniform(0.0, lin_speed)) if norm > 0 else np.zeros(3)
            u = twist(omega, linear)
            end = segment_ok(x, u, n_steps)
            if end is not None:
                chosen = (u, end)
                break
        if chosen is None:
            r_c = x[:3, :3].T
            to_center = scene.center - x[:3, 3]
            dist = float(np.linalg.norm(to_center))
            if dist == 0.0:
                u = twist(np.zeros(3), np.zeros(3))
            else:
                speed = min(lin_speed, dist / seg)
                u = twist(np.zeros(3), r_c @ (to_center / dist) * speed)
            end = segment_ok(x, u, n_steps)
            if end is None:
                raise TrajectoryOutOfRegionError("random walk could not stay inside the region")
            chosen = (u, end)
        segments.append((seg, chosen[0]))
        x = chosen[1]
        elapsed += seg
    return TrajectorySpec(initial=x0, segments=segments)


# ---------------------------------------------------------------------------
# Trajectory files


def _pose_from_json(doc: dict, context: str) -> np.ndarray:
    if not isinstance(doc, dict):
        raise SchemaError(f"{context}: expected an object")
    if "position" not in doc:
        raise SchemaError(f"{context}: missing required key 'position'")
    position = doc["position"]
    if not isinstance(position, list) or len(position) != 3:
        raise SchemaError(f"{context}: 'position' must be an [x, y, z] array")
    try:
        pose = Pose6(
            [float(v) for v in position],
            yaw=float(doc.get("yaw", 0.0)),
            pitch=float(doc.get("pitch", 0.0)),
            roll=float(doc.get("roll", 0.0)),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{context}: {exc}") from exc
    return pose_to_se3(pose)


def trajectory_from_json(doc: dict, scene: Scene, context: str = "trajectory"):
    """(TrajectorySpec, initial estimate or None) from a parsed document."""
    if not isinstance(doc, dict):
        raise SchemaError(f"{context}: top level must be an object")
    if doc.get("schema") != 1:
        raise SchemaError(f"{context}: unsupported schema version {doc.get('schema')!r}")
    x_hat0 = None
    if "initial_estimate" in doc:
        x_hat0 = _pose_from_json(doc["initial_estimate"], f"{context}.initial_estimate")
    if "random_walk" in doc:
        spec = doc["random_walk"]
        if not isinstance(spec, dict):
            raise SchemaError(f"{context}.random_walk: expected an object")
        for key in ("duration_s", "seed"):
            if key not in spec:
                raise SchemaError(f"{context}.random_walk: missing required key '{key}'")
        try:
            walk = random_walk_trajectory(
                scene,
                duration=float(spec["duration_s"]),
                seed=int(spec["seed"]),
                segment_duration=float(spec.get("segment_duration_s", 0.5)),
                lin_speed=float(spec.get("lin_speed_cm_s", 30.0)),
                ang_speed=float(spec.get("ang_speed_rad_s", 0.6)),
                initial=_pose_from_json(spec["initial"], f"{context}.random_walk.initial")
                if "initial" in spec
                else None,
                margin=float(spec.get("margin_cm", 0.0)),
                dt=float(spec.get("dt_s", 0.01)),
            )
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{context}.random_walk: {exc}") from exc
        return walk, x_hat0
    if "initial" not in doc or "segments" not in doc:
        raise SchemaError(f"{context}: requires 'initial' and 'segments' (or 'random_walk')")
    initial = _pose_from_json(doc["initial"], f"{context}.initial")
    raw = doc["segments"]
    if not isinstance(raw, list) or not raw:
        raise SchemaError(f"{context}: 'segments' must be a non-empty array")
    segments = []
    for i, entry in enumerate(raw):
        where = f"{context}.segments[{i}]"
        if not isinstance(entry, dict) or "duration_s" not in entry:
            raise SchemaError(f"{where}: expected an object with 'duration_s'")
        omega = entry.get("omega_rad_s", [0.0, 0.0, 0.0])
        vel = entry.get("velocity_cm_s", [0.0, 0.0, 0.0])
        if not isinstance(omega, list) or len(omega) != 3:
            raise SchemaError(f"{where}: 'omega_rad_s' must be a 3-array")
        if not isinstance(vel, list) or len(vel) != 3:
            raise SchemaError(f"{where}: 'velocity_cm_s' must be a 3-array")
        try:
            segments.append(
                (
                    float(entry["duration_s"]),
                    twist([float(w) for w in omega], [float(v) for v in vel]),
                )
            )
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{where}: {exc}") from exc
    try:
        spec = TrajectorySpec(initial=initial, segments=segments)
    except ValueError as exc:
        raise SchemaError(f"{context}: {exc}") from exc
    return spec, x_hat0


def load_trajectory(path, scene: Scene):
    from .deployment import load_json

    return trajectory_from_json(load_json(path, "trajectory"), scene, context=f"trajectory {path}")
