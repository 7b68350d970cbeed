"""Shared fixtures: packaged room configs, a small unit-scale observer scene,
and the paired desk-scale search runs reused by several acceptance checks."""

from pathlib import Path

import pytest

import landmark_coverage as lc
from landmark_coverage import ega

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"

DESK_SEEDS = tuple(range(10))
DESK_COUNT = 12
DESK_GENERATIONS = 100


@pytest.fixture(scope="session")
def table3_scene():
    return lc.load_scene(CONFIG_DIR / "table3_room.json")


@pytest.fixture(scope="session")
def desk_scene():
    return lc.load_scene(CONFIG_DIR / "desk_room.json")


@pytest.fixture(scope="session")
def experiment_scene():
    return lc.load_scene(CONFIG_DIR / "experiment_room.json")


def build_tiny_scene():
    """A unit-scale room where the observer gains are well conditioned."""
    intrinsics = lc.CameraIntrinsics(
        f=5.0,
        s_u=0.0058,
        s_v=0.0058,
        o_u=800,
        o_v=600,
        width=1600,
        height=1200,
        d_a=1.0,
        d_s=200.0,
    )
    params = lc.CoverageParams(thold=0.0, delta=4.0, n=1)
    return lc.make_scene(
        (8.0, 8.0, 6.0),
        (4.0, 4.0, 3.0),
        (3, 3, 2),
        intrinsics=intrinsics,
        params=params,
        thold_p=0.5,
        nu_default=1.0,
        n_yaw=12,
        n_pitch=6,
    )


def build_tiny_deployment(scene):
    """One inward-facing plate at the center of every wall."""
    landmarks = []
    for wall in scene.walls:
        rho, eta = lc.normal_to_angles(wall.normal)
        landmarks.append(lc.Landmark(wall.point(0.5, 0.5), rho=rho, eta=eta, nu=1.0))
    return lc.Deployment(landmarks)


@pytest.fixture(scope="session")
def tiny_scene():
    return build_tiny_scene()


@pytest.fixture(scope="session")
def tiny_deployment(tiny_scene):
    return build_tiny_deployment(tiny_scene)


@pytest.fixture(scope="session")
def desk_runs(desk_scene):
    """Both search variants on the desk scene for ten seeds.

    Expensive (a couple of minutes), so it runs once per session and the
    monotonicity, ordering, and observer-payoff checks all share it.
    """
    runs = {"ega": {}, "sga": {}}
    for seed in DESK_SEEDS:
        params = ega.EgaParams(
            m=30,
            q=7,
            upsilon_min=13,
            upsilon_max=40,
            psi=0.1,
            iterations=DESK_GENERATIONS,
            seed=seed,
        )
        for mode in ("ega", "sga"):
            best, history = ega.run(desk_scene, params, count=DESK_COUNT, mode=mode)
            runs[mode][seed] = (best, history)
    return runs
