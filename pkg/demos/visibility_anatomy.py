"""Dissect the four visibility criteria for one camera and one plate.

Walks a plate away from the camera along the optical axis and prints which
gate (field of view, focus window, occlusion, resolution threshold) admits
or rejects it at each range, then shows how a second plate starts to block
the sight line as it slides in front.
"""
from __future__ import annotations

import math

import landmark_coverage as lc
from landmark_coverage.coverage import (
    CoverageParams,
    coverage_strength,
    focus_depths,
    fov_criterion,
    focus_criterion,
    occlusion_criterion,
)
from landmark_coverage.geometry import CameraIntrinsics, Landmark, Pose6

INTRINSICS = CameraIntrinsics(
    f=5.0, s_u=0.0058, s_v=0.0058, o_u=800.0, o_v=600.0,
    width=1600, height=1200, d_a=10.0, d_s=1778.0,
)
PARAMS = CoverageParams(thold=0.2, delta=4.0, n=1)

# the camera sits at the origin looking along +y, so a useful plate
# faces back along -y
FACING_RHO, FACING_ETA = lc.normal_to_angles([0.0, -1.0, 0.0])


def main():
    near, far = focus_depths(INTRINSICS, PARAMS.delta)
    print(f"focus window: {near:.1f} mm to {far:.1f} mm")
    top, bottom, left, right = lc.fov_half_angles(INTRINSICS)
    print(f"field of view half-angles: vertical {math.degrees(top):.1f} deg, "
          f"horizontal {math.degrees(left):.1f} deg")

    pose = Pose6([0.0, 0.0, 0.0])
    print(f"\n{'range_cm':>9} {'fov':>4} {'focus':>6} {'strength':>9}  verdict")
    for range_cm in (50, 90, 120, 200, 432, 433, 600, 1100):
        plate = Landmark([0.0, float(range_cm), 0.0], rho=FACING_RHO, eta=FACING_ETA)
        plates = [plate]
        fov = fov_criterion(plate, pose, INTRINSICS)
        foc = focus_criterion(plate, pose, INTRINSICS, PARAMS.delta)
        s = coverage_strength(0, plates, pose, INTRINSICS, PARAMS.delta)
        verdict = "covered" if s >= PARAMS.thold else "not covered"
        print(f"{range_cm:>9} {fov:>4} {foc:>6} {s:>9.4f}  {verdict}")
    crossing = INTRINSICS.magnification / (PARAMS.thold * INTRINSICS.s_u)
    print(f"(the resolution term crosses thold={PARAMS.thold} at "
          f"{crossing:.1f} mm, between the 432 and 433 cm rows)")

    # a nearer plate slides sideways into the line of sight
    target = Landmark([0.0, 300.0, 0.0], rho=FACING_RHO, eta=FACING_ETA, nu=10.0)
    print(f"\nblocker at y=150 cm sliding toward the sight line "
          f"(target nu={target.nu} cm):")
    for offset_cm in (40.0, 20.0, 11.0, 10.0, 5.0, 0.5):
        blocker = Landmark([offset_cm, 150.0, 0.0], rho=FACING_RHO, eta=FACING_ETA)
        ok = occlusion_criterion(0, [target, blocker], pose.position)
        print(f"  lateral offset {offset_cm:>5.1f} cm -> "
              f"{'clear' if ok else 'blocked'}")


if __name__ == "__main__":
    main()
