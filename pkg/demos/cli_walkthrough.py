"""Drive the command line workflow end to end in a scratch directory.

generate -> optimize -> analyze -> simulate -> estimate-pdf, then rerun the
analyze step and check the outputs are byte-for-byte identical.
"""
from __future__ import annotations

import filecmp
import json
import math
import tempfile
from pathlib import Path

import numpy as np

from landmark_coverage.cli import main as cli

ROOT = Path(__file__).resolve().parents[1]
SCENE = str(ROOT / "configs" / "desk_room.json")


def run(argv):
    print(f"$ landmark-coverage {' '.join(argv)}")
    code = cli(argv)
    assert code == 0, f"exit code {code}"


def main():
    with tempfile.TemporaryDirectory() as tmp:
        work = Path(tmp)

        run(["generate", "--scene", SCENE, "--count", "12", "--kind", "random",
             "--seed", "3", "--out-dir", str(work / "baseline")])

        run(["optimize", "--scene", SCENE,
             "--initial", str(work / "baseline" / "deployment.json"),
             "--m", "20", "--q", "5", "--iterations", "15", "--seed", "0",
             "--out-dir", str(work / "search")])

        run(["analyze", "--scene", SCENE,
             "--deployment", str(work / "search" / "deployment.json"),
             "--out-dir", str(work / "report")])
        metrics = json.loads((work / "report" / "metrics.json").read_text())
        print(f"  qualified ratio after search: {metrics['qualified_ratio']:.4f}")

        trajectory = work / "trajectory.json"
        trajectory.write_text(json.dumps({
            "schema": 1,
            "random_walk": {"duration_s": 8.0, "seed": 2, "margin_cm": 10.0,
                            "lin_speed_cm_s": 40.0, "ang_speed_rad_s": 2.0,
                            "initial": {"position": [375.0, 250.0, 300.0],
                                        "yaw": 0.5}},
            "initial_estimate": {"position": [372.0, 251.0, 298.0], "yaw": 0.55},
        }))
        run(["simulate", "--scene", SCENE,
             "--deployment", str(work / "search" / "deployment.json"),
             "--trajectory", str(trajectory), "--k-i", "2e-5",
             "--out-dir", str(work / "sim")])

        samples = work / "angles.csv"
        rng = np.random.default_rng(0)
        rows = ["t,alpha,beta"]
        for i in range(30_000):
            rows.append(f"{i * 0.01:.17g},{rng.uniform(-math.pi, math.pi):.17g},"
                        f"{rng.uniform(-math.pi / 2, math.pi / 2):.17g}")
        samples.write_text("\n".join(rows) + "\n")
        run(["estimate-pdf", "--samples", str(samples), "--mean-gap", "0.1",
             "--out-dir", str(work / "density")])

        run(["analyze", "--scene", SCENE,
             "--deployment", str(work / "search" / "deployment.json"),
             "--out-dir", str(work / "report_again")])
        identical = all(
            filecmp.cmp(work / "report" / name, work / "report_again" / name,
                        shallow=False)
            for name in ("coverage.csv", "metrics.json", "manifest.json")
        )
        print(f"  rerun byte-identical: {identical}")
        assert identical


if __name__ == "__main__":
    main()
