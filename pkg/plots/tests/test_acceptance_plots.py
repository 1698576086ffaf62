"""Secondary acceptance: render every figure kind from real artifacts.

The artifacts are produced by invoking the experiment harness through its
command line interface (the only coupling between the two packages), at
a scale small enough to keep this suite fast.
"""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from guideplots import PlotSpec, render


def _run_harness(subcommand: str, config: dict, out_dir: Path):
    conf = out_dir.parent / f"{subcommand}-config.json"
    conf.write_text(json.dumps(config))
    proc = subprocess.run(
        [sys.executable, "-m", "mixguide.cli", subcommand,
         "--config", str(conf), "--out", str(out_dir)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return out_dir


@pytest.fixture(scope="module")
def real_artifacts(tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")
    sched = {"timesteps": 150, "beta_min": 7e-4, "beta_max": 0.1}
    dirs = {}
    dirs["fig1d"] = _run_harness(
        "fig1d",
        {
            "schedule": sched,
            "n_samples": 400,
            "seed": 1,
            "schemes": ["none", "cfg", "np", "dng_exact", "dng_tracked"],
            "trace_chains": 4,
        },
        root / "fig1d",
    )
    dirs["posterior"] = _run_harness(
        "posterior-check",
        {"schedule": sched, "n_samples": 250, "seed": 2},
        root / "posterior",
    )
    dirs["sweep"] = _run_harness(
        "class-removal",
        {
            "schedule": sched,
            "n_samples": 300,
            "seed": 3,
            "sweep": {"np": [0.5, 1.0], "dng_tracked": [2.0, 5.0]},
        },
        root / "sweep",
    )
    dirs["fields"] = _run_harness(
        "fields2d",
        {
            "schedule": sched,
            "seed": 4,
            "grid": {"x_lo": -3.0, "x_hi": 3.0, "nx": 13, "y_lo": -2.5, "y_hi": 3.5, "ny": 13},
        },
        root / "fields",
    )
    dirs["lambda-trace"] = dirs["fig1d"]
    return dirs


@pytest.mark.parametrize("kind", ["fig1d", "sweep", "posterior", "lambda-trace", "fields"])
def test_criterion_10_render_real_artifacts(real_artifacts, tmp_path, kind):
    out = tmp_path / f"{kind}.png"
    render(PlotSpec(in_dir=real_artifacts[kind], kind=kind, out_path=out))
    assert out.stat().st_size > 0
    print(f"\nACCEPTANCE 10 PASS - rendered {kind} from harness artifacts")
