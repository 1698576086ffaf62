import numpy as np
import pytest

META = "# mixguide kind=test seed=0 created=2024-01-01T00:00:00+00:00"


def _write(path, header, rows):
    lines = [META, header] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


@pytest.fixture()
def artifact_dir(tmp_path):
    """A directory holding one small synthetic artifact of every schema."""
    rng = np.random.default_rng(1)

    for scheme in ("none", "dng_exact"):
        rows = [(i, x) for i, x in enumerate(rng.normal(size=40))]
        _write(tmp_path / f"samples_{scheme}.csv", "chain,x0_0", rows)
    xs = np.linspace(-4, 4, 21)
    _write(
        tmp_path / "density_full.csv",
        "x,density",
        [(x, np.exp(-x * x / 2) / np.sqrt(2 * np.pi)) for x in xs],
    )
    _write(
        tmp_path / "density_allowed.csv",
        "x,density",
        [(x, np.exp(-x * x / 2) / np.sqrt(2 * np.pi)) for x in xs],
    )

    sweep_rows = []
    for scheme in ("np", "dng_tracked"):
        for lam in (0.5, 1.0, 2.0):
            sweep_rows.append((scheme, lam, 0.9 + 0.03 * lam, 1.0 / lam, 100, 0))
    _write(
        tmp_path / "sweep.csv",
        "scheme,lambda0,safety,kl_to_ideal,n_samples,seed",
        sweep_rows,
    )

    post_rows = []
    for t in range(1, 21):
        for group in ("forbidden", "allowed"):
            base = 0.8 if group == "forbidden" else 0.1
            post_rows.append((t, group, base + 0.01 * t, base + 0.011 * t))
    _write(tmp_path / "posterior.csv", "t,group,tracked_mean,exact_mean", post_rows)

    trace_rows = []
    for chain in range(3):
        for t in range(1, 21):
            trace_rows.append((chain, t, 0.1 * chain + 0.01 * t, 0.3))
    _write(
        tmp_path / "lambda_traces_dng_tracked.csv",
        "chain,t,lambda,posterior",
        trace_rows,
    )

    pts = [(x, y) for x in np.linspace(-2, 2, 5) for y in np.linspace(-2, 2, 5)]
    for scheme in ("cfg", "np", "dng_exact"):
        for comp in ("uncond", "guidance", "total"):
            rows = [(x, y, -0.3 * x, -0.3 * y) for x, y in pts]
            _write(tmp_path / f"fields_{scheme}_{comp}.csv", "x,y,vx,vy", rows)

    return tmp_path
