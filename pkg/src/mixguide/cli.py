"""Experiment harness: declarative JSON configs in, CSV/JSON artifacts out.

Four experiment kinds are supported:

  fig1d               per-scheme 1-D samples + histogram/KL summary
  posterior_check     tracked vs exact posterior curves at zero guidance
  class_removal_sweep safety / class-balance KL over a lambda0 grid
  fields2d            2-D guided-field decompositions on a grid

Every CSV starts with a timestamped metadata comment on line 1 (the only
non-reproducible byte in an artifact), followed by a header row naming
all columns; floats are serialized with 17 significant digits so rows
round-trip exactly.  Config parsing is strict: unknown keys are errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .guidance import GuidanceConfig, Scheme, SldConfig
from .metrics import (
    GridSpec2D,
    class_histogram,
    field_grid,
    histogram_1d,
    kl_to_ideal,
    posterior_tracking_error,
    safety,
)
from .mixture import GaussianMixture, MixtureSplit, log_density
from .presets import (
    class_removal_mixture,
    reference_mixture_1d,
    three_point_mixture_2d,
)
from .sampler import RunConfig, run_batch
from .schedule import NoiseSchedule, linear_schedule
from . import schedule as _schedule_defaults

OUT_DIR_ENV = "MIXGUIDE_OUT"

KINDS = ("fig1d", "posterior_check", "class_removal_sweep", "fields2d")

FIELD_COMPONENTS = ("uncond", "guidance", "total")
FIELD_SCHEMES = (Scheme.CFG, Scheme.NP, Scheme.DNG_EXACT)


class ConfigError(Exception):
    """Invalid experiment configuration; the message names the key."""


def _require(cond: bool, key: str, msg: str):
    if not cond:
        raise ConfigError(f"config key '{key}': {msg}")


def _check_keys(d: dict, allowed: set[str], where: str):
    unknown = set(d) - allowed
    if unknown:
        name = sorted(unknown)[0]
        path = f"{where}.{name}" if where else name
        raise ConfigError(f"unknown config key '{path}'")


def _number(d: dict, key: str, where: str, default=None):
    if key not in d:
        if default is None:
            raise ConfigError(f"missing config key '{where}.{key}'" if where else f"missing config key '{key}'")
        return default
    v = d[key]
    _require(isinstance(v, (int, float)) and not isinstance(v, bool), f"{where}.{key}" if where else key, "must be a number")
    return float(v)


def _integer(d: dict, key: str, where: str, default=None):
    if key not in d:
        if default is None:
            raise ConfigError(f"missing config key '{where}.{key}'" if where else f"missing config key '{key}'")
        return default
    v = d[key]
    _require(isinstance(v, int) and not isinstance(v, bool), f"{where}.{key}" if where else key, "must be an integer")
    return int(v)


@dataclass(frozen=True, eq=False)
class HistSpec:
    lo: float
    hi: float
    bins: int


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Parsed, validated configuration of one experiment run."""

    kind: str
    seed: int
    out_dir: Path
    n_samples: int
    split: MixtureSplit
    schedule: NoiseSchedule
    guidance: dict  # guidance kwargs without the scheme
    sld: SldConfig | None
    schemes: tuple[Scheme, ...] = ()
    hist: HistSpec | None = None
    trace_chains: int = 0
    sweep: dict = field(default_factory=dict)  # scheme -> list of lambda0
    grid: GridSpec2D | None = None
    field_t: int | None = None

    def guidance_for(self, scheme: Scheme, lambda0: float | None = None) -> GuidanceConfig:
        kwargs = dict(self.guidance)
        if lambda0 is not None:
            kwargs["lambda0"] = lambda0
        return GuidanceConfig(
            scheme=scheme,
            sld=self.sld if scheme is Scheme.SLD else None,
            **kwargs,
        )


def _default_split(kind: str) -> MixtureSplit:
    if kind == "fields2d":
        return three_point_mixture_2d()
    if kind == "class_removal_sweep":
        return class_removal_mixture()
    return reference_mixture_1d()


def _parse_mixture(raw: dict) -> MixtureSplit:
    _check_keys(raw, {"weights", "means", "variances", "forbidden"}, "mixture")
    for key in ("weights", "means", "variances", "forbidden"):
        _require(key in raw, f"mixture.{key}", "is required when mixture is given")
        _require(isinstance(raw[key], list) and raw[key], f"mixture.{key}", "must be a non-empty list")
    try:
        gmm = GaussianMixture(
            weights=np.asarray(raw["weights"], dtype=float),
            means=np.asarray(raw["means"], dtype=float),
            variances=np.asarray(raw["variances"], dtype=float),
        )
        return MixtureSplit(gmm, frozenset(int(i) for i in raw["forbidden"]))
    except ValueError as exc:
        raise ConfigError(f"config key 'mixture': {exc}") from exc


def _parse_schedule(raw: dict) -> NoiseSchedule:
    _check_keys(raw, {"timesteps", "beta_min", "beta_max"}, "schedule")
    T = _integer(raw, "timesteps", "schedule", _schedule_defaults.DEFAULT_T)
    bmin = _number(raw, "beta_min", "schedule", _schedule_defaults.DEFAULT_BETA_MIN)
    bmax = _number(raw, "beta_max", "schedule", _schedule_defaults.DEFAULT_BETA_MAX)
    try:
        return linear_schedule(T, bmin, bmax)
    except ValueError as exc:
        raise ConfigError(f"config key 'schedule': {exc}") from exc


def _parse_sld(raw: dict) -> SldConfig:
    _check_keys(
        raw, {"threshold", "scale", "momentum_beta", "momentum_scale", "warmup_steps"}, "guidance.sld"
    )
    try:
        return SldConfig(
            threshold=_number(raw, "threshold", "guidance.sld", 0.04),
            scale=_number(raw, "scale", "guidance.sld", 100.0),
            momentum_beta=_number(raw, "momentum_beta", "guidance.sld", 0.2),
            momentum_scale=_number(raw, "momentum_scale", "guidance.sld", 0.1),
            warmup_steps=_integer(raw, "warmup_steps", "guidance.sld", 10),
        )
    except ValueError as exc:
        raise ConfigError(f"config key 'guidance.sld': {exc}") from exc


def _parse_scheme(value, key: str) -> Scheme:
    try:
        return Scheme(value)
    except ValueError:
        raise ConfigError(
            f"config key '{key}': unknown scheme {value!r} "
            f"(expected one of {[s.value for s in Scheme]})"
        ) from None


def parse_config(raw: dict, kind: str) -> ExperimentConfig:
    """Validate a raw config dict for the given experiment kind."""
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind '{kind}'")
    _require(isinstance(raw, dict), "<root>", "config must be a JSON object")

    allowed = {"kind", "seed", "out_dir", "n_samples", "mixture", "schedule", "guidance"}
    per_kind = {
        "fig1d": {"schemes", "hist", "trace_chains"},
        "posterior_check": set(),
        "class_removal_sweep": {"sweep"},
        "fields2d": {"grid", "t"},
    }
    _check_keys(raw, allowed | per_kind[kind], "")

    if "kind" in raw and raw["kind"] != kind:
        raise ConfigError(f"config key 'kind': file says {raw['kind']!r} but the subcommand is '{kind}'")

    seed = _integer(raw, "seed", "", 0)
    _require(seed >= 0, "seed", "must be >= 0")

    split = _parse_mixture(raw["mixture"]) if "mixture" in raw else _default_split(kind)
    sched = _parse_schedule(raw.get("schedule", {}))

    graw = dict(raw.get("guidance", {}))
    _check_keys(
        graw, {"lambda0", "p0", "tau", "delta", "p_min", "p_max", "sld"}, "guidance"
    )
    sld = _parse_sld(graw.pop("sld")) if "sld" in graw else None
    default_lambda0 = 0.0 if kind == "posterior_check" else 1.0
    default_p0 = split.prior if kind == "posterior_check" else 0.25
    default_tau = 1.0 if kind == "posterior_check" else 0.25
    guidance = {
        "lambda0": _number(graw, "lambda0", "guidance", default_lambda0),
        "p0": _number(graw, "p0", "guidance", default_p0),
        "tau": _number(graw, "tau", "guidance", default_tau),
        "delta": _number(graw, "delta", "guidance", 0.0),
        "p_min": _number(graw, "p_min", "guidance", 1e-6),
        "p_max": _number(graw, "p_max", "guidance", 0.999),
    }
    try:
        GuidanceConfig(scheme=Scheme.NONE, **guidance)
    except ValueError as exc:
        raise ConfigError(f"config key 'guidance': {exc}") from exc
    if kind == "posterior_check":
        _require(guidance["lambda0"] == 0.0, "guidance.lambda0", "must be 0 for posterior_check")

    default_n = {
        "fig1d": 20000,
        "posterior_check": 2000,
        "class_removal_sweep": 2000,
        "fields2d": 1,
    }[kind]
    n_samples = _integer(raw, "n_samples", "", default_n)
    _require(n_samples >= 1, "n_samples", "must be >= 1")

    out_dir = Path(raw.get("out_dir", f"runs/{kind}"))

    schemes: tuple[Scheme, ...] = ()
    hist = None
    trace_chains = 0
    sweep: dict = {}
    grid = None
    field_t = None

    if kind == "fig1d":
        names = raw.get("schemes", ["none", "cfg", "np", "dng_exact"])
        _require(isinstance(names, list) and names, "schemes", "must be a non-empty list")
        schemes = tuple(_parse_scheme(s, "schemes") for s in names)
        if Scheme.SLD in schemes and sld is None:
            sld = SldConfig()
        hraw = dict(raw.get("hist", {}))
        _check_keys(hraw, {"lo", "hi", "bins"}, "hist")
        span = float(np.max(np.abs(split.full.means))) + 6.0
        hist = HistSpec(
            lo=_number(hraw, "lo", "hist", -span),
            hi=_number(hraw, "hi", "hist", span),
            bins=_integer(hraw, "bins", "hist", 200),
        )
        _require(hist.lo < hist.hi, "hist.lo", "must be below hist.hi")
        _require(hist.bins >= 1, "hist.bins", "must be >= 1")
        trace_chains = _integer(raw, "trace_chains", "", 5)
        _require(trace_chains >= 0, "trace_chains", "must be >= 0")
        _require(split.full.dim == 1, "mixture", "fig1d requires a 1-D mixture")
    elif kind == "posterior_check":
        _require(split.full.dim >= 1, "mixture", "posterior_check requires a mixture")
    elif kind == "class_removal_sweep":
        sraw = raw.get("sweep", {"np": [0.25, 0.5, 1.0, 2.0], "dng_tracked": [1.0, 2.0, 5.0, 10.0]})
        _require(isinstance(sraw, dict) and sraw, "sweep", "must be a non-empty object")
        for name, lams in sraw.items():
            scheme = _parse_scheme(name, "sweep")
            _require(
                scheme is not Scheme.NONE, f"sweep.{name}", "cannot sweep the unguided scheme"
            )
            _require(
                isinstance(lams, list) and len(lams) > 0,
                f"sweep.{name}",
                "must be a non-empty list of lambda0 values",
            )
            _require(
                all(isinstance(v, (int, float)) and not isinstance(v, bool) and v >= 0 for v in lams),
                f"sweep.{name}",
                "lambda0 values must be non-negative numbers",
            )
            sweep[scheme] = [float(v) for v in lams]
        if Scheme.SLD in sweep and sld is None:
            sld = SldConfig()
    else:  # fields2d
        _require(split.full.dim == 2, "mixture", "fields2d requires a 2-D mixture")
        graw2 = dict(raw.get("grid", {}))
        _check_keys(graw2, {"x_lo", "x_hi", "nx", "y_lo", "y_hi", "ny"}, "grid")
        try:
            grid = GridSpec2D(
                x_lo=_number(graw2, "x_lo", "grid", -4.0),
                x_hi=_number(graw2, "x_hi", "grid", 4.0),
                nx=_integer(graw2, "nx", "grid", 41),
                y_lo=_number(graw2, "y_lo", "grid", -3.0),
                y_hi=_number(graw2, "y_hi", "grid", 4.5),
                ny=_integer(graw2, "ny", "grid", 41),
            )
        except ValueError as exc:
            raise ConfigError(f"config key 'grid': {exc}") from exc
        field_t = _integer(raw, "t", "", _mid_diffusion_step(sched))
        _require(1 <= field_t <= sched.T, "t", f"must lie in [1, {sched.T}]")

    return ExperimentConfig(
        kind=kind,
        seed=seed,
        out_dir=out_dir,
        n_samples=n_samples,
        split=split,
        schedule=sched,
        guidance=guidance,
        sld=sld,
        schemes=schemes,
        hist=hist,
        trace_chains=trace_chains,
        sweep=sweep,
        grid=grid,
        field_t=field_t,
    )


def _mid_diffusion_step(schedule: NoiseSchedule) -> int:
    """Smallest t whose alpha_bar has dropped to 0.5 or below."""
    below = np.nonzero(schedule.alpha_bars <= 0.5)[0]
    return int(below[0]) + 1 if len(below) else schedule.T


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, Scheme):
        return v.value
    return str(v)


class _ArtifactWriter:
    """Writes artifacts into one directory; cleans up on failure."""

    def __init__(self, out_dir: Path, kind: str, seed: int):
        self.out_dir = out_dir
        self.kind = kind
        self.seed = seed
        self.written: list[Path] = []

    def meta_line(self) -> str:
        stamp = datetime.now(timezone.utc).isoformat()
        return f"# mixguide kind={self.kind} seed={self.seed} created={stamp}"

    def csv(self, name: str, header: list[str], rows) -> Path:
        path = self.out_dir / name
        lines = [self.meta_line(), ",".join(header)]
        lines.extend(",".join(_fmt(v) for v in row) for row in rows)
        path.write_text("\n".join(lines) + "\n")
        self.written.append(path)
        return path

    def json(self, name: str, payload: dict) -> Path:
        path = self.out_dir / name
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        self.written.append(path)
        return path

    def discard_all(self):
        for path in self.written:
            try:
                path.unlink()
            except OSError:
                pass


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    out_dir: Path
    files: list[Path]
    summary: dict


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run one experiment and write its artifact set; atomic on failure.

    Partial outputs are removed if any stage raises.
    """
    config.out_dir.mkdir(parents=True, exist_ok=True)
    writer = _ArtifactWriter(config.out_dir, config.kind, config.seed)
    runner = {
        "fig1d": _run_fig1d,
        "posterior_check": _run_posterior_check,
        "class_removal_sweep": _run_sweep,
        "fields2d": _run_fields2d,
    }[config.kind]
    try:
        rows, extra = runner(config, writer)
        summary = {
            "experiment": config.kind,
            "seed": config.seed,
            "n_samples": config.n_samples,
            "rows": rows,
            **extra,
        }
        summary["files"] = sorted(p.name for p in writer.written)
        writer.json("summary.json", summary)
    except Exception:
        writer.discard_all()
        raise
    return ExperimentResult(out_dir=config.out_dir, files=list(writer.written), summary=summary)


def _summary_row(scheme, lambda0, metric, value, n, seed) -> dict:
    return {
        "scheme": scheme.value if isinstance(scheme, Scheme) else str(scheme),
        "lambda0": float(lambda0),
        "metric": metric,
        "value": float(value),
        "n_samples": int(n),
        "seed": int(seed),
    }


def _sample_rows(samples: np.ndarray):
    return [(i, *map(float, xs)) for i, xs in enumerate(samples)]


def _run_fig1d(config: ExperimentConfig, writer: _ArtifactWriter):
    split, hist = config.split, config.hist
    d = split.full.dim
    header = ["chain"] + [f"x0_{j}" for j in range(d)]
    rows = []

    if np.all(split.full.variances > 0):
        xs = np.linspace(hist.lo, hist.hi, 513)
        for name, gmm in (("full", split.full), ("allowed", split.allowed)):
            dens = np.exp(log_density(gmm, xs[:, None]))
            writer.csv(
                f"density_{name}.csv",
                ["x", "density"],
                [(float(x), float(p)) for x, p in zip(xs, dens)],
            )

    for scheme in config.schemes:
        run = RunConfig(
            split=split,
            schedule=config.schedule,
            guidance=config.guidance_for(scheme),
            n_samples=config.n_samples,
            seed=config.seed,
        )
        samples = run_batch(run)
        writer.csv(f"samples_{scheme.value}.csv", header, _sample_rows(samples))

        target = split.full if scheme is Scheme.NONE else split.allowed
        h = histogram_1d(samples, target, hist.lo, hist.hi, hist.bins)
        rows.append(_summary_row(scheme, run.guidance.lambda0, "kl_hist", h.kl, config.n_samples, config.seed))
        rows.append(
            _summary_row(scheme, run.guidance.lambda0, "safety", safety(samples, split), config.n_samples, config.seed)
        )

        if config.trace_chains > 0 and scheme in (Scheme.DNG_EXACT, Scheme.DNG_TRACKED):
            trace_run = RunConfig(
                split=split,
                schedule=config.schedule,
                guidance=run.guidance,
                n_samples=min(config.trace_chains, config.n_samples),
                seed=config.seed,
                record_trajectories=True,
            )
            trows = []
            for rec in run_batch(trace_run):
                for k, t in enumerate(range(config.schedule.T, 0, -1)):
                    trows.append(
                        (rec.chain_index, t, float(rec.lambdas[k]), float(rec.posteriors[k]))
                    )
            trows.sort(key=lambda r: (r[0], r[1]))
            writer.csv(
                f"lambda_traces_{scheme.value}.csv",
                ["chain", "t", "lambda", "posterior"],
                trows,
            )
    return rows, {}


def _run_posterior_check(config: ExperimentConfig, writer: _ArtifactWriter):
    run = RunConfig(
        split=config.split,
        schedule=config.schedule,
        guidance=config.guidance_for(Scheme.DNG_TRACKED),
        n_samples=config.n_samples,
        seed=config.seed,
        record_trajectories=True,
    )
    records = run_batch(run)
    cmp = posterior_tracking_error(records, config.split, config.schedule)

    prow = []
    for group in sorted(cmp.tracked_mean):
        for k, t in enumerate(cmp.steps):
            prow.append(
                (int(t), group, float(cmp.tracked_mean[group][k]), float(cmp.exact_mean[group][k]))
            )
    prow.sort(key=lambda r: (r[0], r[1]))
    writer.csv("posterior.csv", ["t", "group", "tracked_mean", "exact_mean"], prow)

    rows = [
        _summary_row(Scheme.DNG_TRACKED, 0.0, "tracking_mae", cmp.aggregate_mae, config.n_samples, config.seed)
    ]
    for group, count in sorted(cmp.group_counts.items()):
        rows.append(
            _summary_row(Scheme.DNG_TRACKED, 0.0, f"n_{group}", count, config.n_samples, config.seed)
        )
    return rows, {}


def _run_sweep(config: ExperimentConfig, writer: _ArtifactWriter):
    entries = []
    for scheme in sorted(config.sweep, key=lambda s: s.value):
        for lam in config.sweep[scheme]:
            run = RunConfig(
                split=config.split,
                schedule=config.schedule,
                guidance=config.guidance_for(scheme, lambda0=lam),
                n_samples=config.n_samples,
                seed=config.seed,
            )
            samples = run_batch(run)
            hist = class_histogram(samples, config.split)
            entries.append(
                (scheme.value, float(lam), safety(samples, config.split), kl_to_ideal(hist))
            )
    entries.sort(key=lambda r: (r[0], r[1]))
    writer.csv(
        "sweep.csv",
        ["scheme", "lambda0", "safety", "kl_to_ideal", "n_samples", "seed"],
        [(s, l, sf, kl, config.n_samples, config.seed) for s, l, sf, kl in entries],
    )
    rows = []
    for s, l, sf, kl in entries:
        rows.append(_summary_row(s, l, "safety", sf, config.n_samples, config.seed))
        rows.append(_summary_row(s, l, "kl_to_ideal", kl, config.n_samples, config.seed))
    return rows, {}


def _run_fields2d(config: ExperimentConfig, writer: _ArtifactWriter):
    lam = config.guidance["lambda0"]
    for scheme in FIELD_SCHEMES:
        fg = field_grid(config.split, config.schedule, config.field_t, scheme, lam, config.grid)
        for comp in FIELD_COMPONENTS:
            vec = getattr(fg, comp)
            frows = [
                (float(x), float(y), float(vx), float(vy))
                for (x, y), (vx, vy) in zip(fg.points, vec)
            ]
            frows.sort(key=lambda r: (r[0], r[1]))
            writer.csv(
                f"fields_{scheme.value}_{comp}.csv", ["x", "y", "vx", "vy"], frows
            )
    return [], {"field_t": config.field_t, "lambda0": lam}


SUMMARY_COLUMNS = ["experiment", "scheme", "lambda0", "metric", "value", "n_samples", "seed"]


def summarize(run_dir: Path, out_file: Path | None = None):
    """Merge every summary.json under run_dir into one table.

    Returns (table_path, n_rows, errors); corrupt or unreadable summaries
    are reported and skipped.  The output carries no timestamp, so
    re-running is byte-identical.
    """
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise ConfigError(f"not a directory: {run_dir}")
    out_file = out_file or run_dir / "summary_table.csv"

    rows, errors = [], []
    for path in sorted(run_dir.rglob("summary.json")):
        try:
            payload = json.loads(path.read_text())
            experiment = payload["experiment"]
            for r in payload.get("rows", []):
                rows.append(
                    (
                        str(experiment),
                        str(r["scheme"]),
                        float(r["lambda0"]),
                        str(r["metric"]),
                        float(r["value"]),
                        int(r["n_samples"]),
                        int(r["seed"]),
                    )
                )
        except (KeyError, TypeError, ValueError, json.JSONDecodeError, OSError) as exc:
            errors.append((path, str(exc)))

    uniq = sorted(set(rows))
    lines = [",".join(SUMMARY_COLUMNS)]
    lines.extend(",".join(_fmt(v) for v in row) for row in uniq)
    out_file.write_text("\n".join(lines) + "\n")
    return out_file, len(uniq), errors


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixguide", description="Gaussian-mixture diffusion guidance experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cmd_to_kind = {
        "fig1d": "fig1d",
        "posterior-check": "posterior_check",
        "class-removal": "class_removal_sweep",
        "fields2d": "fields2d",
    }
    for cmd, kind in cmd_to_kind.items():
        p = sub.add_parser(cmd, help=f"run the {kind} experiment")
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", type=Path, help="override the output directory")
        p.add_argument("--samples", type=int, help="override n_samples")
        p.set_defaults(kind=kind)

    p = sub.add_parser("summarize", help="merge run summaries into one table")
    p.add_argument("--in", dest="in_dir", type=Path, required=True, help="directory to scan")
    p.add_argument("--out", type=Path, help="output CSV (default <in>/summary_table.csv)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "summarize":
        try:
            out_file, n, errors = summarize(args.in_dir, args.out)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        for path, msg in errors:
            print(f"skipped {path}: {msg}", file=sys.stderr)
        if n == 0:
            print(f"warning: no summary rows found under {args.in_dir}", file=sys.stderr)
        print(f"wrote {out_file} ({n} rows)")
        return 1 if errors else 0

    raw = {}
    if args.config is not None:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
            return 2
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.samples is not None:
        raw["n_samples"] = args.samples
    if args.out is not None:
        raw["out_dir"] = str(args.out)
    elif os.environ.get(OUT_DIR_ENV):
        raw["out_dir"] = os.environ[OUT_DIR_ENV]

    try:
        config = parse_config(raw, args.kind)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        result = run_experiment(config)
    except Exception as exc:  # partial outputs were already removed
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(result.files)} artifacts to {result.out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
