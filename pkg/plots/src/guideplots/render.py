"""Figure rendering for the five artifact kinds.

Every renderer reads CSVs from one input directory and writes a single
image.  Rendering never touches the inputs; re-running overwrites the
output deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, find_artifacts, read_table, scheme_from_name

KINDS = ("fig1d", "sweep", "posterior", "lambda-trace", "fields")

DEFAULT_COLORS = {
    "none": "tab:gray",
    "cfg": "tab:green",
    "np": "tab:orange",
    "dng_exact": "tab:blue",
    "dng_tracked": "tab:cyan",
    "sld": "tab:purple",
}
GROUP_COLORS = {"forbidden": "tab:red", "allowed": "tab:blue"}


@dataclass(frozen=True)
class PlotSpec:
    """What to render: input directory, figure kind, output path, styling."""

    in_dir: Path
    kind: str
    out_path: Path
    scheme_colors: dict = field(default_factory=dict)
    x_label: str | None = None
    y_label: str | None = None
    dpi: int = 130

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind '{self.kind}' (expected one of {KINDS})")

    def color(self, scheme: str) -> str:
        return self.scheme_colors.get(scheme, DEFAULT_COLORS.get(scheme, "tab:brown"))


def render(spec: PlotSpec) -> Path:
    """Render one figure; raises SchemaError on malformed inputs."""
    fig = {
        "fig1d": _render_fig1d,
        "sweep": _render_sweep,
        "posterior": _render_posterior,
        "lambda-trace": _render_lambda_trace,
        "fields": _render_fields,
    }[spec.kind](spec)
    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.out_path, dpi=spec.dpi)
    plt.close(fig)
    return spec.out_path


def _maybe_density(in_dir: Path, name: str):
    path = Path(in_dir) / f"density_{name}.csv"
    if not path.exists():
        return None
    table = read_table(path, ["x", "density"])
    return table["x"], table["density"]


def _render_fig1d(spec: PlotSpec):
    paths = find_artifacts(spec.in_dir, "samples_*.csv")
    fig, axes = plt.subplots(
        1, len(paths), figsize=(3.2 * len(paths), 3.0), sharey=True, squeeze=False
    )
    for ax, path in zip(axes[0], paths):
        scheme = scheme_from_name(path, "samples_")
        table = read_table(path, ["chain", "x0_0"])
        x = table["x0_0"]
        ax.hist(x, bins=120, density=True, color=spec.color(scheme), alpha=0.75)
        target = _maybe_density(spec.in_dir, "full" if scheme == "none" else "allowed")
        if target is not None:
            ax.plot(target[0], target[1], "k--", lw=1.0, label="target")
            ax.legend(loc="upper right", fontsize=7)
        ax.set_title(scheme)
        ax.set_xlabel(spec.x_label or "x")
    axes[0][0].set_ylabel(spec.y_label or "density")
    fig.tight_layout()
    return fig


def _render_sweep(spec: PlotSpec):
    table = read_table(spec.in_dir / "sweep.csv", ["scheme", "lambda0", "safety", "kl_to_ideal"])
    fig, ax = plt.subplots(figsize=(4.5, 3.4))
    for scheme in sorted(set(table["scheme"])):
        sel = table["scheme"] == scheme
        order = np.argsort(table["safety"][sel])
        ax.plot(
            table["safety"][sel][order],
            table["kl_to_ideal"][sel][order],
            "o-",
            color=spec.color(scheme),
            label=scheme,
        )
    ax.set_xlabel(spec.x_label or "safety")
    ax.set_ylabel(spec.y_label or "KL to ideal class balance")
    ax.legend()
    fig.tight_layout()
    return fig


def _render_posterior(spec: PlotSpec):
    table = read_table(spec.in_dir / "posterior.csv", ["t", "group", "tracked_mean", "exact_mean"])
    fig, ax = plt.subplots(figsize=(4.5, 3.4))
    for group in sorted(set(table["group"])):
        sel = table["group"] == group
        order = np.argsort(table["t"][sel])
        t = table["t"][sel][order]
        color = GROUP_COLORS.get(group, "tab:brown")
        ax.plot(t, table["tracked_mean"][sel][order], "-", color=color, label=f"{group} (tracked)")
        ax.plot(t, table["exact_mean"][sel][order], ":", color=color, label=f"{group} (exact)")
    ax.set_xlabel(spec.x_label or "t (noise level grows to the right)")
    ax.set_ylabel(spec.y_label or "posterior of forbidden class")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def _render_lambda_trace(spec: PlotSpec):
    paths = find_artifacts(spec.in_dir, "lambda_traces_*.csv")
    fig, (ax_lam, ax_post) = plt.subplots(2, 1, figsize=(5.0, 4.6), sharex=True)
    for path in paths:
        scheme = scheme_from_name(path, "lambda_traces_")
        table = read_table(path, ["chain", "t", "lambda", "posterior"])
        for chain in np.unique(table["chain"]):
            sel = table["chain"] == chain
            order = np.argsort(table["t"][sel])
            label = scheme if chain == table["chain"].min() else None
            ax_lam.plot(
                table["t"][sel][order], table["lambda"][sel][order],
                color=spec.color(scheme), alpha=0.6, lw=0.9, label=label,
            )
            ax_post.plot(
                table["t"][sel][order], table["posterior"][sel][order],
                color=spec.color(scheme), alpha=0.6, lw=0.9,
            )
    ax_lam.set_ylabel("guidance scale")
    ax_lam.legend(fontsize=8)
    ax_post.set_ylabel("posterior")
    ax_post.set_xlabel(spec.x_label or "t")
    fig.tight_layout()
    return fig


def _render_fields(spec: PlotSpec):
    paths = find_artifacts(spec.in_dir, "fields_*.csv")
    components = ("uncond", "guidance", "total")
    schemes = sorted(
        {p.stem[len("fields_"):].rsplit("_", 1)[0] for p in paths}
    )
    fig, axes = plt.subplots(
        len(schemes), len(components),
        figsize=(3.4 * len(components), 3.2 * len(schemes)),
        squeeze=False,
    )
    for i, scheme in enumerate(schemes):
        for j, comp in enumerate(components):
            path = Path(spec.in_dir) / f"fields_{scheme}_{comp}.csv"
            if not path.exists():
                raise SchemaError(f"missing artifact {path.name}")
            table = read_table(path, ["x", "y", "vx", "vy"])
            ax = axes[i][j]
            ax.quiver(
                table["x"], table["y"], table["vx"], table["vy"],
                np.hypot(table["vx"], table["vy"]),
                cmap="viridis", angles="xy",
            )
            ax.set_title(f"{scheme}: {comp}", fontsize=9)
            ax.set_aspect("equal")
    fig.tight_layout()
    return fig
