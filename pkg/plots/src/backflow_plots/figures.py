"""Figure construction from parsed CSV data.

Pure builders returning matplotlib Figures so tests can inspect axes
without touching the filesystem; save_figure pins the rasterized
output (fixed dpi, no Software tag) so identical inputs give
identical image bytes.
"""
from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams.update({
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
})

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .csvread import InputError, read_distance, read_sweep, read_trajectory

__all__ = [
    "FigureSpec",
    "build_trajectory_figure",
    "build_distance_figure",
    "build_sweep_figure",
    "save_figure",
]


@dataclass(frozen=True)
class FigureSpec:
    """Inputs, panel layout, and output target for one figure.

    panels names the Bloch components plotted for trajectory figures
    (one panel each); distance and sweep figures ignore it.
    """

    inputs: tuple[str, ...]
    output: str
    panels: tuple[str, ...] = ("sz", "sx")

    def __post_init__(self):
        if len(self.inputs) == 0:
            raise InputError("at least one input CSV is required")
        if not self.output:
            raise InputError("an output image path is required")
        bad = [p for p in self.panels if p not in ("sx", "sy", "sz")]
        if bad:
            raise InputError(f"unknown panel component(s): {bad}")


_COMPONENT_LABEL = {
    "sx": r"$\langle\sigma_x\rangle$",
    "sy": r"$\langle\sigma_y\rangle$",
    "sz": r"$\langle\sigma_z\rangle$",
}
_TIME_LABEL = r"$t\ [1/\Delta]$"


def _curve_label(meta: dict) -> str:
    solver = meta.get("solver", "?")
    alpha = meta.get("alpha")
    if isinstance(alpha, (int, float)):
        return rf"{solver}, $\alpha$ = {alpha:g}"
    return str(solver)


def build_trajectory_figure(spec: FigureSpec):
    """One panel per Bloch component, one curve per input file."""
    loaded = [read_trajectory(path) for path in spec.inputs]
    n = len(spec.panels)
    fig, axes = plt.subplots(
        n, 1, figsize=(6.0, 2.2 * n), sharex=True, squeeze=False
    )
    column = {"time": 1, "sx": 2, "sy": 3, "sz": 4}
    t_end = max(data[1][-1] for data in loaded)
    for ax, comp in zip(axes[:, 0], spec.panels):
        for data in loaded:
            ax.plot(data[1], data[column[comp]], label=_curve_label(data[0]))
        ax.set_ylabel(_COMPONENT_LABEL[comp])
        ax.set_xlim(0.0, t_end)
    axes[0, 0].legend(loc="upper right", fontsize=8)
    axes[-1, 0].set_xlabel(_TIME_LABEL)
    fig.tight_layout()
    return fig


def build_distance_figure(spec: FigureSpec):
    """Trace distance D(t) with backflow intervals shaded."""
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    t_end = 0.0
    for path in spec.inputs:
        meta, t, d, sigma = read_distance(path)
        (line,) = ax.plot(t, d, label=_curve_label(meta))
        ax.fill_between(
            t, 0.0, d, where=sigma > 0, color=line.get_color(), alpha=0.25,
            linewidth=0,
        )
        t_end = max(t_end, t[-1])
    ax.set_xlim(0.0, t_end)
    ax.set_ylim(bottom=0.0)
    ax.set_xlabel(_TIME_LABEL)
    ax.set_ylabel(r"$D(t)$")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    return fig


def build_sweep_figure(spec: FigureSpec):
    """N versus alpha, one marked curve per omega_c over all inputs."""
    alphas: dict[float, list] = {}
    for path in spec.inputs:
        _, data = read_sweep(path)
        for a, w, n in zip(data["alpha"], data["omega_c"], data["n_value"]):
            alphas.setdefault(float(w), []).append((float(a), float(n)))
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    for w in sorted(alphas):
        pts = sorted(alphas[w])
        ax.plot(
            [p[0] for p in pts], [p[1] for p in pts], marker="o",
            markersize=4, label=rf"$\omega_c = {w:g}\,\Delta$",
        )
    ax.set_xlabel(r"$\alpha$")
    ax.set_ylabel(r"$\mathcal{N}$")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    return fig


def save_figure(fig, path: str) -> None:
    """Write the figure; PNG output drops the Software metadata tag."""
    kwargs = {"metadata": {"Software": None}} if path.endswith(".png") else {}
    try:
        fig.savefig(path, **kwargs)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc
    finally:
        plt.close(fig)
