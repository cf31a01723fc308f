"""The four figure kinds, each a pure function from parsed artifacts to a
matplotlib Figure.  Rendering never mutates inputs, and fixed figure sizes
plus explicit axis limits keep identical inputs pixel-stable."""

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schemas import (
    SchemaError,
    load_json,
    parse_margin_report,
    parse_periodogram_csv,
    parse_photons,
    parse_spectrum,
)

KINDS = ("density", "margin", "periodogram-overlay", "photon-bar")
TWO_PI = 2.0 * np.pi


@dataclass
class FigureSpec:
    kind: str
    inputs: list
    output: str = None
    title: str = None
    xlabel: str = None
    ylabel: str = None
    labels: dict = field(default_factory=dict)


def _finish(fig, ax, spec, default_x, default_y):
    ax.set_xlabel(spec.xlabel or default_x)
    ax.set_ylabel(spec.ylabel or default_y)
    if spec.title:
        fig.suptitle(spec.title)
    return fig


def render_density(spectrum, spec):
    d = spectrum["dim"]
    fig, axes = plt.subplots(d, d, figsize=(2.4 * d, 2.0 * d),
                             sharex=True, squeeze=False)
    thetas = spectrum["thetas"]
    for i in range(d):
        for j in range(d):
            ax = axes[i][j]
            entry = spectrum["values"][:, i, j]
            ax.plot(thetas, entry.real, lw=1.2, label="re")
            ax.plot(thetas, entry.imag, lw=1.0, ls="--", label="im")
            for theta, weight in spectrum["atoms"]:
                w = weight[i, j]
                ax.vlines(theta, 0.0, w.real, lw=1.5, color="C3")
                ax.plot([theta], [w.real], marker="o", ms=4, color="C3")
            ax.axhline(0.0, lw=0.5, color="0.7")
            ax.set_xlim(0.0, TWO_PI)
            ax.set_title(f"entry {i + 1}{j + 1}", fontsize=8)
    axes[0][0].legend(fontsize=7, loc="upper right")
    for j in range(d):
        axes[d - 1][j].set_xlabel(spec.xlabel or "theta")
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    return fig


def render_margin(report, spec):
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    ax.plot(report["points"], report["margins"], lw=1.2, marker="o", ms=3,
            label="min eigenvalue margin")
    # dips below this line are exactly the certified violations
    ax.axhline(0.0, lw=1.0, ls="--", color="0.3", label="validity floor")
    below = report["margins"] < 0.0
    if below.any():
        ax.plot(report["points"][below], report["margins"][below], ls="none",
                marker="o", ms=5, color="C3", label="failing points")
    ax.set_xlim(0.0, TWO_PI)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _finish(fig, ax, spec, "theta", "margin")


def render_overlay(estimate, design, spec):
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    dim = min(estimate["dim"], design["dim"])
    for i in range(dim):
        ax.plot(estimate["thetas"], estimate["values"][:, i, i].real,
                ls="none", marker=".", ms=3, alpha=0.7, color=f"C{i}",
                label=f"estimate entry {i + 1}{i + 1}")
        ax.plot(design["thetas"], design["values"][:, i, i].real, lw=1.4,
                color=f"C{i}", label=f"design entry {i + 1}{i + 1}")
    ax.set_xlim(0.0, TWO_PI)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _finish(fig, ax, spec, "theta", "density")


def render_photon_bar(photons, spec):
    fig, ax = plt.subplots(figsize=(4.8, 3.2))
    modes = np.arange(1, len(photons["per_mode"]) + 1)
    ax.bar(modes, photons["per_mode"], width=0.6)
    ax.set_xticks(modes)
    ax.axhline(0.0, lw=0.8, color="0.3")
    ax.set_title(f"total {photons['total']:.6g}", fontsize=9)
    fig.tight_layout()
    return _finish(fig, ax, spec, "mode", "mean photon number")


def _need_inputs(spec, count):
    if len(spec.inputs) != count:
        raise SchemaError(f"--in: kind {spec.kind!r} takes exactly {count} "
                          f"input file(s), got {len(spec.inputs)}")


def render(spec: FigureSpec):
    """Build (but do not save) the figure a FigureSpec describes."""
    if spec.kind == "density":
        _need_inputs(spec, 1)
        return render_density(parse_spectrum(load_json(spec.inputs[0])), spec)
    if spec.kind == "margin":
        _need_inputs(spec, 1)
        return render_margin(parse_margin_report(load_json(spec.inputs[0])),
                             spec)
    if spec.kind == "periodogram-overlay":
        _need_inputs(spec, 2)
        estimate = parse_periodogram_csv(spec.inputs[0])
        design = parse_spectrum(load_json(spec.inputs[1]))
        return render_overlay(estimate, design, spec)
    if spec.kind == "photon-bar":
        _need_inputs(spec, 1)
        return render_photon_bar(parse_photons(load_json(spec.inputs[0])),
                                 spec)
    raise SchemaError(f"kind: unknown figure kind {spec.kind!r}")


def render_to_file(spec: FigureSpec) -> str:
    if not spec.output:
        raise SchemaError("--out: output image path is required")
    fig = render(spec)
    try:
        fig.savefig(spec.output, dpi=120)
    finally:
        plt.close(fig)
    return spec.output
