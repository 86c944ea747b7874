"""Heat maps of dependence surfaces and pseudo-observation scatter plots.

Figures are written as SVG with a fixed hash salt and no date, so identical
inputs produce byte-identical files.  The colour scale is a fixed diverging
map anchored at ``-scale``/``+scale`` with white at zero, so every heat map of
the same kind shares one value-to-colour mapping.  The anchors are recorded
in the SVG ``Description`` metadata.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import Normalize  # noqa: E402

from .dependence import DependenceSurface  # noqa: E402
from .empirical import PseudoSample, summary  # noqa: E402

__all__ = ["HeatMapSpec", "heatmap", "scatter", "save_svg"]

# covers |L_n| for strongly dependent samples of a few hundred points
L_SCALE = 17.0
_TITLES = {
    "q_exact": "q_C(u, v)",
    "bound_lower": "lower bound of q_C(u, v)",
    "bound_upper": "upper bound of q_C(u, v)",
    "Q_n": "Q_n(u, v)",
    "L_n": "L_n(u, v)",
}


@dataclass(frozen=True)
class HeatMapSpec:
    scale: float = L_SCALE
    cmap: str = "RdBu_r"
    signs: str = "auto"  # "auto": draw +/- glyphs when both signs occur
    caption: bool = True

    @classmethod
    def for_kind(cls, kind: str) -> "HeatMapSpec":
        if kind == "L_n":
            return cls(scale=L_SCALE)
        return cls(scale=1.0, caption=False)

    @property
    def anchors(self) -> str:
        return f"scale={-self.scale:g}:{self.scale:g}; white=0; cmap={self.cmap}"


def save_svg(fig, path, description: str = "") -> Path:
    path = Path(path)
    with matplotlib.rc_context({"svg.hashsalt": "localdep", "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None, "Description": description})
    plt.close(fig)
    return path


def heatmap(surface: DependenceSurface, path, spec: HeatMapSpec | None = None, title: str | None = None) -> Path:
    """Draw a surface as a grid of squares coloured by the value at each square's upper-right corner."""
    spec = spec or HeatMapSpec.for_kind(surface.kind)
    g = surface.grid.g
    edges = np.arange(0, g) / g
    vals = surface.values
    fig, ax = plt.subplots(figsize=(4.6, 4.2))
    norm = Normalize(vmin=-spec.scale, vmax=spec.scale)
    # values[i, j] sits at (u_i, v_j): u on the horizontal axis
    mesh = ax.pcolormesh(edges, edges, vals.T, cmap=spec.cmap, norm=norm, edgecolors="none")
    fig.colorbar(mesh, ax=ax, fraction=0.046, pad=0.04)
    mixed = vals.min() < 0 < vals.max()
    if spec.signs is True or (spec.signs == "auto" and mixed):
        half = 0.5 / g
        for i in range(g - 1):
            for j in range(g - 1):
                x = vals[i, j]
                if x != 0:
                    ax.text(edges[i] + half, edges[j] + half, "+" if x > 0 else "−",
                            ha="center", va="center", fontsize=6, color="black")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_aspect("equal")
    ax.set_xlabel("u")
    ax.set_ylabel("v")
    ax.set_title(title or _TITLES.get(surface.kind, surface.kind), fontsize=10)
    if spec.caption:
        s = summary(surface)
        ax.text(0.5, -0.2, f"$L_* = {s.l_star:.1f}$,  $L^* = {s.l_upper:.1f}$",
                transform=ax.transAxes, ha="center", va="top", fontsize=9)
    fig.tight_layout()
    return save_svg(fig, path, spec.anchors)


def scatter(ps: PseudoSample, path, title: str | None = None) -> Path:
    """Scatter plot of the pseudo-observations ``(R_i/(n+1), S_i/(n+1))``."""
    fig, ax = plt.subplots(figsize=(4.2, 4.2))
    ax.scatter(ps.u, ps.v, s=4, color="black", linewidths=0)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_aspect("equal")
    ax.set_xlabel("R/(n+1)")
    ax.set_ylabel("S/(n+1)")
    ax.set_title(title or f"pseudo-observations, n = {ps.n}", fontsize=10)
    fig.tight_layout()
    return save_svg(fig, path, f"scatter n={ps.n}")
