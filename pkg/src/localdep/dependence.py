"""Exact dependence function of bivariate cdf's and copulas.

For a copula ``C`` the dependence function is

    q(u, v) = (C(u, v) - uv) / sqrt(uv(1-u)(1-v)),   (u, v) in (0, 1)^2,

the correlation of the two-valued scores ``phi_u(U)`` and ``phi_v(V)``.  For a
general joint cdf ``H`` with marginals ``F``, ``G`` the same normalisation is
applied to ``H(x, y) - F(x)G(y)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .copulas import CopulaModel, _as_unit, _out
from .exceptions import DomainError

__all__ = [
    "Grid",
    "DependenceSurface",
    "GeneralBivariateCdf",
    "weight",
    "q_from_cdf_values",
    "q_copula",
    "q_general",
    "bounds",
    "score_phi",
    "q_via_correlation",
    "surface",
    "SURFACE_KINDS",
]

SURFACE_KINDS = ("q_exact", "bound_lower", "bound_upper", "Q_n", "L_n")


@dataclass(frozen=True)
class Grid:
    """Regular interior grid ``{(i/g, j/g) : i, j = 1..g-1}``."""

    g: int = 16

    def __post_init__(self):
        if int(self.g) != self.g or self.g < 2:
            raise ValueError(f"grid resolution must be an integer >= 2, got {self.g}")

    @property
    def ticks(self) -> np.ndarray:
        return np.arange(1, self.g) / self.g

    @property
    def size(self) -> int:
        return self.g - 1

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """``(U, V)`` with ``U[i, j] = (i+1)/g`` and ``V[i, j] = (j+1)/g``."""
        t = self.ticks
        return np.meshgrid(t, t, indexing="ij")


@dataclass
class DependenceSurface:
    """Values of a dependence quantity on a grid.

    ``values[i, j]`` belongs to the point ``((i+1)/g, (j+1)/g)``: the first
    axis runs over ``u``, the second over ``v``.
    """

    grid: Grid
    values: np.ndarray
    kind: str
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SURFACE_KINDS:
            raise ValueError(f"unknown surface kind {self.kind!r}")
        self.values = np.asarray(self.values, dtype=float)
        k = self.grid.size
        if self.values.shape != (k, k):
            raise ValueError(f"values must have shape {(k, k)}, got {self.values.shape}")

    def at(self, i: int, j: int) -> float:
        """Value at ``(i/g, j/g)`` with 1-based grid indices."""
        return float(self.values[i - 1, j - 1])


@dataclass(frozen=True)
class GeneralBivariateCdf:
    """Joint cdf ``H`` together with its marginals ``F`` and ``G``."""

    joint: Callable
    marginal_x: Callable
    marginal_y: Callable


def weight(u, v):
    """``1 / sqrt(uv(1-u)(1-v))`` on the open unit square (always >= 4)."""
    u, v = _as_unit(u, v, closed=False)
    return _out(1.0 / np.sqrt(u * v * (1.0 - u) * (1.0 - v)))


def q_from_cdf_values(c, u, v):
    """Dependence value from a cdf value ``c = C(u, v)`` at an interior point."""
    return _out(np.asarray(weight(u, v)) * (np.asarray(c, dtype=float) - np.asarray(u) * np.asarray(v)))


def q_copula(model: CopulaModel, u, v):
    """Exact ``q_C(u, v)`` for an analytic model.

    ``QuasiCopulaCc`` is accepted (it yields the constant ``c``) even though it
    is not a copula; check ``model.is_copula`` if that matters.
    """
    u, v = _as_unit(u, v, closed=False)
    return q_from_cdf_values(model.cdf(u, v), u, v)


def q_general(cdf: GeneralBivariateCdf, x, y):
    """``(H - FG) / sqrt(FG(1-F)(1-G))`` at ``(x, y)``; needs ``0 < F, G < 1``."""
    f = np.asarray(cdf.marginal_x(x), dtype=float)
    g = np.asarray(cdf.marginal_y(y), dtype=float)
    if np.any(~((f > 0) & (f < 1) & (g > 0) & (g < 1))):
        raise DomainError("(x, y) outside the set where 0 < F(x) < 1 and 0 < G(y) < 1")
    h = np.asarray(cdf.joint(x, y), dtype=float)
    return _out((h - f * g) / np.sqrt(f * g * (1.0 - f) * (1.0 - g)))


def bounds(u, v):
    """Pointwise envelope ``(B_lower, B_upper)`` implied by the Frechet bounds."""
    u, v = _as_unit(u, v, closed=False)
    w = np.asarray(weight(u, v))
    uv = u * v
    lower = w * (np.maximum(u + v - 1.0, 0.0) - uv)
    upper = w * (np.minimum(u, v) - uv)
    # the envelope is exactly -1 on the antidiagonal and +1 on the diagonal
    lower = np.where(u + v == 1.0, -1.0, lower)
    upper = np.where(u == v, 1.0, upper)
    return _out(lower), _out(upper)


def score_phi(u, s):
    """Two-valued score: ``-sqrt((1-u)/u)`` for ``s <= u``, ``sqrt(u/(1-u))`` above."""
    u = np.asarray(u, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise DomainError("u must lie in (0, 1)")
    if np.any((s < 0) | (s > 1)):
        raise DomainError("s must lie in [0, 1]")
    return _out(np.where(s <= u, -np.sqrt((1.0 - u) / u), np.sqrt(u / (1.0 - u))))


def q_via_correlation(model: CopulaModel, u, v):
    """``E[phi_u(U) phi_v(V)]`` summed over the four quadrant probabilities."""
    u, v = _as_unit(u, v, closed=False)
    c = np.asarray(model.cdf(u, v))
    lo_u, hi_u = -np.sqrt((1.0 - u) / u), np.sqrt(u / (1.0 - u))
    lo_v, hi_v = -np.sqrt((1.0 - v) / v), np.sqrt(v / (1.0 - v))
    return _out(
        c * lo_u * lo_v
        + (u - c) * lo_u * hi_v
        + (v - c) * hi_u * lo_v
        + (1.0 - u - v + c) * hi_u * hi_v
    )


def surface(source, grid: Grid | None = None) -> DependenceSurface:
    """Evaluate exact ``q`` for a model, or a bound, over a grid.

    ``source`` is a :class:`CopulaModel` or one of ``"bound_lower"``,
    ``"bound_upper"``.
    """
    grid = grid or Grid()
    uu, vv = grid.mesh()
    if isinstance(source, CopulaModel):
        values = q_copula(source, uu, vv)
        prov = {"model": source.spec, "is_copula": bool(source.is_copula)}
        kind = "q_exact"
    elif source in ("bound_lower", "bound_upper"):
        lower, upper = bounds(uu, vv)
        values = lower if source == "bound_lower" else upper
        prov = {"bound": source}
        kind = source
    else:
        raise ValueError(f"surface source must be a model or a bound kind, got {source!r}")
    return DependenceSurface(grid, values, kind, prov)
