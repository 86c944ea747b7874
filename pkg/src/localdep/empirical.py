"""Rank-based estimation of the dependence function.

The estimator of ``q_C`` at ``(u, v)`` is

    Q_n(u, v) = w(u, v) [C_n(u, v) - uv],    L_n(u, v) = sqrt(n) Q_n(u, v),

where ``C_n`` is the empirical copula built from the pseudo-observations
``(R_i/(n+1), S_i/(n+1))``.  ``L_n`` is a rank statistic, hence distribution
free under independence.

All estimators are computed from integer counts ``n C_n(u, v)`` through
:func:`ln_from_counts`, which the Monte Carlo null in
:mod:`localdep.inference` shares, so observed and simulated statistics that
correspond to the same count are bit-identical.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .copulas import Sample, _as_unit, _out
from .dependence import DependenceSurface, Grid, score_phi, weight
from .exceptions import DomainError, TieError, TieWarning

__all__ = [
    "PseudoSample",
    "SummaryStats",
    "ChiValues",
    "rank_transform",
    "empirical_copula_dn",
    "empirical_copula_cn",
    "qn",
    "ln",
    "ln_from_counts",
    "grid_counts",
    "surface_estimate",
    "summary",
    "hat_q_general",
    "chi_values",
    "rank_decomposition",
    "z_process",
]

TIE_POLICIES = ("strict", "midrank", "random")


@dataclass(frozen=True)
class PseudoSample:
    """Ranks of a bivariate sample.

    ``r`` and ``s`` hold the ranks of the two margins (mid-ranks are
    half-integers).  ``ties_x``/``ties_y`` count groups of tied values.
    """

    r: np.ndarray
    s: np.ndarray
    ties_x: int = 0
    ties_y: int = 0
    tie_policy: str = "strict"

    @property
    def n(self) -> int:
        return int(self.r.size)

    @property
    def u(self) -> np.ndarray:
        return self.r / (self.n + 1)

    @property
    def v(self) -> np.ndarray:
        return self.s / (self.n + 1)

    @property
    def has_ties(self) -> bool:
        return bool(self.ties_x or self.ties_y)

    @classmethod
    def from_ranks(cls, r, s) -> "PseudoSample":
        """Wrap rank vectors that are already permutations of ``1..n``."""
        r = np.asarray(r, dtype=float)
        s = np.asarray(s, dtype=float)
        n = r.size
        if s.size != n or n < 1:
            raise ValueError("rank vectors must be non-empty and of equal length")
        expected = np.arange(1, n + 1)
        if not (np.array_equal(np.sort(r), expected) and np.array_equal(np.sort(s), expected)):
            raise ValueError("ranks must be permutations of 1..n")
        return cls(r, s)


@dataclass(frozen=True)
class SummaryStats:
    """Grid minimum, maximum and maximum absolute value of a surface."""

    l_star: float
    l_upper: float
    l_o: float


@dataclass(frozen=True)
class ChiValues:
    values: np.ndarray  # NaN where the point is outside the empirical domain
    skipped: int


def _tie_groups(x):
    _, counts = np.unique(x, return_counts=True)
    return int(np.count_nonzero(counts > 1))


def _rank_margin(x, policy, rng, label):
    groups = _tie_groups(x)
    if groups and policy == "strict":
        vals, counts = np.unique(x, return_counts=True)
        tied = vals[counts > 1][:5]
        raise TieError(f"tied values in {label}: {', '.join(f'{t:g}' for t in tied)}")
    if policy == "random" and groups:
        perm = rng.permutation(x.size)
        ranks = np.empty(x.size)
        ranks[perm] = rankdata(x[perm], method="ordinal")
        return ranks, groups
    method = "average" if policy == "midrank" else "ordinal"
    return rankdata(x, method=method).astype(float), groups


def rank_transform(sample: Sample, tie_policy: str = "midrank", seed=None) -> PseudoSample:
    """Rank both margins.

    ``strict`` refuses ties, ``midrank`` averages tied ranks (with a
    :class:`TieWarning`), ``random`` breaks ties uniformly using ``seed``.
    """
    if tie_policy not in TIE_POLICIES:
        raise ValueError(f"tie policy must be one of {TIE_POLICIES}, got {tie_policy!r}")
    if sample.n < 2:
        raise ValueError("need at least two observations")
    rng = np.random.default_rng(seed)
    r, tx = _rank_margin(sample.x, tie_policy, rng, "x")
    s, ty = _rank_margin(sample.y, tie_policy, rng, "y")
    if tie_policy == "midrank" and (tx or ty):
        warnings.warn(
            f"{tx} tied group(s) in x and {ty} in y resolved by mid-ranks; "
            "null distributions assume continuous margins",
            TieWarning,
            stacklevel=2,
        )
    return PseudoSample(r, s, tx, ty, tie_policy)


def _count_below(a, b, u, v):
    """``#{k : a_k <= u, b_k <= v}`` broadcast over the points ``(u, v)``."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    mask = (a[:, None] <= u.ravel()[None, :]) & (b[:, None] <= v.ravel()[None, :])
    return mask.sum(axis=0).reshape(u.shape)


def empirical_copula_dn(ps: PseudoSample, u, v):
    """``D_n(u, v) = n^-1 #{R_i/n <= u, S_i/n <= v}`` on ``[0, 1]^2``."""
    u, v = _as_unit(u, v, closed=True)
    return _out(_count_below(ps.r / ps.n, ps.s / ps.n, u, v) / ps.n)


def empirical_copula_cn(ps: PseudoSample, u, v):
    """``C_n(u, v)`` from pseudo-observations ``R_i/(n+1)``, ``S_i/(n+1)``."""
    u, v = _as_unit(u, v, closed=True)
    return _out(_count_below(ps.u, ps.v, u, v) / ps.n)


def ln_from_counts(counts, n: int, u, v):
    """``L_n`` from the counts ``n C_n(u, v)``; shared by data and null paths."""
    w = np.asarray(weight(u, v))
    return np.sqrt(n) * (w * (np.asarray(counts) / n - np.asarray(u) * np.asarray(v)))


def qn(ps: PseudoSample, u, v):
    """``Q_n(u, v) = w(u, v)(C_n(u, v) - uv)`` at interior points."""
    u, v = _as_unit(u, v, closed=False)
    counts = _count_below(ps.u, ps.v, u, v)
    return _out(np.asarray(weight(u, v)) * (counts / ps.n - u * v))


def ln(ps: PseudoSample, u, v):
    """Standardized estimator ``sqrt(n) Q_n(u, v)``."""
    u, v = _as_unit(u, v, closed=False)
    return _out(ln_from_counts(_count_below(ps.u, ps.v, u, v), ps.n, u, v))


def grid_bins(p, g: int) -> np.ndarray:
    """Index of the first grid tick ``k/g`` with ``p <= k/g`` (0-based; ``g-1`` if none)."""
    ticks = np.arange(1, g) / g
    return np.searchsorted(ticks, p, side="left")


def grid_counts(pu, pv, g: int) -> np.ndarray:
    """Counts ``#{pu_k <= i/g, pv_k <= j/g}`` for ``i, j = 1..g-1``.

    ``pu``, ``pv`` may carry leading batch dimensions; the last axis runs
    over observations.
    """
    bu = np.asarray(grid_bins(pu, g))
    bv = np.asarray(grid_bins(pv, g))
    bu, bv = np.broadcast_arrays(bu, bv)
    batch = bu.shape[:-1]
    nb = int(np.prod(batch)) if batch else 1
    offsets = (np.arange(nb) * g * g).reshape(batch + (1,)) if batch else 0
    flat = (offsets + bu * g + bv).ravel()
    hist = np.bincount(flat, minlength=nb * g * g).reshape(batch + (g, g))
    cum = hist.cumsum(axis=-2).cumsum(axis=-1)
    return cum[..., : g - 1, : g - 1]


def surface_estimate(ps: PseudoSample, grid: Grid | None = None, standardized: bool = True):
    """``L_n`` (or ``Q_n`` when ``standardized`` is False) over a grid."""
    grid = grid or Grid()
    uu, vv = grid.mesh()
    counts = grid_counts(ps.u, ps.v, grid.g)
    values = ln_from_counts(counts, ps.n, uu, vv)
    if not standardized:
        values = np.asarray(weight(uu, vv)) * (counts / ps.n - uu * vv)
    prov = {"n": ps.n, "tie_policy": ps.tie_policy}
    return DependenceSurface(grid, values, "L_n" if standardized else "Q_n", prov)


def summary(surface: DependenceSurface) -> SummaryStats:
    vals = surface.values
    return SummaryStats(float(vals.min()), float(vals.max()), float(np.abs(vals).max()))


def _empirical_parts(sample: Sample, x0, y0):
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    x0, y0 = np.broadcast_arrays(x0, y0)
    xs, ys = x0.ravel(), y0.ravel()
    below_x = sample.x[:, None] <= xs[None, :]
    below_y = sample.y[:, None] <= ys[None, :]
    f = below_x.mean(axis=0)
    g = below_y.mean(axis=0)
    h = (below_x & below_y).mean(axis=0)
    return f.reshape(x0.shape), g.reshape(x0.shape), h.reshape(x0.shape)


def hat_q_general(sample: Sample, x, y):
    """Plug-in estimate of the general dependence function from raw data."""
    f, g, h = _empirical_parts(sample, x, y)
    if np.any(~((f > 0) & (f < 1) & (g > 0) & (g < 1))):
        raise DomainError("point outside the empirical domain 0 < F_n, G_n < 1")
    return _out((h - f * g) / np.sqrt(f * g * (1.0 - f) * (1.0 - g)))


def chi_values(sample: Sample) -> ChiValues:
    """Plug-in estimate at each data point; points with ``F_n`` or ``G_n`` equal to 1 are skipped."""
    f, g, h = _empirical_parts(sample, sample.x, sample.y)
    ok = (f > 0) & (f < 1) & (g > 0) & (g < 1)
    out = np.full(sample.n, np.nan)
    out[ok] = (h[ok] - f[ok] * g[ok]) / np.sqrt(f[ok] * g[ok] * (1 - f[ok]) * (1 - g[ok]))
    return ChiValues(out, int(np.count_nonzero(~ok)))


def rank_decomposition(ps: PseudoSample, u: float, v: float) -> tuple[float, float]:
    """Split ``L_n(u, v)`` into its linear rank statistic and the remainder.

    The linear part is ``n^-1/2 sum phi_u(R_i/(n+1)) phi_v(S_i/(n+1))``.  The
    remainder depends on the data only through ``n`` and the marginal counts,
    which are fixed when there are no ties.
    """
    if ps.has_ties or not (np.all(ps.r == np.round(ps.r)) and np.all(ps.s == np.round(ps.s))):
        raise TieError("the rank decomposition requires untied ranks")
    u, v = (float(t) for t in _as_unit(u, v, closed=False))
    n = ps.n
    linear = float(np.sum(score_phi(u, ps.u) * score_phi(v, ps.v)) / np.sqrt(n))
    # both parts have slope w/sqrt(n) in the joint count, so the difference
    # only involves the marginal counts a, b; evaluate it in that form
    grid_ranks = np.arange(1, n + 1) / (n + 1)
    a = int(np.count_nonzero(grid_ranks <= u))
    b = int(np.count_nonzero(grid_ranks <= v))
    lo_u, hi_u = -np.sqrt((1 - u) / u), np.sqrt(u / (1 - u))
    lo_v, hi_v = -np.sqrt((1 - v) / v), np.sqrt(v / (1 - v))
    offset = a * lo_u * hi_v + b * hi_u * lo_v + (n - a - b) * hi_u * hi_v
    remainder = -np.sqrt(n) * float(weight(u, v)) * u * v - offset / np.sqrt(n)
    return linear, float(remainder)


def z_process(ps: PseudoSample, u, v):
    """Empirical copula process ``sqrt(n)(D_n(u, v) - uv)`` on ``[0, 1]^2``.

    ``L_n`` is the analogue built on ``C_n`` and scaled by ``w(u, v)``.
    """
    u, v = _as_unit(u, v, closed=True)
    d = np.asarray(empirical_copula_dn(ps, u, v))
    return _out(np.sqrt(ps.n) * (d - u * v))
