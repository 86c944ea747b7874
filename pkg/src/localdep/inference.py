"""Distribution-free Monte Carlo inference for ``L_n``.

Under independence the ranks ``S_i`` sorted by ``R_i`` form a uniform random
permutation, so null replicates are simulated by drawing permutations.  Each
replicate ``k`` gets its own counter-based Philox stream keyed by the master
seed with the counter's high word set to ``k``; results therefore do not
depend on how replicates are split across workers.

P-values are plain Monte Carlo proportions ``#{null at least as extreme} / B``
(no add-one correction), so they can be exactly 0 or 1.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .copulas import Sample
from .dependence import Grid
from .empirical import (
    grid_counts,
    ln,
    ln_from_counts,
    rank_transform,
    surface_estimate,
    summary,
)
from .exceptions import DomainError

__all__ = [
    "NullTable",
    "TestReport",
    "replicate_rng",
    "null_permutations",
    "simulate_null",
    "quantile_type7",
    "critical_value",
    "signed_quantiles",
    "run_test",
    "classical_stats",
    "POINT_STATISTICS",
    "GRID_STATISTICS",
    "TEST_KINDS",
]

DEFAULT_B = 10_000
POINT_STATISTICS = ("ln_point", "abs_ln_point")
GRID_STATISTICS = ("l_star", "l_upper", "l_o")

# test kind -> (null statistic, tail)
TEST_KINDS = {
    "pointwise_independence": ("abs_ln_point", "upper"),
    "global_independence_Lo": ("l_o", "upper"),
    "global_pqd_Lstar": ("l_star", "lower"),
    "global_nqd_Lupper": ("l_upper", "upper"),
}
_STAT_LABEL = {"abs_ln_point": "|L_n|", "l_o": "L^o", "l_star": "L_*", "l_upper": "L^*"}

_CHUNK = 500


def replicate_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent generator for replicate ``index`` of a run seeded by ``master_seed``."""
    if not 0 <= master_seed < 2**128:
        raise ValueError("master seed must be a non-negative integer below 2**128")
    return np.random.Generator(np.random.Philox(key=master_seed, counter=int(index) << 192))


def null_permutations(n: int, start: int, stop: int, master_seed: int) -> np.ndarray:
    """Rows ``start..stop-1`` of the replicate permutations of ``0..n-1``."""
    return np.stack([replicate_rng(master_seed, k).permutation(n) for k in range(start, stop)])


def _chunks(B: int, size: int = _CHUNK):
    return [(s, min(s + size, B)) for s in range(0, B, size)]


def _map_chunks(fn, B: int, workers: int):
    chunks = _chunks(B)
    if workers <= 1:
        parts = [fn(a, b) for a, b in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: fn(*ab), chunks))
    return np.concatenate(parts)


def _marginal_count(n: int, u: float) -> int:
    """Number of ranks ``r`` in ``1..n`` with ``r/(n+1) <= u``."""
    return int(np.count_nonzero(np.arange(1, n + 1) / (n + 1) <= u))


def _point_null(n, u, v, B, master_seed, workers):
    a = _marginal_count(n, u)
    b = _marginal_count(n, v)

    def chunk(start, stop):
        perms = null_permutations(n, start, stop, master_seed)
        counts = np.count_nonzero(perms[:, :a] < b, axis=1)
        return ln_from_counts(counts, n, u, v)

    return _map_chunks(chunk, B, workers)


def _grid_null(n, grid, B, master_seed, workers):
    g = grid.g
    uu, vv = grid.mesh()
    pu = np.arange(1, n + 1) / (n + 1)

    def stats(start, stop):
        perms = null_permutations(n, start, stop, master_seed)
        # observation k has x-rank k+1 and y-rank perms[k]+1
        counts = grid_counts(np.broadcast_to(pu, perms.shape), pu[perms], g)
        L = ln_from_counts(counts, n, uu, vv)
        return np.stack([L.min(axis=(1, 2)), L.max(axis=(1, 2)), np.abs(L).max(axis=(1, 2))], axis=1)

    return _map_chunks(stats, B, workers)


@dataclass
class NullTable:
    """Sorted Monte Carlo replicates of a null statistic.

    ``target`` is a ``(u, v)`` tuple for point statistics or a :class:`Grid`
    for the grid summaries ``l_star``, ``l_upper``, ``l_o``.
    """

    n: int
    statistic: str
    target: object
    B: int
    master_seed: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.sort(np.asarray(self.values, dtype=float))
        if self.values.size != self.B:
            raise ValueError(f"expected {self.B} replicates, got {self.values.size}")

    def quantile(self, p: float) -> float:
        return quantile_type7(self.values, p)

    def p_value(self, observed: float, tail: str = "upper") -> float:
        if tail == "upper":
            return float(np.count_nonzero(self.values >= observed)) / self.B
        if tail == "lower":
            return float(np.count_nonzero(self.values <= observed)) / self.B
        raise ValueError(f"tail must be 'upper' or 'lower', got {tail!r}")

    def target_label(self) -> str:
        if isinstance(self.target, Grid):
            return f"grid{self.target.g}"
        u, v = self.target
        return f"{u:.10g};{v:.10g}"


def simulate_null(
    n: int,
    target,
    B: int = DEFAULT_B,
    master_seed: int = 0,
    statistic: str | None = None,
    workers: int = 1,
) -> NullTable:
    """Simulate the null distribution of a statistic under independence.

    ``target`` is a point ``(u, v)`` (statistics ``ln_point``, the default,
    or ``abs_ln_point``) or a :class:`Grid` (``l_star``, ``l_upper`` or
    ``l_o``; default ``l_o``).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if B < 1:
        raise ValueError("B must be >= 1")
    if isinstance(target, Grid):
        statistic = statistic or "l_o"
        if statistic not in GRID_STATISTICS:
            raise ValueError(f"grid target needs one of {GRID_STATISTICS}, got {statistic!r}")
        stats = _grid_null(n, target, B, master_seed, workers)
        values = stats[:, GRID_STATISTICS.index(statistic)]
    else:
        statistic = statistic or "ln_point"
        if statistic not in POINT_STATISTICS:
            raise ValueError(f"point target needs one of {POINT_STATISTICS}, got {statistic!r}")
        u, v = (float(t) for t in target)
        if not (0 < u < 1 and 0 < v < 1):
            raise DomainError("target point must lie in (0, 1)^2")
        target = (u, v)
        values = _point_null(n, u, v, B, master_seed, workers)
        if statistic == "abs_ln_point":
            values = np.abs(values)
    return NullTable(n, statistic, target, B, master_seed, values)


def quantile_type7(sorted_values: Sequence[float], p: float) -> float:
    """Sample quantile of Hyndman and Fan's type 7.

    With ``m`` sorted values and ``h = (m - 1) p + 1`` this returns
    ``x[floor(h)] + (h - floor(h)) (x[ceil(h)] - x[floor(h)])`` (1-based).
    """
    x = np.asarray(sorted_values, dtype=float)
    if x.size == 0:
        raise ValueError("quantile of an empty list")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    h = (x.size - 1) * p
    j = math.floor(h)
    frac = h - j
    if j + 1 >= x.size:
        return float(x[-1])
    return float(x[j] + frac * (x[j + 1] - x[j]))


def critical_value(
    n: int, point, alpha: float, B: int = DEFAULT_B, master_seed: int = 0, workers: int = 1
) -> float:
    """Upper ``alpha`` critical value of ``|L_n(u, v)|`` under independence."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    table = simulate_null(n, point, B, master_seed, "abs_ln_point", workers)
    return table.quantile(1.0 - alpha)


def signed_quantiles(
    n: int, point, alphas, B: int = DEFAULT_B, master_seed: int = 0, workers: int = 1
) -> list[float]:
    """Type-7 ``alpha``-quantiles of ``L_n(u, v)`` under independence."""
    table = simulate_null(n, point, B, master_seed, "ln_point", workers)
    return [table.quantile(a) for a in alphas]


@dataclass(frozen=True)
class TestReport:
    __test__ = False  # not a pytest class

    test: str
    statistic: str
    observed: float
    p_value: float
    B: int
    seed: int
    n: int
    grid: str

    def as_row(self) -> dict:
        return {
            "test": self.test,
            "statistic": self.statistic,
            "observed": f"{self.observed:.7g}",
            "p_value": f"{self.p_value:.4f}",
            "B": self.B,
            "seed": self.seed,
            "n": self.n,
            "grid": self.grid,
        }

    def describe(self) -> str:
        return (
            f"{self.test}: {self.statistic} = {self.observed:.4g}, "
            f"p-value = {self.p_value:.4f} (B={self.B}, seed={self.seed}, n={self.n}, {self.grid})"
        )


def run_test(
    kind: str,
    sample: Sample,
    grid: Grid | None = None,
    B: int = DEFAULT_B,
    master_seed: int = 0,
    point=None,
    tie_policy: str = "midrank",
    null: NullTable | None = None,
    workers: int = 1,
) -> TestReport:
    """Run a pointwise or global test on a sample.

    Kinds: ``pointwise_independence`` (two-sided, needs ``point``),
    ``global_independence_Lo`` (large ``L^o``), ``global_pqd_Lstar`` (small
    ``L_*``), ``global_nqd_Lupper`` (large ``L^*``).  A precomputed ``null``
    table may be passed; it must match the test.
    """
    if kind not in TEST_KINDS:
        raise ValueError(f"unknown test {kind!r}; choose from {sorted(TEST_KINDS)}")
    statistic, tail = TEST_KINDS[kind]
    ps = rank_transform(sample, tie_policy)
    grid = grid or Grid()
    if statistic == "abs_ln_point":
        if point is None:
            raise ValueError("pointwise test needs a point")
        u, v = (float(t) for t in point)
        observed = abs(float(ln(ps, u, v)))
        target = (u, v)
        where = f"point={u:.10g};{v:.10g}"
    else:
        if point is not None:
            raise ValueError(f"{kind} is a grid test; do not pass a point")
        s = summary(surface_estimate(ps, grid))
        observed = {"l_star": s.l_star, "l_upper": s.l_upper, "l_o": s.l_o}[statistic]
        target = grid
        where = f"grid={grid.g}"
    if null is None:
        null = simulate_null(ps.n, target, B, master_seed, statistic, workers)
    elif null.statistic != statistic or null.n != ps.n or null.target_label() != NullTable(
        ps.n, statistic, target, 1, 0, [0.0]
    ).target_label():
        raise ValueError("null table does not match the requested test")
    return TestReport(
        kind, _STAT_LABEL[statistic], observed, null.p_value(observed, tail),
        null.B, null.master_seed, ps.n, where,
    )


# -- classical global coefficients -------------------------------------------


def _pearson(x, Y):
    xc = x - x.mean()
    Yc = Y - Y.mean(axis=-1, keepdims=True)
    return (Yc @ xc) / np.sqrt((xc @ xc) * np.einsum("...i,...i->...", Yc, Yc))


def _spearman_core(r2, S2):
    """Integer numerator ``n sum(2r 2s) - sum(2r) sum(2s)`` of Spearman's rho."""
    n = r2.size
    return n * (S2 @ r2) - r2.sum() * S2.sum(axis=-1)


def _kendall_core(sx, Y, iu, ju):
    return np.sign(Y[..., iu] - Y[..., ju]).astype(np.int64) @ sx


def _blomqvist_core(dx, Y, my):
    prod = dx * np.sign(Y - my)
    return np.count_nonzero(prod > 0, axis=-1), np.count_nonzero(prod < 0, axis=-1)


def classical_stats(sample: Sample, B: int = DEFAULT_B, master_seed: int = 0):
    """Pearson, Spearman, Kendall (tau-b) and Blomqvist coefficients with permutation p-values.

    Returns a list of ``(name, estimate, p_value)``.  P-values are two-sided:
    the fraction of ``B`` permutations of ``y`` whose coefficient is at least as
    large in absolute value.  Rank statistics are compared through integer
    numerators, so ties between permuted and observed values are exact.
    Blomqvist's beta is ``(n_c - n_d)/(n_c + n_d)`` over points off the
    median lines.
    """
    x, y = sample.x, sample.y
    n = sample.n
    if n < 2:
        raise ValueError("need at least two observations")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ValueError("a margin has zero variance")
    from scipy.stats import rankdata

    r2 = (2 * rankdata(x)).astype(np.int64)
    s2 = (2 * rankdata(y)).astype(np.int64)
    iu, ju = np.triu_indices(n, k=1)
    sx = np.sign(x[iu] - x[ju]).astype(np.int64)
    n0 = iu.size
    tx = n0 - np.count_nonzero(sx == 0)
    sy_obs = np.sign(y[iu] - y[ju])
    ty = n0 - np.count_nonzero(sy_obs == 0)
    dx = np.sign(x - np.median(x))
    my = np.median(y)
    rden = math.sqrt(n * int(r2 @ r2) - int(r2.sum()) ** 2) * math.sqrt(n * int(s2 @ s2) - int(s2.sum()) ** 2)

    def coefficients(Y, S2):
        pear = _pearson(x, Y)
        spear = _spearman_core(r2, S2)
        kend = _kendall_core(sx, Y, iu, ju)
        nc, nd = _blomqvist_core(dx, Y, my)
        return pear, spear, kend, nc, nd

    pear, spear, kend, nc, nd = coefficients(y[None, :], s2[None, :])
    obs = {
        "pearson": float(pear[0]),
        "spearman": float(spear[0]) / rden,
        "kendall": float(kend[0]) / math.sqrt(tx * ty),
        "blomqvist": float(nc[0] - nd[0]) / float(nc[0] + nd[0]) if nc[0] + nd[0] else 0.0,
    }

    exceed = dict.fromkeys(obs, 0)
    for start, stop in _chunks(B, 200):
        perms = null_permutations(n, start, stop, master_seed)
        Y, S2 = y[perms], s2[perms]
        p_pear, p_spear, p_kend, p_nc, p_nd = coefficients(Y, S2)
        exceed["pearson"] += int(np.count_nonzero(np.abs(p_pear) >= abs(obs["pearson"])))
        exceed["spearman"] += int(np.count_nonzero(np.abs(p_spear) >= abs(int(spear[0]))))
        exceed["kendall"] += int(np.count_nonzero(np.abs(p_kend) >= abs(int(kend[0]))))
        tot = p_nc + p_nd
        with np.errstate(invalid="ignore", divide="ignore"):
            beta = np.where(tot > 0, (p_nc - p_nd) / np.where(tot > 0, tot, 1), 0.0)
        exceed["blomqvist"] += int(np.count_nonzero(np.abs(beta) >= abs(obs["blomqvist"])))
    return [(name, obs[name], exceed[name] / B) for name in ("pearson", "spearman", "kendall", "blomqvist")]
