"""Closed-form bivariate copulas, their conditional cdf's and samplers.

Every model is a small frozen dataclass exposing ``cdf``, ``conditional_cdf``
and ``inverse_conditional``.  Inputs broadcast like numpy ufuncs; scalar
inputs give Python floats back.

The conditional cdf ``h(u, v) = dC(u, v)/du`` is taken right-continuous in
``v`` (at switching curves of the ``min`` formulas the branch of the larger
``v`` is used, which is the left derivative in ``u``).  Sampling uses the
generalized inverse ``inf{v : h(u, v) >= t}``, so atoms of ``h`` coming
from singular components are hit with the right mass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .exceptions import DomainError

__all__ = [
    "CopulaModel",
    "Independence",
    "FrechetUpper",
    "FrechetLower",
    "FrechetMixture",
    "MarshallOlkin",
    "MaiScherer",
    "QuasiCopulaCc",
    "Sample",
    "copula_cdf",
    "conditional_cdf",
    "sample",
    "rectangle_volume",
    "find_negative_rectangle",
    "parse_model",
]

BISECTION_TOL = 1e-12


def _as_unit(u, v, *, closed: bool):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if closed:
        bad = (u < 0) | (u > 1) | (v < 0) | (v > 1) | np.isnan(u) | np.isnan(v)
    else:
        bad = ~((u > 0) & (u < 1) & (v > 0) & (v < 1))
    if np.any(bad):
        where = "[0,1]^2" if closed else "(0,1)^2"
        raise DomainError(f"point(s) outside {where}")
    return np.broadcast_arrays(u, v)


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


@dataclass(frozen=True)
class Sample:
    """Paired observations ``(x_i, y_i)``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise ValueError(f"columns differ in length: {x.size} vs {y.size}")
        if x.size < 1:
            raise ValueError("empty sample")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("sample contains non-finite values")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return int(self.x.size)

    def __len__(self):
        return self.n


class CopulaModel:
    """Base class for the analytic models.

    Subclasses implement ``_cdf`` on the closed square and ``_h`` (the
    conditional cdf) on the open square.
    """

    tag: ClassVar[str] = ""
    #: False for functions that satisfy the boundary conditions but are not
    #: 2-increasing (and therefore not distributions).
    is_copula: ClassVar[bool] = True

    def _cdf(self, u, v):
        raise NotImplementedError

    def _h(self, u, v):
        raise NotImplementedError

    @property
    def params(self) -> tuple[float, ...]:
        return ()

    @property
    def spec(self) -> str:
        if not self.params:
            return self.tag
        return self.tag + ":" + ",".join(f"{p:g}" for p in self.params)

    def cdf(self, u, v):
        """Evaluate ``C(u, v)`` on ``[0, 1]^2`` with exact boundary values."""
        u, v = _as_unit(u, v, closed=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            c = np.asarray(self._cdf(u, v), dtype=float)
        c = np.where(u == 1.0, v, c)
        c = np.where(v == 1.0, u, c)
        c = np.where((u == 0.0) | (v == 0.0), 0.0, c)
        return _out(c)

    def conditional_cdf(self, u, v):
        """``P(V <= v | U = u)`` for ``u, v`` in ``(0, 1)``."""
        u, v = _as_unit(u, v, closed=False)
        return _out(self._h(u, v))

    def _require_distribution(self):
        if not self.is_copula:
            raise DomainError(f"{self.spec} is not a distribution function")

    def inverse_conditional(self, u, t):
        """Generalized inverse ``inf{v : h(u, v) >= t}`` by bisection."""
        self._require_distribution()
        u = np.asarray(u, dtype=float)
        t = np.asarray(t, dtype=float)
        u, t = np.broadcast_arrays(u, t)
        lo = np.zeros(u.shape)
        hi = np.ones(u.shape)
        # 1 / 2^41 < 1e-12
        n_iter = int(np.ceil(np.log2(1.0 / BISECTION_TOL))) + 1
        for _ in range(n_iter):
            mid = 0.5 * (lo + hi)
            ok = self._h(u, mid) >= t
            hi = np.where(ok, mid, hi)
            lo = np.where(ok, lo, mid)
        return _out(hi)

    def sample(self, n: int, seed: int | None = None) -> Sample:
        """Draw ``n`` i.i.d. pairs by conditional inversion."""
        self._require_distribution()
        if n < 1:
            raise ValueError("n must be >= 1")
        rng = np.random.default_rng(seed)
        u = rng.uniform(np.finfo(float).tiny, 1.0, size=n)
        t = rng.random(n)
        v = np.asarray(self.inverse_conditional(u, t), dtype=float)
        return Sample(u, v)

    def rectangle_volume(self, u1, u2, v1, v2):
        """C-volume of ``[u1, u2] x [v1, v2]``."""
        u1, u2, v1, v2 = (np.asarray(a, dtype=float) for a in (u1, u2, v1, v2))
        if np.any(~(u1 < u2)) or np.any(~(v1 < v2)):
            raise DomainError("rectangle needs u1 < u2 and v1 < v2")
        return _out(
            np.asarray(self.cdf(u2, v2))
            - np.asarray(self.cdf(u1, v2))
            - np.asarray(self.cdf(u2, v1))
            + np.asarray(self.cdf(u1, v1))
        )

    def __str__(self):
        return self.spec


@dataclass(frozen=True)
class Independence(CopulaModel):
    tag: ClassVar[str] = "independence"

    def _cdf(self, u, v):
        return u * v

    def _h(self, u, v):
        return np.array(v, dtype=float, copy=True)

    def inverse_conditional(self, u, t):
        u, t = np.broadcast_arrays(np.asarray(u, float), np.asarray(t, float))
        return _out(t)


@dataclass(frozen=True)
class FrechetUpper(CopulaModel):
    """Comonotone copula ``M(u, v) = min(u, v)``."""

    tag: ClassVar[str] = "upper"

    def _cdf(self, u, v):
        return np.minimum(u, v)

    def _h(self, u, v):
        return np.where(v >= u, 1.0, 0.0)

    def inverse_conditional(self, u, t):
        u, t = np.broadcast_arrays(np.asarray(u, float), np.asarray(t, float))
        return _out(u)


@dataclass(frozen=True)
class FrechetLower(CopulaModel):
    """Countermonotone copula ``W(u, v) = max(u + v - 1, 0)``."""

    tag: ClassVar[str] = "lower"

    def _cdf(self, u, v):
        return np.maximum(u + v - 1.0, 0.0)

    def _h(self, u, v):
        return np.where(v >= 1.0 - u, 1.0, 0.0)

    def inverse_conditional(self, u, t):
        u, t = np.broadcast_arrays(np.asarray(u, float), np.asarray(t, float))
        return _out(1.0 - u)


@dataclass(frozen=True)
class FrechetMixture(CopulaModel):
    """``(1 - theta) uv + theta min(u, v)``, increasing in concordance with theta."""

    theta: float
    tag: ClassVar[str] = "mixture"

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise DomainError(f"theta must lie in [0, 1], got {self.theta}")

    @property
    def params(self):
        return (self.theta,)

    def _cdf(self, u, v):
        return (1.0 - self.theta) * u * v + self.theta * np.minimum(u, v)

    def _h(self, u, v):
        return (1.0 - self.theta) * v + self.theta * (v >= u)


@dataclass(frozen=True)
class MarshallOlkin(CopulaModel):
    """``min(u^(1-a) v, u v^(1-b))`` with ``a, b`` in ``(0, 1)``."""

    a: float
    b: float
    tag: ClassVar[str] = "mo"

    def __post_init__(self):
        for name, p in (("a", self.a), ("b", self.b)):
            if not 0.0 < p < 1.0:
                raise DomainError(f"Marshall-Olkin {name} must lie in (0, 1), got {p}")

    @property
    def params(self):
        return (self.a, self.b)

    def _cdf(self, u, v):
        return np.minimum(u ** (1.0 - self.a) * v, u * v ** (1.0 - self.b))

    def _h(self, u, v):
        a, b = self.a, self.b
        return np.where(u**a <= v**b, v ** (1.0 - b), (1.0 - a) * u ** (-a) * v)


@dataclass(frozen=True)
class MaiScherer(CopulaModel):
    """``min(u^a, v^b) min(u^(1-a), v^(1-b))`` with ``a, b`` in ``(0, 1]``."""

    a: float
    b: float
    tag: ClassVar[str] = "ms"

    def __post_init__(self):
        for name, p in (("a", self.a), ("b", self.b)):
            if not 0.0 < p <= 1.0:
                raise DomainError(f"Mai-Scherer {name} must lie in (0, 1], got {p}")

    @property
    def params(self):
        return (self.a, self.b)

    def _cdf(self, u, v):
        a, b = self.a, self.b
        return np.minimum(u**a, v**b) * np.minimum(u ** (1.0 - a), v ** (1.0 - b))

    def _h(self, u, v):
        a, b = self.a, self.b
        first = u**a <= v**b
        second = u ** (1.0 - a) <= v ** (1.0 - b)
        m1 = np.where(first, u**a, v**b)
        m2 = np.where(second, u ** (1.0 - a), v ** (1.0 - b))
        dm1 = np.where(first, a * u ** (a - 1.0), 0.0)
        dm2 = np.where(second, (1.0 - a) * u ** (-a), 0.0)
        return dm1 * m2 + m1 * dm2


@dataclass(frozen=True)
class QuasiCopulaCc(CopulaModel):
    """``uv + c sqrt(uv(1-u)(1-v))``: the function with constant dependence ``c``.

    It meets the boundary conditions of a copula but, for ``c != 0``, has
    rectangles of negative volume, so it is not a cdf.
    """

    c: float
    tag: ClassVar[str] = "cc"

    def __post_init__(self):
        if not -1.0 <= self.c <= 1.0:
            raise DomainError(f"c must lie in [-1, 1], got {self.c}")

    @property
    def is_copula(self):  # type: ignore[override]
        return self.c == 0.0

    @property
    def params(self):
        return (self.c,)

    def _cdf(self, u, v):
        return u * v + self.c * np.sqrt(u * v * (1.0 - u) * (1.0 - v))

    def _h(self, u, v):
        return v + self.c * np.sqrt(v * (1.0 - v)) * (1.0 - 2.0 * u) / (
            2.0 * np.sqrt(u * (1.0 - u))
        )


_TAGS = {
    "independence": Independence,
    "indep": Independence,
    "pi": Independence,
    "upper": FrechetUpper,
    "m": FrechetUpper,
    "lower": FrechetLower,
    "w": FrechetLower,
    "mixture": FrechetMixture,
    "mo": MarshallOlkin,
    "marshall-olkin": MarshallOlkin,
    "ms": MaiScherer,
    "mai-scherer": MaiScherer,
    "cc": QuasiCopulaCc,
}


def parse_model(text: str) -> CopulaModel:
    """Build a model from ``name[:p1,p2]``, e.g. ``mo:0.5,0.75``."""
    name, _, rest = text.strip().partition(":")
    cls = _TAGS.get(name.strip().lower())
    if cls is None:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(set(_TAGS))}")
    try:
        params = [float(p) for p in rest.split(",")] if rest.strip() else []
    except ValueError:
        raise ValueError(f"bad parameters in model spec {text!r}") from None
    try:
        return cls(*params)
    except TypeError:
        raise ValueError(f"wrong number of parameters in model spec {text!r}") from None


def copula_cdf(model: CopulaModel, u, v):
    return model.cdf(u, v)


def conditional_cdf(model: CopulaModel, u, v):
    return model.conditional_cdf(u, v)


def sample(model: CopulaModel, n: int, seed: int | None = None) -> Sample:
    return model.sample(n, seed)


def rectangle_volume(model: CopulaModel, u1, u2, v1, v2):
    return model.rectangle_volume(u1, u2, v1, v2)


def find_negative_rectangle(
    model: CopulaModel,
    candidates: int = 10_000,
    seed: int = 0,
    threshold: float = -1e-6,
    min_side: float = 1e-3,
    max_side: float = 0.2,
):
    """Random search for a rectangle whose C-volume is below ``threshold``.

    Rectangles have uniformly placed centres and log-uniform side lengths.
    Returns ``(u1, u2, v1, v2, volume)`` of the most negative candidate if it
    is below ``threshold``, else ``None``.
    """
    rng = np.random.default_rng(seed)
    cu, cv = rng.random(candidates), rng.random(candidates)
    lo, hi = np.log(min_side), np.log(max_side)
    hu = 0.5 * np.exp(rng.uniform(lo, hi, candidates))
    hv = 0.5 * np.exp(rng.uniform(lo, hi, candidates))
    u1, u2 = np.clip(cu - hu, 0, 1), np.clip(cu + hu, 0, 1)
    v1, v2 = np.clip(cv - hv, 0, 1), np.clip(cv + hv, 0, 1)
    vol = np.asarray(model.rectangle_volume(u1, u2, v1, v2))
    k = int(np.argmin(vol))
    if vol[k] < threshold:
        return float(u1[k]), float(u2[k]), float(v1[k]), float(v2[k]), float(vol[k])
    return None
