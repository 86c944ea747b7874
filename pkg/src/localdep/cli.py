"""Command-line interface.

Subcommands::

    localdep surface  --model mo:0.5,0.75 | --bound lower|upper
    localdep estimate --input data.csv | --model ms:0.9,0.5 --n 500
    localdep heatmap  --input data.csv | --model ...
    localdep test     --kind global_pqd_Lstar --input data.csv
    localdep table    --n 200 --point 0.5,0.5 --alpha 0.05

Exit codes: 0 success, 2 configuration error, 3 input error.
"""

from __future__ import annotations

import argparse
import re
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from . import io, plotting
from .copulas import CopulaModel, parse_model
from .dependence import Grid, surface
from .empirical import rank_transform, summary, surface_estimate
from .exceptions import DomainError, ParseError, TieError
from .inference import (
    DEFAULT_B,
    TEST_KINDS,
    classical_stats,
    run_test,
    simulate_null,
)

EXIT_OK, EXIT_CONFIG, EXIT_INPUT = 0, 2, 3
FORMATS = ("csv", "svg")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input: Path | None = None
    model: CopulaModel | None = None
    bound: str | None = None
    n: int = 500
    columns: tuple[int, int] = (0, 1)
    drop_missing: bool = False
    grid: int = 16
    B: int = DEFAULT_B
    seed: int = 0
    alphas: list[float] = field(default_factory=list)
    points: list[tuple[float, float]] = field(default_factory=list)
    sizes: list[int] = field(default_factory=list)
    ties: str = "midrank"
    out: Path = Path(".")
    formats: tuple[str, ...] = ("csv",)
    kinds: list[str] = field(default_factory=list)
    signed: bool = False
    null: Path | None = None
    workers: int = 1

    def validate(self):
        if self.command in ("estimate", "heatmap", "test"):
            if (self.input is None) == (self.model is None):
                raise ConfigError("give exactly one of --input and --model")
        if self.command == "surface":
            if (self.model is None) == (self.bound is None):
                raise ConfigError("give exactly one of --model and --bound")
        if self.grid < 2:
            raise ConfigError("--grid must be >= 2")
        if self.B < 1:
            raise ConfigError("--B must be >= 1")
        if self.seed < 0:
            raise ConfigError("--seed must be non-negative")
        if self.n < 2:
            raise ConfigError("--n must be >= 2")
        for a in self.alphas:
            if not 0 < a < 1:
                raise ConfigError(f"--alpha must lie in (0, 1), got {a}")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise ConfigError(f"unknown format(s) {sorted(bad)}; choose from {FORMATS}")
        try:
            self.out.mkdir(parents=True, exist_ok=True)
            probe = self.out / ".localdep-write-test"
            probe.touch()
            probe.unlink()
        except OSError as exc:
            raise ConfigError(f"output directory {self.out} is not writable: {exc}") from None


def _floats(text: str, count: int | None = None) -> list[float]:
    try:
        vals = [float(t) for t in re.split(r"[,;\s]+", text.strip()) if t]
    except ValueError:
        raise ConfigError(f"expected numbers, got {text!r}") from None
    if count is not None and len(vals) != count:
        raise ConfigError(f"expected {count} numbers, got {text!r}")
    return vals


def clamp_point(point, g: int):
    """Move coordinates outside ``(0, 1)`` onto the nearest grid tick."""
    lo, hi = 1.0 / g, (g - 1.0) / g
    out = tuple(min(max(c, lo), hi) if not 0 < c < 1 else c for c in point)
    if out != tuple(point):
        print(f"note: point {point} clamped to {out}", file=sys.stderr)
    return out


def _stem(cfg: RunConfig) -> str:
    if cfg.input is not None:
        return cfg.input.stem
    if cfg.model is not None:
        base = cfg.model.spec
        if cfg.command != "surface":
            base += f"_n{cfg.n}_seed{cfg.seed}"
        return re.sub(r"[^A-Za-z0-9._-]+", "_", base)
    return f"bound_{cfg.bound}"


def _load_sample(cfg: RunConfig):
    if cfg.input is not None:
        return io.parse_csv(cfg.input, cfg.columns, cfg.drop_missing)
    if not cfg.model.is_copula:
        raise ConfigError(f"cannot sample from {cfg.model.spec}: not a distribution")
    return cfg.model.sample(cfg.n, cfg.seed)


def _written(paths):
    for p in paths:
        print(f"wrote {p}")


def cmd_surface(cfg: RunConfig) -> int:
    grid = Grid(cfg.grid)
    src = cfg.model if cfg.model is not None else f"bound_{cfg.bound}"
    surf = surface(src, grid)
    stem = _stem(cfg)
    paths = []
    if "csv" in cfg.formats:
        paths.append(io.write_surface_csv(surf, cfg.out / f"{stem}_{surf.kind}.csv"))
    if "svg" in cfg.formats:
        paths.append(plotting.heatmap(surf, cfg.out / f"{stem}_{surf.kind}.svg"))
    _written(paths)
    return EXIT_OK


def _estimate(cfg: RunConfig, svg: bool, csv: bool) -> int:
    sample = _load_sample(cfg)
    ps = rank_transform(sample, cfg.ties, seed=cfg.seed)
    grid = Grid(cfg.grid)
    L = surface_estimate(ps, grid, standardized=True)
    Q = surface_estimate(ps, grid, standardized=False)
    stats = summary(L)
    stem = _stem(cfg)
    paths = []
    if csv:
        paths += [
            io.write_surface_csv(L, cfg.out / f"{stem}_L_n.csv"),
            io.write_surface_csv(Q, cfg.out / f"{stem}_Q_n.csv"),
            io.write_summary_csv(stats, cfg.out / f"{stem}_summary.csv", ps.n),
            io.write_pseudo_csv(ps, cfg.out / f"{stem}_pseudo.csv"),
        ]
    if svg:
        paths += [
            plotting.heatmap(L, cfg.out / f"{stem}_L_n.svg"),
            plotting.heatmap(Q, cfg.out / f"{stem}_Q_n.svg"),
            plotting.scatter(ps, cfg.out / f"{stem}_scatter.svg"),
        ]
    print(f"n = {ps.n}  L_* = {stats.l_star:.1f}  L^* = {stats.l_upper:.1f}  L^o = {stats.l_o:.1f}")
    _written(paths)
    return EXIT_OK


def cmd_estimate(cfg: RunConfig) -> int:
    return _estimate(cfg, svg="svg" in cfg.formats, csv="csv" in cfg.formats)


def cmd_heatmap(cfg: RunConfig) -> int:
    return _estimate(cfg, svg=True, csv="csv" in cfg.formats)


def cmd_test(cfg: RunConfig) -> int:
    sample = _load_sample(cfg)
    grid = Grid(cfg.grid)
    stem = _stem(cfg)
    kinds = cfg.kinds or ["global_independence_Lo"]
    if cfg.null is not None and len([k for k in kinds if k != "classical"]) != 1:
        raise ConfigError("--null needs exactly one non-classical --kind")
    reports, paths = [], []
    for kind in kinds:
        if kind == "classical":
            rows = []
            for name, est, p in classical_stats(sample, cfg.B, cfg.seed):
                print(f"{name}: estimate = {est:.4f}, permutation p-value = {p:.4f}")
                rows.append({"statistic": name, "estimate": io.fmt7(est), "p_value": f"{p:.4f}",
                             "B": cfg.B, "seed": cfg.seed, "n": sample.n})
            paths.append(io.write_rows_csv(rows, cfg.out / f"{stem}_classical.csv"))
            continue
        point = None
        if kind == "pointwise_independence":
            if not cfg.points:
                raise ConfigError("pointwise_independence needs --point")
            point = clamp_point(cfg.points[0], cfg.grid)
        null = None
        if cfg.null is not None and cfg.null.exists():
            null = io.read_null_table(cfg.null)
        elif cfg.null is not None:
            stat, _ = TEST_KINDS[kind]
            target = point if point is not None else grid
            null = simulate_null(sample.n, target, cfg.B, cfg.seed, stat, cfg.workers)
            paths.append(io.write_null_table(null, cfg.null))
        report = run_test(kind, sample, grid, cfg.B, cfg.seed, point, cfg.ties, null, cfg.workers)
        print(report.describe())
        reports.append(report)
    if reports:
        paths.append(io.write_reports_csv(reports, cfg.out / f"{stem}_tests.csv"))
    _written(paths)
    return EXIT_OK


def cmd_table(cfg: RunConfig) -> int:
    sizes = cfg.sizes or [200]
    points = [clamp_point(p, cfg.grid) for p in (cfg.points or [(0.5, 0.5)])]
    alphas = cfg.alphas or ([0.01, 0.05, 0.10, 0.90, 0.95, 0.99] if cfg.signed else [0.01, 0.05])
    statistic = "ln_point" if cfg.signed else "abs_ln_point"
    rows = []
    for n in sizes:
        for u, v in points:
            table = simulate_null(n, (u, v), cfg.B, cfg.seed, statistic, cfg.workers)
            for a in alphas:
                value = table.quantile(a if cfg.signed else 1.0 - a)
                rows.append({"n": n, "u": io.fmt7(u), "v": io.fmt7(v), "alpha": f"{a:g}",
                             "value": f"{value:.3f}", "statistic": statistic, "B": cfg.B, "seed": cfg.seed})
                print(f"n={n} (u,v)=({u:.4g},{v:.4g}) alpha={a:g}: {value:.3f}")
    name = "table_signed.csv" if cfg.signed else "table.csv"
    _written([io.write_rows_csv(rows, cfg.out / name)])
    return EXIT_OK


COMMANDS = {
    "surface": cmd_surface,
    "estimate": cmd_estimate,
    "heatmap": cmd_heatmap,
    "test": cmd_test,
    "table": cmd_table,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="localdep", description="Local quadrant dependence of bivariate data")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=True, default_format="csv"):
        if data:
            p.add_argument("--input", type=Path, help="CSV/whitespace file with two numeric columns")
            p.add_argument("--columns", default="0,1", help="zero-based column indices to use (default 0,1)")
            p.add_argument("--drop-missing", action="store_true", help="skip rows with missing cells")
            p.add_argument("--model", help="simulate from a model, e.g. mo:0.5,0.75")
            p.add_argument("--n", type=int, default=500, help="sample size when simulating (default 500)")
            p.add_argument("--ties", choices=["strict", "midrank", "random"], default="midrank")
        p.add_argument("--grid", type=int, default=16)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", type=Path, default=Path("."))
        p.add_argument("--format", default=default_format, help="comma list from {csv,svg}")

    p = sub.add_parser("surface", help="exact q_C or its bounds on a grid")
    p.add_argument("--model")
    p.add_argument("--bound", choices=["lower", "upper"])
    common(p, data=False)

    p = sub.add_parser("estimate", help="Q_n / L_n surfaces and L_*, L^*, L^o")
    common(p)

    p = sub.add_parser("heatmap", help="SVG heat maps of L_n and Q_n plus the pseudo-observation scatter")
    common(p, default_format="svg")

    p = sub.add_parser("test", help="Monte Carlo tests of independence / quadrant dependence")
    common(p)
    p.add_argument("--kind", action="append", choices=sorted(TEST_KINDS) + ["classical"])
    p.add_argument("--point", action="append", help="u,v for the pointwise test")
    p.add_argument("--B", type=int, default=DEFAULT_B)
    p.add_argument("--null", type=Path, help="null table file to load, or to create if absent")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("table", help="simulated critical values / quantiles of L_n under independence")
    p.add_argument("--n", action="append", help="sample size(s); repeat or comma-separate")
    p.add_argument("--point", action="append", help="u,v; repeatable")
    p.add_argument("--alpha", action="append", help="level(s); repeat or comma-separate")
    p.add_argument("--signed", action="store_true", help="quantiles of signed L_n instead of |L_n| critical values")
    p.add_argument("--B", type=int, default=DEFAULT_B)
    p.add_argument("--workers", type=int, default=1)
    common(p, data=False)
    return parser


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command)
    cfg.grid = args.grid
    cfg.seed = args.seed
    cfg.out = args.out
    cfg.formats = tuple(f.strip() for f in args.format.split(",") if f.strip())
    cfg.B = getattr(args, "B", DEFAULT_B)
    cfg.workers = getattr(args, "workers", 1)
    if getattr(args, "input", None) is not None:
        cfg.input = args.input
    if getattr(args, "model", None):
        try:
            cfg.model = parse_model(args.model)
        except (ValueError, DomainError) as exc:
            raise ConfigError(str(exc)) from None
    cfg.bound = getattr(args, "bound", None)
    if hasattr(args, "columns"):
        cols = [int(c) for c in _floats(args.columns, 2)]
        cfg.columns = (cols[0], cols[1])
        cfg.drop_missing = args.drop_missing
        cfg.ties = args.ties
    if args.command == "table":
        cfg.sizes = [int(x) for s in (args.n or []) for x in _floats(s)]
        cfg.alphas = [a for s in (args.alpha or []) for a in _floats(s)]
        cfg.signed = args.signed
    elif hasattr(args, "n"):
        cfg.n = args.n
    cfg.points = [tuple(_floats(s, 2)) for s in (getattr(args, "point", None) or [])]
    cfg.kinds = getattr(args, "kind", None) or []
    cfg.null = getattr(args, "null", None)
    if args.command == "table" and any(n < 2 for n in cfg.sizes):
        raise ConfigError("--n must be >= 2")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = config_from_args(args)
        cfg.validate()
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParseError, TieError, DomainError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
