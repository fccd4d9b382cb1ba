"""Command-line scan tool: ``anyon-hbt --alphas 0,0.5,1 --source gaussian ...``.

Writes one wide CSV per run (one column per alpha) and prints a short
summary. Exit status is 0 on success, 1 for usage or validation errors and
2 when a numerical failure stops the scan.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .correlator import QuadraturePolicy, ScanError, scan
from .errors import ConvergenceError, DomainError
from .sources import RadialSource
from .special_functions import BesselAccuracy
from .wavefunction import TruncationPolicy

__all__ = ["RunConfig", "UsageError", "parse_config", "run", "main", "read_scan_csv"]

DEFAULT_ALPHAS = tuple(round(0.1 * i, 1) for i in range(11))

# config-file keys and the argparse destinations they map to
_KEYS = {
    "alphas": "alphas",
    "source": "source",
    "table": "table",
    "r0": "r0",
    "qmin": "qmin",
    "qmax": "qmax",
    "npoints": "npoints",
    "out": "out",
    "mc": "mc",
    "seed": "seed",
    "l_margin": "l_margin",
    "term_tol": "term_tol",
    "rmax_mult": "rmax_mult",
    "quad_tol": "quad_tol",
    "workers": "workers",
}

_DEFAULTS = {
    "alphas": ",".join(f"{a:g}" for a in DEFAULT_ALPHAS),
    "source": "gaussian",
    "table": None,
    "r0": "1",
    "qmin": "0",
    "qmax": "2.5",
    "npoints": "200",
    "out": "c2_scan.csv",
    "mc": None,
    "seed": "0",
    "l_margin": None,
    "term_tol": None,
    "rmax_mult": None,
    "quad_tol": None,
    "workers": "1",
}


class UsageError(Exception):
    """Bad flag, bad config key or a violated configuration invariant."""


@dataclass
class RunConfig:
    alphas: list[float]
    source_kind: str
    r0: float
    table_path: str | None
    q_r0_min: float
    q_r0_max: float
    n_points: int
    output_path: str
    trunc: TruncationPolicy = field(default_factory=TruncationPolicy)
    quad: QuadraturePolicy = field(default_factory=QuadraturePolicy)
    acc: BesselAccuracy = field(default_factory=BesselAccuracy)
    mc_check: tuple[int, int] | None = None
    workers: int = 1

    def __post_init__(self):
        if not self.alphas:
            raise UsageError("alphas must be non-empty")
        for a in self.alphas:
            if not 0.0 <= a <= 1.0:
                raise UsageError(f"alpha out of [0,1]: {a:g}")
        if len(set(self.alphas)) != len(self.alphas):
            raise UsageError("alphas must be distinct")
        if self.n_points < 2:
            raise UsageError(f"npoints must be at least 2, got {self.n_points}")
        if self.q_r0_min < 0.0:
            raise UsageError("qmin must be non-negative")
        if not self.q_r0_max > self.q_r0_min:
            raise UsageError("qmax must exceed qmin")
        if self.source_kind not in ("gaussian", "step", "tabulated"):
            raise UsageError(f"unknown source {self.source_kind!r}")
        if self.source_kind == "tabulated" and not self.table_path:
            raise UsageError("source tabulated needs --table")
        if not self.r0 > 0.0:
            raise UsageError("r0 must be positive")
        if self.mc_check is not None and self.mc_check[0] < 1000:
            raise UsageError("mc needs at least 1000 samples")

    @property
    def q_grid(self) -> np.ndarray:
        return np.linspace(self.q_r0_min, self.q_r0_max, self.n_points)

    def build_source(self) -> RadialSource:
        if self.source_kind == "gaussian":
            return RadialSource.gaussian(self.r0)
        if self.source_kind == "step":
            return RadialSource.step(self.r0)
        return RadialSource.from_file(self.table_path, r0=self.r0)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="anyon-hbt", description="Scan the anyon pair correlation C2(q r0).")
    p.add_argument("--alphas", help="comma-separated anyon parameters in [0,1]")
    p.add_argument("--source", choices=("gaussian", "step", "tabulated"))
    p.add_argument("--table", help="tabulated source file ('r value' rows)")
    p.add_argument("--r0", help="source width")
    p.add_argument("--qmin", help="smallest q*r0")
    p.add_argument("--qmax", help="largest q*r0")
    p.add_argument("--npoints", help="number of grid points")
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--mc", help="Monte Carlo cross-check with this many samples")
    p.add_argument("--seed", help="Monte Carlo seed")
    p.add_argument("--l-margin", dest="l_margin", help="partial-wave margin above q*r")
    p.add_argument("--term-tol", dest="term_tol", help="partial-wave tail tolerance")
    p.add_argument("--rmax-mult", dest="rmax_mult", help="Gaussian cutoff in units of r0")
    p.add_argument("--quad-tol", dest="quad_tol", help="relative quadrature tolerance")
    p.add_argument("--workers", help="worker processes for the scan")
    return p


def _read_config_file(path) -> dict:
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in body.split("=", 1))
        norm = key.replace("-", "_")
        if norm not in _KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[_KEYS[norm]] = value
    return values


def _num(name, text, kind=float):
    try:
        value = kind(text)
    except (TypeError, ValueError):
        raise UsageError(f"{name}: cannot parse {text!r}") from None
    if kind is float and not math.isfinite(value):
        raise UsageError(f"{name}: must be finite")
    return value


def parse_config(argv=None) -> RunConfig:
    """Merge defaults, an optional config file and command-line flags (flags win)."""
    args = _build_parser().parse_args(argv)
    merged = dict(_DEFAULTS)
    if args.config:
        merged.update(_read_config_file(args.config))
    for key in _KEYS.values():
        flag_value = getattr(args, key)
        if flag_value is not None:
            merged[key] = flag_value

    alphas = [_num("alphas", a.strip()) for a in str(merged["alphas"]).split(",") if a.strip()]
    trunc_kw, quad_kw = {}, {}
    if merged["l_margin"] is not None:
        trunc_kw["l_margin"] = _num("l-margin", merged["l_margin"], int)
    if merged["term_tol"] is not None:
        trunc_kw["term_tolerance"] = _num("term-tol", merged["term_tol"])
    if merged["rmax_mult"] is not None:
        quad_kw["r_max_multiplier"] = _num("rmax-mult", merged["rmax_mult"])
    if merged["quad_tol"] is not None:
        tol = _num("quad-tol", merged["quad_tol"])
        quad_kw["rel_tol"] = tol
        quad_kw["abs_tol"] = 0.1 * tol
    try:
        trunc = TruncationPolicy(**trunc_kw)
        quad = QuadraturePolicy(**quad_kw)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    mc = None
    if merged["mc"] is not None:
        mc = (_num("mc", merged["mc"], int), _num("seed", merged["seed"], int))
    return RunConfig(
        alphas=alphas,
        source_kind=str(merged["source"]),
        r0=_num("r0", merged["r0"]),
        table_path=merged["table"],
        q_r0_min=_num("qmin", merged["qmin"]),
        q_r0_max=_num("qmax", merged["qmax"]),
        n_points=_num("npoints", merged["npoints"], int),
        output_path=str(merged["out"]),
        trunc=trunc,
        quad=quad,
        mc_check=mc,
        workers=_num("workers", merged["workers"], int),
    )


def _fmt(v: float) -> str:
    return f"{v:.11e}"


def format_csv(curves, source_kind: str, r0: float) -> str:
    lines = [f"# anyon-hbt scan: source={source_kind} r0={r0:g}"]
    cols = ["q_r0"]
    for c in curves:
        label = f"alpha_{c.alpha.alpha:g}"
        cols.append(label)
        if c.mc is not None:
            cols += [f"{label}_mc", f"{label}_mcerr"]
    lines.append(",".join(cols))
    grid = curves[0].q_r0
    for i, q in enumerate(grid):
        row = [_fmt(q)]
        for c in curves:
            row.append(_fmt(c.c2[i]))
            if c.mc is not None:
                row += [_fmt(c.mc[i]), _fmt(c.mc_err[i])]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def read_scan_csv(path):
    """Parse a scan CSV into ``(header, {column: ndarray})``."""
    lines = Path(path).read_text().splitlines()
    header = lines[0]
    names = lines[1].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:] if ln], dtype=float)
    return header, {n: data[:, i] for i, n in enumerate(names)}


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute a scan and write the CSV; returns the process exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    t0 = time.perf_counter()
    try:
        src = cfg.build_source()
    except (DomainError, OSError) as exc:
        print(f"anyon-hbt: source error: {exc}", file=stderr)
        return 1
    try:
        curves = scan(cfg.alphas, src, cfg.q_grid, cfg.quad, cfg.trunc, cfg.acc,
                      mc=cfg.mc_check, workers=cfg.workers)
    except ScanError as exc:
        print(f"anyon-hbt: numerical failure\n{exc}", file=stderr)
        return 2
    except ConvergenceError as exc:
        print(f"anyon-hbt: numerical failure: {exc}", file=stderr)
        return 2
    Path(cfg.output_path).write_text(format_csv(curves, src.kind, src.r0))
    wall = time.perf_counter() - t0
    print(f"anyon-hbt: source={src.kind} r0={src.r0:g} points={cfg.n_points} "
          f"q_r0=[{cfg.q_r0_min:g}, {cfg.q_r0_max:g}] -> {cfg.output_path}", file=stdout)
    print(f"{'alpha':>7} {'min quad err':>14} {'max quad err':>14} {'max l terms':>12} "
          f"{'C2(q_min)':>14}" + (f" {'max |mc-c2|/err':>16}" if cfg.mc_check else ""),
          file=stdout)
    for c in curves:
        line = (f"{c.alpha.alpha:7.3g} {c.err_est.min():14.3e} {c.err_est.max():14.3e} "
                f"{int(c.terms_used.max()):12d} {c.c2[0]:14.8f}")
        if c.mc is not None:
            z = np.abs(c.mc - c.c2) / np.where(c.mc_err > 0, c.mc_err, np.inf)
            line += f" {z.max():16.2f}"
        print(line, file=stdout)
    print(f"wall time {wall:.2f} s", file=stdout)
    return 0


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"anyon-hbt: usage error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
