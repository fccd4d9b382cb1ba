"""Pair correlation function C2(q) for anyons from a radial source.

    C2(q) - 1 = 2 pi * int_0^inf r K0(q, r) S(r) dr

The radial integral uses adaptive composite Gauss-Legendre panels no wider
than a fixed fraction of the kernel oscillation length ``pi / q``; the local
error is the difference between a panel and its two halves.
"""
from __future__ import annotations

import math
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, QuadratureError
from .kernel import angle_averaged_kernel
from .sources import RadialSource, sample_r
from .special_functions import DEFAULT_ACCURACY, BesselAccuracy, bessel_j
from .wavefunction import DEFAULT_TRUNCATION, AnyonParameter, TruncationPolicy, as_alpha

__all__ = [
    "QuadraturePolicy",
    "CorrelationCurve",
    "PointResult",
    "ScanError",
    "c2_point",
    "c2_point_detail",
    "c2_closed_form",
    "c2_monte_carlo",
    "scan",
]

_GL_ORDER = 10
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadraturePolicy:
    r_max_multiplier: float = 12.0
    abs_tol: float = 1e-9
    rel_tol: float = 1e-8
    max_subdivisions: int = 200
    panels_per_oscillation: int = 8

    def __post_init__(self):
        for name in ("r_max_multiplier", "abs_tol", "rel_tol", "max_subdivisions",
                     "panels_per_oscillation"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.panels_per_oscillation < 4:
            raise DomainError("panels_per_oscillation must be at least 4")


DEFAULT_QUADRATURE = QuadraturePolicy()


@dataclass(frozen=True)
class PointResult:
    c2: float
    err_est: float
    terms_used: int
    subdivisions: int


class ScanError(ConvergenceError):
    """One or more scan points failed; ``failures`` holds ``(alpha, q_r0, message)``."""

    def __init__(self, failures):
        self.failures = list(failures)
        lines = [f"alpha={a:g} q_r0={q:g}: {msg}" for a, q, msg in self.failures]
        super().__init__(f"{len(self.failures)} scan point(s) failed:\n  " + "\n  ".join(lines))


@dataclass
class CorrelationCurve:
    """``C2`` against ``q r0`` for one anyon parameter."""

    alpha: AnyonParameter
    source: dict
    q_r0: np.ndarray
    c2: np.ndarray
    err_est: np.ndarray
    terms_used: np.ndarray
    mc: np.ndarray | None = None
    mc_err: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.q_r0.size and (self.q_r0[0] < 0.0 or np.any(np.diff(self.q_r0) <= 0.0)):
            raise DomainError("q_r0 grid must be non-negative and strictly increasing")
        if np.any(self.c2 < -1e-6):
            raise ConvergenceError(f"negative C2 on curve alpha={self.alpha.alpha:g}")

    @property
    def points(self):
        return list(zip(self.q_r0.tolist(), self.c2.tolist()))

    @property
    def diagnostics(self):
        return list(zip(self.terms_used.tolist(), self.err_est.tolist()))


def _gl_nodes(a: np.ndarray, b: np.ndarray):
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    return nodes, half


def _integration_edges(src: RadialSource, q: float, quad: QuadraturePolicy) -> np.ndarray:
    upper = src.support
    if upper is None:
        upper = quad.r_max_multiplier * src.r0
    breaks = src.breakpoints
    breaks = breaks[(breaks >= 0.0) & (breaks <= upper)]
    edges = np.unique(np.concatenate([[0.0, upper], breaks]))
    if q > 0.0:
        cap = (math.pi / q) / quad.panels_per_oscillation
    else:
        cap = upper / 4.0
    out = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        n = max(1, int(math.ceil((b - a) / cap - 1e-12)))
        out.extend(a + (b - a) * np.arange(1, n + 1) / n)
    return np.asarray(out)


def c2_point_detail(alpha, src: RadialSource, q: float,
                    quad: QuadraturePolicy = DEFAULT_QUADRATURE,
                    trunc: TruncationPolicy = DEFAULT_TRUNCATION,
                    acc: BesselAccuracy = DEFAULT_ACCURACY) -> PointResult:
    """:func:`c2_point` with kernel and subdivision diagnostics."""
    a = as_alpha(alpha)
    q = float(q)
    if not q >= 0.0:
        raise DomainError(f"q must be non-negative, got {q!r}")
    upper = src.support
    tail = 0.0
    if upper is None:
        upper = quad.r_max_multiplier * src.r0
        tail = src.mass_beyond(upper)
    if q == 0.0:
        # K0(0, r) is +1 for bosons and -1 otherwise; no oscillation to resolve
        sign = 1.0 if a.is_boson else -1.0
        mass = 1.0 - tail
        return PointResult(1.0 + sign * mass, tail + _EPS, 0, 0)

    def integrand(r):
        ker = angle_averaged_kernel(a, q * r, trunc)
        return 2.0 * math.pi * r * ker.values * src.density(r), ker.terms_used

    edges = _integration_edges(src, q, quad)
    lo, hi = edges[:-1], edges[1:]
    whole = None
    total_width = hi[-1] - lo[0]
    terms = 0
    accepted_val = 0.0
    accepted_err = 0.0
    accepted_abs = 0.0
    subdivisions = 0
    while lo.size:
        mid = 0.5 * (lo + hi)
        left_nodes, left_half = _gl_nodes(lo, mid)
        right_nodes, right_half = _gl_nodes(mid, hi)
        parts = [left_nodes, right_nodes]
        if whole is None:
            # first pass: the unsplit panels ride along in the same kernel call
            whole_nodes, whole_half = _gl_nodes(lo, hi)
            parts.append(whole_nodes)
        f, t = integrand(np.concatenate(parts))
        terms = max(terms, t)
        n = lo.size
        left = left_half * (f[:n] @ _GL_WEIGHTS)
        right = right_half * (f[n:2 * n] @ _GL_WEIGHTS)
        if whole is None:
            whole = whole_half * (f[2 * n:] @ _GL_WEIGHTS)
        refined = left + right
        err = np.abs(refined - whole)
        estimate = accepted_val + refined.sum()
        budget = max(quad.abs_tol, quad.rel_tol * abs(1.0 + estimate))
        ok = err <= 0.5 * budget * (hi - lo) / total_width
        accepted_val += refined[ok].sum()
        accepted_err += err[ok].sum()
        accepted_abs += (np.abs(left) + np.abs(right))[ok].sum()
        bad = ~ok
        if not bad.any():
            break
        subdivisions += int(bad.sum())
        if subdivisions > quad.max_subdivisions:
            raise QuadratureError(
                f"C2 integral for alpha={a.alpha:g}, q={q:g} needs more than "
                f"{quad.max_subdivisions} subdivisions (pending error {err[bad].sum():.3e})")
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
        whole = np.concatenate([left[bad], right[bad]])
        order = np.argsort(lo, kind="stable")
        lo, hi, whole = lo[order], hi[order], whole[order]
    err_est = accepted_err + tail + 16.0 * _EPS * max(accepted_abs, 1.0)
    return PointResult(1.0 + accepted_val, err_est, terms, subdivisions)


def c2_point(alpha, src: RadialSource, q: float,
             quad: QuadraturePolicy = DEFAULT_QUADRATURE,
             trunc: TruncationPolicy = DEFAULT_TRUNCATION,
             acc: BesselAccuracy = DEFAULT_ACCURACY):
    """Return ``(c2, err_est)`` at relative momentum ``q``."""
    res = c2_point_detail(alpha, src, q, quad, trunc, acc)
    return res.c2, res.err_est


def c2_closed_form(statistics: str, source_kind: str, q: float, r0: float) -> float:
    """Exact boson/fermion ``C2`` for the Gaussian and step sources."""
    if statistics not in ("boson", "fermion"):
        raise DomainError(f"statistics must be 'boson' or 'fermion', got {statistics!r}")
    if not (q >= 0.0 and r0 > 0.0):
        raise DomainError("need q >= 0 and r0 > 0")
    sign = 1.0 if statistics == "boson" else -1.0
    x = q * r0
    if source_kind == "gaussian":
        return 1.0 + sign * math.exp(-4.0 * x * x)
    if source_kind == "step":
        if x < 1e-8:
            ratio = 1.0 - 0.5 * x * x  # 2 J1(2x) / (2x) near zero
        else:
            ratio = bessel_j(1.0, 2.0 * x) / x
        return 1.0 + sign * ratio
    raise DomainError(f"no closed form for source kind {source_kind!r}")


def _substream(seed: int, alpha: float, q: float) -> np.random.Generator:
    words = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    words += list(struct.unpack("<2Q", struct.pack("<2d", float(alpha), float(q))))
    return np.random.default_rng(np.random.SeedSequence(words))


def c2_monte_carlo(alpha, src: RadialSource, q: float, n_samples: int, seed: int,
                   trunc: TruncationPolicy = DEFAULT_TRUNCATION,
                   acc: BesselAccuracy = DEFAULT_ACCURACY):
    """Sample-mean estimate of ``C2`` and its standard error.

    Separations are drawn from ``2 pi r S(r)``; the generator is seeded from
    ``(seed, alpha, q)`` so each call is reproducible on its own.
    """
    a = as_alpha(alpha)
    if n_samples < 1000:
        raise DomainError("n_samples must be at least 1000")
    rng = _substream(seed, a.alpha, q)
    r = sample_r(src, rng, n_samples)
    k = angle_averaged_kernel(a, q * r, trunc).values
    mean = float(k.mean())
    std_err = float(k.std(ddof=1) / math.sqrt(n_samples))
    return 1.0 + mean, std_err


def _scan_point(job):
    alpha, src, q_r0, quad, trunc, acc, mc = job
    q = q_r0 / src.r0
    try:
        res = c2_point_detail(alpha, src, q, quad, trunc, acc)
        out = [res.c2, res.err_est, res.terms_used]
        if mc is not None:
            est, err = c2_monte_carlo(alpha, src, q, mc[0], mc[1], trunc, acc)
            out += [est, err]
        return out, None
    except ConvergenceError as exc:
        return None, str(exc)


def scan(alphas, src: RadialSource, q_grid,
         quad: QuadraturePolicy = DEFAULT_QUADRATURE,
         trunc: TruncationPolicy = DEFAULT_TRUNCATION,
         acc: BesselAccuracy = DEFAULT_ACCURACY,
         mc: tuple[int, int] | None = None,
         workers: int | None = None) -> list[CorrelationCurve]:
    """Evaluate ``C2`` on a ``q r0`` grid for each alpha.

    Points are independent; with ``workers > 1`` they run in a process pool
    and are reassembled in grid order, so output does not depend on
    scheduling. Failed points are collected and raised together as
    :class:`ScanError`.
    """
    params = [as_alpha(a) for a in alphas]
    grid = np.asarray(q_grid, dtype=float)
    if not params or grid.size == 0:
        raise DomainError("alphas and q grid must be non-empty")
    if grid[0] < 0.0 or np.any(np.diff(grid) <= 0.0):
        raise DomainError("q grid must be non-negative and strictly increasing")
    jobs = [(p, src, float(x), quad, trunc, acc, mc) for p in params for x in grid]
    t0 = time.perf_counter()
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_scan_point(j) for j in jobs]
    failures = [(j[0].alpha, j[2], msg) for j, (_, msg) in zip(jobs, results) if msg]
    if failures:
        raise ScanError(failures)
    elapsed = time.perf_counter() - t0
    curves = []
    width = 5 if mc is not None else 3
    table = np.array([r for r, _ in results], dtype=float).reshape(len(params), grid.size, width)
    for p, rows in zip(params, table):
        curves.append(CorrelationCurve(
            alpha=p,
            source=src.descriptor(),
            q_r0=grid.copy(),
            c2=rows[:, 0].copy(),
            err_est=rows[:, 1].copy(),
            terms_used=rows[:, 2].astype(int),
            mc=rows[:, 3].copy() if mc is not None else None,
            mc_err=rows[:, 4].copy() if mc is not None else None,
            meta={"wall_time": elapsed},
        ))
    return curves
