"""Normalized two-dimensional pair-separation sources.

Every source satisfies ``2 pi * int_0^inf r S(r) dr = 1``. Radii are drawn
from the radial density ``p(r) = 2 pi r S(r)`` by inverse transform only, so
a fixed seed always consumes the same number of uniforms.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from .errors import DomainError

__all__ = [
    "RadialSource",
    "density",
    "check_normalization",
    "sample_r",
    "load_table",
]

KINDS = ("gaussian", "step", "tabulated")
_UNITS_RE = re.compile(r"#\s*units\s*:\s*(\S+)", re.IGNORECASE)


def _segment_moments(r: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Exact ``int r S dr`` over each segment of a piecewise-linear S."""
    a, b = r[:-1], r[1:]
    return (b - a) / 6.0 * ((2.0 * a + b) * s[:-1] + (a + 2.0 * b) * s[1:])


@dataclass(frozen=True)
class RadialSource:
    """Angle-averaged emission profile ``S(r)`` with width ``r0``.

    Build instances with :meth:`gaussian`, :meth:`step` or :meth:`tabulated`.
    Tabulated profiles are linearly interpolated, zero past the last node,
    and rescaled at construction so they integrate to one.
    """

    kind: str
    r0: float
    table: tuple | None = None
    _r: np.ndarray | None = field(default=None, repr=False, compare=False)
    _s: np.ndarray | None = field(default=None, repr=False, compare=False)
    _cdf: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown source kind {self.kind!r}")
        if not (self.r0 > 0.0 and math.isfinite(self.r0)):
            raise DomainError(f"r0 must be positive, got {self.r0!r}")
        if self.kind == "tabulated":
            if self.table is None:
                raise DomainError("tabulated source needs a table")
            r = np.array([p[0] for p in self.table], dtype=float)
            s = np.array([p[1] for p in self.table], dtype=float)
            if r.size < 2:
                raise DomainError("table needs at least two rows")
            if r[0] < 0.0 or np.any(np.diff(r) <= 0.0):
                raise DomainError("table radii must be non-negative and strictly increasing")
            if np.any(s < 0.0) or not np.all(np.isfinite(s)):
                raise DomainError("table densities must be finite and non-negative")
            moments = 2.0 * math.pi * _segment_moments(r, s)
            mass = moments.sum()
            if not mass > 0.0:
                raise DomainError("table has zero total weight")
            s = s / mass
            cdf = np.concatenate([[0.0], np.cumsum(moments / mass)])
            object.__setattr__(self, "_r", r)
            object.__setattr__(self, "_s", s)
            object.__setattr__(self, "_cdf", cdf)
        elif self.table is not None:
            raise DomainError(f"{self.kind} source takes no table")

    @classmethod
    def gaussian(cls, r0: float = 1.0) -> "RadialSource":
        return cls("gaussian", float(r0))

    @classmethod
    def step(cls, r0: float = 1.0) -> "RadialSource":
        return cls("step", float(r0))

    @classmethod
    def tabulated(cls, r, s, r0: float = 1.0, units: str = "absolute") -> "RadialSource":
        """Tabulated profile; with ``units="r0"`` the radii are multiples of ``r0``."""
        r = np.asarray(r, dtype=float)
        if units == "r0":
            r = r * r0
        elif units != "absolute":
            raise DomainError(f"units must be 'r0' or 'absolute', got {units!r}")
        pairs = tuple((float(a), float(b)) for a, b in zip(r, np.asarray(s, dtype=float)))
        return cls("tabulated", float(r0), pairs)

    @classmethod
    def from_file(cls, path, r0: float = 1.0) -> "RadialSource":
        r, s, units = load_table(path)
        return cls.tabulated(r, s, r0=r0, units=units)

    def with_r0(self, r0: float) -> "RadialSource":
        """Same shape rescaled to width ``r0``."""
        if self.kind != "tabulated":
            return RadialSource(self.kind, float(r0))
        factor = r0 / self.r0
        return RadialSource.tabulated(self._r * factor, self._s, r0=r0)

    @property
    def support(self) -> float | None:
        """Outer edge of the support, or None for unbounded profiles."""
        if self.kind == "step":
            return self.r0
        if self.kind == "tabulated":
            return float(self._r[-1])
        return None

    @property
    def breakpoints(self) -> np.ndarray:
        """Radii where the profile is not smooth."""
        if self.kind == "tabulated":
            return self._r.copy()
        if self.kind == "step":
            return np.array([0.0, self.r0])
        return np.array([0.0])

    def mass_beyond(self, radius: float) -> float:
        """Probability of emitting a pair with separation above ``radius``."""
        if self.kind == "gaussian":
            return math.exp(-radius * radius / (4.0 * self.r0 * self.r0))
        if self.kind == "step":
            return max(0.0, 1.0 - (radius / self.r0) ** 2)
        if radius >= self._r[-1]:
            return 0.0
        if radius <= self._r[0]:
            return 1.0
        r = np.array([radius])
        return float(1.0 - self._cdf_at_segment(r, self._segment(r))[0])

    def density(self, r):
        """Pair-separation density ``S(r)`` in inverse area units."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0.0):
            raise DomainError("r must be non-negative")
        r0 = self.r0
        if self.kind == "gaussian":
            out = np.exp(-r * r / (4.0 * r0 * r0)) / (4.0 * math.pi * r0 * r0)
        elif self.kind == "step":
            # the edge r == r0 takes the inside value
            out = np.where(r <= r0, 1.0 / (math.pi * (r0 * r0)), 0.0)
        else:
            out = np.interp(r, self._r, self._s, left=0.0, right=0.0)
            out = np.where(r == self._r[-1], self._s[-1], out)
            out = np.where(r < self._r[0], 0.0, out)
        return out if out.ndim else float(out)

    def descriptor(self) -> dict:
        d = {"kind": self.kind, "r0": self.r0}
        if self.kind == "tabulated":
            d["table"] = [list(p) for p in self.table]
        return d

    # tabulated CDF helpers -------------------------------------------------

    def _segment(self, r: np.ndarray) -> np.ndarray:
        return np.clip(np.searchsorted(self._r, r, side="right") - 1, 0, self._r.size - 2)

    def _inverse_cdf(self, u: np.ndarray) -> np.ndarray:
        idx = np.clip(np.searchsorted(self._cdf, u, side="right") - 1, 0, self._r.size - 2)
        lo = self._r[idx].copy()
        hi = self._r[idx + 1].copy()
        # the segment CDF is a monotone cubic; bisection is exact enough and branch free
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = self._cdf_at_segment(mid, idx) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def _cdf_at_segment(self, r: np.ndarray, idx: np.ndarray) -> np.ndarray:
        a = self._r[idx]
        sa = self._s[idx]
        slope = (self._s[idx + 1] - sa) / (self._r[idx + 1] - a)
        t = r - a
        part = sa * (a * t + 0.5 * t * t) + slope * (0.5 * a * t * t + t ** 3 / 3.0)
        return self._cdf[idx] + 2.0 * math.pi * part


def density(src: RadialSource, r):
    return src.density(r)


def check_normalization(src: RadialSource) -> float:
    """Numerically integrate ``2 pi r S(r)`` over the whole plane."""
    if src.kind == "gaussian":
        val, _ = integrate.quad(lambda r: 2.0 * math.pi * r * src.density(r), 0.0, math.inf,
                                epsabs=1e-13, epsrel=1e-12)
        return val
    if src.kind == "step":
        val, _ = integrate.quad(lambda r: 2.0 * math.pi * r * src.density(r), 0.0, src.r0,
                                epsabs=1e-13, epsrel=1e-12)
        return val
    # r S(r) is quadratic per segment, so Simpson's rule is exact there
    a, b = src._r[:-1], src._r[1:]
    mid = 0.5 * (a + b)
    f = lambda r: 2.0 * math.pi * r * src.density(r)  # noqa: E731
    inner = np.interp(mid, src._r, src._s)
    return float(np.sum((b - a) / 6.0 * (f(a) + 4.0 * 2.0 * math.pi * mid * inner + f(b))))


def sample_r(src: RadialSource, rng: np.random.Generator, size: int | None = None):
    """Draw separations from ``2 pi r S(r)`` by inverse transform."""
    u = rng.random(size)
    scalar = size is None
    u = np.atleast_1d(u)
    if src.kind == "gaussian":
        # 1 - u keeps the argument of the log away from zero
        out = 2.0 * src.r0 * np.sqrt(-np.log1p(-u))
    elif src.kind == "step":
        out = src.r0 * np.sqrt(u)
    else:
        out = src._inverse_cdf(u)
    return float(out[0]) if scalar else out


def load_table(path):
    """Read a ``r value`` table; returns ``(r, s, units)``.

    A ``# units: r0`` or ``# units: absolute`` header declares how radii are
    measured; without one the radii are taken as absolute.
    """
    units = "absolute"
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            m = _UNITS_RE.match(stripped)
            if m:
                units = m.group(1).lower()
                if units not in ("r0", "absolute"):
                    raise DomainError(f"{path}:{lineno}: unknown units {units!r}")
            continue
        body = stripped.split("#", 1)[0].split()
        if len(body) != 2:
            raise DomainError(f"{path}:{lineno}: expected 'r value', got {line!r}")
        try:
            rows.append((float(body[0]), float(body[1])))
        except ValueError as exc:
            raise DomainError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise DomainError(f"{path}: no table rows")
    r, s = zip(*rows)
    return np.array(r), np.array(s), units
