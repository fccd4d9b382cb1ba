r"""Log-gamma and Bessel functions of the first kind for real order.

Three evaluation regimes are used for :math:`J_\nu(x)`:

* the ascending power series, whose leading term is formed in log space,
  for small arguments or arguments below the turning region;
* the large-argument Hankel expansion with a remainder check;
* Miller's backward recurrence over the order family
  :math:`\mu, \mu+1, \dots` with the normalization

  .. math::
      (x/2)^\mu = \sum_{k\ge 0} \frac{(\mu+2k)\,\Gamma(\mu+k)}{k!} J_{\mu+2k}(x)

  which stays stable in the transition zone :math:`\nu \sim x` where both
  the series (cancellation) and the asymptotic expansion (divergence) fail.

:func:`bessel_j_family` is the vectorized workhorse used by the kernel sums.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "BesselAccuracy",
    "log_gamma",
    "bessel_j",
    "bessel_j_array",
    "bessel_j_family",
    "bessel_j_sumsq",
]

_EULER_GAMMA = 0.57721566490153286061

# zeta(k) - 1 for k = 2..41
_ZETA_MINUS_ONE = (
    0.64493406684822643647, 0.2020569031595942854, 0.082323233711138191516,
    0.036927755143369926331, 0.017343061984449139715, 0.0083492773819228268398,
    0.0040773561979443393787, 0.0020083928260822144179, 0.00099457512781808533715,
    0.0004941886041194645587, 0.00024608655330804829864, 0.00012271334757848914675,
    0.000061248135058704829259, 0.000030588236307020493552, 0.000015282259408651871733,
    7.6371976378997622736e-6, 3.8172932649998398565e-6, 1.9082127165539389257e-6,
    9.5396203387279611315e-7, 4.7693298678780646312e-7, 2.3845050272773299e-7,
    1.1921992596531107307e-7, 5.9608189051259479612e-8, 2.9803503514652280186e-8,
    1.4901554828365041235e-8, 7.450711789835429492e-9, 3.7253340247884570548e-9,
    1.8626597235130490064e-9, 9.3132743241966818287e-10, 4.656629065033784073e-10,
    2.328311833676505492e-10, 1.1641550172700519776e-10, 5.8207720879027008892e-11,
    2.9103850444970996869e-11, 1.4551921891041984236e-11, 7.2759598350574810145e-12,
    3.6379795473786511902e-12, 1.8189896503070659476e-12, 9.0949478402638892825e-13,
    4.5474737830421540268e-13,
)

# B_{2k} / (2k (2k-1)) for k = 1..10
_STIRLING = (
    1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0,
    -691.0 / 360360.0, 1.0 / 156.0, -3617.0 / 122400.0, 43867.0 / 244188.0,
    -174611.0 / 125400.0,
)
_HALF_LOG_2PI = 0.91893853320467274178


@dataclass(frozen=True)
class BesselAccuracy:
    """Accuracy contract for :func:`bessel_j`."""

    target_relative_error: float = 1e-12
    max_series_terms: int = 500

    def __post_init__(self):
        if not 0.0 < self.target_relative_error <= 1e-6:
            raise DomainError("target_relative_error must lie in (0, 1e-6]")
        if self.max_series_terms < 50:
            raise DomainError("max_series_terms must be at least 50")


DEFAULT_ACCURACY = BesselAccuracy()


def _log_gamma_shifted(z: float) -> float:
    """ln Gamma(2 + z) - z (1 - gamma) for |z| <= 1/2, without the leading term."""
    total = 0.0
    zk = z
    for k, c in enumerate(_ZETA_MINUS_ONE, start=2):
        zk *= z
        term = c * zk / k
        total += term if k % 2 == 0 else -term
        if abs(term) < 1e-18 * max(abs(total), 1e-300):
            break
    return total


def _log_gamma_near_two(z: float) -> float:
    # ln Gamma(2 + z); the log(1+z) pieces of the shifted series cancel exactly
    return z * (1.0 - _EULER_GAMMA) + _log_gamma_shifted(z)


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for real ``x > 0``.

    Near the zeros at 1 and 2 a Taylor series in ``zeta(k) - 1`` keeps the
    relative error small; ``x >= 10`` uses Stirling's series.
    """
    x = float(x)
    if not x > 0.0 or math.isnan(x):
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    if x == 1.0 or x == 2.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    if x < 0.5:
        # ln Gamma(x) = ln Gamma(1 + x) - ln x
        return (-math.log1p(x) + x * (1.0 - _EULER_GAMMA) + _log_gamma_shifted(x)
                - math.log(x))
    if x < 1.5:
        z = x - 1.0
        return -math.log1p(z) + z * (1.0 - _EULER_GAMMA) + _log_gamma_shifted(z)
    if x < 2.5:
        return _log_gamma_near_two(x - 2.0)
    if x < 10.0:
        n = int(x - 1.5)
        base = x - n
        prod = 1.0
        for j in range(n):
            prod *= base + j
        return math.log(prod) + _log_gamma_near_two(base - 2.0)
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    power = inv
    for c in _STIRLING:
        term = c * power
        series += term
        if abs(term) < 1e-18 * abs(series):
            break
        power *= inv2
    return (x - 0.5) * math.log(x) - x + _HALF_LOG_2PI + series


_LOG_2 = math.log(2.0)


# ---------------------------------------------------------------------------
# Bessel J, scalar regimes


def _check_bessel_domain(nu, x):
    if math.isnan(nu) or math.isnan(x):
        raise DomainError("bessel_j arguments must not be NaN")
    if nu < 0.0:
        raise DomainError(f"negative order {nu!r} is not supported")
    if nu > 200.0:
        raise DomainError(f"order {nu!r} exceeds 200")
    if x < 0.0 or x > 10_000.0:
        raise DomainError(f"argument {x!r} outside [0, 10000]")


def _bessel_series(nu: float, x: float, acc: BesselAccuracy) -> float:
    half = 0.5 * x
    # log(x) - log(2) survives subnormal x, where 0.5 * x rounds to zero
    log_lead = nu * (math.log(x) - _LOG_2) - log_gamma(nu + 1.0)
    if log_lead < -745.0:
        return 0.0
    if -700.0 < log_lead and nu < 170.0 and half >= sys.float_info.min:
        # a direct power keeps full precision; exp(log_lead) loses about |log_lead| ulps
        term = half ** nu / math.gamma(nu + 1.0)
    else:
        term = math.exp(log_lead)
    total = term
    q = -half * half
    tol = 1e-4 * acc.target_relative_error
    for k in range(1, acc.max_series_terms + 1):
        term *= q / (k * (nu + k))
        total += term
        # only trust the cutoff once the terms are shrinking
        if abs(term) <= tol * abs(total) and k * (nu + k) > -q:
            return total
    raise ConvergenceError(
        f"power series for J_{nu}({x}) did not converge in {acc.max_series_terms} terms")


def _bessel_hankel(nu: float, x: float, acc: BesselAccuracy) -> float:
    mu = 4.0 * nu * nu
    eight_x = 8.0 * x
    p, q = 1.0, 0.0
    term = 1.0
    smallest = 1.0
    goal = 1e-3 * acc.target_relative_error
    for k in range(1, acc.max_series_terms + 1):
        new = term * (mu - (2 * k - 1) ** 2) / (k * eight_x)
        if abs(new) > abs(term) and k > 1:
            break
        term = new
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q += sign * term
        else:
            p += sign * term
        smallest = min(smallest, abs(term))
        if smallest <= goal * 1e-2:
            break
    if smallest > goal:
        raise ConvergenceError(
            f"Hankel expansion for J_{nu}({x}) stalls at remainder {smallest:.3e}")
    phase = math.fmod(0.5 * nu + 0.25, 2.0) * math.pi
    c, s = math.cos(x), math.sin(x)
    cos_chi = c * math.cos(phase) + s * math.sin(phase)
    sin_chi = s * math.cos(phase) - c * math.sin(phase)
    return math.sqrt(2.0 / (math.pi * x)) * (p * cos_chi - q * sin_chi)


def _miller_start(n_max: int, x_max: float) -> int:
    reach = max(float(n_max), x_max + 12.0 * max(x_max, 1.0) ** (1.0 / 3.0))
    return int(math.ceil(reach)) + 20


def _bessel_miller(nu: float, x: float) -> float:
    n = int(math.floor(nu))
    mu = nu - n
    return float(bessel_j_family(mu, n, np.array([x]))[n, 0])


def _regime(nu: float, x: float) -> str:
    if x <= 6.0 or 0.25 * x * x <= nu + 1.0:
        return "series"
    if x >= max(25.0, 0.5 * nu * nu):
        return "hankel"
    return "miller"


def bessel_j(nu: float, x: float, acc: BesselAccuracy = DEFAULT_ACCURACY) -> float:
    """Bessel function of the first kind ``J_nu(x)`` for ``0 <= nu <= 200``
    and ``0 <= x <= 10000``.

    Raises :class:`DomainError` outside that box and
    :class:`ConvergenceError` when the selected expansion cannot meet
    ``acc.target_relative_error`` within ``acc.max_series_terms``.
    """
    nu = float(nu)
    x = float(x)
    _check_bessel_domain(nu, x)
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    regime = _regime(nu, x)
    if regime == "series":
        return _bessel_series(nu, x, acc)
    if regime == "hankel":
        return _bessel_hankel(nu, x, acc)
    return _bessel_miller(nu, x)


# ---------------------------------------------------------------------------
# Vectorized order families


def _neumann_weights(mu: float, k_max: int) -> np.ndarray:
    # weights w_k with sum_k w_k J_{mu+2k}(x) = (x/2)^mu
    w = np.empty(k_max + 1)
    g0 = math.exp(log_gamma(1.0 + mu))
    w[0] = g0
    g = g0  # Gamma(mu + k) / k! at k = 1
    for k in range(1, k_max + 1):
        if k > 1:
            g *= (mu + k - 1.0) / k
        w[k] = (mu + 2.0 * k) * g
    return w


_TINY_X = 1e-6


def _small_x_table(mu: float, n_max: int, x: np.ndarray) -> np.ndarray:
    """``J_{mu+n}(x)`` for ``x < 1e-6`` from two series terms (relative error ~x**4)."""
    out = np.zeros((n_max + 1, x.size))
    with np.errstate(divide="ignore"):
        log_half = np.log(x) - _LOG_2
    quarter = 0.25 * x * x
    for n in range(n_max + 1):
        nu = mu + n
        if nu == 0.0:
            out[n] = 1.0 - quarter
            continue
        logs = nu * log_half - log_gamma(nu + 1.0)
        if logs.max() < -745.0:
            break
        out[n] = np.exp(logs) * (1.0 - quarter / (nu + 1.0))
    return out


def bessel_j_family(mu: float, n_max: int, x, start: int | None = None) -> np.ndarray:
    """Values ``J_{mu+n}(x)`` for ``n = 0..n_max`` by backward recurrence.

    Parameters
    ----------
    mu : float
        Base order in ``[0, 1]``.
    n_max : int
        Highest order offset returned.
    x : array_like
        Non-negative arguments (1-d).
    start : int, optional
        Recurrence start offset; defaults to a margin past both ``n_max``
        and the turning point of the largest argument.

    Returns
    -------
    ndarray, shape (n_max + 1, len(x))
    """
    if not 0.0 <= mu <= 1.0:
        raise DomainError(f"family base order must lie in [0, 1], got {mu!r}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise DomainError("bessel_j_family expects a 1-d argument array")
    if np.any(x < 0.0) or not np.all(np.isfinite(x)):
        raise DomainError("arguments must be finite and non-negative")
    out = np.zeros((n_max + 1, x.size))
    pos = x >= _TINY_X
    if not np.all(pos):
        small = ~pos & (x > 0.0)
        if small.any():
            out[:, small] = _small_x_table(mu, n_max, x[small])
        if mu == 0.0:
            out[0, x == 0.0] = 1.0
        if not np.any(pos):
            return out
    xp = x[pos]
    m = _miller_start(n_max, float(xp.max())) if start is None else int(start)
    m = max(m, n_max + 2)
    m += m % 2
    weights = _neumann_weights(mu, m // 2)
    two_over_x = 2.0 / xp
    vals = np.zeros((n_max + 1, xp.size))
    nxt = np.zeros_like(xp)  # J_{mu+m+1}
    cur = np.full_like(xp, 1e-280)  # J_{mu+m}, unnormalized
    norm = weights[m // 2] * cur
    for n in range(m, 0, -1):
        prev = (mu + n) * two_over_x * cur - nxt
        nxt, cur = cur, prev
        k = n - 1
        if k <= n_max:
            vals[k] = cur
        if k % 2 == 0:
            norm = norm + weights[k // 2] * cur
        big = np.abs(cur) > 1e200
        if big.any():
            f = np.where(big, 1e-200, 1.0)
            cur *= f
            nxt *= f
            norm *= f
            if k <= n_max:
                vals[k:] *= f
    if n_max >= m:
        raise AssertionError("recurrence start must exceed n_max")
    scale = np.power(0.5 * xp, mu) / norm
    vals *= scale
    out[:, pos] = vals
    return out


def bessel_j_array(nu: float, x) -> np.ndarray:
    """Vectorized ``J_nu(x)`` over an argument array via :func:`bessel_j_family`."""
    nu = float(nu)
    if nu < 0.0:
        raise DomainError(f"negative order {nu!r} is not supported")
    n = int(math.floor(nu))
    mu = nu - n
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1)
    return bessel_j_family(mu, n, flat)[n].reshape(x.shape)


def bessel_j_sumsq(mu, x, n_max, parity=None):
    """Sums of ``J_{mu+n}(x)**2`` over ``0 <= n <= n_max`` in one backward pass.

    ``mu`` may be a sequence of base orders; all families then share a
    single vectorized recurrence. When ``parity`` is given (per family, or
    one value for all) only offsets with ``n % 2 == parity`` contribute.
    Terms are accumulated from the highest order downwards, so the smallest
    contributions are added first.

    Returns
    -------
    sumsq : ndarray
    top : ndarray
        ``J_{mu+n_top}(x)`` for the highest contributing offset ``n_top``,
        used by callers as a truncation witness.

    Both outputs have shape ``(len(mu), len(x))``, or ``(len(x),)`` for a
    scalar ``mu``.
    """
    scalar_mu = np.ndim(mu) == 0
    mus = np.atleast_1d(np.asarray(mu, dtype=float))
    fam = mus.size
    if np.any(mus < 0.0) or np.any(mus > 1.0):
        raise DomainError(f"family base orders must lie in [0, 1], got {mu!r}")
    parities = [parity] * fam if np.ndim(parity) == 0 else list(parity)
    n_maxes = [int(n_max)] * fam if np.ndim(n_max) == 0 else [int(v) for v in n_max]
    n_tops = [nm - 1 if (p is not None and nm % 2 != p) else nm
              for nm, p in zip(n_maxes, parities)]
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x < 0.0) or not np.all(np.isfinite(x)):
        raise DomainError("arguments must be finite and non-negative")
    sumsq = np.zeros((fam, x.size))
    top = np.zeros((fam, x.size))
    pos = x >= _TINY_X

    def finish():
        if scalar_mu:
            return sumsq[0], top[0]
        return sumsq, top

    if not np.all(pos):
        small = ~pos
        for f in range(fam):
            if n_tops[f] < 0:
                continue
            table = _small_x_table(float(mus[f]), n_tops[f], x[small])
            picked = table if parities[f] is None else table[parities[f]::2]
            sumsq[f, small] = np.sum(picked[::-1] ** 2, axis=0)
            top[f, small] = table[n_tops[f]]
        if not np.any(pos):
            return finish()
    xp = x[pos]
    m = _miller_start(max(n_maxes), float(xp.max()))
    m += m % 2
    weights = np.stack([_neumann_weights(float(v), m // 2) for v in mus])
    # rows contributing at each offset k
    rows_at = [[f for f in range(fam)
                if k <= n_maxes[f] and (parities[f] is None or k % 2 == parities[f])]
               for k in range(m)]
    two_over_x = 2.0 / xp
    # worst-case growth per step bounds how often overflow must be checked
    growth = max(2.0 * (float(mus.max()) + m) / float(xp.min()), 2.0)
    check_every = max(1, int(60.0 / math.log10(growth)))
    col = mus[:, None]
    nxt = np.zeros((fam, xp.size))
    # unit seed keeps the squares representable; growth is rescaled below
    cur = np.ones((fam, xp.size))
    norm = weights[:, m // 2, None] * cur
    acc = np.zeros((fam, xp.size))
    witness = np.zeros((fam, xp.size))
    for n in range(m, 0, -1):
        prev = (col + n) * two_over_x * cur
        prev -= nxt
        nxt, cur = cur, prev
        k = n - 1
        if k % 2 == 0:
            norm += weights[:, k // 2, None] * cur
        for f in rows_at[k]:
            acc[f] += cur[f] * cur[f]
            if k == n_tops[f]:
                witness[f] = cur[f]
        if k % check_every == 0 and (cur.max() > 1e60 or cur.min() < -1e60):
            big = np.abs(cur) > 1e60
            fac = np.where(big, 1e-60, 1.0)
            cur *= fac
            nxt *= fac
            norm *= fac
            witness *= fac
            acc *= fac * fac
    scale = np.power(0.5 * xp[None, :], col) / norm
    sumsq[:, pos] = acc * scale * scale
    top[:, pos] = witness * scale
    return finish()
