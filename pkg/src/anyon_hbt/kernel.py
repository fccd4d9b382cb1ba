"""Angle-averaged pair-correlation kernel for anyon pairs.

Averaging ``|Phi|**2 - 1`` over the relative angle leaves

    K0(q, r) = 2 * sum_{l even} J_|l - alpha|(q r)**2 - 1

Orders with ``l <= 0`` form the family ``alpha + n`` (n even) and orders
with ``l > 0`` the family ``1 - alpha + n`` (n odd), so the whole sum is two
backward recurrences. Bosons and fermions short-circuit to ``+/- J0(2 q r)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, TruncationError
from .special_functions import (
    DEFAULT_ACCURACY,
    BesselAccuracy,
    bessel_j,
    bessel_j_array,
    bessel_j_sumsq,
)
from .wavefunction import (
    DEFAULT_TRUNCATION,
    RelativeCoordinate,
    TruncationPolicy,
    _cutoffs,
    as_alpha,
    phi_squared,
)

__all__ = [
    "KernelEvaluation",
    "KernelArray",
    "angle_averaged_kernel",
    "kernel_k0",
    "kernel_full",
]

# evaluation blocks keep the recurrence working set small
_BLOCK = 8192


@dataclass(frozen=True)
class KernelEvaluation:
    value: float
    terms_used: int
    tail_estimate: float


@dataclass(frozen=True)
class KernelArray:
    values: np.ndarray
    terms_used: int
    tail_estimate: float


def _partial_wave_block(alpha: float, x: np.ndarray, trunc: TruncationPolicy):
    x_max = float(x.max()) if x.size else 0.0
    for cutoff in _cutoffs(x_max, trunc):
        # l <= 0 gives orders alpha + n (n even), l > 0 gives 1 - alpha + n (n odd)
        sums, tops = bessel_j_sumsq([alpha, 1.0 - alpha], x, [cutoff, cutoff - 1], [0, 1])
        total = sums[0] + sums[1]
        edge = 2.0 * (tops[0] * tops[0] + tops[1] * tops[1])
        last = float(edge.max()) if edge.size else 0.0
        if last <= trunc.term_tolerance:
            return 2.0 * total - 1.0, cutoff + 1, 2.0 * last
    raise TruncationError(
        f"kernel sum for alpha={alpha}, qr up to {x_max:.6g} not converged by "
        f"l={trunc.l_hard_cap}")


def angle_averaged_kernel(alpha, x, trunc: TruncationPolicy = DEFAULT_TRUNCATION,
                          exact_limits: bool = True) -> KernelArray:
    """Vectorized ``K0`` over ``x = q r``.

    With ``exact_limits`` the boson/fermion cases return ``+/- J0(2x)``;
    otherwise the truncated partial-wave sum is evaluated for every alpha.
    ``terms_used`` counts even-``l`` terms (0 for the closed form).
    """
    a = as_alpha(alpha).alpha
    x = np.asarray(x, dtype=float)
    shape = x.shape
    flat = x.reshape(-1)
    if np.any(flat < 0.0) or not np.all(np.isfinite(flat)):
        raise DomainError("q r must be finite and non-negative")
    if exact_limits and a in (0.0, 1.0):
        sign = 1.0 if a == 0.0 else -1.0
        return KernelArray(sign * bessel_j_array(0.0, 2.0 * flat).reshape(shape), 0, 0.0)
    values = np.empty_like(flat)
    terms, tail = 0, 0.0
    for start in range(0, flat.size, _BLOCK):
        block = flat[start:start + _BLOCK]
        v, t, e = _partial_wave_block(a, block, trunc)
        values[start:start + _BLOCK] = v
        terms = max(terms, t)
        tail = max(tail, e)
    return KernelArray(values.reshape(shape), terms, tail)


def kernel_k0(alpha, q: float, r: float, trunc: TruncationPolicy = DEFAULT_TRUNCATION,
              acc: BesselAccuracy = DEFAULT_ACCURACY) -> KernelEvaluation:
    """Angle-averaged kernel at a single ``(q, r)``."""
    a = as_alpha(alpha)
    if not (q >= 0.0 and r >= 0.0):
        raise DomainError("q and r must be non-negative")
    x = q * r
    if a.is_boson or a.is_fermion:
        sign = 1.0 if a.is_boson else -1.0
        if 2.0 * x > 10_000.0:
            value = float(bessel_j_array(0.0, np.array([2.0 * x]))[0])
        else:
            value = bessel_j(0.0, 2.0 * x, acc)
        return KernelEvaluation(sign * value, 0, 0.0)
    res = angle_averaged_kernel(a, np.array([x]), trunc)
    return KernelEvaluation(float(res.values[0]), res.terms_used, res.tail_estimate)


def kernel_full(alpha, coord: RelativeCoordinate,
                trunc: TruncationPolicy = DEFAULT_TRUNCATION,
                acc: BesselAccuracy = DEFAULT_ACCURACY) -> float:
    """Unaveraged kernel ``|Phi|**2 - 1`` at one relative coordinate."""
    return phi_squared(alpha, coord, trunc, acc) - 1.0

