"""Two-anyon relative wavefunction as a sum over even partial waves.

The pair wavefunction in the centre-of-mass frame is

    Phi(r, phi) = sqrt(2) * sum_{l even} i**|l - alpha| J_|l - alpha|(q r) e^{i l phi}

which reduces to sqrt(2) cos(q r cos phi) for bosons (alpha = 0) and to
sqrt(2) i sin(q r cos phi) for fermions (alpha = 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, TruncationError
from .special_functions import DEFAULT_ACCURACY, BesselAccuracy, bessel_j_family

__all__ = [
    "AnyonParameter",
    "RelativeCoordinate",
    "TruncationPolicy",
    "partial_wave_cutoff",
    "phi_squared",
    "phi_squared_angles",
    "exact_phi_squared",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class AnyonParameter:
    """Statistics parameter; 0 is bosonic, 1 is fermionic."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not 0.0 <= a <= 1.0:
            raise DomainError(f"alpha out of [0,1]: {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    @property
    def is_boson(self) -> bool:
        return self.alpha == 0.0

    @property
    def is_fermion(self) -> bool:
        return self.alpha == 1.0

    def __float__(self) -> float:
        return self.alpha


def as_alpha(alpha) -> AnyonParameter:
    if isinstance(alpha, AnyonParameter):
        return alpha
    return AnyonParameter(alpha)


@dataclass(frozen=True)
class RelativeCoordinate:
    """Relative momentum ``q``, separation ``r`` and the angle between them."""

    q: float
    r: float
    phi: float = 0.0

    def __post_init__(self):
        if not (self.q >= 0.0 and self.r >= 0.0):
            raise DomainError("q and r must be non-negative")
        if not 0.0 <= self.phi < TWO_PI:
            raise DomainError(f"phi must lie in [0, 2pi), got {self.phi!r}")

    @property
    def qr(self) -> float:
        return self.q * self.r


@dataclass(frozen=True)
class TruncationPolicy:
    """Partial-wave cutoff control.

    The sum runs over even ``|l| <= L`` with ``L = 2 ceil((qr + l_margin)/2)``;
    ``L`` grows until the outermost pair drops below ``term_tolerance`` or
    exceeds ``l_hard_cap``.
    """

    l_margin: int = 40
    term_tolerance: float = 1e-14
    l_hard_cap: int = 2000

    def __post_init__(self):
        if self.l_margin < 0:
            raise DomainError("l_margin must be non-negative")
        if not self.term_tolerance > 0.0:
            raise DomainError("term_tolerance must be positive")
        if self.l_hard_cap < max(self.l_margin, 1):
            raise DomainError("l_hard_cap must be at least l_margin")


DEFAULT_TRUNCATION = TruncationPolicy()


def partial_wave_cutoff(x_max: float, trunc: TruncationPolicy) -> int:
    return 2 * int(math.ceil(0.5 * (x_max + trunc.l_margin)))


def _cutoffs(x_max: float, trunc: TruncationPolicy):
    cutoff = partial_wave_cutoff(x_max, trunc)
    step = 2 * max(1, int(math.ceil(0.5 * max(trunc.l_margin, 20))))
    while cutoff <= trunc.l_hard_cap:
        yield cutoff
        cutoff += step


def _amplitude(alpha: float, x: float, phis: np.ndarray, trunc: TruncationPolicy) -> np.ndarray:
    """Partial-wave sum without the sqrt(2) prefactor, for each angle."""
    for cutoff in _cutoffs(x, trunc):
        # offsets n of the two order families alpha + n (l = -n) and 1 - alpha + n (l = n + 1)
        neg = bessel_j_family(alpha, cutoff, [x])[:, 0]
        pos = bessel_j_family(1.0 - alpha, cutoff, [x])[:, 0]
        edge = abs(neg[cutoff]) + abs(pos[cutoff - 1])
        if edge <= trunc.term_tolerance:
            break
    else:
        raise TruncationError(
            f"partial-wave sum for alpha={alpha}, qr={x} not converged by l={trunc.l_hard_cap}")
    total = np.zeros(phis.shape, dtype=complex)
    # pair l and -l, smallest terms first
    for l in range(cutoff, 0, -2):
        nu_neg = l + alpha
        nu_pos = l - alpha
        total += np.exp(0.5j * math.pi * nu_neg) * neg[l] * np.exp(-1j * l * phis)
        total += np.exp(0.5j * math.pi * nu_pos) * pos[l - 1] * np.exp(1j * l * phis)
    total += np.exp(0.5j * math.pi * alpha) * neg[0]
    return total


def phi_squared_angles(alpha, x: float, phis, trunc: TruncationPolicy = DEFAULT_TRUNCATION):
    """``|Phi|**2`` at fixed ``x = q r`` for an array of angles."""
    a = as_alpha(alpha).alpha
    phis = np.asarray(phis, dtype=float)
    if x < 0.0:
        raise DomainError("qr must be non-negative")
    amp = _amplitude(a, float(x), phis, trunc)
    return 2.0 * (amp.real ** 2 + amp.imag ** 2)


def phi_squared(alpha, coord: RelativeCoordinate,
                trunc: TruncationPolicy = DEFAULT_TRUNCATION,
                acc: BesselAccuracy = DEFAULT_ACCURACY) -> float:
    """Squared modulus of the two-anyon relative wavefunction.

    ``acc`` is accepted for interface symmetry with the scalar Bessel path;
    the family recurrence used here already works at double precision.
    """
    return float(phi_squared_angles(alpha, coord.qr, np.array([coord.phi]), trunc)[0])


def exact_phi_squared(statistics: str, coord: RelativeCoordinate) -> float:
    """Closed-form ``|Phi|**2`` for ``"boson"`` or ``"fermion"`` pairs."""
    arg = coord.qr * math.cos(coord.phi)
    if statistics == "boson":
        return 2.0 * math.cos(arg) ** 2
    if statistics == "fermion":
        return 2.0 * math.sin(arg) ** 2
    raise DomainError(f"statistics must be 'boson' or 'fermion', got {statistics!r}")
