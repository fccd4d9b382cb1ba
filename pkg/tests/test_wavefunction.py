import math

import numpy as np
import pytest

from anyon_hbt.errors import DomainError, TruncationError
from anyon_hbt.wavefunction import (
    AnyonParameter,
    RelativeCoordinate,
    TruncationPolicy,
    exact_phi_squared,
    phi_squared,
    phi_squared_angles,
)

# |Phi|^2 at alpha = 1/2, q r = 1, phi = 0.3 from a 40-digit sum over l in [-200, 200]
BRUTE_HALF_QR1_PHI03 = 0.6029471610381716785496

PHI_GRID = np.linspace(0.0, 2 * math.pi, 73, endpoint=False)


def coord(qr, phi=0.0):
    return RelativeCoordinate(q=1.0, r=qr, phi=phi)


def test_anyon_parameter_bounds():
    assert AnyonParameter(0.0).is_boson
    assert AnyonParameter(1.0).is_fermion
    assert float(AnyonParameter(0.25)) == 0.25
    for bad in (-1e-12, 1.0 + 1e-12, float("nan")):
        with pytest.raises(DomainError, match="alpha out of"):
            AnyonParameter(bad)


def test_coordinate_validation():
    with pytest.raises(DomainError):
        RelativeCoordinate(q=-1.0, r=1.0, phi=0.0)
    with pytest.raises(DomainError):
        RelativeCoordinate(q=1.0, r=-1.0, phi=0.0)
    with pytest.raises(DomainError):
        RelativeCoordinate(q=1.0, r=1.0, phi=2 * math.pi)
    assert RelativeCoordinate(q=2.0, r=1.5, phi=0.1).qr == 3.0


def test_truncation_policy_validation():
    with pytest.raises(DomainError):
        TruncationPolicy(l_margin=-1)
    with pytest.raises(DomainError):
        TruncationPolicy(term_tolerance=0.0)
    with pytest.raises(DomainError):
        TruncationPolicy(l_margin=50, l_hard_cap=40)


@pytest.mark.parametrize("phi", [0.0, 1.0, 4.0])
def test_zero_separation(phi):
    assert phi_squared(0.0, coord(0.0, phi)) == pytest.approx(2.0, abs=1e-14)
    assert phi_squared(1.0, coord(0.0, phi)) == pytest.approx(0.0, abs=1e-14)


def test_boson_node():
    # q r cos(phi) = pi / 2 puts the boson pair on a node
    phi = 0.4
    c = RelativeCoordinate(q=1.0, r=0.5 * math.pi / math.cos(phi), phi=phi)
    assert phi_squared(0.0, c) == pytest.approx(0.0, abs=1e-12)


def test_half_anyon_brute_force_value():
    assert phi_squared(0.5, coord(1.0, 0.3)) == pytest.approx(BRUTE_HALF_QR1_PHI03, abs=1e-12)


@pytest.mark.parametrize("statistics, qr_cos, expected", [
    ("boson", 0.0, 2.0),
    ("fermion", 0.0, 0.0),
    ("boson", math.pi / 3, 0.5),
])
def test_exact_examples(statistics, qr_cos, expected):
    assert exact_phi_squared(statistics, coord(qr_cos, 0.0)) == pytest.approx(expected, abs=1e-15)


def test_exact_rejects_unknown_statistics():
    with pytest.raises(DomainError):
        exact_phi_squared("anyon", coord(1.0))


@pytest.mark.parametrize("alpha", [0.0, 0.2, 0.5, 0.81, 1.0])
@pytest.mark.parametrize("qr", [0.3, 2.0, 7.5, 25.0])
def test_exchange_periodicity(alpha, qr):
    phis = np.linspace(math.pi, 2 * math.pi, 31, endpoint=False)
    here = phi_squared_angles(alpha, qr, phis)
    shifted = phi_squared_angles(alpha, qr, phis - math.pi)
    assert np.max(np.abs(here - shifted)) <= 1e-9


@pytest.mark.parametrize("alpha, statistics", [(0.0, "boson"), (1.0, "fermion")])
def test_limit_agreement(alpha, statistics):
    worst = 0.0
    for qr in np.linspace(0.0, 10.0, 41):
        got = phi_squared_angles(alpha, qr, PHI_GRID)
        want = [exact_phi_squared(statistics, coord(qr, p)) for p in PHI_GRID]
        worst = max(worst, float(np.max(np.abs(got - want))))
    assert worst <= 1e-8


def test_non_negative():
    for alpha in np.linspace(0.0, 1.0, 11):
        for qr in (0.0, 0.01, 1.0, 5.0, 17.0, 60.0):
            assert phi_squared_angles(alpha, qr, PHI_GRID).min() >= -1e-12


@pytest.mark.parametrize("alpha", [0.0, 0.37, 0.5, 0.999])
def test_continuity_in_alpha(alpha):
    # q r = 0 is excluded: there the alpha = 0 value is 2 and any alpha > 0 gives 0
    for qr in (0.05, 0.5, 3.0, 9.0):
        a = phi_squared_angles(alpha, qr, PHI_GRID)
        b = phi_squared_angles(alpha + 1e-6, qr, PHI_GRID)
        assert np.max(np.abs(a - b)) <= 1e-4


def test_truncation_failure():
    tight = TruncationPolicy(l_margin=0, term_tolerance=1e-300, l_hard_cap=2)
    with pytest.raises(TruncationError):
        phi_squared(0.5, coord(10.0, 0.2), trunc=tight)


def test_negative_qr_rejected():
    with pytest.raises(DomainError):
        phi_squared_angles(0.5, -1.0, [0.0])
