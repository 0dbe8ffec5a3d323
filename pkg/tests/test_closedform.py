import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from qpath import closedform as cf
from qpath.dispersion import ProbeConvention
from qpath.scales import DomainError, PhysicalScales

mp.mp.dps = 40


def test_erf_phi():
    assert cf.erf_phi(0.0) == 0.0
    assert cf.erf_phi(math.inf) == 1.0
    assert cf.erf_phi(-math.inf) == -1.0
    assert cf.erf_phi(1.0) == pytest.approx(0.8427008, abs=1e-7)


@given(st.floats(-30, 30))
def test_erf_phi_against_mpmath(y):
    assert cf.erf_phi(y) == pytest.approx(float(mp.erf(y)), abs=1e-15, rel=1e-14)
    assert cf.erf_phi(-y) == -cf.erf_phi(y)


def _aw_first_mp(x, D):
    x = mp.mpf(x)
    root = mp.sqrt(1 + 4 * x * x)
    braces = mp.sqrt(mp.pi / 2) * mp.erf(mp.sqrt(2) * x / root) + root / x * mp.exp(-x * x / root)
    return x ** (D - 1) * braces


def test_aw_first_examples():
    assert cf.aw_length_first(1.0, 2.0).value == pytest.approx(2.2179, abs=5e-4)
    assert cf.aw_length_first(1.0, 2.0).value == pytest.approx(float(_aw_first_mp(1, 2)), rel=1e-14)
    r1 = cf.aw_length_first(1.0, 1.0)
    assert r1.value == r1.factor and r1.prefactor_exponent == 0.0
    assert cf.aw_length_first(1e-5, 2.0).value == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(DomainError):
        cf.aw_length_first(0.0, 2.0)


@given(x=st.floats(1e-3, 1e3), D=st.floats(0.5, 2.5))
def test_aw_first_against_mpmath(x, D):
    assert cf.aw_length_first(x, D).value == pytest.approx(float(_aw_first_mp(x, D)), rel=1e-12)


def test_aw_rms_examples():
    assert cf.aw_length_rms(0.0, 2.0).value == pytest.approx(math.sqrt(3), rel=1e-15)
    assert cf.aw_length_rms(1e-5, 2.0).value == pytest.approx(math.sqrt(3), abs=1e-6)
    assert cf.aw_length_rms(1.0, 2.0).value == pytest.approx(math.sqrt(19), abs=1e-12)
    assert cf.aw_length_rms(2.0, 1.0).value == pytest.approx(math.sqrt(67) / 2, rel=1e-15)
    assert cf.aw_length_rms(0.0, 2.5).value == 0.0
    with pytest.raises(DomainError):
        cf.aw_length_rms(0.0, 1.5)


@given(x=st.floats(1e-4, 1e4), D=st.floats(0.5, 2.5))
def test_aw_lengths_positive(x, D):
    assert cf.aw_length_first(x, D).value > 0
    assert cf.aw_length_rms(x, D).value > 0


def test_classical_limit():
    r0 = cf.classical_limit_length(0.0, 2.0, 1.0)
    assert r0.factor == -2.0 and r0.regime is cf.Regime.OUTSIDE
    r5 = cf.classical_limit_length(5.0, 2.0, 1.0)
    assert r5.factor == pytest.approx(8.8622, abs=1e-4)
    assert r5.regime is cf.Regime.VALID
    assert cf.classical_limit_length(5.0, 1.5, 2.0).value == pytest.approx(2.0**1.5 * r5.factor)
    r10 = cf.classical_limit_length(10.0, 1.0, 1.0)
    assert r10.factor / (math.sqrt(math.pi) * 10) == pytest.approx(1.0, abs=1e-6)


def test_classical_root_against_mpmath():
    f = lambda r: mp.sqrt(mp.pi) * r * mp.erf(r / mp.sqrt(2)) - 2 * mp.exp(-r * r / 2)
    root = float(mp.findroot(f, 1.0))
    assert cf.classical_braces_root() == pytest.approx(root, rel=1e-14)
    assert round(root, 2) == 1.00
    assert cf.classical_limit_length(root * 0.999, 1, 1).regime is cf.Regime.OUTSIDE
    assert cf.classical_limit_length(root * 1.001, 1, 1).regime is cf.Regime.VALID


def test_quantum_limit():
    assert cf.quantum_limit_length(1.0, 0.0, 2.0).value == 1.0
    assert cf.quantum_limit_length(1.0, 1.0, 2.0).value == pytest.approx(math.sqrt(2), rel=1e-15)
    assert cf.quantum_limit_length(2.0, 1.0, 2.0).regime is cf.Regime.OUTSIDE
    with pytest.raises(DomainError):
        cf.quantum_limit_length(0.0, 1.0, 2.0)


@pytest.mark.parametrize("D", [1.0, 1.5, 2.0])
def test_quantum_limit_scaling_at_fixed_dt(D):
    c = 100.0  # theta * xbar^2, fixed by the physical time step
    val = lambda x: cf.quantum_limit_length(x, c / x**2, D).value
    h = 0.05
    slope = (math.log(val(math.exp(h))) - math.log(val(math.exp(-h)))) / (2 * h)
    assert slope == pytest.approx(D - 2, abs=1e-3)


def test_debroglie_conventional():
    s = PhysicalScales(delta_x=0.5, sound_speed=1.0)
    assert cf.debroglie_conventional_length(0.0, s) == 0.0
    assert cf.debroglie_conventional_length(2.0, s) == pytest.approx(2 * 3 / math.sqrt(2), rel=1e-15)
    far = PhysicalScales(delta_x=1e9, sound_speed=1.0)
    assert cf.debroglie_conventional_length(1.0, far) == pytest.approx(1.0, rel=1e-9)
    two_pi = cf.debroglie_conventional_length(1.0, PhysicalScales(delta_x=math.pi, sound_speed=1.0),
                                              ProbeConvention.TWO_PI)
    assert two_pi == pytest.approx(3 / math.sqrt(2), rel=1e-14)
    with pytest.raises(DomainError):
        cf.debroglie_conventional_length(1.0, PhysicalScales(delta_x=1.0))


def test_debroglie_factor_and_length():
    assert cf.debroglie_factor(0.0) == 1.0
    assert cf.debroglie_factor(0.5) == pytest.approx(1.5 / math.sqrt(2), rel=1e-15)
    assert cf.debroglie_factor(1.0) == pytest.approx(3 / math.sqrt(5), abs=1e-12)
    assert cf.debroglie_factor(100.0) / 100 == pytest.approx(1.0, abs=1e-4)
    assert cf.debroglie_hausdorff_length(0.0, 1.5, 4.0).value == pytest.approx(4.0**-0.5)
    for dx in (0.1, 1.0, 5.0):
        assert cf.debroglie_hausdorff_length(1.0, 2.0, dx).value == pytest.approx(1.341641, abs=1e-6)


@given(st.lists(st.floats(0, 1e4), min_size=2, max_size=50))
def test_debroglie_factor_monotone(xs):
    xs = np.sort(np.array(xs))
    g = cf.debroglie_factor(xs)
    assert np.all(np.diff(g) >= 0)
    assert np.all(g >= 1.0)


def test_debroglie_dimension_examples():
    assert cf.debroglie_dimension(0.0) == 2.0
    assert cf.debroglie_dimension(1e8) == pytest.approx(1.0, abs=1e-12)
    assert cf.debroglie_dimension(1e300) == 1.0
    assert cf.debroglie_dimension(1.0) == pytest.approx(2 - 8 / 15, abs=1e-12)


def test_debroglie_dimension_is_log_derivative():
    x = np.geomspace(0.01, 100, 30)
    h = 1e-5
    lg = lambda v: np.log(cf.debroglie_factor(v))
    slope = (lg(x * math.exp(h)) - lg(x * math.exp(-h))) / (2 * h)
    assert np.allclose(cf.debroglie_dimension(x), 2 - slope, atol=1e-8)


@given(st.lists(st.floats(0, 1e4), min_size=2, max_size=50))
def test_debroglie_dimension_monotone(xs):
    d = cf.debroglie_dimension(np.sort(np.array(xs)))
    assert np.all(np.diff(d) <= 1e-15)
    assert np.all((d >= 1.0) & (d <= 2.0))


def test_crossover_resolution():
    assert cf.debroglie_crossover_resolution(2 - 8 / 15) == pytest.approx(1.0, abs=1e-10)
    root = math.sqrt((6 + math.sqrt(68)) / 16)  # 8x^4 - 6x^2 - 1 = 0
    assert cf.debroglie_crossover_resolution(1.5) == pytest.approx(root, abs=1e-10)
    # near zero 2 - D is 8 x^4
    assert cf.debroglie_crossover_resolution(2 - 1e-9) == pytest.approx((1e-9 / 8) ** 0.25, rel=1e-3)
    for bad in (1.0, 2.0, 0.5):
        with pytest.raises(DomainError):
            cf.debroglie_crossover_resolution(bad)


@given(st.floats(0.01, 100))
def test_crossover_inverts_dimension(x):
    d = float(cf.debroglie_dimension(x))
    if not 1 < d < 2:
        return
    assert cf.debroglie_crossover_resolution(d) == pytest.approx(x, rel=1e-8)
