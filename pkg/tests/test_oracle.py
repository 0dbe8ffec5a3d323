import math

import numpy as np
import pytest

from qpath.oracle import (
    AliasingError,
    GridSpec,
    ResolutionError,
    cartesian_moments,
    spectral_evolve,
    spectral_moments,
    validation_grid,
)
from qpath.packet import Dim, SmearingKernel, moments
from qpath.scales import DimensionlessGroup, DomainError

GAUSS = SmearingKernel()


def grp(s, theta):
    return DimensionlessGroup.from_phase_parameters(s, theta)


def test_grid_spec_points():
    assert GridSpec().n_points(Dim.ONE) == 257
    assert GridSpec().n_points(Dim.THREE) == 97
    n = GridSpec(points=100).n_points(Dim.ONE)
    assert n % 2 == 1 and ((n - 1) // 2) % 4 == 0
    with pytest.raises(DomainError):
        GridSpec(extent=-1.0)


def test_cartesian_static_1d():
    m = cartesian_moments(grp(0, 0), dim=1)
    assert m.mean_abs == pytest.approx(math.sqrt(2 / math.pi), rel=1e-4)
    assert m.rms == pytest.approx(1.0, rel=1e-4)
    assert m.norm == pytest.approx(math.pi * math.sqrt(2 * math.pi), rel=1e-4)


def test_cartesian_static_3d():
    m = cartesian_moments(grp(0, 0), dim=3, grid=validation_grid(Dim.THREE, 0.0))
    assert m.mean_abs == pytest.approx(2 * math.sqrt(2 / math.pi), rel=1e-3)
    assert m.rms == pytest.approx(math.sqrt(3), rel=1e-3)


def test_cartesian_matches_packet_3d():
    g = grp(1, 1)
    a = cartesian_moments(g, dim=3, grid=validation_grid(Dim.THREE, 1.0))
    b = moments(g, dim=3)
    assert a.mean_abs == pytest.approx(b.mean_abs, rel=1e-4)
    assert a.rms == pytest.approx(b.rms, rel=1e-4)


def test_cartesian_drifting_1d():
    g = grp(1, 0)
    a = cartesian_moments(g, dim=1, grid=validation_grid(Dim.ONE, 1.0))
    b = moments(g, dim=1)
    assert a.mean_abs == pytest.approx(b.mean_abs, rel=1e-4)
    assert a.rms == pytest.approx(b.rms, rel=1e-4)


def test_cartesian_resolution_error():
    with pytest.raises(ResolutionError):
        cartesian_moments(grp(0, 0), dim=1, grid=GridSpec(extent=12.0, points=41))


def test_cartesian_halving_reduces_deviation():
    exact = math.sqrt(2 / math.pi) * math.sqrt(1 + 0.25)
    devs = []
    for pts in (33, 65):
        m = cartesian_moments(grp(0, 1), dim=1, grid=GridSpec(extent=12.0, points=pts),
                              check_resolution=False)
        devs.append(abs(m.mean_abs - exact))
    assert devs[1] <= 0.5 * devs[0]


def test_spectral_static():
    m = spectral_moments(grp(0, 0), dim=1, grid=GridSpec(extent=12.0, points=513))
    assert m.mean_abs == pytest.approx(math.sqrt(2 / math.pi), rel=1e-6)
    assert m.rms == pytest.approx(1.0, rel=1e-10)
    m = spectral_moments(grp(0, 0), dim=3, grid=validation_grid(Dim.THREE, 0.0))
    assert m.mean_abs == pytest.approx(2 * math.sqrt(2 / math.pi), rel=1e-4)
    assert m.rms == pytest.approx(math.sqrt(3), rel=1e-6)


def test_spectral_mean_converges_with_spacing():
    exact = math.sqrt(2 / math.pi)
    dev = [abs(spectral_moments(grp(0, 0), dim=1, grid=GridSpec(extent=12.0, points=p)).mean_abs
               - exact) for p in (257, 513)]
    assert dev[1] <= dev[0] / 8


def test_spectral_spreading_rms():
    m = spectral_moments(grp(0, 2), dim=1, grid=GridSpec(extent=16.0, points=321))
    assert m.rms == pytest.approx(math.sqrt(2), rel=1e-6)


@pytest.mark.parametrize("dim", [1, 3])
def test_spectral_substeps_agree(dim):
    g = grp(1, 1)
    grid = validation_grid(Dim(dim), 1.0) if dim == 3 else GridSpec(extent=16.0, points=321)
    one = spectral_evolve(g, GAUSS, Dim(dim), grid, steps=1).moments
    ten = spectral_evolve(g, GAUSS, Dim(dim), grid, steps=10).moments
    assert ten.mean_abs == pytest.approx(one.mean_abs, rel=1e-12)
    assert ten.rms == pytest.approx(one.rms, rel=1e-12)


@pytest.mark.parametrize("dim", [1, 3])
def test_spectral_parseval(dim):
    res = spectral_evolve(grp(1, 1), GAUSS, Dim(dim), GridSpec(extent=16.0), steps=1)
    assert res.y_norm == pytest.approx(res.k_norm, rel=1e-10)


def test_spectral_aliasing_detected():
    with pytest.raises(AliasingError):
        spectral_moments(grp(0, 10), dim=1, grid=GridSpec(extent=6.0))


def test_spectral_drift_against_packet():
    # s = 3 at tiny theta: the drifting pair plus its Dawson partner
    g = grp(3.0, 1e-6)
    a = spectral_moments(g, dim=1, grid=GridSpec(extent=200.0, points=4001))
    b = moments(g, dim=1)
    assert a.mean_abs == pytest.approx(b.mean_abs, rel=1e-4)
    assert a.rms == pytest.approx(b.rms, rel=1e-4)
    # the partner keeps <|y|> visibly below s
    assert a.mean_abs / 3.0 == pytest.approx(0.854, abs=2e-3)


def test_kink_subtraction_needs_gaussian():
    k = np.linspace(0, 6.5, 101)
    tent = SmearingKernel.custom(k, np.exp(-k * k))
    with pytest.raises(DomainError):
        spectral_evolve(grp(1, 1), tent, Dim.ONE, GridSpec(), steps=1)
    with pytest.raises(DomainError):
        spectral_evolve(grp(0, 1), GAUSS, Dim.ONE, GridSpec(), steps=0)
