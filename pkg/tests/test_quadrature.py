import math

import numpy as np
import pytest

from qpath import quadrature as gk


def test_rule_weights():
    assert gk.KRONROD_WEIGHTS.sum() == pytest.approx(2.0, rel=1e-15)
    assert gk.GAUSS_WEIGHTS.sum() == pytest.approx(2.0, rel=1e-15)
    assert np.count_nonzero(gk.GAUSS_WEIGHTS) == 7
    assert np.allclose(gk.NODES, -gk.NODES[::-1])


@pytest.mark.parametrize("deg", range(0, 23))
def test_kronrod_exact_to_degree_22(deg):
    val, _ = gk.integrate(lambda x: x**deg, 0.0, 1.0)
    assert val == pytest.approx(1.0 / (deg + 1), rel=1e-13)


@pytest.mark.parametrize("deg", range(0, 14))
def test_gauss_exact_to_degree_13(deg):
    mesh = gk.mesh_from_edges([0.0, 1.0])
    _, g = gk.panel_sums(mesh.nodes**deg, mesh)
    assert g[0] == pytest.approx(1.0 / (deg + 1), rel=1e-13)


def test_composite_oscillatory():
    val, err = gk.integrate(lambda x: np.cos(40 * x), 0.0, 3.0, 40)
    assert val == pytest.approx(math.sin(120) / 40, abs=1e-13)
    assert err < 1e-8


def test_non_contiguous_panels():
    mesh = gk.mesh_from_intervals([0.0, 2.0], [1.0, 4.0])
    k, _ = gk.panel_sums(mesh.nodes**2, mesh)
    assert k == pytest.approx([1 / 3, 56 / 3], rel=1e-14)


def test_phase_limited_edges():
    edges = gk.phase_limited_edges(lambda k: 10 * k * k, 6.5, math.pi)
    assert edges[0] == 0 and edges[-1] == 6.5
    spans = np.diff(10 * edges**2)
    assert spans.max() <= math.pi * 1.01
    assert len(edges) - 1 == math.ceil(10 * 6.5**2 / math.pi)
    assert np.array_equal(gk.phase_limited_edges(lambda k: 0.1 * k, 1.0, math.pi), [0.0, 1.0])
