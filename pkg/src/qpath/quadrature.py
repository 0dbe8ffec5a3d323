"""Gauss-Kronrod (7, 15) panel rules.

Every panel yields a Kronrod value and an embedded Gauss value; their
difference is the per-panel error estimate.  Reductions use ``np.sum`` on
fixed layouts so results do not depend on BLAS threading.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# QUADPACK qk15 abscissae/weights on [-1, 1] (positive half, centre last)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_g = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes of the positive half
_g[[1, 3, 5]] = _WG[:3]
_g[7] = _WG[3]
_g[[13, 11, 9]] = _WG[:3]
GAUSS_WEIGHTS = _g
NPTS = 15


@dataclass(frozen=True)
class PanelMesh:
    """Flattened GK15 nodes over a list of panels.

    ``nodes``, ``wk`` and ``wg`` have length ``15 * n_panels``; consecutive
    blocks of 15 belong to one panel.
    """

    edges: np.ndarray
    nodes: np.ndarray
    wk: np.ndarray
    wg: np.ndarray

    @property
    def n_panels(self) -> int:
        return len(self.edges) - 1


def mesh_from_edges(edges) -> PanelMesh:
    edges = np.asarray(edges, dtype=float)
    return mesh_from_intervals(edges[:-1], edges[1:])


def mesh_from_intervals(a, b) -> PanelMesh:
    """Mesh over panels ``[a_i, b_i]`` that need not be contiguous."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    edges = np.append(a, b[-1:]) if len(a) else np.zeros(1)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = (mid[:, None] + half[:, None] * NODES[None, :]).ravel()
    wk = (half[:, None] * KRONROD_WEIGHTS[None, :]).ravel()
    wg = (half[:, None] * GAUSS_WEIGHTS[None, :]).ravel()
    return PanelMesh(edges, nodes, wk, wg)


def panel_sums(values, mesh: PanelMesh):
    """Kronrod and Gauss sums per panel for ``values`` shaped ``(..., 15*P)``.

    Returns arrays shaped ``(..., P)``.
    """
    shape = values.shape[:-1] + (mesh.n_panels, NPTS)
    k = (values * mesh.wk).reshape(shape).sum(axis=-1)
    g = (values * mesh.wg).reshape(shape).sum(axis=-1)
    return k, g


def integrate(func, a: float, b: float, n_panels: int = 1):
    """Composite GK15 integral of a vectorised ``func`` over ``[a, b]``.

    Returns ``(value, error_estimate)``.
    """
    mesh = mesh_from_edges(np.linspace(a, b, n_panels + 1))
    k, g = panel_sums(np.asarray(func(mesh.nodes)), mesh)
    return k.sum(), np.abs(k - g).sum()


def phase_limited_edges(cumulative_phase, k_max: float, max_phase: float, n_probe: int = 4097):
    """Panel edges on ``[0, k_max]`` so no panel spans more than ``max_phase``.

    ``cumulative_phase`` must be non-decreasing with value 0 at 0.
    """
    total = float(cumulative_phase(k_max))
    n = max(1, int(np.ceil(total / max_phase)))
    if n == 1:
        return np.array([0.0, k_max])
    probe = np.linspace(0.0, k_max, n_probe)
    phi = cumulative_phase(probe)
    targets = np.linspace(0.0, total, n + 1)
    edges = np.interp(targets, phi, probe)
    edges[0], edges[-1] = 0.0, k_max
    # interpolation on a coarse probe can leave one panel slightly over budget
    return np.unique(edges)
