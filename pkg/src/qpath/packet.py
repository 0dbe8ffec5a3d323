"""Smeared, evolved wave packet and its absolute moments.

The packet in reduced variables (``k = p dx/hbar``, ``y = x/dx``) is

    Psi(y) = int d^d k f(|k|) exp(i k.y - i phase(|k|))

with ``phase`` from :func:`qpath.dispersion.phase`.  Both dimensions are
reduced to half-line integrals over ``k``:

    1-D:  A(y) = 2 int_0^kmax f(k) cos(k y) e^{-i phase(k)} dk
    3-D:  I(y) =   int_0^kmax k f(k) sin(k y) e^{-i phase(k)} dk,   Psi = 4 pi I / y

and the moments ``int |y|^n |Psi|^2 d^d y`` become ``C_d int_0^inf y^n |amp|^2 dy``
with ``amp = A`` (``C_1 = 2``) or ``amp = I`` (``C_3 = 64 pi^3``).

The ``k`` integrals use GK15 panels limited to a fixed phase span.  The ``y``
integral is adaptive over the bulk of the packet and then extended outward
in doubling panels.  Whenever the sound drift ``s`` is non-zero, the
dispersion has a kink at ``k = 0`` and the packet carries an algebraic tail
``|amp|^2 ~ 4 |f'(0) - i s f(0)|^2 / y^p`` (``p = 4`` in 1-D, ``6`` in 3-D);
the part beyond the last panel is added analytically once the computed
integrand has settled onto that law.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from . import quadrature as gk
from .dispersion import phase, phase_derivative
from .scales import DimensionlessGroup, DomainError


class QuadratureError(RuntimeError):
    """Requested tolerance not met within the subdivision budget."""


class Dim(enum.IntEnum):
    ONE = 1
    THREE = 3


@dataclass(frozen=True)
class SmearingKernel:
    """Radial momentum-space envelope ``f(|k|)``.

    The default is the Gaussian ``exp(-k^2)``.  A custom kernel is given as a
    table ``(k, f)`` starting at ``k = 0`` with ``f(0) = 1``, non-increasing;
    it is interpolated monotonically and taken as zero past the last knot.
    """

    k_table: Optional[tuple] = None
    f_table: Optional[tuple] = None

    def __post_init__(self):
        if (self.k_table is None) != (self.f_table is None):
            raise DomainError("custom kernel needs both k and f tables")
        if self.k_table is None:
            return
        k = np.asarray(self.k_table, dtype=float)
        f = np.asarray(self.f_table, dtype=float)
        if k.ndim != 1 or k.shape != f.shape or len(k) < 2:
            raise DomainError("kernel tables must be 1-D, equal length, >= 2 points")
        if k[0] != 0.0 or np.any(np.diff(k) <= 0):
            raise DomainError("kernel k table must start at 0 and increase")
        if not math.isclose(f[0], 1.0, rel_tol=0, abs_tol=1e-12):
            raise DomainError("kernel must satisfy f(0) = 1")
        if np.any(np.diff(f) > 0) or np.any(f < 0):
            raise DomainError("kernel must be non-negative and non-increasing")

    @classmethod
    def gaussian(cls) -> "SmearingKernel":
        return cls()

    @classmethod
    def custom(cls, k: Sequence[float], f: Sequence[float]) -> "SmearingKernel":
        return cls(tuple(map(float, k)), tuple(map(float, f)))

    @property
    def is_gaussian(self) -> bool:
        return self.k_table is None

    @cached_property
    def _interp(self):
        return PchipInterpolator(self.k_table, self.f_table, extrapolate=False)

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        if self.is_gaussian:
            return np.exp(-k * k)
        out = self._interp(k)
        return np.nan_to_num(out, nan=0.0)

    def derivative_at_zero(self) -> float:
        if self.is_gaussian:
            return 0.0
        return float(self._interp.derivative()(0.0))

    def support(self, level: float) -> float:
        """Smallest ``k`` beyond which ``f(k)^2 < level``."""
        if self.is_gaussian:
            return math.sqrt(-0.5 * math.log(level))
        k_end = self.k_table[-1]
        if float(self(k_end)) ** 2 >= level:
            return k_end
        return brentq(lambda k: float(self(k)) ** 2 - level, 0.0, k_end)


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    k_max: float = 6.5
    panel_phase: float = math.pi
    max_subdivisions: int = 2000
    y_cap: float = 1e6

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")
        if not (self.k_max > 0 and self.panel_phase > 0):
            raise DomainError("k_max and panel_phase must be positive")
        if math.exp(-2 * self.k_max**2) >= self.abs_tol:
            raise DomainError("k_max too small: Gaussian kernel^2 at k_max exceeds abs_tol")


@dataclass(frozen=True)
class WavePacketMoments:
    dim: Dim
    norm: float
    mean_abs: float
    rms: float
    err_estimate: float
    y_extent: float = field(default=0.0, compare=False)
    tail_weight: float = field(default=0.0, compare=False)


_ANGULAR = {Dim.ONE: 2.0, Dim.THREE: 64.0 * math.pi**3}
_TAIL_POWER = {Dim.ONE: 4, Dim.THREE: 6}
# largest (y nodes) x (k nodes) block held in memory at once
_BLOCK = 1 << 21


class _Packet:
    """Amplitude evaluator and y-integrator for one (group, kernel, dim)."""

    def __init__(self, group: DimensionlessGroup, kernel: SmearingKernel, dim: Dim,
                 cfg: QuadratureConfig):
        self.group, self.kernel, self.dim, self.cfg = group, kernel, Dim(dim), cfg
        # past this k the kernel is below 1e-2 abs_tol and cannot move the
        # amplitude at the requested absolute accuracy
        k_max = min(cfg.k_max, kernel.support((1e-2 * cfg.abs_tol) ** 2))
        if not kernel.is_gaussian:
            k_max = min(k_max, kernel.k_table[-1])
        self.k_max = k_max
        g0 = complex(kernel.derivative_at_zero(), -group.s * float(kernel(0.0)))
        self.tail_coeff = 4.0 * abs(g0) ** 2
        self.tail_power = _TAIL_POWER[self.dim]
        self._meshes: dict = {}
        # bound on |amp| used to scale absolute tolerances
        jac = (lambda k: 2.0 * np.ones_like(k)) if self.dim is Dim.ONE else (lambda k: k)
        self.amp_scale = float(gk.integrate(lambda k: np.abs(kernel(k)) * jac(k), 0.0, k_max, 32)[0])

    # -- k integral -------------------------------------------------------
    def _mesh(self, y_top: float, refine: int):
        # bucket the y range geometrically so neighbouring panels share a mesh
        bucket = 0 if y_top <= 1.0 else math.ceil(8 * math.log2(y_top))
        key = (bucket, refine)
        hit = self._meshes.get(key)
        if hit is not None:
            return hit
        y_b = 1.0 if bucket == 0 else 2.0 ** (bucket / 8)
        g = self.group
        edges = gk.phase_limited_edges(
            lambda k: y_b * k + phase(k, g), self.k_max, self.cfg.panel_phase / 2**refine
        )
        if not self.kernel.is_gaussian:
            # a tabulated kernel is only C^1 at its knots; never straddle one
            knots = np.asarray(self.kernel.k_table)
            edges = np.union1d(edges, knots[knots < self.k_max])
        mesh = gk.mesh_from_edges(edges)
        k = mesh.nodes
        v = self.kernel(k) * np.exp(-1j * phase(k, g))
        v = 2.0 * v if self.dim is Dim.ONE else k * v
        vk = v * mesh.wk
        vd = (v * (mesh.wk - mesh.wg)).reshape(mesh.n_panels, gk.NPTS)
        hit = (mesh, np.stack([vk.real, vk.imag]), np.stack([vd.real, vd.imag]))
        self._meshes[key] = hit
        return hit

    def _amp_block(self, y, refine):
        mesh, vk, vd = self._mesh(float(y.max()), refine)
        arg = np.multiply.outer(y, mesh.nodes)
        trig = np.cos(arg, out=arg) if self.dim is Dim.ONE else np.sin(arg, out=arg)
        # einsum keeps a fixed summation order (no BLAS threading)
        parts = np.einsum("yk,ck->cy", trig, vk)
        amp = parts[0] + 1j * parts[1]
        diff = np.einsum("ypq,cpq->cyp", trig.reshape(len(y), mesh.n_panels, gk.NPTS), vd)
        err = np.hypot(diff[0], diff[1]).sum(axis=-1)
        return amp, err

    def amplitude(self, y):
        """``(amp, err)`` for non-negative ``y`` (any order)."""
        y = np.asarray(y, dtype=float)
        order = np.argsort(y, kind="stable")
        ys = y[order]
        amp = np.empty(len(ys), dtype=complex)
        err = np.empty(len(ys))
        i = 0
        while i < len(ys):
            # grow block until the node budget is reached
            mesh, _, _ = self._mesh(float(ys[min(i + 14, len(ys) - 1)]), 0)
            n = max(1, _BLOCK // max(len(mesh.nodes), 1))
            j = min(len(ys), i + n)
            block = ys[i:j]
            a, e = self._amp_block(block, 0)
            tol = np.maximum(self.cfg.abs_tol * self.amp_scale, self.cfg.rel_tol * np.abs(a))
            bad = e > tol
            refine = 0
            while np.any(bad):
                refine += 1
                if refine > 4:
                    raise QuadratureError(
                        f"k-integral error {e[bad].max():.3g} above tolerance at y={block[bad].max():.6g}"
                    )
                a2, e2 = self._amp_block(block[bad], refine)
                a[bad], e[bad] = a2, e2
                tol = np.maximum(self.cfg.abs_tol * self.amp_scale,
                                 self.cfg.rel_tol * np.abs(a))
                bad = e > tol
            amp[i:j], err[i:j] = a, e
            i = j
        out_amp = np.empty_like(amp)
        out_err = np.empty_like(err)
        out_amp[order], out_err[order] = amp, err
        return out_amp, out_err

    # -- y integral -------------------------------------------------------
    def _panel_moments(self, lo, hi):
        """Per-panel Kronrod/Gauss moments ``y^n |amp|^2`` (n = 0, 1, 2)."""
        mesh = gk.mesh_from_intervals(lo, hi)
        y = mesh.nodes
        amp, kerr = self.amplitude(y)
        dens = amp.real**2 + amp.imag**2
        powers = np.stack([np.ones_like(y), y, y * y])
        k, g = gk.panel_sums(powers * dens, mesh)
        # first-order propagation of the k-quadrature error into |amp|^2
        kprop, _ = gk.panel_sums(powers * (2.0 * np.abs(amp) * kerr), mesh)
        model = self.tail_coeff * y ** (-float(self.tail_power)) if self.tail_coeff > 0 else 0.0
        resid, _ = gk.panel_sums(powers * np.abs(dens - model), mesh)
        return k, np.abs(k - g), kprop, resid

    def bulk_edge(self) -> float:
        k_b = min(self.kernel.support(self.cfg.abs_tol), self.k_max)
        return float(phase_derivative(k_b, self.group)) + 12.0

    def _initial_width(self, y_bulk: float) -> float:
        # |amp|^2 carries beats between stationary and endpoint contributions
        # with periods of a few units; start near that scale and let bisection refine
        return float(min(4.0, y_bulk / 16))

    def _adaptive(self, a: float, b: float, width: float, budget: list, ref=0.0):
        """Adaptive GK over ``[a, b]``; returns per-panel arrays.

        ``ref`` holds moments accumulated elsewhere; tolerances are relative
        to the larger of it and the local total.
        """
        n0 = max(1, math.ceil((b - a) / width))
        edges = np.linspace(a, b, n0 + 1)
        lo, hi = edges[:-1], edges[1:]
        k, e, kp, r = self._panel_moments(lo, hi)
        done = []
        while True:
            total = k.sum(axis=1) + sum(d[0].sum(axis=1) for d in done)
            tol = np.maximum(self.cfg.rel_tol * np.maximum(np.abs(total), ref),
                             self.cfg.abs_tol * self.amp_scale**2)
            err_all = e.sum(axis=1) + sum(d[1].sum(axis=1) for d in done)
            if np.all(err_all <= tol):
                break
            share = (hi - lo) / (b - a)
            bad = np.any(e > 0.5 * tol[:, None] * share[None, :], axis=0)
            if not np.any(bad):
                bad = np.any(e >= e.max(axis=1, keepdims=True), axis=0)
            budget[0] -= int(bad.sum())
            if budget[0] < 0:
                raise QuadratureError(
                    f"y-integral did not reach rel_tol={self.cfg.rel_tol:g} within "
                    f"{self.cfg.max_subdivisions} subdivisions (group={self.group})"
                )
            good = ~bad
            done.append((k[:, good], e[:, good], kp[:, good], r[:, good], lo[good], hi[good]))
            mid = 0.5 * (lo[bad] + hi[bad])
            new_lo = np.concatenate([lo[bad], mid])
            new_hi = np.concatenate([mid, hi[bad]])
            srt = np.argsort(new_lo)
            lo, hi = new_lo[srt], new_hi[srt]
            k, e, kp, r = self._panel_moments(lo, hi)
        done.append((k, e, kp, r, lo, hi))
        return tuple(np.concatenate([d[i] for d in done], axis=-1) for i in range(4))

    def moments(self) -> WavePacketMoments:
        cfg = self.cfg
        budget = [cfg.max_subdivisions]
        y_bulk = self.bulk_edge()
        width = self._initial_width(y_bulk)
        k, e, kp, _ = self._adaptive(0.0, y_bulk, width, budget)
        acc = k.sum(axis=1)
        err = e.sum(axis=1) + kp.sum(axis=1)
        p, c = self.tail_power, self.tail_coeff
        n = np.arange(3)

        def tail(Y):
            if c == 0:
                return np.zeros(3)
            return c * Y ** (n + 1.0 - p) / (p - n - 1.0)

        a = y_bulk
        resid_last = np.full(3, np.inf)
        while True:
            b = 2.0 * a
            k, e, kp, r = self._adaptive(a, b, (b - a) / 4, budget, ref=np.abs(acc))
            acc = acc + k.sum(axis=1)
            err = err + e.sum(axis=1) + kp.sum(axis=1)
            resid_last = r.sum(axis=1)
            total = acc + tail(b)
            if np.all(resid_last <= cfg.rel_tol * np.abs(total)):
                a = b
                break
            a = b
            if a > cfg.y_cap:
                raise QuadratureError(
                    f"packet tail not converged by y={cfg.y_cap:g} (group={self.group})"
                )
        tails = tail(a)
        moments_raw = _ANGULAR[self.dim] * (acc + tails)
        dmom = _ANGULAR[self.dim] * (err + resid_last)
        m0, m1, m2 = moments_raw
        mean_abs = m1 / m0
        rms = math.sqrt(m2 / m0)
        rel0 = dmom[0] / m0
        d_mean = mean_abs * (dmom[1] / m1 + rel0)
        d_rms = 0.5 * rms * (dmom[2] / m2 + rel0)
        floor = 64 * np.finfo(float).eps * max(mean_abs, rms)
        return WavePacketMoments(
            dim=self.dim,
            norm=float(m0),
            mean_abs=float(mean_abs),
            rms=float(rms),
            err_estimate=float(max(d_mean, d_rms) + floor),
            y_extent=float(a),
            tail_weight=float(_ANGULAR[self.dim] * tails[0] / m0),
        )


def amplitude(y, group: DimensionlessGroup, kernel: SmearingKernel = SmearingKernel(),
              dim: Dim = Dim.ONE, cfg: QuadratureConfig = QuadratureConfig()):
    """Packet amplitude ``Psi(y)`` (complex), including the angular constant.

    In 1-D any real ``y`` is allowed (the packet is even); in 3-D ``y`` is
    the radius and must be non-negative, with ``y = 0`` taken as the limit.
    """
    dim = Dim(dim)
    y = np.asarray(y, dtype=float)
    if dim is Dim.THREE and np.any(y < 0):
        raise DomainError("3-D radius must be >= 0")
    pk = _Packet(group, kernel, dim, cfg)
    yy = np.abs(np.atleast_1d(y)).ravel()
    if dim is Dim.ONE:
        amp, _ = pk.amplitude(yy)
    else:
        # Psi = 4 pi I(y)/y with I(y)/y -> int k^2 f e^{-i phase} at y = 0
        small = yy < 1e-8
        amp = np.empty(len(yy), dtype=complex)
        if np.any(~small):
            inner, _ = pk.amplitude(yy[~small])
            amp[~small] = 4 * math.pi * inner / yy[~small]
        if np.any(small):
            mesh, vk, _ = pk._mesh(1.0, 0)
            val = np.sum(mesh.nodes * (vk[0] + 1j * vk[1]))
            amp[small] = 4 * math.pi * val
    amp = amp.reshape(y.shape)
    return amp[()] if amp.ndim == 0 else amp


def moments(group: DimensionlessGroup, kernel: SmearingKernel = SmearingKernel(),
            dim: Dim = Dim.ONE, cfg: QuadratureConfig = QuadratureConfig()) -> WavePacketMoments:
    """Norm, ``<|y|>`` and ``sqrt(<y^2>)`` of the evolved packet."""
    return _Packet(group, kernel, Dim(dim), cfg).moments()


def parseval_norm(kernel: SmearingKernel = SmearingKernel(), dim: Dim = Dim.ONE,
                  cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """``int |Psi|^2 d^d y`` computed on the momentum side."""
    dim = Dim(dim)
    if dim is Dim.ONE:
        val, _ = gk.integrate(lambda k: kernel(k) ** 2, 0.0, cfg.k_max, 64)
        return 4.0 * math.pi * val
    val, _ = gk.integrate(lambda k: (k * kernel(k)) ** 2, 0.0, cfg.k_max, 64)
    return (2 * math.pi) ** 3 * 4 * math.pi * val


def second_moment_spectral(group: DimensionlessGroup, kernel: SmearingKernel = SmearingKernel(),
                           dim: Dim = Dim.ONE, cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """``sqrt(<y^2>)`` from the momentum-side identity ``<y^2> = <|grad_k psi|^2>``.

    Only the Gaussian kernel is supported (its derivative is analytic).
    """
    if not kernel.is_gaussian:
        raise DomainError("spectral second moment needs the Gaussian kernel")
    dim = Dim(dim)
    jac = (lambda k: np.ones_like(k)) if dim is Dim.ONE else (lambda k: k * k)

    def grad2(k):
        f = np.exp(-k * k)
        return ((2 * k * f) ** 2 + (phase_derivative(k, group) * f) ** 2) * jac(k)

    num, _ = gk.integrate(grad2, 0.0, cfg.k_max, 256)
    den, _ = gk.integrate(lambda k: np.exp(-2 * k * k) * jac(k), 0.0, cfg.k_max, 64)
    return math.sqrt(num / den)


def norm_invariance_check(groups: Sequence[DimensionlessGroup],
                          kernel: SmearingKernel = SmearingKernel(), dim: Dim = Dim.ONE,
                          cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """Largest relative deviation of the packet norm from the unevolved one."""
    if not groups:
        raise DomainError("need at least one group")
    ref = moments(DimensionlessGroup(0.0, 0.0, 0.0, 0.0), kernel, dim, cfg).norm
    return max(abs(moments(g, kernel, dim, cfg).norm - ref) / ref for g in groups)
