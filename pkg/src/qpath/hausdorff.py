"""Hausdorff lengths, effective dimensions and parameter sweeps.

The numeric method measures one segment as ``<dl> = dx * m`` with ``m`` the
first absolute moment or the rms of the evolved packet (in units of ``dx``),
and the path over ``N`` steps as ``N <dl>``.  The effective dimension is read
off from how ``N <dl>`` scales with the resolution,

    D_H = 1 - d ln(N <dl>) / d ln dx,

along one of two refinement paths:

``diffusive`` (default)
    ``dt`` shrinks with ``dx^2`` so the spreading parameter ``theta`` is
    held fixed and ``N ~ 1/dt`` grows; this is the Abbott-Wise way of
    refining a quantum path.  It gives ``D_H = 2 - d ln m / d ln s`` at fixed
    ``theta``: exactly 2 for a free packet and 1 once sound drift dominates.
``fixed-dt``
    ``dt`` and ``N`` are held fixed while ``dx`` varies.

Closed-form methods (Abbott-Wise a/b, de Broglie) carry their own dimension
curves, obtained as the ``D`` at which the printed length is locally
resolution independent.
"""

from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from . import closedform as cf
from .packet import Dim, QuadratureConfig, QuadratureError, SmearingKernel, WavePacketMoments
from .packet import moments as packet_moments
from .scales import DimensionlessGroup, DomainError, PhysicalScales, make_dimensionless, steps_count

D_RANGE = (0.5, 2.5)


class PrefactorConvention(enum.Enum):
    DX_POW_D_MINUS_1 = "dxD1"  # (dx)^(D-1) N <dl>
    DX_POW_D = "dxD"  # (dx)^D N <dl>
    XBAR_POW_D = "xbarD"  # xbar^D N <dl>


class Method(enum.Enum):
    NUMERIC_FIRST = "numeric-a"
    NUMERIC_RMS = "numeric-b"
    DEBROGLIE = "debroglie"
    AW_A = "aw-a"
    AW_B = "aw-b"

    @property
    def is_numeric(self) -> bool:
        return self in (Method.NUMERIC_FIRST, Method.NUMERIC_RMS)

    @classmethod
    def numeric(cls, definition: cf.LengthDefinition) -> "Method":
        if definition is cf.LengthDefinition.FIRST_MOMENT:
            return cls.NUMERIC_FIRST
        return cls.NUMERIC_RMS


class TimeScaling(enum.Enum):
    DIFFUSIVE = "diffusive"
    FIXED_DT = "fixed-dt"

    @property
    def dt_power(self) -> float:
        return 2.0 if self is TimeScaling.DIFFUSIVE else 0.0


@dataclass(frozen=True)
class NumericSettings:
    """Everything besides the physical scales that the numeric method needs."""

    dim: Dim = Dim.THREE
    kernel: SmearingKernel = SmearingKernel()
    quad: QuadratureConfig = QuadratureConfig()
    time_scaling: TimeScaling = TimeScaling.DIFFUSIVE
    log_step: float = 0.05

    def snapshot(self) -> Dict[str, str]:
        out = {
            "dim": str(int(self.dim)),
            "kernel": "gaussian" if self.kernel.is_gaussian else "custom",
            "time_scaling": self.time_scaling.value,
            "log_step": repr(self.log_step),
        }
        out.update({k: repr(v) for k, v in asdict(self.quad).items()})
        return out


FIELDS = (
    "method", "D", "delta_x", "v_s", "delta_t", "xbar", "alpha", "s", "theta",
    "length", "log10_length", "local_exponent", "dimension_estimate", "err_estimate", "flags",
)


@dataclass(frozen=True)
class HausdorffResult:
    method: str
    D: float
    delta_x: float
    v_s: float
    delta_t: float
    xbar: float
    alpha: float
    s: float
    theta: float
    length: float
    log10_length: float
    local_exponent: float
    dimension_estimate: float
    err_estimate: float
    flags: str = ""
    # uncertainty of dimension_estimate; not serialized
    dimension_err: float = field(default=0.0, compare=False)

    def as_row(self) -> tuple:
        return tuple(getattr(self, f) for f in FIELDS)

    @property
    def failed(self) -> bool:
        return self.flags.startswith("error")


@dataclass
class SweepTable:
    axes: Dict[str, List[float]]
    rows: List[HausdorffResult]
    metadata: Dict[str, str]

    @property
    def failures(self) -> int:
        return sum(r.failed for r in self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


# -- numeric building blocks ---------------------------------------------------

@lru_cache(maxsize=8192)
def _cached_moments(s: float, theta: float, dim: Dim, kernel: SmearingKernel,
                    quad: QuadratureConfig) -> WavePacketMoments:
    return packet_moments(DimensionlessGroup.from_phase_parameters(s, theta), kernel, dim, quad)


def segment_moment(s: float, theta: float, definition: cf.LengthDefinition,
                   settings: NumericSettings = NumericSettings()):
    """``(m, err)``: first moment or rms of the packet, in units of ``dx``."""
    mom = _cached_moments(float(s), float(theta), Dim(settings.dim), settings.kernel, settings.quad)
    m = mom.mean_abs if definition is cf.LengthDefinition.FIRST_MOMENT else mom.rms
    return m, mom.err_estimate


def local_log_slope(f: Callable[[float], float], delta_x: float, h: float = 0.05) -> float:
    """Central difference of ``ln f`` against ``ln delta_x`` with log step ``h``."""
    if not (delta_x > 0 and h > 0):
        raise DomainError("delta_x and h must be positive")
    try:
        hi = float(f(delta_x * math.exp(h)))
        lo = float(f(delta_x * math.exp(-h)))
    except (DomainError, ZeroDivisionError, OverflowError) as exc:
        raise DomainError(f"log-slope evaluation failed: {exc}") from exc
    if not (hi > 0 and lo > 0 and math.isfinite(hi) and math.isfinite(lo)):
        raise DomainError("log-slope needs positive finite values on both sides")
    return (math.log(hi) - math.log(lo)) / (2.0 * h)


@dataclass(frozen=True)
class DimensionEstimate:
    value: float
    local_exponent: float
    err: float


def estimate_dimension_group(s: float, theta: float, definition: cf.LengthDefinition,
                             settings: NumericSettings = NumericSettings()) -> DimensionEstimate:
    """Dimension estimate from the packet moments alone (see module notes).

    Refining ``dx -> dx e^h`` moves ``(s, theta)`` to
    ``(s e^{(p-1)h}, theta e^{(p-2)h})`` with ``p`` the power of ``dt`` in
    ``dx``, and ``N <dl>`` by ``e^{(1-p)h}`` times the moment ratio.
    """
    p = settings.time_scaling.dt_power
    h = settings.log_step
    if s == 0.0 and p == 2.0:
        # the packet does not change along the path; d ln m = 0 exactly
        m, _ = segment_moment(0.0, theta, definition, settings)
        slope = 1.0 - p
        return DimensionEstimate(1.0 - slope, slope, 0.0)
    vals = []
    for sign in (1.0, -1.0):
        vals.append(segment_moment(s * math.exp(sign * (p - 1.0) * h),
                                   theta * math.exp(sign * (p - 2.0) * h), definition, settings))
    (m_hi, e_hi), (m_lo, e_lo) = vals
    slope = (1.0 - p) + (math.log(m_hi) - math.log(m_lo)) / (2.0 * h)
    err = (e_hi / m_hi + e_lo / m_lo) / (2.0 * h)
    return DimensionEstimate(1.0 - slope, slope, err)


def estimate_dimension(scales: PhysicalScales,
                       definition: cf.LengthDefinition = cf.LengthDefinition.FIRST_MOMENT,
                       settings: NumericSettings = NumericSettings()) -> DimensionEstimate:
    """Effective Hausdorff dimension of the numeric method at ``scales``."""
    if not scales.delta_t > 0:
        raise DomainError("dimension estimate needs delta_t > 0")
    g = make_dimensionless(scales)
    return estimate_dimension_group(g.s, g.theta, definition, settings)


def _prefactor(conv: PrefactorConvention, D: float, delta_x: float, xbar: float) -> float:
    if conv is PrefactorConvention.DX_POW_D_MINUS_1:
        return delta_x ** (D - 1.0)
    if conv is PrefactorConvention.DX_POW_D:
        return delta_x**D
    return xbar**D


def _check_D(D: float):
    if not D_RANGE[0] <= D <= D_RANGE[1]:
        raise DomainError(f"D must lie in [{D_RANGE[0]}, {D_RANGE[1]}], got {D}")


def _log10(x: float) -> float:
    return math.log10(x) if x > 0 and math.isfinite(x) else math.nan


def _result(method, D, scales, g, length, est, err, flags) -> HausdorffResult:
    if not length > 0:
        flags = _join(flags, "nonpositive-length")
    return HausdorffResult(
        method=method.value, D=float(D), delta_x=scales.delta_x, v_s=scales.sound_speed,
        delta_t=scales.delta_t, xbar=g.xbar, alpha=g.alpha, s=g.s, theta=g.theta,
        length=float(length), log10_length=_log10(length),
        local_exponent=est.local_exponent if est else math.nan,
        dimension_estimate=est.value if est else math.nan,
        err_estimate=float(err), flags=flags, dimension_err=est.err if est else math.nan,
    )


def _join(*parts: str) -> str:
    return ";".join(p for p in parts if p)


def hausdorff_length(D: float, scales: PhysicalScales,
                     definition: cf.LengthDefinition = cf.LengthDefinition.FIRST_MOMENT,
                     conv: PrefactorConvention = PrefactorConvention.DX_POW_D_MINUS_1,
                     settings: NumericSettings = NumericSettings()) -> HausdorffResult:
    """Numeric Hausdorff length ``prefactor * N * dx * m``.

    ``N = steps_count(T, dt)`` when ``scales.total_time`` is set, else 1.
    The dimension columns come from :func:`estimate_dimension` and do not
    depend on ``conv``.
    """
    _check_D(D)
    g = make_dimensionless(scales)
    m, m_err = segment_moment(g.s, g.theta, definition, settings)
    n_steps = 1
    flags = f"prefactor={conv.value}"
    if scales.total_time is not None:
        n_steps = steps_count(scales.total_time, scales.delta_t)
        flags = _join(flags, f"N={n_steps}")
    pref = _prefactor(conv, D, scales.delta_x, g.xbar)
    scale = n_steps * pref * scales.delta_x
    est = None
    if scales.delta_t > 0:
        est = estimate_dimension_group(g.s, g.theta, definition, settings)
    else:
        flags = _join(flags, "no-dimension:dt=0")
    return _result(Method.numeric(definition), D, scales, g, scale * m, est, scale * m_err, flags)


def closed_form_length(method: Method, D: float, scales: PhysicalScales) -> HausdorffResult:
    """Closed-form rows; the resolution ``xbar = M v_s dx/hbar`` doubles as the
    Abbott-Wise ``dx p_av/hbar`` with ``p_av = M v_s``."""
    _check_D(D)
    g = make_dimensionless(scales)
    x = g.xbar
    flags = "prefactor=printed"
    if method is Method.DEBROGLIE:
        res = cf.debroglie_hausdorff_length(x, D, scales.delta_x)
        dh = float(cf.debroglie_dimension(x))
    elif method is Method.AW_A:
        res = cf.aw_length_first(x, D)
        dh = 1.0 - local_log_slope(lambda v: cf.aw_length_first(v, 1.0).factor, x)
    elif method is Method.AW_B:
        res = cf.aw_length_rms(x, D)
        if x > 0:
            dh = 2.0 - local_log_slope(lambda v: cf.aw_length_rms(v, 2.0).factor, x)
        else:
            dh = 2.0
    else:
        raise DomainError(f"{method} is not a closed-form method")
    if res.regime is cf.Regime.OUTSIDE:
        flags = _join(flags, "outside-asymptotic-domain")
    est = DimensionEstimate(dh, 1.0 - dh, 0.0)
    return _result(method, D, scales, g, res.value, est, 0.0, flags)


# -- sweeps --------------------------------------------------------------------

AXIS_NAMES = ("D", "deltax", "vs", "deltat")
_SCALE_FIELD = {"deltax": "delta_x", "vs": "sound_speed", "deltat": "delta_t"}


@dataclass(frozen=True)
class _Job:
    method: Method
    definition: cf.LengthDefinition
    conv: PrefactorConvention
    settings: NumericSettings
    base: PhysicalScales
    d_values: tuple


def _error_row(method, D, scales, exc) -> HausdorffResult:
    g = DimensionlessGroup(math.nan, math.nan, math.nan, math.nan)
    try:
        g = make_dimensionless(scales)
    except DomainError:
        pass
    nan = math.nan
    reason = type(exc).__name__
    return HausdorffResult(method.value, float(D), scales.delta_x, scales.sound_speed,
                           scales.delta_t, g.xbar, g.alpha, g.s, g.theta, nan, nan, nan, nan,
                           nan, f"error:{reason}", nan)


def _eval_point(job: _Job, overrides: tuple) -> List[HausdorffResult]:
    """All D values at one physical point (moments are shared across D)."""
    out = []
    try:
        scales = job.base.with_(**dict(overrides))
    except DomainError as exc:
        scales = None
        err = exc
    for D in job.d_values:
        if scales is None:
            out.append(_bad_scales_row(job.method, D, dict(overrides), job.base, err))
            continue
        try:
            if job.method.is_numeric:
                out.append(hausdorff_length(D, scales, job.definition, job.conv, job.settings))
            else:
                out.append(closed_form_length(job.method, D, scales))
        except (DomainError, QuadratureError, ArithmeticError) as exc:
            out.append(_error_row(job.method, D, scales, exc))
    return out


def _bad_scales_row(method, D, overrides, base, exc) -> HausdorffResult:
    vals = {f: getattr(base, f) for f in ("delta_x", "sound_speed", "delta_t")}
    vals.update(overrides)
    nan = math.nan
    return HausdorffResult(method.value, float(D), vals["delta_x"], vals["sound_speed"],
                           vals["delta_t"], nan, nan, nan, nan, nan, nan, nan, nan, nan,
                           f"error:{type(exc).__name__}", nan)


def _eval_chunk(job: _Job, points: Sequence[tuple]) -> List[List[HausdorffResult]]:
    return [_eval_point(job, p) for p in points]


def sweep(axes: Mapping[str, Sequence[float]],
          method: Method = Method.NUMERIC_FIRST,
          definition: cf.LengthDefinition = cf.LengthDefinition.FIRST_MOMENT,
          conv: PrefactorConvention = PrefactorConvention.DX_POW_D_MINUS_1,
          settings: NumericSettings = NumericSettings(),
          base: PhysicalScales = PhysicalScales(delta_x=1.0),
          workers: int = 1,
          metadata: Optional[Mapping[str, str]] = None) -> SweepTable:
    """Evaluate a method over the Cartesian product of ``axes``.

    Axis names are ``D``, ``deltax``, ``vs`` and ``deltat``; rows follow the
    product in the order the axes are given (first axis slowest).  Axes that
    are absent take their value from ``base`` (and ``D = 2``).  A failing
    point yields a row flagged ``error:<kind>`` instead of aborting.

    ``workers > 1`` spreads the physical points over processes; each point is
    a pure function of its inputs, so the table does not depend on it.
    """
    axes = {k: [float(v) for v in vals] for k, vals in axes.items()}
    for name, vals in axes.items():
        if name not in AXIS_NAMES:
            raise DomainError(f"unknown axis {name!r}; expected one of {AXIS_NAMES}")
        if not vals:
            raise DomainError(f"empty axis: {name}")
    if method.is_numeric:
        method = Method.numeric(definition)
    order = list(axes)
    d_values = tuple(axes.get("D", [2.0]))
    phys = [n for n in order if n != "D"]
    points = [tuple(zip((_SCALE_FIELD[n] for n in phys), combo))
              for combo in itertools.product(*(axes[n] for n in phys))]
    job = _Job(method, definition, conv, settings, base, d_values)
    if workers > 1 and len(points) > 1:
        chunks = [points[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_eval_chunk, [job] * len(chunks), chunks))
        per_point: List[List[HausdorffResult]] = [None] * len(points)  # type: ignore
        for i, part in enumerate(parts):
            per_point[i::workers] = part
    else:
        per_point = _eval_chunk(job, points)
    by_key = {p: rows for p, rows in zip(points, per_point)}
    # reassemble in the requested axis order
    rows = []
    for combo in itertools.product(*(axes[n] for n in order)):
        named = dict(zip(order, combo))
        key = tuple((_SCALE_FIELD[n], named[n]) for n in phys)
        rows.append(by_key[key][d_values.index(named["D"]) if "D" in named else 0])
    meta = {
        "method": method.value,
        "definition": definition.value,
        "prefactor": conv.value,
        "hbar": repr(base.hbar),
        "mass": repr(base.mass),
        "base_delta_x": repr(base.delta_x),
        "base_v_s": repr(base.sound_speed),
        "base_delta_t": repr(base.delta_t),
        "axes": " ".join(f"{k}=" + ",".join(repr(v) for v in axes[k]) for k in order),
    }
    if base.total_time is not None:
        meta["total_time"] = repr(base.total_time)
    if method.is_numeric:
        meta.update(settings.snapshot())
    if metadata:
        meta.update(metadata)
    return SweepTable(axes=axes, rows=rows, metadata=meta)


# -- figure grids ----------------------------------------------------------------

FIGURE_D = tuple(round(1.0 + 0.1 * i, 10) for i in range(11))
FIGURE_DELTAX = tuple(float(v) for v in np.geomspace(0.1, 5.0, 25))
FIGURE_VS = (0.0, 2.0, 4.0, 6.0, 8.0)

_FIGURES = {
    1: (Method.AW_A, "Abbott-Wise first-moment length xbar^(D-1){...} on a (D, xbar) grid"),
    2: (Method.AW_B, "Abbott-Wise rms length xbar^(D-2) sqrt(16 xbar^2 + 3) on a (D, xbar) grid"),
    3: (Method.NUMERIC_FIRST, "numeric packet length (dx)^(D-1) dx <|y|> over (D, dx, v_s)"),
    4: (Method.DEBROGLIE, "de Broglie length (dx)^(D-2) g(xbar) over (D, dx, v_s)"),
}


def figure_data(fig_id: int, settings: NumericSettings = NumericSettings(),
                conv: PrefactorConvention = PrefactorConvention.DX_POW_D_MINUS_1,
                workers: int = 1) -> SweepTable:
    """Rows behind figure ``fig_id`` on the pinned default grids.

    Figures 1-2 use ``hbar = M = v_s = 1`` so that ``xbar = dx``; figures 3-4
    use ``hbar = M = dt = 1`` with ``v_s`` in {0, 2, 4, 6, 8}.
    """
    if fig_id not in _FIGURES:
        raise DomainError(f"figure id must be one of 1, 2, 3, 4; got {fig_id}")
    method, what = _FIGURES[fig_id]
    if fig_id in (1, 2):
        axes = {"D": FIGURE_D, "deltax": FIGURE_DELTAX}
        base = PhysicalScales(delta_x=1.0, sound_speed=1.0, delta_t=1.0)
    else:
        axes = {"D": FIGURE_D, "deltax": FIGURE_DELTAX, "vs": FIGURE_VS}
        base = PhysicalScales(delta_x=1.0, sound_speed=0.0, delta_t=1.0)
    meta = {"figure": str(fig_id), "quantity": what,
            "grid": "D 1:2 step 0.1; deltax geomspace(0.1, 5, 25)"
                    + ("; v_s 0,2,4,6,8; hbar=M=dt=1" if fig_id > 2 else "; hbar=M=v_s=1")}
    return sweep(axes, method, cf.LengthDefinition.FIRST_MOMENT, conv, settings, base,
                 workers, meta)
