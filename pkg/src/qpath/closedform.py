"""Closed-form path lengths.

Abbott-Wise lengths for a free Gaussian packet (first moment and rms
definitions), the classical and quantum limits of the condensate packet
length, and the de Broglie construction built on the Bogoliubov group
velocity, together with the analytic dimension curve of the latter.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import erf

from .dispersion import DispersionSpec, Kind, ProbeConvention, group_velocity
from .scales import DomainError, PhysicalScales


class LengthDefinition(enum.Enum):
    FIRST_MOMENT = "a"  # <|x|>
    RMS_MOMENT = "b"  # sqrt(<x^2>)


class Regime(enum.Enum):
    VALID = "valid"
    OUTSIDE = "outside-asymptotic-domain"


@dataclass(frozen=True)
class ClosedFormResult:
    """``value = base**prefactor_exponent * factor``."""

    value: float
    factor: float
    prefactor_exponent: float
    regime: Regime = Regime.VALID


def erf_phi(y):
    """Error function ``(2/sqrt(pi)) int_0^y exp(-t^2) dt``; accepts +-inf."""
    out = erf(np.asarray(y, dtype=float))
    return out[()] if out.ndim == 0 else out


def aw_length_first(xbar: float, D: float) -> ClosedFormResult:
    """Abbott-Wise length with ``<dl> = <|x|>`` for a Gaussian packet."""
    if not xbar > 0:
        raise DomainError(f"xbar must be positive, got {xbar}")
    root = math.sqrt(1.0 + 4.0 * xbar * xbar)
    braces = math.sqrt(math.pi / 2) * float(erf_phi(math.sqrt(2.0) * xbar / root)) + (
        root / xbar
    ) * math.exp(-xbar * xbar / root)
    return ClosedFormResult(xbar ** (D - 1) * braces, braces, D - 1)


def aw_length_rms(xbar: float, D: float) -> ClosedFormResult:
    """Abbott-Wise length with ``<dl> = sqrt(<x^2>)``: ``xbar^(D-2) sqrt(16 xbar^2 + 3)``."""
    if xbar < 0:
        raise DomainError(f"xbar must be >= 0, got {xbar}")
    factor = math.sqrt(16.0 * xbar * xbar + 3.0)
    if xbar == 0:
        if D > 2:
            return ClosedFormResult(0.0, factor, D - 2)
        if D == 2:
            return ClosedFormResult(factor, factor, 0.0)
        raise DomainError("xbar = 0 only has a finite limit for D >= 2")
    return ClosedFormResult(xbar ** (D - 2) * factor, factor, D - 2)


def _classical_braces(r):
    return math.sqrt(math.pi) * r * erf_phi(r / math.sqrt(2.0)) - 2.0 * np.exp(-0.5 * r * r)


@lru_cache(maxsize=None)
def classical_braces_root() -> float:
    """Drift ratio below which the classical-limit bracket is non-positive."""
    return brentq(_classical_braces, 0.1, 5.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def classical_limit_length(r: float, D: float, delta_x: float) -> ClosedFormResult:
    """Purely classical 1-D limit, ``dx^D {sqrt(pi) r Phi(r/sqrt2) - 2 exp(-r^2/2)}``.

    ``r = v_s dt/dx``.  The bracket is negative for ``r`` below
    :func:`classical_braces_root`; such values are returned as printed but
    flagged :attr:`Regime.OUTSIDE`.
    """
    if r < 0:
        raise DomainError(f"drift ratio must be >= 0, got {r}")
    if not delta_x > 0:
        raise DomainError(f"delta_x must be positive, got {delta_x}")
    braces = float(_classical_braces(r))
    regime = Regime.VALID if r > classical_braces_root() else Regime.OUTSIDE
    return ClosedFormResult(delta_x**D * braces, braces, D, regime)


def quantum_limit_length(xbar: float, theta: float, D: float) -> ClosedFormResult:
    """Purely quantum 1-D limit, ``xbar^D sqrt(1 + theta^2)``."""
    if not xbar > 0:
        raise DomainError(f"xbar must be positive, got {xbar}")
    if theta < 0:
        raise DomainError(f"theta must be >= 0, got {theta}")
    factor = math.hypot(1.0, theta)
    regime = Regime.VALID if xbar < 1.0 else Regime.OUTSIDE
    return ClosedFormResult(xbar**D * factor, factor, D, regime)


def debroglie_conventional_length(
    T: float, scales: PhysicalScales, conv: ProbeConvention = ProbeConvention.RECIPROCAL
) -> float:
    """Distance ``v_g T`` covered at the group velocity of the probed mode."""
    if T < 0:
        raise DomainError(f"T must be >= 0, got {T}")
    spec = DispersionSpec(Kind.BOGOLIUBOV, scales.sound_speed, scales.mass, scales.hbar)
    return group_velocity(scales.delta_x, spec, conv) * T


def debroglie_factor(xbar):
    """``g(xbar) = (1 + 2 xbar^2) / sqrt(1 + 4 xbar^2)``."""
    x = np.asarray(xbar, dtype=float)
    if np.any(x < 0):
        raise DomainError("xbar must be >= 0")
    x2 = x * x
    out = (1.0 + 2.0 * x2) / np.sqrt(1.0 + 4.0 * x2)
    return out[()] if out.ndim == 0 else out


def debroglie_hausdorff_length(xbar: float, D: float, delta_x: float) -> ClosedFormResult:
    """``dx^(D-2) g(xbar)``."""
    if not delta_x > 0:
        raise DomainError(f"delta_x must be positive, got {delta_x}")
    g = float(debroglie_factor(xbar))
    return ClosedFormResult(delta_x ** (D - 2) * g, g, D - 2)


def debroglie_dimension(xbar):
    """Dimension making ``dx^(D-2) g`` locally resolution independent.

    ``D = 2 - dln g/dln xbar = 2 - 8 xbar^4 / ((1 + 2 xbar^2)(1 + 4 xbar^2))``.
    """
    x = np.asarray(xbar, dtype=float)
    if np.any(x < 0):
        raise DomainError("xbar must be >= 0")
    # written in u = 1/xbar^2; u = inf at tiny xbar is the correct limit
    with np.errstate(divide="ignore", over="ignore"):
        u = (1.0 / x) ** 2
    slope = 8.0 / (u + 2.0) / (u + 4.0)
    out = 2.0 - slope
    return out[()] if out.ndim == 0 else out


def debroglie_crossover_resolution(D_target: float) -> float:
    """Inverse of :func:`debroglie_dimension` on ``(1, 2)``."""
    if not 1.0 < D_target < 2.0:
        raise DomainError(f"target dimension must lie in (1, 2), got {D_target}")
    hi = 1.0
    while float(debroglie_dimension(hi)) > D_target:
        hi *= 2.0
    return brentq(lambda x: float(debroglie_dimension(x)) - D_target, 0.0, hi, xtol=1e-14)
