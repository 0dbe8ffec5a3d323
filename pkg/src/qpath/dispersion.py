"""Bogoliubov energy law, its frequency form, group velocity and the
dimensionless evolution phase seen by the packet integrals."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .scales import DimensionlessGroup, DomainError


class Kind(enum.Enum):
    BOGOLIUBOV = "bogoliubov"
    FREE_PARTICLE = "free"
    LINEAR_SOUND = "sound"


class ProbeConvention(enum.Enum):
    """How the probed wavenumber is tied to the resolution."""

    RECIPROCAL = "reciprocal"  # k = 1/dx
    TWO_PI = "twopi"  # k = 2 pi/dx

    def wavenumber(self, delta_x: float) -> float:
        if self is ProbeConvention.TWO_PI:
            return 2.0 * math.pi / delta_x
        return 1.0 / delta_x


@dataclass(frozen=True)
class DispersionSpec:
    kind: Kind = Kind.BOGOLIUBOV
    sound_speed: float = 0.0
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.sound_speed < 0:
            raise DomainError("sound speed must be >= 0")
        if not (self.mass > 0 and self.hbar > 0):
            raise DomainError("mass and hbar must be positive")


def _check_nonnegative(x, name):
    if np.any(np.asarray(x) < 0):
        raise DomainError(f"{name} must be >= 0")


def energy(p, spec: DispersionSpec):
    """Excitation energy at momentum ``p``.

    Bogoliubov: ``sqrt((p v_s)^2 + p^4/(4 M^2))``; free particle ``p^2/2M``;
    linear sound ``p v_s``.
    """
    _check_nonnegative(p, "momentum")
    p = np.asarray(p, dtype=float)
    vs, m = spec.sound_speed, spec.mass
    if spec.kind is Kind.FREE_PARTICLE:
        out = p * p / (2 * m)
    elif spec.kind is Kind.LINEAR_SOUND:
        out = p * vs
    else:
        # p * sqrt(v^2 + p^2/4M^2) avoids squaring p twice
        out = p * np.sqrt(vs * vs + (p / (2 * m)) ** 2)
    return out[()] if out.ndim == 0 else out


def omega(k, spec: DispersionSpec):
    """Angular frequency ``omega(k) = E(hbar k)/hbar``."""
    _check_nonnegative(k, "wavenumber")
    k = np.asarray(k, dtype=float)
    return energy(spec.hbar * k, spec) / spec.hbar


def group_velocity_u(u: float, sound_speed: float) -> float:
    """Group velocity as a function of ``u = M v_s dx_eff / hbar``."""
    inv2 = 1.0 / (u * u)
    return sound_speed * (2.0 + inv2) / (2.0 * math.sqrt(1.0 + 0.25 * inv2))


def group_velocity(
    delta_x: float,
    spec: DispersionSpec,
    conv: ProbeConvention = ProbeConvention.RECIPROCAL,
) -> float:
    """``d omega/dk`` at the wavenumber probed by resolution ``delta_x``.

    With the reciprocal convention this is the closed form
    ``v_s (2 + 1/u^2) / (2 sqrt(1 + 1/(4u^2)))`` with ``u = M v_s dx/hbar``.
    """
    if not delta_x > 0:
        raise DomainError(f"delta_x must be positive, got {delta_x}")
    if not spec.sound_speed > 0:
        raise DomainError("group velocity at fixed probe needs v_s > 0")
    dx_eff = 1.0 / conv.wavenumber(delta_x)
    u = spec.mass * spec.sound_speed * dx_eff / spec.hbar
    return group_velocity_u(u, spec.sound_speed)


def phase(k, group: DimensionlessGroup):
    """Dimensionless phase ``omega dt`` at reduced wavenumber ``k = p dx/hbar``.

    Equals ``sqrt(s^2 k^2 + theta^2 k^4 / 4)``, which for ``xbar > 0`` is
    ``alpha sqrt((k/xbar)^2 + (k/xbar)^4/4)``.
    """
    _check_nonnegative(k, "wavenumber")
    k = np.asarray(k, dtype=float)
    out = k * np.sqrt(group.s**2 + 0.25 * (group.theta * k) ** 2)
    return out[()] if out.ndim == 0 else out


def phase_derivative(k, group: DimensionlessGroup):
    """``d phase/dk``; tends to ``s`` as ``k -> 0+``."""
    k = np.asarray(k, dtype=float)
    s2 = group.s**2
    t2 = group.theta**2
    root = np.sqrt(s2 + 0.25 * t2 * k * k)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(root > 0, (s2 + 0.5 * t2 * k * k) / np.where(root > 0, root, 1.0), 0.0)
    return out[()] if out.ndim == 0 else out


def omega_derivative(k, spec: DispersionSpec):
    """Analytic ``d omega/dk``; regular at ``v_s = 0`` (gives ``hbar k/M``)."""
    _check_nonnegative(k, "wavenumber")
    k = np.asarray(k, dtype=float)
    vs, m, hb = spec.sound_speed, spec.mass, spec.hbar
    if spec.kind is Kind.FREE_PARTICLE:
        out = hb * k / m
    elif spec.kind is Kind.LINEAR_SOUND:
        out = np.full_like(k, vs)
    else:
        c = hb / (2 * m)
        root = np.sqrt(vs * vs + (c * k) ** 2)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(root > 0, (vs * vs + 2 * (c * k) ** 2) / np.where(root > 0, root, 1.0), 0.0)
    return out[()] if out.ndim == 0 else out
