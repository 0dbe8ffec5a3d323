"""Physical input scales and the dimensionless groups built from them.

Everything downstream works in the reduced variables

    xbar  = M v_s dx / hbar      (resolution in units of the healing length)
    alpha = M v_s^2 dt / hbar    (time step in units of the sound period)
    s     = v_s dt / dx          (sound drift per step, in resolution units)
    theta = hbar dt / (M dx^2)   (free spreading per step, in resolution units)

``s`` and ``theta`` are stored directly so that ``v_s = 0`` needs no 0/0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional


class DomainError(ValueError):
    """Input outside the domain of a formula."""


@dataclass(frozen=True)
class PhysicalScales:
    delta_x: float
    sound_speed: float = 0.0
    delta_t: float = 1.0
    mass: float = 1.0
    hbar: float = 1.0
    total_time: Optional[float] = None

    def __post_init__(self):
        if not self.hbar > 0:
            raise DomainError(f"hbar must be positive, got {self.hbar}")
        if not self.mass > 0:
            raise DomainError(f"mass must be positive, got {self.mass}")
        if not self.delta_x > 0:
            raise DomainError(f"delta_x must be positive, got {self.delta_x}")
        if not self.sound_speed >= 0:
            raise DomainError(f"sound speed must be >= 0, got {self.sound_speed}")
        if not self.delta_t >= 0:
            raise DomainError(f"delta_t must be >= 0, got {self.delta_t}")
        if self.total_time is not None and not self.total_time >= self.delta_t:
            raise DomainError(
                f"total_time ({self.total_time}) must be >= delta_t ({self.delta_t})"
            )

    def with_(self, **changes) -> "PhysicalScales":
        return replace(self, **changes)


@dataclass(frozen=True)
class DimensionlessGroup:
    xbar: float
    alpha: float
    s: float
    theta: float

    @classmethod
    def from_phase_parameters(cls, s: float, theta: float, xbar: float = 0.0):
        """Build a group from the two phase parameters.

        ``xbar`` is only bookkeeping for the packet integrals; ``alpha`` is
        filled in from the identity ``alpha = s * xbar``.
        """
        if s < 0 or theta < 0 or xbar < 0:
            raise DomainError("s, theta and xbar must be non-negative")
        return cls(xbar=xbar, alpha=s * xbar, s=s, theta=theta)


@dataclass(frozen=True)
class FreeScale:
    p_average: float
    resolution: float
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.p_average > 0 and self.resolution > 0 and self.hbar > 0):
            raise DomainError("p_average, resolution and hbar must be positive")

    @property
    def de_broglie(self) -> float:
        return self.hbar / self.p_average

    @property
    def xbar(self) -> float:
        return self.resolution / self.de_broglie


def make_dimensionless(scales: PhysicalScales) -> DimensionlessGroup:
    """Reduce physical scales to ``(xbar, alpha, s, theta)``."""
    hb, m, vs = scales.hbar, scales.mass, scales.sound_speed
    dx, dt = scales.delta_x, scales.delta_t
    if not (dx > 0 and m > 0 and hb > 0):
        raise DomainError("delta_x, mass and hbar must be positive")
    return DimensionlessGroup(
        xbar=m * vs * dx / hb,
        alpha=m * vs * vs * dt / hb,
        s=vs * dt / dx,
        theta=hb * dt / (m * dx * dx),
    )


def free_particle_resolution(free: FreeScale) -> float:
    """Resolution measured in de Broglie wavelengths, ``dx p_av / hbar``."""
    return free.resolution * free.p_average / free.hbar


def steps_count(total_time: float, delta_t: float) -> int:
    """Number of whole time steps of length ``delta_t`` that fit in ``total_time``."""
    if not delta_t > 0:
        raise DomainError(f"delta_t must be positive, got {delta_t}")
    if total_time < delta_t:
        raise DomainError(f"total_time ({total_time}) shorter than delta_t ({delta_t})")
    # guard against 10/0.1 -> 99.99999999999999
    n = math.floor(total_time / delta_t * (1 + 4 * 2.0**-52))
    return max(n, 1)
