"""Piecewise-constant eddy-viscosity profiles and physical scaling.

The nondimensional viscosity is a step function

    K(z) = l_n**2   for a_n < z < a_{n+1},   n = 0, ..., N-1

with a_0 = 0 and a_N = inf.  Internally every layer is described by its
amplitude l_n = sqrt(K_n), which is also the e-folding length of that
layer's exponential modes.
"""
from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass
from typing import Sequence

logger = logging.getLogger(__name__)

EARTH_ROTATION_RATE = 7.29e-5  # rad/s


class ProfileError(ValueError):
    """Invalid viscosity profile, scaling or geostrophic wind."""


@dataclass(frozen=True)
class StepViscosity:
    """Step-function eddy viscosity with ``len(amplitudes) - 1`` jumps."""

    jump_points: tuple[float, ...]
    amplitudes: tuple[float, ...]

    def __post_init__(self):
        jumps = tuple(float(a) for a in self.jump_points)
        amps = tuple(float(l) for l in self.amplitudes)
        object.__setattr__(self, "jump_points", jumps)
        object.__setattr__(self, "amplitudes", amps)
        if not amps:
            raise ProfileError("at least one layer is required")
        if len(amps) != len(jumps) + 1:
            raise ProfileError(
                f"{len(amps)} layers need {len(amps) - 1} jump points, got {len(jumps)}"
            )
        for l in amps:
            if not (math.isfinite(l) and l > 0):
                raise ProfileError(f"layer amplitudes must be positive and finite, got {l!r}")
        prev = 0.0
        for a in jumps:
            if not (math.isfinite(a) and a > prev):
                raise ProfileError(
                    f"jump points must be positive and strictly increasing, got {jumps}"
                )
            prev = a
        for j in range(len(amps) - 1):
            if amps[j] == amps[j + 1]:
                raise ProfileError(
                    f"adjacent layers {j} and {j + 1} share amplitude {amps[j]}; "
                    "build the profile with new_step_profile to merge them"
                )

    @classmethod
    def from_amplitudes(cls, jump_points: Sequence[float], amplitudes: Sequence[float]):
        """Build from amplitudes l_n, merging equal neighbours."""
        return new_step_profile(jump_points, [float(l) ** 2 for l in amplitudes])

    @property
    def n_layers(self) -> int:
        return len(self.amplitudes)

    @property
    def viscosities(self) -> tuple[float, ...]:
        return tuple(l * l for l in self.amplitudes)

    @property
    def boundaries(self) -> tuple[float, ...]:
        """Lower edges a_0 = 0, a_1, ..., a_{N-1} of every layer."""
        return (0.0,) + self.jump_points

    @property
    def widths(self) -> tuple[float, ...]:
        """Thicknesses of the finite layers (the top layer is unbounded)."""
        edges = self.boundaries
        return tuple(edges[n + 1] - edges[n] for n in range(len(edges) - 1))

    @property
    def top(self) -> float:
        """Height of the last jump, 0 for a constant profile."""
        return self.jump_points[-1] if self.jump_points else 0.0

    def layer_index(self, z: float, side: str = "left") -> int:
        """Index of the layer containing ``z``.

        At a jump point ``side='left'`` selects the layer below, ``'right'``
        the layer above.
        """
        if z < 0:
            raise ProfileError(f"height must be non-negative, got {z}")
        if side == "left":
            return bisect.bisect_left(self.jump_points, z)
        if side == "right":
            return bisect.bisect_right(self.jump_points, z)
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def new_step_profile(jump_points: Sequence[float], layer_viscosities: Sequence[float]) -> StepViscosity:
    """Build a profile from viscosity values K_n (not amplitudes).

    Adjacent layers with identical viscosity are merged into one layer and the
    jump between them is dropped; a warning is logged for each merge.
    """
    jumps = [float(a) for a in jump_points]
    visc = [float(k) for k in layer_viscosities]
    if not visc:
        raise ProfileError("layer list is empty")
    for k in visc:
        if not (math.isfinite(k) and k > 0):
            raise ProfileError(f"viscosities must be positive and finite, got {k!r}")
    if len(visc) != len(jumps) + 1:
        raise ProfileError(f"{len(visc)} layers need {len(visc) - 1} jump points, got {len(jumps)}")
    if any(a <= 0 for a in jumps) or any(b <= a for a, b in zip(jumps, jumps[1:])):
        raise ProfileError(f"jump points must be positive and strictly increasing, got {jumps}")

    kept_jumps: list[float] = []
    kept_visc = [visc[0]]
    for a, k in zip(jumps, visc[1:]):
        if k == kept_visc[-1]:
            logger.warning("merging layers with equal viscosity %r across jump at z=%r", k, a)
            continue
        kept_jumps.append(a)
        kept_visc.append(k)
    return StepViscosity(tuple(kept_jumps), tuple(math.sqrt(k) for k in kept_visc))


def viscosity_at(profile: StepViscosity, z: float) -> float:
    """K(z); at a jump point the value of the layer below is returned."""
    return profile.amplitudes[profile.layer_index(z, "left")] ** 2


@dataclass(frozen=True)
class GeostrophicWind:
    """Nondimensional geostrophic wind psi_g = u_g + i v_g."""

    psi_g: complex

    def __post_init__(self):
        psi = complex(self.psi_g)
        if psi == 0 or not (math.isfinite(psi.real) and math.isfinite(psi.imag)):
            raise ProfileError(f"geostrophic wind must be finite and non-zero, got {psi!r}")
        object.__setattr__(self, "psi_g", psi)

    @classmethod
    def from_components(cls, u_g: float, v_g: float = 0.0) -> "GeostrophicWind":
        return cls(complex(u_g, v_g))

    @property
    def u_g(self) -> float:
        return self.psi_g.real

    @property
    def v_g(self) -> float:
        return self.psi_g.imag


@dataclass(frozen=True)
class NondimScaling:
    """Physical scales of an f-plane Ekman layer in the northern hemisphere.

    latitude is in radians; speeds in m/s, heights in m, viscosities in m^2/s.
    """

    latitude: float
    speed_scale: float
    height_scale: float
    viscosity_scale: float
    rotation_rate: float = EARTH_ROTATION_RATE

    def __post_init__(self):
        if not 0 < self.latitude < math.pi / 2:
            raise ProfileError(f"latitude must lie in (0, pi/2) radians, got {self.latitude}")
        for name in ("speed_scale", "height_scale", "viscosity_scale", "rotation_rate"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ProfileError(f"{name} must be positive, got {value}")

    @property
    def coriolis(self) -> float:
        """f = 2 Omega sin(theta)."""
        return 2.0 * self.rotation_rate * math.sin(self.latitude)

    @property
    def viscosity_factor(self) -> float:
        """2 / (f H*^2): multiplies a dimensional viscosity to give K."""
        return 2.0 / (self.coriolis * self.height_scale**2)

    def profile_from_dimensional(self, nu0: float) -> float:
        """K for a relative viscosity nu0 = nu / nu*."""
        return self.viscosity_factor * self.viscosity_scale * nu0

    def wind(self, u_g: float, v_g: float) -> GeostrophicWind:
        """Geostrophic wind from dimensional components in m/s."""
        return GeostrophicWind(complex(u_g, v_g) / self.speed_scale)


def nondimensionalize(scaling: NondimScaling, dimensional_viscosity: float, height: float) -> tuple[float, float]:
    """Map (nu [m^2/s], Z [m]) to (K, z)."""
    if not dimensional_viscosity > 0 or not height > 0:
        raise ProfileError("viscosity and height must be positive")
    return dimensional_viscosity * scaling.viscosity_factor, height / scaling.height_scale


def dimensionalize(scaling: NondimScaling, viscosity: float, z: float) -> tuple[float, float]:
    """Inverse of :func:`nondimensionalize`."""
    if not viscosity > 0 or not z > 0:
        raise ProfileError("viscosity and height must be positive")
    return viscosity / scaling.viscosity_factor, z * scaling.height_scale
