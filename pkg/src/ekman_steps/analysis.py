"""Wind profile, turning angle and hodograph of a solved Ekman layer."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .profile import GeostrophicWind, ProfileError, StepViscosity, new_step_profile
from .solver import (
    ONE_PLUS_I,
    LayerCoefficients,
    assemble_dense_system,
    solve_dense,
    solve_transfer,
)

_SOLVERS = {
    "dense": lambda p, w: solve_dense(assemble_dense_system(p, w)),
    "transfer": solve_transfer,
}


@dataclass(frozen=True)
class Solution:
    profile: StepViscosity
    wind: GeostrophicWind
    coefficients: LayerCoefficients
    method: str = "transfer"

    @property
    def psi_g(self) -> complex:
        return self.wind.psi_g


def solve(profile: StepViscosity, wind: GeostrophicWind | complex = 1.0, method: str = "transfer") -> Solution:
    """Solve for the layer coefficients with ``method`` 'transfer' or 'dense'."""
    if not isinstance(wind, GeostrophicWind):
        wind = GeostrophicWind(wind)
    try:
        solver = _SOLVERS[method]
    except KeyError:
        raise ValueError(f"unknown solver {method!r}; expected one of {sorted(_SOLVERS)}") from None
    return Solution(profile, wind, solver(profile, wind), method)


def one_jump(h: float, l: float, psi_g: complex = 1.0, method: str = "transfer") -> Solution:
    """Unit viscosity below ``h``, viscosity ``l**2`` above."""
    return solve(new_step_profile([h], [1.0, l * l]), psi_g, method)


def _layer_terms(sol: Solution, z: float, side: str) -> tuple[int, complex, complex]:
    """Layer index and the growing/decaying terms of psi - psi_g at z."""
    profile = sol.profile
    n = profile.layer_index(z, side)
    l = profile.amplitudes[n]
    bottom = profile.boundaries[n]
    top = profile.boundaries[n + 1] if n + 1 < profile.n_layers else bottom
    c_grow, c_decay = sol.coefficients.anchored[n]
    grow = c_grow * np.exp(ONE_PLUS_I * (z - top) / l) if c_grow != 0 else 0j
    decay = c_decay * np.exp(-ONE_PLUS_I * (z - bottom) / l)
    return n, complex(grow), complex(decay)


def _on_jump(profile: StepViscosity, z: float) -> bool:
    return z in profile.jump_points


def evaluate_psi(sol: Solution, z: float, side: str = "left") -> complex:
    """psi(z).  ``side`` only matters exactly at a jump, where psi is continuous."""
    if z < 0:
        raise ProfileError(f"height must be non-negative, got {z}")
    _, grow, decay = _layer_terms(sol, z, side)
    return grow + decay + sol.psi_g


def evaluate_psi_prime(sol: Solution, z: float, side: str | None = None) -> complex:
    """d psi / dz.  At a jump the one-sided value must be requested with ``side``."""
    if z < 0:
        raise ProfileError(f"height must be non-negative, got {z}")
    if side is None:
        if _on_jump(sol.profile, z):
            raise ValueError(f"z={z} is a jump point; pass side='left' or 'right'")
        side = "left"
    n, grow, decay = _layer_terms(sol, z, side)
    return ONE_PLUS_I / sol.profile.amplitudes[n] * (grow - decay)


def _angle(ratio: complex) -> float:
    return math.atan2(ratio.imag, ratio.real)


def angle_profile(sol: Solution, z: float) -> float:
    """Turning angle gamma(z) of the wind relative to psi_g, in radians.

    At the surface psi vanishes and the angle is taken from psi'(0).
    """
    if z == 0:
        return surface_deflection_angle(sol)
    return _angle(evaluate_psi(sol, z) / sol.psi_g)


def surface_deflection_angle(sol: Solution) -> float:
    dpsi = evaluate_psi_prime(sol, 0.0)
    if dpsi == 0:
        raise ArithmeticError("psi'(0) vanishes; the surface deflection angle is undefined")
    return _angle(dpsi / sol.psi_g)


@dataclass(frozen=True)
class SpiralSample:
    z: float
    psi: complex
    gamma: float
    deficit: float

    @property
    def u(self) -> float:
        return self.psi.real

    @property
    def v(self) -> float:
        return self.psi.imag


def sample(sol: Solution, z: float) -> SpiralSample:
    psi = evaluate_psi(sol, z)
    return SpiralSample(z, psi, angle_profile(sol, z), abs(psi - sol.psi_g))


def hodograph(sol: Solution, z_max: float, count: int) -> list[SpiralSample]:
    """Samples at ``count`` uniformly spaced heights on [0, z_max]."""
    if not z_max > 0:
        raise ValueError(f"z_max must be positive, got {z_max}")
    if count < 2:
        raise ValueError(f"count must be at least 2, got {count}")
    return [sample(sol, float(z)) for z in np.linspace(0.0, z_max, count)]


def default_z_max(profile: StepViscosity) -> float:
    """Last jump plus ten e-folding lengths of the top layer."""
    return profile.top + 10.0 * profile.amplitudes[-1]


def one_jump_limit_small_l(h: float) -> float:
    """tan(gamma_0) as the upper viscosity tends to zero."""
    x = 2.0 * h
    return (math.sinh(x) + math.sin(x)) / (math.sinh(x) - math.sin(x))


def one_jump_limit_large_l(h: float) -> float:
    """tan(gamma_0) as the upper viscosity tends to infinity."""
    x = 2.0 * h
    return (math.sinh(x) - math.sin(x)) / (math.sinh(x) + math.sin(x))


@dataclass
class LimitPoint:
    l: float
    h: float
    gamma0_deg: float
    target: float
    deviation: float


@dataclass
class LimitSequence:
    """Surface angles along a path approaching one of the limiting regimes.

    For angle sequences ``target`` and ``deviation`` are in degrees; for the
    reduced-formula checks they are tan(gamma_0) and its relative error.
    """

    name: str
    tolerance: float
    points: list[LimitPoint]

    @property
    def max_deviation(self) -> float:
        return max(p.deviation for p in self.points)

    @property
    def final_deviation(self) -> float:
        return self.points[-1].deviation

    @property
    def passed(self) -> bool:
        return self.final_deviation <= self.tolerance


def _gamma0_deg(l: float, h: float) -> float:
    return math.degrees(surface_deflection_angle(one_jump(h, l)))


def _angle_sequence(name, pairs, target, tolerance=1.0) -> LimitSequence:
    points = []
    for l, h in pairs:
        g = _gamma0_deg(l, h)
        points.append(LimitPoint(l, h, g, target, abs(g - target)))
    return LimitSequence(name, tolerance, points)


def _tan_sequence(name, l, hs, reduced, tolerance) -> LimitSequence:
    points = []
    for h in hs:
        g = _gamma0_deg(l, h)
        ref = reduced(h)
        points.append(LimitPoint(l, h, g, ref, abs(math.tan(math.radians(g)) - ref) / ref))
    return LimitSequence(name, tolerance, points)


def limit_angle_suite() -> list[LimitSequence]:
    """Surface deflection along paths toward the limiting one-jump regimes.

    Each sequence is judged on its last (most extreme) point; every point is
    reported.  Limits in l are taken before limits in h by shrinking l faster
    than h along the path.
    """
    small_h = (1e-1, 1e-2, 1e-3, 1e-6)
    large_h = (1e1, 1e2, 1e3)
    return [
        _angle_sequence("h->0, l=0.08", [(0.08, h) for h in small_h], 45.0, 0.01),
        _angle_sequence("h->0, l=5", [(5.0, h) for h in small_h], 45.0, 0.01),
        _angle_sequence("h->inf, l=0.08", [(0.08, h) for h in large_h], 45.0, 0.01),
        _angle_sequence("h->inf, l=5", [(5.0, h) for h in large_h], 45.0, 0.01),
        _angle_sequence("l->0 then h->0", [(1e-4 * h, h) for h in (1e-1, 1e-2, 1e-3)], 90.0),
        _angle_sequence("l->inf then h->0", [(1e4 / h, h) for h in (1e-1, 1e-2, 1e-3)], 0.0),
        _tan_sequence("l->0 reduced formula", 1e-6, (1.5, 2.0, 3.0, 5.0), one_jump_limit_small_l, 1e-6),
        _tan_sequence("l->inf reduced formula", 1e6, (1.5, 2.0, 3.0, 5.0), one_jump_limit_large_l, 1e-6),
    ]
