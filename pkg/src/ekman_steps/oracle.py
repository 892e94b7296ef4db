"""Independent references for the layer solver.

Nothing here calls into :mod:`ekman_steps.solver`; the closed forms are
evaluated directly and the finite-difference solver discretizes the ODE
itself.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .profile import StepViscosity

_DENOM_FLOOR = 1e3 * np.finfo(float).eps


def classical_ekman(z, psi_g: complex = 1.0):
    """Constant-viscosity (K = 1) solution psi_g (1 - exp(-(1+i) z))."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("heights must be non-negative")
    out = psi_g * (1.0 - np.exp(-(1 + 1j) * z))
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class OneJumpClosedForm:
    """Raw-basis coefficients for K = 1 below h and K = l**2 above.

    psi = A e^{(1+i)z} + B e^{-(1+i)z} + psi_g below h and
    psi = C e^{(1+i)z/l} + D e^{-(1+i)z/l} + psi_g above.
    """

    h: float
    l: float
    psi_g: complex
    A: complex
    B: complex
    C: complex
    D: complex


def one_jump_coefficients(h: float, l: float, psi_g: complex = 1.0) -> OneJumpClosedForm:
    if not (h > 0 and l > 0 and l != 1 and psi_g != 0):
        raise ValueError("need h > 0, l > 0, l != 1 and psi_g != 0")
    # numerator and denominator divided by e^{(2+2i)h} so nothing overflows for large h
    e2 = cmath.exp(-(2 + 2j) * h)
    den = e2 * (1 - l) + (1 + l)
    if abs(den) < _DENOM_FLOOR * (1 + l):
        raise ZeroDivisionError(f"closed-form denominator {abs(den):.3e} below floor")
    a = psi_g * (l - 1) * e2 / den
    b = -psi_g * (l + 1) / den
    d = -2 * psi_g * cmath.exp((1 + 1j) * h * (1 / l - 1)) / den
    return OneJumpClosedForm(h, l, complex(psi_g), a, b, 0j, d)


def one_jump_deflection(h: float, l: float) -> float:
    """Surface deflection angle (radians) for the one-jump profile.

    tan g0 = ((1+l)^2 e^{2h} - (1-l)^2 e^{-2h} + 2(1-l^2) sin 2h)
           / ((1+l)^2 e^{2h} - (1-l)^2 e^{-2h} - 2(1-l^2) sin 2h),
    evaluated after dividing through by e^{2h}.
    """
    if not (h > 0 and l > 0):
        raise ValueError("need h > 0 and l > 0")
    x = (1 + l) ** 2 - (1 - l) ** 2 * math.exp(-4 * h)
    y = 2 * (1 - l * l) * math.sin(2 * h) * math.exp(-2 * h)
    return math.atan2(x + y, x - y)


@dataclass(frozen=True)
class FDProfile:
    """Finite-difference solution on a uniform grid; ``face_viscosity[j]`` sits between nodes j and j+1."""

    z: np.ndarray
    psi: np.ndarray
    face_viscosity: np.ndarray
    psi_g: complex

    @property
    def spacing(self) -> float:
        return float(self.z[1] - self.z[0])

    def fluxes(self) -> np.ndarray:
        """K psi' on every cell face."""
        return self.face_viscosity * np.diff(self.psi) / self.spacing

    def balance_residual(self) -> np.ndarray:
        """Discrete momentum balance at interior nodes; zero up to round-off."""
        src = 2j * self.spacing * (self.psi[1:-1] - self.psi_g)
        return np.diff(self.fluxes()) - src


def finite_difference_bvp(profile: StepViscosity, psi_g: complex, z_top: float, n_points: int) -> FDProfile:
    """Conservative second-order solve of (K psi')' = 2i (psi - psi_g).

    Nodes are uniform on [0, z_top] and every jump must land on a node, so
    each cell has a single viscosity.  psi(0) = 0; the top node carries the
    exact decay condition psi' = -(1+i)/l (psi - psi_g) of the top layer.
    """
    if n_points < 3:
        raise ValueError("need at least three grid points")
    if not z_top > profile.top:
        raise ValueError("z_top must lie above the last jump")
    dz = z_top / (n_points - 1)
    for a in profile.jump_points:
        j = a / dz
        if abs(j - round(j)) > 1e-8 * max(j, 1.0):
            raise ValueError(f"jump at z={a} does not fall on a grid node (spacing {dz})")

    z = np.linspace(0.0, z_top, n_points)
    mids = 0.5 * (z[1:] + z[:-1])
    idx = np.searchsorted(np.asarray(profile.jump_points), mids)
    k_face = np.asarray(profile.viscosities)[idx]
    l_top = profile.amplitudes[-1]

    # unknowns phi_j = psi_j - psi_g for j = 1 .. n_points-1
    m = n_points - 1
    k_lo, k_hi = k_face[:-1], k_face[1:]
    diag = np.empty(m, dtype=complex)
    diag[:-1] = -(k_lo + k_hi) - 2j * dz * dz
    diag[-1] = -k_face[-1] - (1 + 1j) * l_top * dz - 1j * dz * dz
    ab = np.zeros((3, m), dtype=complex)
    ab[0, 1:] = k_hi
    ab[1] = diag
    ab[2, :-1] = k_face[1:]
    rhs = np.zeros(m, dtype=complex)
    rhs[0] = k_face[0] * psi_g
    try:
        phi = solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError("finite-difference system is singular") from exc
    psi = np.concatenate(([0j], phi + psi_g))
    return FDProfile(z, psi, k_face, complex(psi_g))
