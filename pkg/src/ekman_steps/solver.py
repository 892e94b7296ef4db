"""Layer coefficients of the piecewise-constant Ekman problem.

In layer n the deviation from the geostrophic wind is a combination of a
growing and a decaying mode.  Written in the raw basis

    psi(z) - psi_g = A[n,0] exp((1+i) z / l_n) + A[n,1] exp(-(1+i) z / l_n)

the coefficients overflow double precision once a_n / l_n exceeds ~350.  All
linear algebra here therefore works in an anchored basis

    psi(z) - psi_g = c[n,0] exp((1+i)(z - r_n) / l_n) + c[n,1] exp(-(1+i)(z - a_n) / l_n)

where the decaying mode is anchored at the bottom a_n of the layer and the
growing mode at its top r_n = a_{n+1} (at a_{N-1} for the unbounded top
layer, whose growing coefficient is zero).  Both modes are bounded by one in
modulus on their own layer, so every matrix entry is bounded.  The two bases
differ by the diagonal rescaling A = D c with
D = diag(exp(-(1+i) r_n / l_n), exp((1+i) a_n / l_n)).

Two independent routes produce c: a dense 2N x 2N solve and a transfer-matrix
recursion that reduces the problem to the scalar lambda_00 + lambda_01.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .profile import GeostrophicWind, StepViscosity

ONE_PLUS_I = 1.0 + 1.0j
MARGIN_FLOOR = 1e3 * np.finfo(float).eps
RESIDUAL_TOL = 1e-10
_LOG_MAX = math.log(np.finfo(float).max)


class SingularSystemError(RuntimeError):
    """The coefficient system is numerically singular."""

    def __init__(self, message: str, margin: float | None = None, condition: float | None = None):
        super().__init__(message)
        self.margin = margin
        self.condition = condition


def _anchors(profile: StepViscosity) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Amplitudes, decay anchors a_n and growth anchors r_n."""
    l = np.asarray(profile.amplitudes)
    bottoms = np.asarray(profile.boundaries)
    tops = np.append(bottoms[1:], bottoms[-1])
    return l, bottoms, tops


def layer_decay(profile: StepViscosity) -> np.ndarray:
    """exp(-(1+i) w_n / l_n) for the finite layers (length N-1).

    This is both the decaying mode at the top of layer n and the growing mode
    at its bottom, in the anchored basis.
    """
    l = np.asarray(profile.amplitudes[:-1])
    w = np.asarray(profile.widths)
    return np.exp(-ONE_PLUS_I * w / l)


def anchor_log_scales(profile: StepViscosity) -> np.ndarray:
    """log of the diagonal of D as an (N, 2) complex array; A = exp(.) * c."""
    l, bottoms, tops = _anchors(profile)
    return np.stack([-ONE_PLUS_I * tops / l, ONE_PLUS_I * bottoms / l], axis=1)


@dataclass(frozen=True)
class LayerCoefficients:
    """Anchored coefficients: ``anchored[n] = (c[n,0], c[n,1])``."""

    profile: StepViscosity
    anchored: np.ndarray

    @property
    def n_layers(self) -> int:
        return self.anchored.shape[0]

    @property
    def top_decaying(self) -> complex:
        return complex(self.anchored[-1, 1])

    def as_vector(self) -> np.ndarray:
        """Unknowns in the order (c00, c01, ..., c_{N-1,1}, c_{N-1,0})."""
        return _to_vector(self.anchored)

    def raw_log_magnitude(self) -> np.ndarray:
        """Natural log of |A[n,j]| without forming A."""
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.anchored)) + anchor_log_scales(self.profile).real

    @property
    def raw_representable(self) -> bool:
        return bool(np.all(self.raw_log_magnitude() < _LOG_MAX))

    def raw(self) -> np.ndarray:
        """Coefficients A[n,j] of the unanchored basis.

        Raises OverflowError when some coefficient exceeds double range; use
        the anchored form in that case.
        """
        if not self.raw_representable:
            raise OverflowError("raw layer coefficients overflow double precision")
        return self.anchored * np.exp(anchor_log_scales(self.profile))

    def scaled(self, c: complex) -> "LayerCoefficients":
        return LayerCoefficients(self.profile, self.anchored * c)


def _to_vector(pairs: np.ndarray) -> np.ndarray:
    vec = pairs.reshape(-1).copy()
    vec[-2], vec[-1] = pairs[-1, 1], pairs[-1, 0]
    return vec


def _from_vector(vec: np.ndarray) -> np.ndarray:
    pairs = np.asarray(vec, dtype=complex).reshape(-1, 2).copy()
    pairs[-1] = vec[-1], vec[-2]
    return pairs


@dataclass(frozen=True)
class LinearSystem:
    """Anchored form M c = b of the 2N boundary, continuity and flux conditions.

    Row order: surface condition, N-1 continuity rows, N-1 flux rows, far
    field.  ``log_scales`` holds log(D) in the column order, so the raw
    system matrix is ``matrix / exp(log_scales)`` column-wise.
    """

    profile: StepViscosity
    wind: GeostrophicWind
    matrix: np.ndarray
    rhs: np.ndarray
    log_scales: np.ndarray

    def raw_matrix(self) -> np.ndarray:
        return self.matrix * np.exp(-self.log_scales)[None, :]


def assemble_dense_system(profile: StepViscosity, wind: GeostrophicWind) -> LinearSystem:
    n = profile.n_layers
    l = profile.amplitudes
    decay = layer_decay(profile)
    m = np.zeros((2 * n, 2 * n), dtype=complex)

    def col(layer: int, mode: int) -> int:
        if layer == n - 1:
            return 2 * n - 1 if mode == 0 else 2 * n - 2
        return 2 * layer + mode

    m[0, col(0, 0)] = decay[0] if n > 1 else 1.0
    m[0, col(0, 1)] = 1.0
    for k in range(1, n):
        e_below = decay[k - 1]
        g_above = decay[k] if k < n - 1 else 1.0
        cont, flux = k, n - 1 + k
        m[cont, col(k - 1, 0)] = 1.0
        m[cont, col(k - 1, 1)] = e_below
        m[cont, col(k, 0)] = -g_above
        m[cont, col(k, 1)] = -1.0
        m[flux, col(k - 1, 0)] = l[k - 1]
        m[flux, col(k - 1, 1)] = -l[k - 1] * e_below
        m[flux, col(k, 0)] = -l[k] * g_above
        m[flux, col(k, 1)] = l[k]
    m[-1, -1] = 1.0

    b = np.zeros(2 * n, dtype=complex)
    b[0] = -wind.psi_g
    return LinearSystem(profile, wind, m, b, _to_vector(anchor_log_scales(profile)))


def solve_dense(system: LinearSystem) -> LayerCoefficients:
    """LU solve with partial pivoting, rejecting results with a large residual."""
    try:
        sol = np.linalg.solve(system.matrix, system.rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            "dense system is singular", condition=float(np.linalg.cond(system.matrix))
        ) from exc
    residual = np.linalg.norm(system.matrix @ sol - system.rhs) / np.linalg.norm(system.rhs)
    if not residual <= RESIDUAL_TOL:
        raise SingularSystemError(
            f"dense solve residual {residual:.3e} exceeds {RESIDUAL_TOL:g}",
            condition=float(np.linalg.cond(system.matrix)),
        )
    return LayerCoefficients(system.profile, _from_vector(sol))


def system_residual(system: LinearSystem, coefficients: LayerCoefficients) -> float:
    """Relative residual ||M c - b|| / ||b||."""
    r = system.matrix @ coefficients.as_vector() - system.rhs
    return float(np.linalg.norm(r) / np.linalg.norm(system.rhs))


@dataclass(frozen=True)
class TransferStep:
    """A_k^{-1} B_k in the anchored basis, stored as ``exp(log_scale) * matrix``."""

    matrix: np.ndarray
    log_scale: complex

    def unscaled(self) -> np.ndarray:
        return self.matrix * np.exp(self.log_scale)


def interface_transfer(l_below: float, l_above: float, width_below: float,
                       width_above: float = math.inf) -> TransferStep:
    """Map anchored coefficients above an interface to those below it.

    ``width_above`` is infinite for the top layer.  The scaled matrix has
    entries of size at most (l_below + l_above) / (2 l_below); the large
    factor exp((1+i) w / l_below) is kept apart as ``log_scale``.
    """
    e = np.exp(-ONE_PLUS_I * width_below / l_below)
    g = 1.0 if math.isinf(width_above) else np.exp(-ONE_PLUS_I * width_above / l_above)
    s, d = l_below + l_above, l_below - l_above
    half = 0.5 / l_below
    mat = half * np.array([[e * g * s, e * d], [g * d, s]], dtype=complex)
    return TransferStep(mat, complex(ONE_PLUS_I * width_below / l_below))


def transfer_step(profile: StepViscosity, k: int) -> TransferStep:
    """Anchored transfer matrix across jump a_k, 1 <= k <= N-1."""
    n = profile.n_layers
    if not 1 <= k <= n - 1:
        raise IndexError(f"jump index {k} outside 1..{n - 1}")
    l = profile.amplitudes
    widths = profile.widths
    above = widths[k] if k < n - 1 else math.inf
    return interface_transfer(l[k - 1], l[k], widths[k - 1], above)


def raw_transfer_step(profile: StepViscosity, k: int) -> np.ndarray:
    """A_k^{-1} B_k in the raw exponential basis, from its closed form.

    Overflows for large a_k / l; intended for moderate profiles and checks.
    """
    n = profile.n_layers
    if not 1 <= k <= n - 1:
        raise IndexError(f"jump index {k} outside 1..{n - 1}")
    lo, hi = profile.amplitudes[k - 1], profile.amplitudes[k]
    a = profile.jump_points[k - 1]
    alpha = np.exp(ONE_PLUS_I * a / lo)
    beta = np.exp(ONE_PLUS_I * a / hi)
    mat = np.array([
        [-beta / alpha * (hi + lo), (hi - lo) / (alpha * beta)],
        [alpha * beta * (hi - lo), -alpha / beta * (hi + lo)],
    ], dtype=complex)
    return mat / (-2.0 * lo)


@dataclass(frozen=True)
class TransferState:
    """Running product (w, x; y, z) = T_1 ... T_k stored as exp(log_scale) * matrix."""

    matrix: np.ndarray
    log_scale: complex
    step_log_scales: tuple[complex, ...]

    def unscaled(self) -> np.ndarray:
        return self.matrix * np.exp(self.log_scale)


def transfer_product(profile: StepViscosity) -> TransferState:
    mat = np.eye(2, dtype=complex)
    log_scale = 0j
    steps = []
    for k in range(1, profile.n_layers):
        step = transfer_step(profile, k)
        mat = mat @ step.matrix
        norm = np.max(np.abs(mat))
        mat /= norm
        log_scale += step.log_scale + math.log(norm)
        steps.append(step.log_scale)
    return TransferState(mat, log_scale, tuple(steps))


@dataclass(frozen=True)
class UniquenessMargin:
    """|lambda_00 + lambda_01| in the raw basis, held as a log to avoid overflow.

    ``relative`` measures cancellation in the anchored sum: the ratio of its
    modulus to the sum of the moduli of its two terms.  It lies in (0, 1] and
    is what the singularity floor is applied to.
    """

    log_magnitude: float
    relative: float

    @property
    def exponent(self) -> int:
        if math.isinf(self.log_magnitude):
            return 0
        return math.floor(self.log_magnitude / math.log(10.0))

    @property
    def mantissa(self) -> float:
        if math.isinf(self.log_magnitude):
            return 0.0
        return 10.0 ** (self.log_magnitude / math.log(10.0) - self.exponent)

    @property
    def value(self) -> float:
        """Plain float; may overflow to inf or underflow to 0."""
        return math.exp(self.log_magnitude) if self.log_magnitude < _LOG_MAX else math.inf

    @property
    def is_singular(self) -> bool:
        return not self.relative > MARGIN_FLOOR

    def __str__(self) -> str:
        return f"{self.mantissa:.6f}e{self.exponent:+d} (relative {self.relative:.3e})"


def _surface_terms(profile: StepViscosity, top_column: np.ndarray) -> tuple[complex, complex]:
    """The two terms of the anchored surface condition for c_0 = top_column."""
    g0 = layer_decay(profile)[0] if profile.n_layers > 1 else 1.0
    return complex(g0 * top_column[0]), complex(top_column[1])


def _margin(profile: StepViscosity, column: np.ndarray, log_scale: complex) -> UniquenessMargin:
    t0, t1 = _surface_terms(profile, column)
    total = t0 + t1
    denom = abs(t0) + abs(t1)
    relative = abs(total) / denom if denom > 0 else 0.0
    # raw lambda = D_0 P e_2 / D_top,1: the D_0 factors are in _surface_terms
    l, bottoms, _ = _anchors(profile)
    log_top = ONE_PLUS_I * bottoms[-1] / l[-1]
    with np.errstate(divide="ignore"):
        log_mag = math.log(abs(total)) if total != 0 else -math.inf
    return UniquenessMargin(log_mag + (log_scale - log_top).real, relative)


def uniqueness_margin(profile: StepViscosity) -> UniquenessMargin:
    state = transfer_product(profile)
    return _margin(profile, state.matrix[:, 1], state.log_scale)


def solve_transfer(profile: StepViscosity, wind: GeostrophicWind) -> LayerCoefficients:
    """Propagate the top-layer decaying mode down to the surface.

    Each layer's coefficient pair is a multiple of c_{N-1,1}; the surface
    condition fixes that multiple.  Propagation runs downward, the stable
    direction for a decaying solution.
    """
    n = profile.n_layers
    columns = np.zeros((n, 2), dtype=complex)
    logs = np.zeros(n, dtype=complex)
    v = np.array([0.0, 1.0], dtype=complex)
    s = 0j
    columns[-1] = v
    for k in range(n - 1, 0, -1):
        step = transfer_step(profile, k)
        v = step.matrix @ v
        norm = np.max(np.abs(v))
        v = v / norm
        s += step.log_scale + math.log(norm)
        columns[k - 1] = v
        logs[k - 1] = s

    margin = _margin(profile, columns[0], logs[0])
    if margin.is_singular:
        raise SingularSystemError(f"uniqueness margin {margin} below floor", margin=margin.relative)
    t0, t1 = _surface_terms(profile, columns[0])
    factor = -wind.psi_g / (t0 + t1)
    with np.errstate(under="ignore"):
        coeffs = columns * (factor * np.exp(logs - logs[0]))[:, None]
    return LayerCoefficients(profile, coeffs)


def one_jump_bound_holds(l0: float, l1: float, a1: float) -> bool:
    """|(l0-l1)/(l0+l1)| < 1 < |exp((2+2i) a1 / l0)|; rules out a zero margin for one jump."""
    with np.errstate(over="ignore"):
        grow = abs(np.exp((2 + 2j) * a1 / l0))
    return abs((l0 - l1) / (l0 + l1)) < 1.0 < grow


def two_jump_bound_holds(l0: float, l1: float, l2: float, a1: float, a2: float) -> bool:
    """|c2 t2 - c1 e1| > |c2 t1 - c1 e2| for two jumps, both sides divided by |c2|.

    c_j = exp((2+2i) a_j / l1), e1 = (l1-l0)(l1-l2), e2 = (l1+l0)(l1-l2),
    t1 = (l1-l0)(l1+l2), t2 = (l1+l0)(l1+l2).
    """
    ratio = np.exp((2 + 2j) * (a1 - a2) / l1)
    e1, e2 = (l1 - l0) * (l1 - l2), (l1 + l0) * (l1 - l2)
    t1, t2 = (l1 - l0) * (l1 + l2), (l1 + l0) * (l1 + l2)
    return abs(t2 - ratio * e1) > abs(t1 - ratio * e2)
