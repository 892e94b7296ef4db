"""Self-checks run by ``ekman-steps verify``.

Each check returns a :class:`CheckResult`; failures are collected, never
raised, so a report always covers every check.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import oracle
from .analysis import (
    Solution,
    evaluate_psi,
    evaluate_psi_prime,
    limit_angle_suite,
    one_jump,
    solve,
)
from .profile import GeostrophicWind, StepViscosity
from .solver import (
    SingularSystemError,
    assemble_dense_system,
    two_jump_bound_holds,
    solve_dense,
    solve_transfer,
    system_residual,
    one_jump_bound_holds,
    uniqueness_margin,
)

logger = logging.getLogger(__name__)

CONTINUITY_TOL = 1e-11
FLUX_TOL = 1e-9
SURFACE_TOL = 1e-12
AGREEMENT_TOL = 1e-10
CLOSED_FORM_TOL = 1e-11
FD_ORDER_MIN = 1.9
FD_FINAL_TOL = 1e-6


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def random_profile(rng: np.random.Generator, n_layers: int, depth_ratio: float = 50.0,
                   amp_range: tuple[float, float] = (0.1, 10.0)) -> StepViscosity:
    """Random profile with a_{N-1} / min(l) <= ``depth_ratio``."""
    lo, hi = np.log(amp_range[0]), np.log(amp_range[1])
    amps = np.exp(rng.uniform(lo, hi, n_layers))
    widths = np.exp(rng.uniform(np.log(0.05), np.log(3.0), n_layers - 1))
    total = widths.sum() if n_layers > 1 else 0.0
    limit = depth_ratio * amps.min()
    if total > limit:
        widths *= rng.uniform(0.2, 1.0) * limit / total
    return StepViscosity(tuple(np.cumsum(widths)), tuple(amps))


def close_amplitude_profile(rng: np.random.Generator, n_layers: int, spread: float = 0.05) -> StepViscosity:
    """Random profile whose neighbouring amplitudes differ by at most ``spread`` relative."""
    amps = [float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))]
    for _ in range(n_layers - 1):
        amps.append(amps[-1] * float(np.exp(rng.uniform(-np.log1p(spread), np.log1p(spread)))))
    widths = np.exp(rng.uniform(np.log(0.05), np.log(3.0), n_layers - 1))
    return StepViscosity(tuple(np.cumsum(widths)), tuple(amps))


def random_wind(rng: np.random.Generator) -> GeostrophicWind:
    return GeostrophicWind(complex(*rng.normal(size=2)) or 1.0)


def coefficient_disagreement(a: np.ndarray, b: np.ndarray) -> float:
    """max |a - b| / max |b| over all anchored coefficients."""
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def check_dense_transfer(cases: Iterable[tuple[StepViscosity, GeostrophicWind]]) -> CheckResult:
    worst = 0.0
    n = 0
    for profile, wind in cases:
        dense = solve_dense(assemble_dense_system(profile, wind)).anchored
        transfer = solve_transfer(profile, wind).anchored
        worst = max(worst, coefficient_disagreement(transfer, dense))
        n += 1
    return CheckResult("dense_transfer_agreement", worst <= AGREEMENT_TOL,
                       {"profiles": n, "max_relative_difference": worst, "tolerance": AGREEMENT_TOL})


def closed_form_disagreement(h: float, l: float, psi_g: complex = 1.0) -> float:
    """Worst per-coefficient relative gap among the closed form, dense and transfer solves."""
    ref = oracle.one_jump_coefficients(h, l, psi_g)
    expected = np.array([ref.A, ref.B, ref.C, ref.D])
    worst = 0.0
    for method in ("dense", "transfer"):
        raw = one_jump(h, l, psi_g, method).coefficients.raw()
        got = np.array([raw[0, 0], raw[0, 1], raw[1, 0], raw[1, 1]])
        worst = max(worst, float(np.max(np.abs(got - expected)[[0, 1, 3]] / np.abs(expected[[0, 1, 3]]))))
        worst = max(worst, float(abs(got[2])))
    return worst


def check_closed_form(pairs: Iterable[tuple[float, float]]) -> CheckResult:
    worst = 0.0
    n = 0
    for h, l in pairs:
        worst = max(worst, closed_form_disagreement(h, l))
        n += 1
    return CheckResult("one_jump_three_way", worst <= CLOSED_FORM_TOL,
                       {"cases": n, "max_relative_difference": worst, "tolerance": CLOSED_FORM_TOL})


def matching_residuals(sol: Solution) -> dict:
    """Surface value and continuity / flux mismatch at every jump, relative to |psi_g|."""
    scale = abs(sol.psi_g)
    amps = sol.profile.amplitudes
    cont = flux = 0.0
    for k, a in enumerate(sol.profile.jump_points):
        left, right = evaluate_psi(sol, a, "left"), evaluate_psi(sol, a, "right")
        cont = max(cont, abs(left - right) / scale)
        f_left = amps[k] ** 2 * evaluate_psi_prime(sol, a, "left")
        f_right = amps[k + 1] ** 2 * evaluate_psi_prime(sol, a, "right")
        flux = max(flux, abs(f_left - f_right) / scale)
    return {"surface": abs(evaluate_psi(sol, 0.0)) / scale, "continuity": cont, "flux": flux}


def check_matching(solutions: Iterable[Solution]) -> CheckResult:
    worst = {"surface": 0.0, "continuity": 0.0, "flux": 0.0}
    n = 0
    for sol in solutions:
        for key, value in matching_residuals(sol).items():
            worst[key] = max(worst[key], value)
        n += 1
    passed = (worst["surface"] <= SURFACE_TOL and worst["continuity"] <= CONTINUITY_TOL
              and worst["flux"] <= FLUX_TOL)
    return CheckResult("matching_residuals", passed, {
        "profiles": n, **{f"max_{k}": v for k, v in worst.items()},
        "tolerances": {"surface": SURFACE_TOL, "continuity": CONTINUITY_TOL, "flux": FLUX_TOL},
    })


def fd_convergence(profile: StepViscosity, z_top: float, psi_g: complex = 1.0,
                   base_cells: int = 1000, levels: int = 5) -> tuple[list[float], list[float]]:
    """Max nodal error of the finite-difference oracle on successively doubled grids, and observed orders."""
    sol = solve(profile, psi_g)
    errors = []
    for k in range(levels):
        fd = oracle.finite_difference_bvp(profile, psi_g, z_top, base_cells * 2**k + 1)
        exact = np.array([evaluate_psi(sol, float(z)) for z in fd.z])
        errors.append(float(np.max(np.abs(exact - fd.psi))))
    orders = [math.log2(a / b) for a, b in zip(errors, errors[1:])]
    return errors, orders


FD_CASES = (
    (StepViscosity((), (1.0,)), 20.0),
    (StepViscosity((1.0,), (1.0, 2.0)), 25.0),
    (StepViscosity((0.5, 1.5), (1.0, 1.5, 0.7)), 10.0),
)


def check_fd_convergence(cases=FD_CASES) -> CheckResult:
    detail = []
    passed = True
    for profile, z_top in cases:
        errors, orders = fd_convergence(profile, z_top)
        ok = min(orders) >= FD_ORDER_MIN and errors[-1] <= FD_FINAL_TOL
        passed &= ok
        detail.append({"layers": profile.n_layers, "errors": errors, "orders": orders, "passed": ok})
    return CheckResult("fd_oracle_convergence", passed, {"cases": detail})


def check_limits() -> CheckResult:
    seqs = limit_angle_suite()
    return CheckResult("limit_suite", all(s.passed for s in seqs), {"sequences": [
        {"name": s.name, "final_deviation": s.final_deviation, "max_deviation": s.max_deviation,
         "tolerance": s.tolerance, "passed": s.passed} for s in seqs
    ]})


def check_inequalities(rng: np.random.Generator, samples: int = 1000) -> CheckResult:
    t1 = c1 = 0
    for _ in range(samples):
        l0, l1, l2 = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), 3))
        a1, a2 = np.sort(np.exp(rng.uniform(np.log(1e-3), np.log(1e1), 2)))
        if a1 == a2:
            continue
        t1 += not one_jump_bound_holds(l0, l1, a1)
        c1 += not two_jump_bound_holds(l0, l1, l2, a1, a2)
    return CheckResult("margin_inequalities", t1 == 0 and c1 == 0,
                       {"samples": samples, "one_jump_failures": t1, "two_jump_failures": c1})


def check_margins(rng: np.random.Generator, samples: int = 1000) -> CheckResult:
    counts = {}
    for label, make in (
        ("one_jump", lambda: random_profile(rng, 2, depth_ratio=1e3, amp_range=(1e-2, 1e2))),
        ("two_jumps", lambda: random_profile(rng, 3, depth_ratio=1e3, amp_range=(1e-2, 1e2))),
        ("four_close_jumps", lambda: close_amplitude_profile(rng, 5)),
    ):
        singular = 0
        for _ in range(samples):
            if uniqueness_margin(make()).is_singular:
                singular += 1
        counts[label] = singular
    return CheckResult("uniqueness_margins", not any(counts.values()),
                       {"samples_per_family": samples, "singular": counts})


def check_configured_profile(profile: StepViscosity, wind: GeostrophicWind) -> CheckResult:
    dense = solve(profile, wind, "dense")
    transfer = solve(profile, wind, "transfer")
    diff = coefficient_disagreement(transfer.coefficients.anchored, dense.coefficients.anchored)
    res = matching_residuals(transfer)
    residual = system_residual(assemble_dense_system(profile, wind), transfer.coefficients)
    passed = (diff <= AGREEMENT_TOL and res["continuity"] <= CONTINUITY_TOL
              and res["flux"] <= FLUX_TOL and res["surface"] <= SURFACE_TOL)
    return CheckResult("configured_profile", passed, {
        "layers": profile.n_layers, "dense_transfer_difference": diff,
        "system_residual": residual, **res,
    })


def run_checks(seed: int, random_profiles: int = 100, profile: StepViscosity | None = None,
               wind: GeostrophicWind | None = None) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(random_profiles):
        n = int(rng.integers(1, 9))
        cases.append((random_profile(rng, n), random_wind(rng)))
    pairs = []
    while len(pairs) < random_profiles:
        h, l = rng.uniform(0.05, 5.0), rng.uniform(0.05, 20.0)
        if l != 1.0:
            pairs.append((h, l))

    checks: list[tuple[str, Callable[[], CheckResult]]] = [
        ("dense_transfer_agreement", lambda: check_dense_transfer(cases)),
        ("one_jump_three_way", lambda: check_closed_form(pairs)),
        ("matching_residuals", lambda: check_matching(solve(p, w) for p, w in cases)),
        ("fd_oracle_convergence", check_fd_convergence),
        ("limit_suite", check_limits),
        ("margin_inequalities", lambda: check_inequalities(rng)),
        ("uniqueness_margins", lambda: check_margins(rng)),
    ]
    if profile is not None:
        checks.append(("configured_profile",
                       lambda: check_configured_profile(profile, wind or GeostrophicWind(1.0))))

    results = []
    for name, check in checks:
        try:
            result = check()
        except (SingularSystemError, ArithmeticError, ValueError, OverflowError) as exc:
            result = CheckResult(name, False, {"error": repr(exc)})
        logger.info("%s: %s", result.name, "pass" if result.passed else "FAIL")
        results.append(result)
    return results
