"""Acceptance criteria, each checked at its stated tolerance.

Every test records one PASS/FAIL line, collected in the terminal summary.
"""
import math
import time

import numpy as np

from ekman_steps.analysis import (
    angle_profile,
    evaluate_psi,
    one_jump,
    one_jump_limit_small_l,
    solve,
    surface_deflection_angle,
)
from ekman_steps.config import parse_config
from ekman_steps.oracle import classical_ekman, one_jump_deflection
from ekman_steps.profile import GeostrophicWind, StepViscosity
from ekman_steps.runs import run_converge
from ekman_steps.solver import uniqueness_margin
from ekman_steps.verification import (
    close_amplitude_profile,
    closed_form_disagreement,
    fd_convergence,
    matching_residuals,
    random_profile,
)


def gamma0_deg(l, h):
    return math.degrees(surface_deflection_angle(one_jump(h, l)))


def test_classical_reduction(criterion):
    start = time.perf_counter()
    sol = solve(StepViscosity((), (1.0,)), 1.0)
    zs = np.linspace(0.0, 10.0, 1001)
    err = max(abs(evaluate_psi(sol, float(z)) - classical_ekman(float(z))) for z in zs)
    g = math.degrees(surface_deflection_angle(sol))
    elapsed = time.perf_counter() - start
    ok = err <= 1e-12 and abs(g - 45.0) <= 1e-8 and elapsed < 1.0
    assert criterion("1 classical reduction", ok,
                     f"max error {err:.2e}, gamma0 {g:.12f} deg, {elapsed:.3f} s")


def test_one_jump_three_way(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    n = 0
    while n < 100:
        h, l = rng.uniform(0.05, 5.0), rng.uniform(0.05, 20.0)
        if l == 1.0:
            continue
        worst = max(worst, closed_form_disagreement(h, l))
        n += 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-11 and elapsed < 5.0
    assert criterion("2 dense/transfer/closed form", ok,
                     f"max relative difference {worst:.2e} over {n} cases, {elapsed:.3f} s")


def test_matching_conditions(criterion):
    rng = np.random.default_rng(3)
    cont = flux = 0.0
    for _ in range(100):
        p = random_profile(rng, int(rng.integers(1, 7)))
        wind = GeostrophicWind(complex(*rng.normal(size=2)))
        res = matching_residuals(solve(p, wind))
        cont, flux = max(cont, res["continuity"]), max(flux, res["flux"])
    ok = cont <= 1e-11 and flux <= 1e-9
    assert criterion("3 matching conditions", ok, f"continuity {cont:.2e}, flux {flux:.2e} (x |psi_g|)")


def test_finite_difference_oracle(criterion):
    cases = (
        (StepViscosity((), (1.0,)), 20.0),
        (StepViscosity((1.0,), (1.0, 2.0)), 25.0),
        (StepViscosity((0.5, 1.5), (1.0, 1.5, 0.7)), 10.0),
    )
    parts, ok = [], True
    for profile, z_top in cases:
        errors, orders = fd_convergence(profile, z_top, base_cells=1000, levels=5)
        ok &= min(orders) >= 1.9 and errors[-1] <= 1e-6
        parts.append(f"N={profile.n_layers} order {min(orders):.3f} final {errors[-1]:.1e}")
    assert criterion("4 finite-difference oracle", ok, "; ".join(parts))


def test_deflection_formula_grid(criterion):
    worst = 0.0
    for l in np.logspace(-2, 2, 20):
        for h in np.logspace(-2, 1, 20):
            diff = abs(surface_deflection_angle(one_jump(float(h), float(l)))
                       - one_jump_deflection(float(h), float(l)))
            worst = max(worst, diff)
    assert criterion("5 deflection formula", worst <= 1e-10, f"max |difference| {worst:.2e} rad on 20x20 grid")


def test_limits(criterion):
    flat_small = abs(gamma0_deg(1.0, 1e-6) - 45.0)
    flat_large = abs(gamma0_deg(1.0, 1e3) - 45.0)
    stiff = abs(gamma0_deg(1e-4, 1e-3) - 90.0)
    soft = abs(gamma0_deg(1e4, 1e-3))
    reduced = max(
        abs(math.tan(math.radians(gamma0_deg(1e-6, h))) - one_jump_limit_small_l(h)) / one_jump_limit_small_l(h)
        for h in (1.5, 2.0, 3.0, 5.0)
    )
    ok = (flat_small <= 0.01 and flat_large <= 0.01 and stiff <= 1.0 and soft <= 1.0
          and reduced <= 1e-6)
    assert criterion("6 limiting regimes", ok,
                     f"|dev| l=1 h=1e-6 {flat_small:.1e}, l=1 h=1e3 {flat_large:.1e}, "
                     f"l=1e-4 h=1e-3 from 90: {stiff:.4f}, l=1e4 h=1e-3 from 0: {soft:.4f} deg; "
                     f"reduced tan rel {reduced:.1e}")


def test_figure_runs(criterion):
    a, b = one_jump(1.1, 0.08), one_jump(0.35, 5.0)
    ga, gb = (math.degrees(surface_deflection_angle(s)) for s in (a, b))
    far = [abs(math.degrees(angle_profile(s, s.profile.top + 10 * s.profile.amplitudes[-1]))) for s in (a, b)]
    ok = ga > 45 > gb and max(far) < 0.5
    assert criterion("7 spiral runs", ok,
                     f"gamma0 {ga:.4f} / {gb:.4f} deg, far-field |gamma| {far[0]:.2e} / {far[1]:.2e} deg")


def test_uniqueness_margins(criterion):
    rng = np.random.default_rng(8)
    samples = 10_000
    families = {
        "N=2": lambda: random_profile(rng, 2, depth_ratio=1e3, amp_range=(1e-2, 1e2)),
        "N=3": lambda: random_profile(rng, 3, depth_ratio=1e3, amp_range=(1e-2, 1e2)),
        "N=5 close": lambda: close_amplitude_profile(rng, 5),
    }
    singular, smallest = {}, {}
    for name, make in families.items():
        margins = [uniqueness_margin(make()) for _ in range(samples)]
        singular[name] = sum(m.is_singular for m in margins)
        smallest[name] = min(m.relative for m in margins)
    ok = not any(singular.values())
    detail = ", ".join(f"{k}: {singular[k]} singular, min relative {smallest[k]:.2e}" for k in families)
    assert criterion("8 uniqueness margins", ok, detail)


def test_linearity_and_angle_invariance(criterion):
    rng = np.random.default_rng(9)
    coef_err = angle_err = 0.0
    for _ in range(20):
        p = random_profile(rng, int(rng.integers(1, 7)))
        c = complex(*rng.normal(size=2))
        base, scaled = solve(p, 1.0), solve(p, c)
        ref = c * base.coefficients.anchored
        coef_err = max(coef_err, np.max(np.abs(scaled.coefficients.anchored - ref)) / np.max(np.abs(ref)))
        for z in np.linspace(0.0, p.top + 5 * max(p.amplitudes), 100):
            angle_err = max(angle_err, abs(angle_profile(scaled, float(z)) - angle_profile(base, float(z))))
    ok = coef_err <= 1e-13 and angle_err <= 1e-12
    assert criterion("9 linearity in psi_g", ok, f"coefficients {coef_err:.2e}, angles {angle_err:.2e} rad")


def test_step_convergence(criterion, tmp_path):
    config = parse_config({"output": {"dir": str(tmp_path)}}, "converge")
    rows = run_converge(config)["rows"]
    devs = [r[1] for r in rows]
    by_n = {r[0]: r[2] for r in rows}
    g32, g64 = by_n[32], by_n[64]
    half_unit = 0.5 * 10 ** (math.floor(math.log10(abs(g64))) - 2)
    monotone = all(a > b for a, b in zip(devs, devs[1:]))
    ok = monotone and abs(g32 - g64) <= half_unit
    assert criterion("10 step-approximation convergence", ok,
                     f"gamma0 N=32 {g32:.5f}, N=64 {g64:.5f} deg (|diff| {abs(g32 - g64):.4f} <= {half_unit}), "
                     f"sup deviation monotone: {monotone}")
