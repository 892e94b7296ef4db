import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ekman_steps.analysis import (
    angle_profile,
    default_z_max,
    evaluate_psi,
    evaluate_psi_prime,
    hodograph,
    limit_angle_suite,
    one_jump,
    one_jump_limit_large_l,
    one_jump_limit_small_l,
    solve,
    surface_deflection_angle,
)
from ekman_steps.oracle import classical_ekman, one_jump_deflection
from ekman_steps.profile import ProfileError, StepViscosity
from ekman_steps.verification import matching_residuals, random_profile

CONSTANT = StepViscosity((), (1.0,))


def test_constant_viscosity_profile():
    sol = solve(CONSTANT, 1.0)
    zs = np.linspace(0, 10, 201)
    got = np.array([evaluate_psi(sol, float(z)) for z in zs])
    np.testing.assert_allclose(got, classical_ekman(zs), rtol=0, atol=1e-14)
    assert evaluate_psi_prime(sol, 0.0) == pytest.approx(1 + 1j, abs=1e-15)
    assert math.degrees(surface_deflection_angle(sol)) == pytest.approx(45.0, abs=1e-12)


@pytest.mark.parametrize("method", ["transfer", "dense"])
def test_surface_and_matching(method):
    rng = np.random.default_rng(5)
    for _ in range(30):
        p = random_profile(rng, int(rng.integers(2, 7)))
        res = matching_residuals(solve(p, 1.5 - 0.5j, method))
        assert res["surface"] <= 1e-12
        assert res["continuity"] <= 1e-11
        assert res["flux"] <= 1e-9


def test_unknown_method():
    with pytest.raises(ValueError):
        solve(CONSTANT, 1.0, "shooting")


def test_derivative_matches_difference_quotient():
    sol = solve(StepViscosity((0.7, 1.6), (1.0, 0.4, 2.5)), 1.0)
    d = 1e-5
    for z in (0.2, 1.0, 2.5, 4.0):
        fd = (evaluate_psi(sol, z + d) - evaluate_psi(sol, z - d)) / (2 * d)
        assert abs(fd - evaluate_psi_prime(sol, z)) <= 1e-8


def test_derivative_at_jump_needs_side():
    sol = one_jump(1.0, 2.0)
    with pytest.raises(ValueError):
        evaluate_psi_prime(sol, 1.0)
    left = evaluate_psi_prime(sol, 1.0, "left")
    right = evaluate_psi_prime(sol, 1.0, "right")
    assert left == pytest.approx(4.0 * right, rel=1e-12)
    assert evaluate_psi(sol, 1.0, "left") == pytest.approx(evaluate_psi(sol, 1.0, "right"), rel=1e-14)


def test_negative_height_rejected():
    with pytest.raises(ProfileError):
        evaluate_psi(solve(CONSTANT), -1.0)


def test_ode_residual_converges():
    # central second difference of K psi' inside each layer; the residual shrinks as d^2
    sol = solve(StepViscosity((0.8,), (1.0, 0.5)), 1.0)
    residuals = []
    for d in (1e-2, 5e-3):
        worst = 0.0
        for z in (0.3, 0.5, 1.2, 2.0):
            k = 1.0 if z < 0.8 else 0.25
            second = (evaluate_psi(sol, z + d) - 2 * evaluate_psi(sol, z) + evaluate_psi(sol, z - d)) / d**2
            worst = max(worst, abs(k * second - 2j * (evaluate_psi(sol, z) - 1.0)))
        residuals.append(worst)
    assert math.log2(residuals[0] / residuals[1]) == pytest.approx(2.0, abs=0.05)


def test_figure_runs():
    above = one_jump(1.1, 0.08)
    below = one_jump(0.35, 5.0)
    assert math.degrees(surface_deflection_angle(above)) == pytest.approx(53.754576072637039246, abs=1e-9)
    assert math.degrees(surface_deflection_angle(below)) == pytest.approx(19.403321516233217463, abs=1e-9)
    for sol in (above, below):
        z = sol.profile.top + 10 * sol.profile.amplitudes[-1]
        assert abs(math.degrees(angle_profile(sol, z))) < 0.5


def test_angle_decays_with_height():
    sol = solve(StepViscosity((0.5, 2.0), (1.0, 3.0, 0.5)), 1.0)
    far = [abs(angle_profile(sol, z)) for z in (10.0, 20.0, 40.0)]
    assert far[0] > far[1] > far[2]
    assert far[-1] < 1e-10


@settings(max_examples=100, deadline=None)
@given(r=st.floats(0.1, 10), phase=st.floats(-math.pi, math.pi))
def test_angle_independent_of_wind(r, phase):
    p = StepViscosity((0.6, 1.4), (1.0, 2.0, 0.3))
    c = r * complex(math.cos(phase), math.sin(phase))
    base, turned = solve(p, 1.0), solve(p, c)
    for z in (0.0, 0.3, 0.6, 1.0, 2.0, 4.0):
        assert angle_profile(turned, z) == pytest.approx(angle_profile(base, z), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(l=st.floats(1e-2, 1e2), h=st.floats(1e-2, 10))
def test_surface_angle_in_first_quadrant(l, h):
    if abs(l - 1) < 1e-9:
        return
    g = surface_deflection_angle(one_jump(h, l))
    assert 0 < g < math.pi / 2
    assert g == pytest.approx(one_jump_deflection(h, l), abs=1e-10)


def test_hodograph_layout():
    sol = one_jump(1.0, 2.0)
    zmax = default_z_max(sol.profile)
    assert zmax == 21.0
    samples = hodograph(sol, zmax, 101)
    assert samples[0].z == 0 and samples[0].u == 0 and samples[0].v == 0
    assert samples[-1].z == zmax
    # past the jump the deficit decays exactly as exp(-(z - a) / l)
    last, prev = samples[-1], samples[-11]
    assert last.deficit / prev.deficit == pytest.approx(math.exp(-(last.z - prev.z) / 2.0), rel=1e-10)
    with pytest.raises(ValueError):
        hodograph(sol, 0.0, 10)
    with pytest.raises(ValueError):
        hodograph(sol, 1.0, 1)


def test_hodograph_endpoint_deficit_constant_case():
    samples = hodograph(solve(CONSTANT), 6.0, 61)
    assert samples[-1].deficit == pytest.approx(math.exp(-6.0), rel=1e-12)


def test_reduced_formulas_are_reciprocal():
    for h in (0.3, 1.0, 2.5):
        assert one_jump_limit_small_l(h) * one_jump_limit_large_l(h) == pytest.approx(1.0, rel=1e-14)


def test_limit_suite_passes():
    seqs = limit_angle_suite()
    assert len(seqs) == 8
    failing = [s.name for s in seqs if not s.passed]
    assert not failing
