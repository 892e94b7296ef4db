import dataclasses

import pytest

from ekman_steps.analysis import Solution, solve
from ekman_steps.config import ConfigError, ExperimentConfig, LogRange, load_config, parse_config
from ekman_steps.profile import GeostrophicWind, StepViscosity
from ekman_steps.solver import assemble_dense_system, solve_dense
from ekman_steps.verification import (
    check_closed_form,
    check_dense_transfer,
    check_matching,
    closed_form_disagreement,
    run_checks,
)


def test_run_checks_all_pass():
    results = run_checks(seed=1, random_profiles=20, profile=StepViscosity((1.0,), (1.0, 0.3)),
                         wind=GeostrophicWind(1 + 1j))
    names = [r.name for r in results]
    assert "configured_profile" in names and len(names) == 8
    assert all(r.passed for r in results), [r.to_dict() for r in results if not r.passed]


def test_run_checks_same_seed_same_detail():
    a = [r.to_dict() for r in run_checks(seed=9, random_profiles=5)]
    b = [r.to_dict() for r in run_checks(seed=9, random_profiles=5)]
    for x, y in zip(a, b):
        if x["name"] not in ("fd_oracle_convergence", "limit_suite"):
            assert x == y


def test_flipped_flux_weight_is_caught():
    p = StepViscosity((0.8, 1.7), (1.0, 0.4, 2.0))
    wind = GeostrophicWind(1.0)
    system = assemble_dense_system(p, wind)
    faulty = system.matrix.copy()
    faulty[p.n_layers, 0] *= -1  # first flux row, weight of the lowest growing mode
    broken = dataclasses.replace(system, matrix=faulty)
    sol = Solution(p, wind, solve_dense(broken), "dense")
    assert not check_matching([sol]).passed
    assert check_matching([solve(p, wind)]).passed


def test_dense_transfer_check():
    p = StepViscosity((1.0,), (1.0, 2.0))
    result = check_dense_transfer([(p, GeostrophicWind(1.0)), (p, GeostrophicWind(-3j))])
    assert result.passed


def test_closed_form_check():
    assert closed_form_disagreement(1.0, 2.0) <= 1e-12
    assert check_closed_form([(0.3, 0.2), (4.0, 15.0)]).passed


def test_config_defaults():
    cfg = parse_config({}, "profile")
    assert cfg.profile.viscosities == (1.0,)
    assert cfg.psi_g == 1
    assert parse_config({}, "converge").continuous.steps[-1] == 64
    assert LogRange(1e-2, 1e2, 5).values() == pytest.approx([1e-2, 1e-1, 1, 10, 100])


def test_config_digest_ignores_source_and_tracks_values():
    a = parse_config({"wind": {"u_g": 1.0}}, "profile")
    b = parse_config({}, "profile")
    c = parse_config({"wind": {"u_g": 2.0}}, "profile")
    assert a.digest() == b.digest() != c.digest()


def test_config_overrides():
    cfg = parse_config({"output": {"dir": "a", "format": "csv"}}, "sweep",
                       {"out_dir": "b", "format": "json", "seed": None})
    assert (cfg.out_dir, cfg.format, cfg.seed) == ("b", "json", ExperimentConfig.seed)


@pytest.mark.parametrize("doc, where", [
    ({"mode": "sweep"}, "mode"),
    ({"profile": {"continuous": "quadratic"}}, "profile.continuous"),
    ({"profile": {"continuous": "linear", "steps": [0]}}, "profile.steps"),
    ({"sweep": {"l": {"min": 1, "max": 0.5, "count": 3}}}, "sweep.l"),
    ({"seed": -3}, "seed"),
    ({"output": {"format": "xml"}}, "output.format"),
    ({"wind": {"u_g": "fast"}}, "wind.u_g"),
])
def test_config_errors_name_field(doc, where):
    mode = "converge" if "profile" in doc else "profile"
    with pytest.raises(ConfigError, match=f"^{where}"):
        parse_config(doc, mode)


def test_load_config_none(tmp_path):
    assert load_config(None, "limits").mode == "limits"
