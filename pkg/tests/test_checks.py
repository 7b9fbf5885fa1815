import json

import pytest

from eigenfactors.checks import CheckConfig, gradient_check, random_state, run_all
from eigenfactors.lie import generators
from eigenfactors.models import DerivativeCheck
from eigenfactors.report import ReportWriter


@pytest.fixture
def quick() -> CheckConfig:
    return CheckConfig(trials=3, seed=7)


def test_all_checks_pass(quick):
    checks = run_all(quick)
    assert [c.name for c in checks] == [
        "gradient (plain)",
        "gradient (centered)",
        "hessian (centered)",
        "cross-pose blocks",
        "centered gradient equality",
    ]
    for check in checks:
        assert check.passed, f"{check.name}: {check.max_error:.3e}"
        assert check.trials == 3


def test_corrupted_generator_is_caught(quick):
    gens = generators()
    gens[3] *= 1.5
    assert not gradient_check(quick, "plain", gens).passed
    assert not gradient_check(quick, "centered", gens).passed


def test_no_trials_pass_vacuously():
    check = gradient_check(CheckConfig(trials=0))
    assert check.passed
    assert check.trials == 0
    assert check.max_error == 0.0


def test_random_states_are_fresh(quick):
    problem = random_state(quick, trial=1, mode="plain")
    assert problem.n_poses == quick.n_poses
    assert len(problem.factors) == quick.n_planes
    assert all(f.plane is not None and not f.centered for f in problem.factors)


def test_report_lists_failures():
    writer = ReportWriter()
    checks = [
        DerivativeCheck("gradient (plain)", 1e-9, 1e-6, 4),
        DerivativeCheck("hessian (centered)", 1e-3, 1e-5, 4),
    ]
    markdown = writer.checks_to_markdown(checks)
    assert "| gradient (plain) | 1.000e-09 | 1.0e-06 | 4 | pass |" in markdown
    assert "**1 failed:** hessian (centered)" in markdown
    assert "All checks passed." in writer.checks_to_markdown(checks[:1])
    assert "No checks were run." in writer.checks_to_markdown([])
    payload = json.loads(writer.checks_to_json(checks))
    assert [row["passed"] for row in payload] == [True, False]
