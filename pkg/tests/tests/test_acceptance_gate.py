"""
Test Acceptance Gate
Loads scripts/acceptance_gate.py and runs its fast checks; the full gate is e2e.
"""
import importlib.util
import json
from pathlib import Path

import pytest

from quasipower.schemas import BoundReport, InequalityCheck

GATE_PATH = Path(__file__).resolve().parents[2] / "scripts" / "acceptance_gate.py"


@pytest.fixture(scope="module")
def gate():
    spec = importlib.util.spec_from_file_location("acceptance_gate", GATE_PATH)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def test_require_raises_system_exit(gate):
    with pytest.raises(SystemExit, match="Gate failed: demo"):
        gate.require(False, "demo")


def test_constants_check(gate):
    assert gate.check_constants() == {"constants": "ok"}


def test_lambda_check_quick(gate):
    assert gate.check_lambda(quick=True)["lambda"] == "ok"


def test_degenerate_check(gate):
    assert gate.check_degenerate() == {"degenerate": "ok"}


def test_gaussian_cdf_check(gate):
    assert gate.check_gaussian_cdf()["gaussian_cdf"] == "ok"


def test_moments_check(gate):
    assert gate.check_moments()["moments"] == "ok"


def test_models_check_quick(gate):
    assert gate.check_models(quick=True) == {"models": "ok"}


def _unconverged_check(T):
    report = BoundReport(dimension=2, T=T, integral_term=0.1, marginal_term=0.1, smoothing_term=0.1,
                         rhs_total=0.3, quadrature_converged=False)
    return InequalityCheck(T=T, lhs=0.01, rhs=report.rhs_total, slack=1e-4, holds=True, report=report)


def test_inequality_check_requires_converged_integral(gate, mocker):
    verify = mocker.patch.object(gate, "verify_inequality",
                                 side_effect=lambda X, g, T_list, **kw: [_unconverged_check(T) for T in T_list])
    with pytest.raises(SystemExit, match="integral term converged for binomial_pair"):
        gate.check_inequality(quick=True)
    assert verify.call_args.kwargs["rel_tol"] == 1e-6


@pytest.mark.e2e
def test_quick_gate_reports_json(gate, capsys):
    assert gate.main(["--quick"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert set(report) >= {"constants", "lambda", "inequality", "rate", "models", "moments"}
