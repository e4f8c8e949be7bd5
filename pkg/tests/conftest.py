import pytest

from liquidchain.config import ExperimentConfig
from liquidchain.forecast import ForecasterSpec

SMALL_HYBRID = {"n_neurons": 8, "epochs": 3, "n_trees": 10, "max_depth": 2}

_acceptance = []


def small_config(kind="sma", horizon=120, train_days=40, **kw):
    params = SMALL_HYBRID if kind == "hybrid" else {}
    return ExperimentConfig(horizon=horizon, train_days=train_days,
                            forecaster=ForecasterSpec(kind, dict(params)), **kw)


@pytest.fixture
def sma_config():
    return small_config("sma")


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        props = dict(report.user_properties)
        if "criterion" in props:
            _acceptance.append((props["criterion"], report.outcome, props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for num, outcome, detail in sorted(_acceptance):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num:>2}: {status}  {detail}")
