import hypothesis
import pytest

from formlearn.pipeline import PipelineConfig, TrainConfig, train_context
from formlearn.synthetic import chain_graph, linear_chain_dataset

hypothesis.settings.register_profile("suite", deadline=None)
hypothesis.settings.load_profile("suite")

# nodeid -> (first docstring line, outcome), filled as acceptance tests run
_ACCEPTANCE: dict[str, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call" or "test_acceptance" not in item.nodeid:
        return
    desc = (item.function.__doc__ or item.name).strip().splitlines()[0]
    _ACCEPTANCE[item.nodeid] = (desc, report.outcome)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for desc, outcome in _ACCEPTANCE.values():
        tag = "PASS" if outcome == "passed" else outcome.upper()
        terminalreporter.write_line(f"[{tag}] {desc}")


@pytest.fixture(scope="session")
def chain_setup():
    """A small trained leader/follower chain shared by tests that only need
    some working models."""
    d = linear_chain_dataset(300, seed=1)
    cfg = PipelineConfig(train=TrainConfig(max_epochs=80), n_hidden=8, seed=0)
    cm = train_context(d, chain_graph(), cfg)
    return d, cm
