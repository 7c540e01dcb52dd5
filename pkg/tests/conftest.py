import pytest

from lastpc import fit_pca, log_transform_si, solar_dataset


@pytest.fixture(scope="session")
def solar_log():
    return log_transform_si(solar_dataset())


@pytest.fixture(scope="session")
def solar_model(solar_log):
    return fit_pca(solar_log, "covariance", log_space=True)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
