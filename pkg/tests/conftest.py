import pytest

from satfronts import build_cubic, mean_curvature_flux

# lines reported by the acceptance tests, echoed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def cubic():
    return build_cubic(0.4)


@pytest.fixture(scope="session")
def mc():
    return mean_curvature_flux()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
