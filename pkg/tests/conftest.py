from pathlib import Path

import pytest

from loadgarch.model import ModelParams, ModelSpec

FIXTURES = Path(__file__).parent / "fixtures"

# reference hourly seasonal ARMA and GARCH(1,1) coefficients used across the suite
HOURLY_MEAN = dict(constant=0.001, ar={2: 0.228}, sar={24: 0.345}, ma={3: 0.029}, sma={24: -0.878})
HOURLY_GARCH = dict(garch_omega=0.370, garch_alpha=0.562, garch_beta=0.250)
HOURLY_GARCH_LONG_RUN = 0.370 / (1 - 0.812)

SARIMA_SPEC = ModelSpec(ar_lags=[2], ma_lags=[3], sar_lags=[24], sma_lags=[24], season=24)
GARCH_SPEC = ModelSpec()


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def sarima_params():
    return ModelParams(**HOURLY_MEAN, garch_omega=1.0)


@pytest.fixture
def garch_params():
    return ModelParams(constant=0.0, **HOURLY_GARCH)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def record_info(detail: str) -> None:
    ACCEPTANCE_LINES.append(f"info: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
