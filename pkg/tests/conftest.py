import os

from hypothesis import HealthCheck, settings

ACCEPTANCE_LINES = []

_cases = os.environ.get("TV_PROPTEST_CASES")
settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
    derandomize=True,
)
settings.load_profile("default")


def proptest_cases(default):
    """Case count for a property suite; TV_PROPTEST_CASES overrides."""
    return int(_cases) if _cases else default


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
