import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from localdep import (  # noqa: E402
    FrechetLower,
    FrechetMixture,
    FrechetUpper,
    Independence,
    MaiScherer,
    MarshallOlkin,
)

GENUINE = [
    Independence(),
    FrechetUpper(),
    FrechetLower(),
    FrechetMixture(0.25),
    FrechetMixture(0.5),
    FrechetMixture(0.75),
    MarshallOlkin(0.5, 0.75),
    MaiScherer(0.9, 0.5),
    MaiScherer(1.0, 0.3),
]


@pytest.fixture(params=GENUINE, ids=lambda m: m.spec)
def genuine_model(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    from _acceptance_log import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key])
