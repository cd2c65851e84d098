import json
from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# VICReg runs 0-11 over the covariance weight sweep: ImageNet and iNat18 ranks.
VICREG_NU = [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1, 2, 4, 8, 16]
VICREG_IMAGENET = [102.07, 229.81, 374.25, 612.12, 831.49, 952.55,
                   1033.93, 1088.13, 1442.63, 1809.06, 1920.81, 1938.44]
VICREG_INAT18 = [38.10, 92.53, 135.79, 261.34, 382.55, 449.44,
                 493.50, 531.16, 726.28, 947.81, 1054.70, 1087.45]


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return path


# acceptance results, filled by tests/test_acceptance.py and printed at the end of the run
ACCEPTANCE: dict[int, tuple[str, str, float]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, name, elapsed = ACCEPTANCE[n]
        terminalreporter.write_line(f"[{status}] criterion {n:2d}: {name} ({elapsed:.2f} s)")
