from __future__ import annotations

from pathlib import Path

import pytest

from warfrev.cohort import load_cohort

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
FIXTURE_DIR = DATA_DIR / "fixture"


@pytest.fixture(scope="session")
def fixture_cohort():
    return load_cohort(FIXTURE_DIR / "patients.csv", FIXTURE_DIR / "visits.csv")
