"""Measurement-window extraction and the three nested feature sets.

The window anchors on t1, the first INR-bearing day inside
[window_lo, window_hi], and t2, the next INR-bearing day after t1.
Feature sets extend each other: the clinical columns are a prefix of
the single-INR columns, which are a prefix of the longitudinal ones.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .cohort import Cohort, Patient, Race
from .errors import (
    EmptyCohortError,
    InvariantError,
    NoDoseHistory,
    NoInrInWindow,
    NoSecondInr,
)


class FeatureSetKind(enum.Enum):
    CLINICAL = "CLINICAL"
    SINGLE_INR = "SINGLE_INR"
    LONGITUDINAL_INR = "LONGITUDINAL_INR"


CLINICAL_COLUMNS = (
    "sex_male",
    "race_white",
    "race_african_american",
    "race_asian",
    "race_other",
    "age_decade",
    "weight_kg",
)
SINGLE_INR_COLUMNS = CLINICAL_COLUMNS + ("dose_before_t1", "inr_t1")
LONGITUDINAL_INR_COLUMNS = SINGLE_INR_COLUMNS + ("dose_t1", "inr_t2")

_RACE_ORDER = (Race.WHITE, Race.AFRICAN_AMERICAN, Race.ASIAN, Race.OTHER)


def schema_for(kind: FeatureSetKind) -> tuple[str, ...]:
    if kind is FeatureSetKind.CLINICAL:
        return CLINICAL_COLUMNS
    if kind is FeatureSetKind.SINGLE_INR:
        return SINGLE_INR_COLUMNS
    return LONGITUDINAL_INR_COLUMNS


@dataclass(frozen=True)
class FeatureWindow:
    t1: int
    dose_before_t1: float
    inr_t1: float
    dose_t1: float
    t2: int | None = None
    inr_t2: float | None = None


def locate_window(
    patient: Patient,
    window_lo: int,
    window_hi: int,
    require_t2: bool = True,
) -> FeatureWindow:
    """Find t1/t2 and the step-function doses around t1.

    t1 is the earliest INR day in [window_lo, window_hi]; t2 the earliest
    INR day strictly after t1, with no upper bound. dose_before_t1 is the
    dose effective on calendar day t1 - 1, dose_t1 the dose effective on
    day t1.
    """
    inr_visits = [v for v in patient.visits if v.inr is not None]
    in_window = [v for v in inr_visits if window_lo <= v.day <= window_hi]
    if not in_window:
        raise NoInrInWindow(
            f"patient {patient.id}: no INR in [{window_lo}, {window_hi}]"
        )
    first = in_window[0]
    t1 = first.day

    dose_before = patient.dose_on_day(t1 - 1)
    if dose_before is None:
        raise NoDoseHistory(
            f"patient {patient.id}: no dose record on or before day {t1 - 1}"
        )
    dose_t1 = patient.dose_on_day(t1)

    t2 = None
    inr_t2 = None
    later = [v for v in inr_visits if v.day > t1]
    if later:
        t2, inr_t2 = later[0].day, later[0].inr
    elif require_t2:
        raise NoSecondInr(f"patient {patient.id}: no INR after day {t1}")

    return FeatureWindow(
        t1=t1,
        dose_before_t1=dose_before,
        inr_t1=first.inr,
        dose_t1=dose_t1,
        t2=t2,
        inr_t2=inr_t2,
    )


def bin_age(age_years: int) -> int:
    """Decade bin: 58 -> 5, 40 -> 4."""
    return age_years // 10


def encode_demographics(patient: Patient) -> list[float]:
    """Fixed-order clinical sub-vector: sex, race one-hot, age decade, weight."""
    row = [1.0 if patient.sex.name == "MALE" else 0.0]
    row.extend(1.0 if patient.race is r else 0.0 for r in _RACE_ORDER)
    row.append(float(bin_age(patient.age_years)))
    row.append(float(patient.weight_kg))
    return row


def featurize(
    patient: Patient,
    kind: FeatureSetKind,
    window_lo: int = 7,
    window_hi: int = 10,
) -> list[float]:
    """One feature row for the requested set; window errors propagate."""
    row = encode_demographics(patient)
    if kind is FeatureSetKind.CLINICAL:
        return row
    window = locate_window(
        patient, window_lo, window_hi,
        require_t2=kind is FeatureSetKind.LONGITUDINAL_INR,
    )
    row.extend([window.dose_before_t1, window.inr_t1])
    if kind is FeatureSetKind.LONGITUDINAL_INR:
        row.extend([window.dose_t1, window.inr_t2])
    return row


@dataclass(frozen=True)
class FeatureMatrix:
    schema: tuple[str, ...]
    rows: np.ndarray
    patient_ids: tuple[str, ...]
    targets: np.ndarray

    def __post_init__(self) -> None:
        n, p = self.rows.shape
        if len(self.schema) != p:
            raise InvariantError("schema length must equal column count")
        if len(self.patient_ids) != n or self.targets.shape != (n,):
            raise InvariantError("ids/targets must match row count")
        if not np.all(np.isfinite(self.rows)) or not np.all(np.isfinite(self.targets)):
            raise InvariantError("feature matrix contains non-finite entries")
        race_cols = [i for i, c in enumerate(self.schema) if c.startswith("race_")]
        if race_cols and not np.allclose(self.rows[:, race_cols].sum(axis=1), 1.0):
            raise InvariantError("race one-hot columns must sum to 1 per row")

    @property
    def n(self) -> int:
        return self.rows.shape[0]


def build_matrix(
    cohort: Cohort,
    kind: FeatureSetKind,
    window_lo: int = 7,
    window_hi: int = 10,
) -> FeatureMatrix:
    """One row per patient, sorted by id; targets are the maintenance doses.

    The cohort must already be pruned with the second-INR requirement so
    that every kind is built over the same evaluation rows.
    """
    if not cohort.patients:
        raise EmptyCohortError("cannot build a feature matrix from an empty cohort")
    ordered = sorted(cohort.patients, key=lambda p: p.id)
    rows = []
    targets = []
    for p in ordered:
        if p.maintenance_dose_mg_day is None:
            raise InvariantError(f"patient {p.id} has no maintenance dose; prune first")
        rows.append(featurize(p, kind, window_lo, window_hi))
        targets.append(p.maintenance_dose_mg_day)
    return FeatureMatrix(
        schema=schema_for(kind),
        rows=np.asarray(rows, dtype=float),
        patient_ids=tuple(p.id for p in ordered),
        targets=np.asarray(targets, dtype=float),
    )
