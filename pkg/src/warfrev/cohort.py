"""Longitudinal warfarin cohorts: loading, validation, pruning, summaries.

A cohort is a list of patients; each patient carries demographics, an
optional maintenance-dose label, and a day-indexed visit history. The
daily dose is a step function: the dose recorded at a visit holds until
the next visit row.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .errors import EmptyCohortError, InvariantError, SchemaError, WindowError


class Sex(enum.Enum):
    MALE = "M"
    FEMALE = "F"


class Race(enum.Enum):
    WHITE = "WHITE"
    AFRICAN_AMERICAN = "AFRICAN_AMERICAN"
    ASIAN = "ASIAN"
    OTHER = "OTHER"


class Indication(enum.Enum):
    AFIB_FLUTTER = "AFIB_FLUTTER"
    PE_DVT = "PE_DVT"
    OTHER = "OTHER"
    MULTIPLE = "MULTIPLE"
    NONE = "NONE"


class Provenance(enum.Enum):
    FILE = "FILE"
    SYNTHETIC = "SYNTHETIC"


PATIENTS_HEADER = (
    "patient_id",
    "age_years",
    "sex",
    "race",
    "weight_kg",
    "indication",
    "maintenance_dose_mg_day",
)
VISITS_HEADER = ("patient_id", "day", "dose_mg_day", "inr")


@dataclass(frozen=True)
class Visit:
    """One encounter: the dose prescribed from this day on, and an optional INR."""

    day: int
    dose_mg_day: float
    inr: float | None = None

    def __post_init__(self) -> None:
        if self.day < 0:
            raise InvariantError(f"visit day must be >= 0, got {self.day}")
        if not 0.0 <= self.dose_mg_day <= 30.0:
            raise InvariantError(
                f"dose_mg_day must be in [0, 30], got {self.dose_mg_day}"
            )
        if self.inr is not None and not 0.5 < self.inr < 20.0:
            raise InvariantError(f"inr must be in (0.5, 20), got {self.inr}")


@dataclass(frozen=True)
class Patient:
    id: str
    age_years: int
    sex: Sex
    race: Race
    weight_kg: float
    indication: Indication
    maintenance_dose_mg_day: float | None = None
    visits: tuple[Visit, ...] = ()

    def __post_init__(self) -> None:
        if not 18 <= self.age_years <= 120:
            raise InvariantError(
                f"patient {self.id}: age_years must be in [18, 120], got {self.age_years}"
            )
        if not 20.0 < self.weight_kg < 350.0:
            raise InvariantError(
                f"patient {self.id}: weight_kg must be in (20, 350), got {self.weight_kg}"
            )
        md = self.maintenance_dose_mg_day
        if md is not None and not 0.0 < md <= 30.0:
            raise InvariantError(
                f"patient {self.id}: maintenance_dose_mg_day must be in (0, 30], got {md}"
            )
        days = [v.day for v in self.visits]
        if any(b <= a for a, b in zip(days, days[1:])):
            raise InvariantError(
                f"patient {self.id}: visit days must be strictly increasing"
            )

    def dose_on_day(self, day: int) -> float | None:
        """Step-function dose effective on `day`; None before the first visit."""
        dose = None
        for v in self.visits:
            if v.day > day:
                break
            dose = v.dose_mg_day
        return dose


@dataclass(frozen=True)
class Cohort:
    patients: tuple[Patient, ...]
    provenance: Provenance = Provenance.FILE
    seed: int | None = None

    def __post_init__(self) -> None:
        ids = [p.id for p in self.patients]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise InvariantError(f"duplicate patient ids: {dupes}")

    def __len__(self) -> int:
        return len(self.patients)

    @property
    def n_visits(self) -> int:
        return sum(len(p.visits) for p in self.patients)


@dataclass(frozen=True)
class PruneReport:
    n_input: int
    n_no_maintenance: int
    n_no_revision_dose: int
    n_no_inr_in_window: int
    n_no_second_inr: int
    n_output: int
    excluded_ids: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        total_excluded = (
            self.n_no_maintenance
            + self.n_no_revision_dose
            + self.n_no_inr_in_window
            + self.n_no_second_inr
        )
        if self.n_output != self.n_input - total_excluded:
            raise InvariantError("prune counts do not reconcile")

    def to_dict(self) -> dict:
        return {
            "n_input": self.n_input,
            "n_no_maintenance": self.n_no_maintenance,
            "n_no_revision_dose": self.n_no_revision_dose,
            "n_no_inr_in_window": self.n_no_inr_in_window,
            "n_no_second_inr": self.n_no_second_inr,
            "n_output": self.n_output,
            "excluded_ids": {k: list(v) for k, v in self.excluded_ids.items()},
        }


@dataclass(frozen=True)
class CohortSummary:
    n: int
    age_median: float
    age_iqr: tuple[float, float]
    weight_median: float
    weight_iqr: tuple[float, float]
    sex_counts: dict[str, tuple[int, float]]
    race_counts: dict[str, tuple[int, float]]
    indication_counts: dict[str, tuple[int, float]]


def _open_source(source: str | Path | IO[str]) -> tuple[IO[str], bool]:
    if isinstance(source, (str, Path)):
        return open(source, "r", newline=""), True
    return source, False


def _parse_float(cell: str, *, where: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise SchemaError(f"{where}: unparseable number {cell!r}") from None


def _parse_int(cell: str, *, where: str) -> int:
    try:
        return int(cell)
    except ValueError:
        raise SchemaError(f"{where}: unparseable integer {cell!r}") from None


def _parse_sex(cell: str, *, where: str) -> Sex:
    try:
        return Sex(cell)
    except ValueError:
        raise SchemaError(f"{where}: sex must be M or F, got {cell!r}") from None


def _parse_named_enum(cell: str, kind, *, where: str):
    try:
        return kind[cell]
    except KeyError:
        raise SchemaError(f"{where}: unknown {kind.__name__} value {cell!r}") from None


def _check_header(row: list[str] | None, expected: tuple[str, ...], name: str) -> None:
    if row is None:
        raise SchemaError(f"{name}: missing header")
    if tuple(row) != expected:
        raise SchemaError(
            f"{name}: header must be {','.join(expected)}, got {','.join(row)}"
        )


def load_cohort(
    patients_source: str | Path | IO[str],
    visits_source: str | Path | IO[str],
) -> Cohort:
    """Read patients.csv / visits.csv streams into a validated Cohort.

    Visits are attached to their patients and sorted by day. Raises
    SchemaError for malformed rows or unknown patient references, and
    InvariantError for domain-range or ordering violations; messages
    name the offending row.
    """
    pf, close_p = _open_source(patients_source)
    try:
        patient_rows = _read_patient_rows(pf)
    finally:
        if close_p:
            pf.close()

    vf, close_v = _open_source(visits_source)
    try:
        visit_rows = _read_visit_rows(vf, known_ids=set(patient_rows))
    finally:
        if close_v:
            vf.close()

    patients = []
    for pid, fields in patient_rows.items():
        visits = sorted(visit_rows.get(pid, []), key=lambda item: item[0])
        where = fields.pop("_where")
        try:
            patients.append(
                Patient(visits=tuple(v for _, v in visits), **fields)
            )
        except InvariantError as exc:
            raise InvariantError(f"{where}: {exc}") from None
    return Cohort(patients=tuple(patients), provenance=Provenance.FILE)


def _read_patient_rows(stream: IO[str]) -> dict[str, dict]:
    reader = csv.reader(stream)
    _check_header(next(reader, None), PATIENTS_HEADER, "patients")
    rows: dict[str, dict] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        where = f"patients row {lineno}"
        if len(row) != len(PATIENTS_HEADER):
            raise SchemaError(f"{where}: expected {len(PATIENTS_HEADER)} columns, got {len(row)}")
        pid = row[0]
        if pid in rows:
            raise InvariantError(f"{where}: duplicate patient id {pid!r}")
        maint = row[6].strip()
        rows[pid] = {
            "_where": where,
            "id": pid,
            "age_years": _parse_int(row[1], where=where),
            "sex": _parse_sex(row[2], where=where),
            "race": _parse_named_enum(row[3], Race, where=where),
            "weight_kg": _parse_float(row[4], where=where),
            "indication": _parse_named_enum(row[5], Indication, where=where),
            "maintenance_dose_mg_day": _parse_float(maint, where=where) if maint else None,
        }
    return rows


def _read_visit_rows(
    stream: IO[str], known_ids: set[str]
) -> dict[str, list[tuple[tuple[int, int], Visit]]]:
    reader = csv.reader(stream)
    _check_header(next(reader, None), VISITS_HEADER, "visits")
    rows: dict[str, list[tuple[tuple[int, int], Visit]]] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        where = f"visits row {lineno}"
        if len(row) != len(VISITS_HEADER):
            raise SchemaError(f"{where}: expected {len(VISITS_HEADER)} columns, got {len(row)}")
        pid = row[0]
        if pid not in known_ids:
            raise SchemaError(f"{where}: unknown patient id {pid!r}")
        inr_cell = row[3].strip()
        try:
            visit = Visit(
                day=_parse_int(row[1], where=where),
                dose_mg_day=_parse_float(row[2], where=where),
                inr=_parse_float(inr_cell, where=where) if inr_cell else None,
            )
        except InvariantError as exc:
            raise InvariantError(f"{where}: {exc}") from None
        rows.setdefault(pid, []).append(((visit.day, lineno), visit))
    return rows


def _render_real(value: float) -> str:
    """Shortest decimal that round-trips to the same float."""
    return repr(float(value))


def save_cohort(cohort: Cohort, out_dir: str | Path) -> tuple[Path, Path]:
    """Write patients.csv and visits.csv; byte-stable for a given cohort."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    patients_path = out / "patients.csv"
    visits_path = out / "visits.csv"

    ordered = sorted(cohort.patients, key=lambda p: p.id)
    with open(patients_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PATIENTS_HEADER)
        for p in ordered:
            maint = "" if p.maintenance_dose_mg_day is None else _render_real(p.maintenance_dose_mg_day)
            writer.writerow(
                [p.id, p.age_years, p.sex.value, p.race.name,
                 _render_real(p.weight_kg), p.indication.name, maint]
            )
    with open(visits_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(VISITS_HEADER)
        for p in ordered:
            for v in p.visits:
                inr = "" if v.inr is None else _render_real(v.inr)
                writer.writerow([p.id, v.day, _render_real(v.dose_mg_day), inr])
    return patients_path, visits_path


def _prune_reason(
    patient: Patient, window_lo: int, window_hi: int, require_second_inr: bool
) -> str | None:
    """First matching exclusion reason, or None if the patient is retained."""
    if patient.maintenance_dose_mg_day is None:
        return "no_maintenance"
    if not any(v.day <= window_lo - 1 for v in patient.visits):
        return "no_revision_dose"
    in_window = [v for v in patient.visits if v.inr is not None and window_lo <= v.day <= window_hi]
    if not in_window:
        return "no_inr_in_window"
    if require_second_inr:
        t1 = in_window[0].day
        if not any(v.inr is not None and v.day > t1 for v in patient.visits):
            return "no_second_inr"
    return None


def prune(
    cohort: Cohort,
    window_lo: int = 7,
    window_hi: int = 10,
    require_second_inr: bool = False,
) -> tuple[Cohort, PruneReport]:
    """Drop patients unusable for dose-revision modelling.

    Retains patients with a maintenance-dose label, a dose record on or
    before window_lo - 1, an INR measurement inside [window_lo, window_hi],
    and (optionally) a later INR after the first in-window one. Reasons
    are applied in that order, so each exclusion is counted once.
    """
    if window_lo > window_hi or window_lo < 1:
        raise WindowError(f"invalid window [{window_lo}, {window_hi}]")
    retained = []
    excluded: dict[str, list[str]] = {
        "no_maintenance": [],
        "no_revision_dose": [],
        "no_inr_in_window": [],
        "no_second_inr": [],
    }
    for p in cohort.patients:
        reason = _prune_reason(p, window_lo, window_hi, require_second_inr)
        if reason is None:
            retained.append(p)
        else:
            excluded[reason].append(p.id)
    report = PruneReport(
        n_input=len(cohort.patients),
        n_no_maintenance=len(excluded["no_maintenance"]),
        n_no_revision_dose=len(excluded["no_revision_dose"]),
        n_no_inr_in_window=len(excluded["no_inr_in_window"]),
        n_no_second_inr=len(excluded["no_second_inr"]),
        n_output=len(retained),
        excluded_ids={k: tuple(sorted(v)) for k, v in excluded.items()},
    )
    pruned = Cohort(
        patients=tuple(retained), provenance=cohort.provenance, seed=cohort.seed
    )
    return pruned, report


def _counts(values: Iterable[str], n: int) -> dict[str, tuple[int, float]]:
    out: dict[str, tuple[int, float]] = {}
    for v in values:
        c, _ = out.get(v, (0, 0.0))
        out[v] = (c + 1, 0.0)
    return {k: (c, 100.0 * c / n) for k, (c, _) in out.items()}


def summarize(cohort: Cohort) -> CohortSummary:
    """Median (IQR) for age and weight, counts (%) for the categoricals."""
    if not cohort.patients:
        raise EmptyCohortError("cannot summarize an empty cohort")
    ages = np.array([p.age_years for p in cohort.patients], dtype=float)
    weights = np.array([p.weight_kg for p in cohort.patients], dtype=float)
    n = len(cohort.patients)
    return CohortSummary(
        n=n,
        age_median=float(np.quantile(ages, 0.5)),
        age_iqr=(float(np.quantile(ages, 0.25)), float(np.quantile(ages, 0.75))),
        weight_median=float(np.quantile(weights, 0.5)),
        weight_iqr=(float(np.quantile(weights, 0.25)), float(np.quantile(weights, 0.75))),
        sex_counts=_counts((p.sex.name for p in cohort.patients), n),
        race_counts=_counts((p.race.name for p in cohort.patients), n),
        indication_counts=_counts((p.indication.name for p in cohort.patients), n),
    )
