from __future__ import annotations

import io

import numpy as np
import pytest

from warfrev.cohort import (
    Cohort,
    Indication,
    Patient,
    Race,
    Sex,
    Visit,
    load_cohort,
    prune,
    save_cohort,
    summarize,
)
from warfrev.errors import (
    EmptyCohortError,
    InvariantError,
    SchemaError,
    WindowError,
)

PATIENTS_HEADER = "patient_id,age_years,sex,race,weight_kg,indication,maintenance_dose_mg_day"
VISITS_HEADER = "patient_id,day,dose_mg_day,inr"


def _streams(patients_body: str = "", visits_body: str = ""):
    return (
        io.StringIO(PATIENTS_HEADER + "\n" + patients_body),
        io.StringIO(VISITS_HEADER + "\n" + visits_body),
    )


def test_fixture_loads_with_committed_counts(fixture_cohort):
    assert len(fixture_cohort) == 12
    assert fixture_cohort.n_visits == 97


def test_empty_visits_file_gives_patient_without_visits():
    p, v = _streams("A,50,M,WHITE,80.0,PE_DVT,5.0\n")
    cohort = load_cohort(p, v)
    assert len(cohort) == 1
    assert cohort.patients[0].visits == ()


def test_visit_for_unknown_patient_is_schema_error():
    p, v = _streams("A,50,M,WHITE,80.0,PE_DVT,5.0\n", "ZZZ,0,5.0,\n")
    with pytest.raises(SchemaError, match="ZZZ"):
        load_cohort(p, v)


def test_missing_column_is_schema_error():
    p = io.StringIO("patient_id,age_years,sex\nA,50,M\n")
    v = io.StringIO(VISITS_HEADER + "\n")
    with pytest.raises(SchemaError):
        load_cohort(p, v)


def test_unparseable_cell_names_the_row():
    p, v = _streams("A,fifty,M,WHITE,80.0,PE_DVT,5.0\n")
    with pytest.raises(SchemaError, match="row 2"):
        load_cohort(p, v)


def test_duplicate_patient_id_rejected():
    p, v = _streams(
        "A,50,M,WHITE,80.0,PE_DVT,5.0\nA,51,F,ASIAN,60.0,OTHER,4.0\n"
    )
    with pytest.raises(InvariantError, match="duplicate"):
        load_cohort(p, v)


def test_duplicate_visit_day_rejected():
    p, v = _streams(
        "A,50,M,WHITE,80.0,PE_DVT,5.0\n",
        "A,3,5.0,\nA,3,6.0,\n",
    )
    with pytest.raises(InvariantError, match="strictly increasing"):
        load_cohort(p, v)


def test_out_of_range_values_rejected():
    with pytest.raises(InvariantError):
        Visit(day=0, dose_mg_day=31.0)
    with pytest.raises(InvariantError):
        Visit(day=0, dose_mg_day=5.0, inr=0.4)
    with pytest.raises(InvariantError):
        Patient(id="A", age_years=17, sex=Sex.MALE, race=Race.WHITE,
                weight_kg=80.0, indication=Indication.PE_DVT)
    with pytest.raises(InvariantError):
        Patient(id="A", age_years=40, sex=Sex.MALE, race=Race.WHITE,
                weight_kg=19.0, indication=Indication.PE_DVT)


def test_dose_on_day_is_a_step_function(fixture_cohort):
    p02 = next(p for p in fixture_cohort.patients if p.id == "P02")
    assert p02.dose_on_day(0) == 5.0
    assert p02.dose_on_day(3) == 5.0
    assert p02.dose_on_day(6) == 6.0
    assert p02.dose_on_day(7) == 6.0
    assert p02.dose_on_day(8) == 7.0
    p10 = next(p for p in fixture_cohort.patients if p.id == "P10")
    assert p10.dose_on_day(5) is None


def test_prune_fixture_committed_report(fixture_cohort):
    pruned, report = prune(fixture_cohort, 7, 10, require_second_inr=True)
    assert len(pruned) == 8
    assert report.n_input == 12
    assert report.n_no_maintenance == 1
    assert report.n_no_revision_dose == 1
    assert report.n_no_inr_in_window == 1
    assert report.n_no_second_inr == 1
    assert report.n_output == 8
    assert report.excluded_ids["no_maintenance"] == ("P09",)
    assert report.excluded_ids["no_revision_dose"] == ("P10",)
    assert report.excluded_ids["no_inr_in_window"] == ("P11",)
    assert report.excluded_ids["no_second_inr"] == ("P12",)


def test_prune_without_second_inr_flag_keeps_single_inr_patient(fixture_cohort):
    pruned, report = prune(fixture_cohort, 7, 10, require_second_inr=False)
    assert len(pruned) == 9
    assert report.n_no_second_inr == 0
    assert "P12" in {p.id for p in pruned.patients}


def test_prune_is_idempotent(fixture_cohort):
    once, _ = prune(fixture_cohort, 7, 10, require_second_inr=True)
    twice, second_report = prune(once, 7, 10, require_second_inr=True)
    assert [p.id for p in twice.patients] == [p.id for p in once.patients]
    assert second_report.n_input == second_report.n_output
    assert second_report.n_no_maintenance == 0
    assert second_report.n_no_revision_dose == 0
    assert second_report.n_no_inr_in_window == 0
    assert second_report.n_no_second_inr == 0


def test_prune_membership_independent_of_patient_order(fixture_cohort):
    reversed_cohort = Cohort(
        patients=tuple(reversed(fixture_cohort.patients)),
        provenance=fixture_cohort.provenance,
    )
    a, _ = prune(fixture_cohort, 7, 10, require_second_inr=True)
    b, _ = prune(reversed_cohort, 7, 10, require_second_inr=True)
    assert {p.id for p in a.patients} == {p.id for p in b.patients}


def test_prune_counts_reconcile(fixture_cohort):
    _, report = prune(fixture_cohort, 7, 10, require_second_inr=True)
    excluded = (
        report.n_no_maintenance
        + report.n_no_revision_dose
        + report.n_no_inr_in_window
        + report.n_no_second_inr
    )
    assert report.n_input - report.n_output == excluded


def test_prune_rejects_bad_window(fixture_cohort):
    with pytest.raises(WindowError):
        prune(fixture_cohort, 10, 7)
    with pytest.raises(WindowError):
        prune(fixture_cohort, 0, 10)


def test_save_load_round_trip_is_byte_exact(fixture_cohort, tmp_path):
    first = tmp_path / "first"
    second = tmp_path / "second"
    save_cohort(fixture_cohort, first)
    reloaded = load_cohort(first / "patients.csv", first / "visits.csv")
    save_cohort(reloaded, second)
    assert (first / "patients.csv").read_bytes() == (second / "patients.csv").read_bytes()
    assert (first / "visits.csv").read_bytes() == (second / "visits.csv").read_bytes()
    assert reloaded.patients == tuple(sorted(fixture_cohort.patients, key=lambda p: p.id))


def test_summarize_interpolated_quantiles():
    patients = tuple(
        Patient(id=f"A{i}", age_years=a, sex=Sex.MALE, race=Race.WHITE,
                weight_kg=80.0, indication=Indication.PE_DVT, maintenance_dose_mg_day=5.0)
        for i, a in enumerate((46, 58, 69))
    )
    s = summarize(Cohort(patients=patients))
    assert s.age_median == 58.0
    assert s.age_iqr == (52.0, 63.5)


def test_summarize_single_patient_degenerate():
    p = Patient(id="A", age_years=60, sex=Sex.FEMALE, race=Race.ASIAN,
                weight_kg=55.0, indication=Indication.NONE, maintenance_dose_mg_day=4.0)
    s = summarize(Cohort(patients=(p,)))
    assert s.age_median == 60.0
    assert s.age_iqr == (60.0, 60.0)
    assert s.weight_iqr == (55.0, 55.0)
    assert s.sex_counts["FEMALE"] == (1, 100.0)


def test_summarize_empty_cohort_raises():
    with pytest.raises(EmptyCohortError):
        summarize(Cohort(patients=()))


def test_summarize_fixture_counts(fixture_cohort):
    s = summarize(fixture_cohort)
    assert s.n == 12
    assert s.sex_counts["MALE"][0] == 6
    assert sum(c for c, _ in s.race_counts.values()) == 12
    assert abs(sum(pct for _, pct in s.race_counts.values()) - 100.0) < 1e-9
