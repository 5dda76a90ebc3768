from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from warfrev.cohort import Indication, Patient, Race, Sex, Visit, prune
from warfrev.errors import EmptyCohortError, NoInrInWindow, NoSecondInr
from warfrev.features import (
    FeatureSetKind,
    bin_age,
    build_matrix,
    encode_demographics,
    featurize,
    locate_window,
    schema_for,
)
from warfrev.cohort import Cohort


def _patient(visits, **kwargs):
    base = dict(
        id="X", age_years=58, sex=Sex.MALE, race=Race.WHITE,
        weight_kg=87.0, indication=Indication.PE_DVT,
        maintenance_dose_mg_day=5.0,
    )
    base.update(kwargs)
    return Patient(visits=tuple(visits), **base)


def test_locate_window_basic_rule():
    p = _patient([
        Visit(0, 5.0),
        Visit(5, 5.0, inr=1.8),
        Visit(8, 7.0, inr=2.1),
        Visit(12, 7.0, inr=2.4),
    ])
    w = locate_window(p, 7, 10)
    assert w.t1 == 8
    assert w.t2 == 12
    assert w.dose_before_t1 == 5.0
    assert w.dose_t1 == 7.0
    assert w.inr_t1 == 2.1
    assert w.inr_t2 == 2.4


def test_locate_window_no_inr_in_window():
    p = _patient([Visit(0, 5.0), Visit(3, 5.0, inr=1.5), Visit(6, 5.0, inr=1.9)])
    with pytest.raises(NoInrInWindow):
        locate_window(p, 7, 10)


def test_locate_window_second_inr_only_when_needed():
    p = _patient([Visit(0, 5.0), Visit(9, 5.0, inr=2.2)])
    w = locate_window(p, 7, 10, require_t2=False)
    assert w.t1 == 9
    assert w.t2 is None
    with pytest.raises(NoSecondInr):
        locate_window(p, 7, 10, require_t2=True)


def test_locate_window_ignores_trailing_non_inr_visits():
    visits = [Visit(0, 5.0), Visit(8, 5.0, inr=2.0), Visit(11, 5.0, inr=2.3)]
    with_extra = visits + [Visit(20, 4.5), Visit(25, 4.5)]
    a = locate_window(_patient(visits), 7, 10)
    b = locate_window(_patient(with_extra), 7, 10)
    assert a == b


@pytest.mark.parametrize("age,expected", [(58, 5), (69, 6), (40, 4), (18, 1), (99, 9)])
def test_bin_age(age, expected):
    assert bin_age(age) == expected


@given(st.integers(min_value=18, max_value=119))
def test_bin_age_monotone(age):
    assert bin_age(age + 1) >= bin_age(age)


def test_encode_demographics_fixed_order():
    p = _patient([], age_years=58, weight_kg=87.0)
    assert encode_demographics(p) == [1.0, 1.0, 0.0, 0.0, 0.0, 5.0, 87.0]
    q = _patient([], sex=Sex.FEMALE, race=Race.ASIAN, age_years=40, weight_kg=60.0)
    assert encode_demographics(q) == [0.0, 0.0, 0.0, 1.0, 0.0, 4.0, 60.0]
    r = _patient([], race=Race.OTHER)
    assert encode_demographics(r)[1:5] == [0.0, 0.0, 0.0, 1.0]


def test_featurize_row_lengths_and_nesting():
    p = _patient([
        Visit(0, 5.0),
        Visit(8, 7.0, inr=2.1),
        Visit(12, 7.0, inr=2.4),
    ])
    clinical = featurize(p, FeatureSetKind.CLINICAL)
    single = featurize(p, FeatureSetKind.SINGLE_INR)
    longi = featurize(p, FeatureSetKind.LONGITUDINAL_INR)
    assert len(clinical) == 7
    assert len(single) == 9
    assert len(longi) == 11
    assert single[:7] == clinical
    assert longi[:9] == single
    assert longi[7:] == [5.0, 2.1, 7.0, 2.4]


def test_schema_nesting():
    c = schema_for(FeatureSetKind.CLINICAL)
    s = schema_for(FeatureSetKind.SINGLE_INR)
    l = schema_for(FeatureSetKind.LONGITUDINAL_INR)
    assert s[: len(c)] == c
    assert l[: len(s)] == s


def test_build_matrix_on_pruned_fixture(fixture_cohort):
    pruned, _ = prune(fixture_cohort, 7, 10, require_second_inr=True)
    m = build_matrix(pruned, FeatureSetKind.LONGITUDINAL_INR, 7, 10)
    assert m.rows.shape == (8, 11)
    assert m.patient_ids == tuple(sorted(m.patient_ids))
    assert np.all(m.targets > 0)

    clinical = build_matrix(pruned, FeatureSetKind.CLINICAL, 7, 10)
    assert np.array_equal(clinical.rows, m.rows[:, :7])
    assert clinical.patient_ids == m.patient_ids

    # P02 row, hand-derived from the fixture CSV.
    i = m.patient_ids.index("P02")
    assert list(m.rows[i]) == [0.0, 0.0, 1.0, 0.0, 0.0, 4.0, 95.0, 6.0, 2.1, 7.0, 2.3]
    assert m.targets[i] == 7.5


def test_build_matrix_empty_cohort():
    with pytest.raises(EmptyCohortError):
        build_matrix(Cohort(patients=()), FeatureSetKind.CLINICAL)


def test_featurize_output_finite_for_valid_patients(fixture_cohort):
    pruned, _ = prune(fixture_cohort, 7, 10, require_second_inr=True)
    for p in pruned.patients:
        row = featurize(p, FeatureSetKind.LONGITUDINAL_INR, 7, 10)
        assert np.all(np.isfinite(row))
