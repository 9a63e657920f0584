import numpy as np
import pytest

from gugt.errors import DegenerateRange, InvalidProfile
from gugt.pipeline import analyze_session
from gugt.skeleton_io import Label, write_session
from gugt.synthgen import (
    GaitProfile, GroundTruth, exact_recovery_grid, generate_cohort, generate_session,
    separable_cohort_profiles,
)


def test_reference_profile_recovered():
    p = GaitProfile(step_count_oneway=8, step_duration_s=0.6, turn_duration_s=1.5)
    s, gt = generate_session(p, seed=0)
    a = analyze_session(s)
    assert a.steps.step_count == gt.step_count == 16
    assert a.gait.avg_step_duration_s == pytest.approx(0.6, abs=0.01)
    assert a.gait.turn_duration_s == pytest.approx(1.5, abs=0.2)


def test_crossings_at_scripted_times(default_trial):
    s, gt = default_trial
    p = GaitProfile()
    t0 = p.script()["walk_out"][0]
    expected = [t0 + k * p.step_duration_s for k in range(1, p.step_count_oneway + 1)]
    assert np.allclose(gt.crossing_times_s[:p.step_count_oneway], expected)


def test_seated_only_profile_degenerate():
    s, gt = generate_session(GaitProfile(step_count_oneway=0), seed=0)
    with pytest.raises(DegenerateRange):
        analyze_session(s)


def test_frame_count_from_script():
    p = GaitProfile(seated_lead_s=7.0, seated_tail_s=7.0, step_count_oneway=0)
    assert p.total_duration_s == pytest.approx(14.0)
    assert len(generate_session(p, seed=0)[0]) == 420


def test_phases_partition_frames(default_trial):
    _, gt = default_trial
    pos = 0
    for a, b in sorted(gt.phases.values()):
        assert a == pos
        pos = b + 1
    assert pos == gt.n_frames


def test_ground_truth_json_round_trip(default_trial):
    _, gt = default_trial
    assert GroundTruth.from_json(gt.to_json()) == gt


@pytest.mark.parametrize("kw", [
    {"step_duration_s": 0}, {"fps": -1}, {"turn_duration_s": 0.1},
    {"step_count_oneway": 8, "stride_m": 0.4}, {"noise_std_m": -0.1},
    {"chair_distance_m": 2.0}, {"dropout_prob": 1.0},
])
def test_invalid_profiles(kw):
    with pytest.raises(InvalidProfile):
        GaitProfile(**kw)


def test_cohort_shape():
    low, high = separable_cohort_profiles()
    ds = generate_cohort(low, high, 5, 7, trials=(3, 6), seed=2)
    assert len(ds.subjects) == 12
    assert 36 <= len(ds) <= 72
    labels = {s.subject_id: s.label for s in ds}
    assert sum(v is Label.LOW for v in labels.values()) == 5


def test_tiny_cohort():
    low, high = separable_cohort_profiles()
    assert len(generate_cohort(low, high, 1, 1, trials=(1, 1), seed=0)) == 2


def test_cohort_deterministic():
    low, high = separable_cohort_profiles()
    a = generate_cohort(low, high, 2, 2, seed=5)
    b = generate_cohort(low, high, 2, 2, seed=5)
    assert [write_session(s) for s in a] == [write_session(s) for s in b]


def test_grid_has_27_profiles():
    grid = exact_recovery_grid()
    assert len(grid) == 27
    assert all(p.noise_std_m == 0 for p in grid)


def test_dropout_marks_untracked():
    s, _ = generate_session(GaitProfile(dropout_prob=0.05), seed=0)
    assert 0 < (~s.tracked).mean() < 0.1
