import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gugt.errors import NoSteps, ZeroVector
from gugt.features import (
    StepEvents, _crossings_in, anatomical_features, angle_between, detect_steps,
    gait_features, heel_depth_difference,
)
from gugt.pipeline import analyze_session
from gugt.segmentation import PhaseSegmentation, SegmentationParams, TimeSeries
from gugt.skeleton_io import Joint, Session
from gugt.synthgen import GaitProfile, generate_session
from oracles import crossing_oracle


def test_feet_side_by_side_zero():
    pos = np.ones((5, 20, 3))
    s = Session.from_arrays("S", "T", np.arange(5) * 33, pos)
    assert np.allclose(heel_depth_difference(s).values, 0)


def test_heel_difference_amplitude():
    p = GaitProfile(walk_distance_m=2.4, step_count_oneway=8, stride_m=0.3)
    s, gt = generate_session(p, seed=0)
    a, b = gt.phases["walk_out"]
    v = heel_depth_difference(s).values[a:b + 1]
    assert v.max() == pytest.approx(0.15, abs=0.01)
    assert v.min() == pytest.approx(-0.15, abs=0.01)


def _walk(n):
    return ((0, n - 1),)


def test_zero_signal_no_steps():
    assert detect_steps(TimeSeries(np.arange(50) * 33, np.zeros(50)), _walk(50)).step_count == 0


def test_scripted_eight_steps():
    s, gt = generate_session(GaitProfile(step_count_oneway=4, walk_distance_m=2.0), seed=0)
    a = analyze_session(s)
    assert a.steps.step_count == gt.step_count == 8


def test_small_noise_below_hysteresis():
    v = 0.01 * np.where(np.arange(100) % 2 == 0, 1, -1)
    assert detect_steps(TimeSeries(np.arange(100) * 33, v), _walk(100)).step_count == 0


finite = st.floats(-0.2, 0.2, allow_nan=False).map(lambda x: round(x, 2))


@settings(max_examples=200, deadline=None)
@given(v=st.lists(finite, max_size=40), amp=st.sampled_from([0.0, 0.03, 0.05, 0.1]))
def test_crossings_match_oracle(v, amp):
    assert _crossings_in(np.array(v), amp) == crossing_oracle(v, amp)


def test_crossings_only_inside_walking():
    v = np.tile([0.1, -0.1], 20)
    steps = detect_steps(TimeSeries(np.arange(40) * 33, v), ((0, 9), (20, 29)))
    assert all(0 <= f <= 9 or 20 <= f <= 29 for f in steps.crossing_frames)
    assert steps.step_count == 18


def _seg(n, turning, walking):
    return PhaseSegmentation(n, (), turning, walking, turning[0])


def test_turn_duration_from_frames():
    n = 400
    s = Session.from_arrays("S", "T", np.arange(n) * 100 // 3, np.ones((n, 20, 3)))
    seg = _seg(n, (300, 345), ((0, 299), (346, 399)))
    steps = StepEvents((10, 30, 50), 3)
    g = gait_features(seg, steps, s)
    assert g.turn_duration_s == pytest.approx(1.5)


def test_avg_step_duration_arithmetic():
    ts = np.arange(100) * 100
    s = Session.from_arrays("S", "T", ts, np.ones((100, 20, 3)))
    seg = _seg(100, (90, 95), ((0, 89), (96, 99)))
    g = gait_features(seg, StepEvents((10, 16, 22), 3), s)
    assert g.avg_step_duration_s == pytest.approx(0.6)


def test_steps_across_intervals_not_paired():
    ts = np.arange(100) * 100
    s = Session.from_arrays("S", "T", ts, np.ones((100, 20, 3)))
    seg = _seg(100, (50, 60), ((0, 49), (61, 99)))
    with pytest.raises(NoSteps):
        gait_features(seg, StepEvents((40, 70), 2), s)


def test_cadence_recovered():
    s, _ = generate_session(GaitProfile(step_duration_s=0.55), seed=1)
    assert analyze_session(s).gait.avg_step_duration_s == pytest.approx(0.55, abs=0.05)


def test_angle_examples():
    u = np.array([1.0, 2.0, 3.0])
    assert angle_between(u, u) == pytest.approx(0, abs=1e-7)
    assert angle_between([1, 0, 0], [0, 1, 0]) == pytest.approx(math.pi / 2)
    assert angle_between(u, -u) == pytest.approx(math.pi)
    with pytest.raises(ZeroVector):
        angle_between([0, 0, 0], u)


def _leg_session(knee_r, ankle_r):
    pos = np.zeros((1, 20, 3))
    pos[0, :, 2] = 2.0
    pos[0, Joint.HIP_CENTER] = [0, 1.0, 2]
    pos[0, Joint.HIP_RIGHT] = [0.1, 1.0, 2]
    pos[0, Joint.HIP_LEFT] = [-0.1, 1.0, 2]
    pos[0, Joint.KNEE_RIGHT] = knee_r
    pos[0, Joint.ANKLE_RIGHT] = ankle_r
    pos[0, Joint.KNEE_LEFT] = [-0.1, 0.5, 2]
    pos[0, Joint.ANKLE_LEFT] = [-0.1, 0.0, 2]
    pos[0, Joint.ELBOW_RIGHT] = [0.3, 1.2, 2]
    pos[0, Joint.ELBOW_LEFT] = [-0.3, 1.2, 2]
    return Session.from_arrays("S", "T", [0], pos)


def test_straight_and_flexed_knee():
    straight = anatomical_features(_leg_session([0.1, 0.5, 2], [0.1, 0.0, 2]))[0]
    assert straight.knee_right_rad == pytest.approx(math.pi)
    assert straight.knee_left_rad == pytest.approx(math.pi)
    assert straight.elbow_distance_m == pytest.approx(0.6)
    bent = anatomical_features(_leg_session([0.1, 0.5, 2], [0.1, 0.5, 1.5]))[0]
    assert bent.knee_right_rad == pytest.approx(math.pi / 2)


def test_untracked_frames_skipped():
    s, _ = generate_session(GaitProfile(), seed=0)
    trk = np.array(s.tracked)
    trk[5, Joint.KNEE_LEFT] = False
    a = anatomical_features(s.replace(tracked=trk))
    assert 5 not in a.frame_index.tolist()
    assert len(a) == len(s) - 1


def test_elbow_distance_within_shoulder_band(default_trial):
    s, gt = default_trial
    a = anatomical_features(s)
    p = GaitProfile()
    w = gt.phases["walk_out"]
    elbow = a.values[w[0]:w[1] + 1, 0]
    assert np.all(np.abs(elbow - p.shoulder_width_m) <= p.sway_amp_m + 0.05)


def test_anatomical_csv_header(default_trial):
    s, _ = default_trial
    assert anatomical_features(s).to_csv().splitlines()[0] == "t_ms,elbow_m,leg_rad,kneeR_rad,kneeL_rad"
