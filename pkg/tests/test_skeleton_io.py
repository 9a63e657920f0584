import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_session
from gugt.errors import MalformedRecord, NonMonotonicTimestamp, TooFewSubjects, WrongJointCount
from gugt.skeleton_io import (
    N_JOINTS, Joint, Label, LabeledDataset, Session, SkeletonFrame, parse_session,
    read_session, save_session, validate_dataset, write_session,
)
from gugt.synthgen import GaitProfile, generate_session


def test_pinned_joint_indices():
    assert Joint.HIP_CENTER == 1
    assert (Joint.ELBOW_RIGHT, Joint.ELBOW_LEFT) == (6, 10)
    assert (Joint.HIP_RIGHT, Joint.KNEE_RIGHT, Joint.ANKLE_RIGHT) == (13, 14, 15)
    assert (Joint.HIP_LEFT, Joint.KNEE_LEFT, Joint.ANKLE_LEFT) == (17, 18, 19)
    assert len(Joint) == N_JOINTS == 20


def _two_frame_jsonl(t2=33):
    s = make_session(2)
    text = write_session(s, "jsonl")
    lines = text.splitlines()
    if t2 != 33:
        lines[2] = lines[2].replace('"t":33', f'"t":{t2}')
    return "\n".join(lines) + "\n"


def test_minimal_file_parses():
    s = parse_session(_two_frame_jsonl())
    assert len(s) == 2
    assert np.diff(s.timestamps).tolist() == [33]


def test_repeated_timestamp_rejected():
    with pytest.raises(NonMonotonicTimestamp):
        parse_session(_two_frame_jsonl(t2=0))


def test_ten_second_session_has_300_frames():
    s, _ = generate_session(GaitProfile(step_count_oneway=0, seated_lead_s=5, seated_tail_s=5), seed=0)
    assert len(s) == 300
    assert np.all(np.abs(np.diff(s.timestamps) - 1000 / 30) < 1)
    assert np.diff(s.timestamps).mean() == pytest.approx(1000 / 30, abs=0.01)


def test_unlabeled_session_has_no_label_field():
    s = make_session(3)
    assert '"label"' not in write_session(s, "jsonl").splitlines()[0]
    assert "label" not in write_session(s, "csv").splitlines()[0]
    assert parse_session(write_session(s, "csv"), "csv").label is Label.UNLABELED


@pytest.mark.parametrize("fmt", ["jsonl", "csv"])
def test_round_trip_synthetic(fmt, default_trial):
    s, _ = default_trial
    s = Session(s.subject_id, s.trial_id, Label.HIGH, s.frames, s.fps_hint)
    back = parse_session(write_session(s, fmt), fmt)
    assert back == s
    assert np.array_equal(back.positions, s.positions)


@pytest.mark.parametrize("fmt", ["jsonl", "csv"])
def test_file_round_trip(tmp_path, fmt):
    s = make_session(5, label=Label.LOW)
    path = tmp_path / f"x.{fmt}"
    save_session(s, path)
    assert read_session(path) == s


coord = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(1, 6),
    data=st.data(),
    fmt=st.sampled_from(["jsonl", "csv"]),
    label=st.sampled_from(list(Label)),
)
def test_round_trip_property(n, data, fmt, label):
    pos = np.array(data.draw(st.lists(coord, min_size=n * 60, max_size=n * 60))).reshape(n, 20, 3)
    trk = np.array(data.draw(st.lists(st.booleans(), min_size=n * 20, max_size=n * 20))).reshape(n, 20)
    pos[..., 2] = np.where(trk, np.abs(pos[..., 2]) + 0.5, pos[..., 2])
    ts = np.cumsum(data.draw(st.lists(st.integers(1, 100), min_size=n, max_size=n)))
    s = Session.from_arrays("S9", "T2", ts, pos, trk, label=label, fps_hint=30.0)
    assert parse_session(write_session(s, fmt), fmt) == s


def test_empty_file_is_malformed():
    with pytest.raises(MalformedRecord) as e:
        parse_session("")
    assert e.value.line == 1


def test_garbage_line_reports_line_number():
    text = _two_frame_jsonl().splitlines()
    text[2] = "{not json"
    with pytest.raises(MalformedRecord) as e:
        parse_session("\n".join(text))
    assert e.value.line == 3


def test_wrong_joint_count_in_file():
    text = _two_frame_jsonl().splitlines()
    import json
    rec = json.loads(text[1])
    for k, v in rec.items():
        if isinstance(v, list) and len(v) == 20:
            rec[k] = v[:19]
    text[1] = json.dumps(rec)
    with pytest.raises(WrongJointCount):
        parse_session("\n".join(text))


def test_parse_from_stream():
    assert len(parse_session(io.StringIO(_two_frame_jsonl()))) == 2


def _labeled(subject, trial, label=Label.LOW):
    return make_session(3, subject=subject, trial=trial, label=label)


def test_validate_clean_dataset():
    sessions = [_labeled(f"S{i:02d}", f"T{j}") for i in range(12) for j in range(4)] + [
        _labeled("S00", "T9"), _labeled("S01", "T9")]
    assert len(sessions) == 50
    assert validate_dataset(sessions).violations == []


def test_validate_single_subject():
    rep = validate_dataset([_labeled("S01", "T1"), _labeled("S01", "T2")])
    assert [v.message for v in rep.violations] == ["LOSO requires ≥2 subjects"]


def test_validate_short_frame():
    good = _labeled("S01", "T1")
    bad_frame = SkeletonFrame(100, np.ones((19, 3)), np.ones(19, bool))
    bad = Session("S02", "T1", Label.HIGH, good.frames + (bad_frame,))
    assert "WrongJointCount" in validate_dataset([good, bad]).kinds()


def test_labeled_dataset_requires_two_subjects():
    with pytest.raises(TooFewSubjects):
        LabeledDataset([_labeled("S01", "T1")])
