"""Trial-level gait parameters and per-frame anatomical parameters."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import NoSteps, ZeroVector
from .segmentation import (
    PhaseSegmentation,
    SegmentationParams,
    TimeSeries,
    _joint_series,
)
from .skeleton_io import Joint, Session


@dataclass(frozen=True)
class StepEvents:
    crossing_frames: tuple
    step_count: int


@dataclass(frozen=True)
class GaitFeatures:
    num_steps: int
    avg_step_duration_s: float
    turn_duration_s: float

    def as_array(self) -> np.ndarray:
        return np.array([self.num_steps, self.avg_step_duration_s, self.turn_duration_s], dtype=float)


@dataclass(frozen=True)
class AnatomicalFrameFeatures:
    elbow_distance_m: float
    leg_angle_rad: float
    knee_right_rad: float
    knee_left_rad: float


ANATOMICAL_COLUMNS = ("elbow_m", "leg_rad", "kneeR_rad", "kneeL_rad")


@dataclass(frozen=True)
class AnatomicalSeries:
    """Per-frame anatomical features for the frames where all required joints
    were tracked.  ``values`` columns follow ``ANATOMICAL_COLUMNS``."""

    timestamps: np.ndarray
    frame_index: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i) -> AnatomicalFrameFeatures:
        return AnatomicalFrameFeatures(*map(float, self.values[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["t_ms", *ANATOMICAL_COLUMNS])
        for t, row in zip(self.timestamps.tolist(), self.values.tolist()):
            w.writerow([t, *map(repr, row)])
        return out.getvalue()


def heel_depth_difference(session: Session) -> TimeSeries:
    """Signed depth difference right ankle minus left ankle."""
    pos, t = _joint_series(session, [Joint.ANKLE_RIGHT, Joint.ANKLE_LEFT], "heel difference")
    return TimeSeries(t, pos[:, 0, 2] - pos[:, 1, 2], "heel_dz")


def _signs_carry_zero(v: np.ndarray) -> np.ndarray:
    """Sign per sample; exact zeros take the sign of the preceding sample
    (leading zeros stay 0)."""
    s = np.sign(v).astype(np.int8)
    for i in range(1, len(s)):
        if s[i] == 0:
            s[i] = s[i - 1]
    return s


def _crossings_in(v: np.ndarray, amplitude: float) -> list[int]:
    # Schmitt trigger: the armed side changes only on an excursion of at
    # least `amplitude`; the crossing is the first sample of that final run.
    signs = _signs_carry_zero(v)
    out = []
    armed = 0
    run_start = 0
    for i, s in enumerate(signs):
        if i == 0 or s != signs[i - 1]:
            run_start = i
        if s != 0 and v[i] != 0 and abs(v[i]) >= amplitude:
            if armed and s != armed:
                out.append(run_start)
            armed = s
    return out


def detect_steps(
    heel_diff: TimeSeries,
    walking,
    params: SegmentationParams = SegmentationParams(),
) -> StepEvents:
    """Zero crossings of the heel-depth difference inside walking intervals,
    with hysteresis of ``params.step_amplitude_m`` on both sides."""
    frames = []
    for a, b in walking:
        frames += [a + k for k in _crossings_in(heel_diff.values[a:b + 1], params.step_amplitude_m)]
    return StepEvents(tuple(frames), len(frames))


def gait_features(seg: PhaseSegmentation, steps: StepEvents, session: Session) -> GaitFeatures:
    t = session.timestamps
    deltas = []
    for a, b in seg.walking:
        inside = [f for f in steps.crossing_frames if a <= f <= b]
        deltas += [int(t[q] - t[p]) for p, q in zip(inside, inside[1:])]
    if not deltas:
        raise NoSteps(f"session {session.key}: fewer than 2 crossings in every walking interval")
    s, e = seg.turning
    return GaitFeatures(
        num_steps=steps.step_count,
        avg_step_duration_s=float(np.mean(deltas)) / 1000.0,
        turn_duration_s=int(t[e] - t[s]) / 1000.0,
    )


def angle_between(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ZeroVector("angle undefined for a zero-length vector")
    return float(np.arccos(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0)))


def _angles(u: np.ndarray, v: np.ndarray):
    nu = np.linalg.norm(u, axis=-1)
    nv = np.linalg.norm(v, axis=-1)
    ok = (nu > 0) & (nv > 0)
    cos = np.einsum("ij,ij->i", u, v) / np.where(ok, nu * nv, 1.0)
    return np.arccos(np.clip(cos, -1.0, 1.0)), ok


_ANATOMY_JOINTS = [
    Joint.HIP_CENTER, Joint.ELBOW_RIGHT, Joint.ELBOW_LEFT,
    Joint.HIP_RIGHT, Joint.KNEE_RIGHT, Joint.ANKLE_RIGHT,
    Joint.HIP_LEFT, Joint.KNEE_LEFT, Joint.ANKLE_LEFT,
]


def anatomical_features(session: Session) -> AnatomicalSeries:
    """Elbow distance, inter-leg angle and both knee angles per frame.

    Frames with any required joint untracked, or with a zero-length limb
    vector, are skipped.
    """
    if len(session) == 0:
        return AnatomicalSeries(np.empty(0, np.int64), np.empty(0, np.int64), np.empty((0, 4)))
    p = session.positions
    J = Joint
    elbow = np.linalg.norm(p[:, J.ELBOW_RIGHT] - p[:, J.ELBOW_LEFT], axis=-1)
    leg, ok1 = _angles(p[:, J.KNEE_RIGHT] - p[:, J.HIP_CENTER], p[:, J.KNEE_LEFT] - p[:, J.HIP_CENTER])
    knee_r, ok2 = _angles(p[:, J.HIP_RIGHT] - p[:, J.KNEE_RIGHT], p[:, J.ANKLE_RIGHT] - p[:, J.KNEE_RIGHT])
    knee_l, ok3 = _angles(p[:, J.HIP_LEFT] - p[:, J.KNEE_LEFT], p[:, J.ANKLE_LEFT] - p[:, J.KNEE_LEFT])
    keep = session.tracked[:, _ANATOMY_JOINTS].all(axis=1) & ok1 & ok2 & ok3
    idx = np.flatnonzero(keep)
    values = np.column_stack([elbow, leg, knee_r, knee_l])[idx]
    return AnatomicalSeries(session.timestamps[idx], idx, values)
