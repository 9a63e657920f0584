"""Seated / walking / turning segmentation of one trial.

Two signals drive it: the depth of the hip center (largest while seated,
smallest at the turn) and the horizontal distance between the elbows, which
collapses while the torso is rotated during the turn.

All intervals are inclusive ``(start, end)`` frame-index pairs.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRange, InsufficientTracking, InvalidParameter
from .skeleton_io import Joint, Session

MIN_TRACKED_FRACTION = 0.9
MIN_DEPTH_RANGE_M = 0.2


@dataclass(frozen=True)
class TimeSeries:
    timestamps: np.ndarray
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        vals = np.asarray(self.values, dtype=np.float64)
        if ts.shape != vals.shape or ts.ndim != 1:
            raise ValueError("timestamps and values must be 1-d and of equal length")
        if np.any(np.diff(ts) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def scaled(self, factor: float) -> "TimeSeries":
        return TimeSeries(self.timestamps, self.values * factor, self.name)


@dataclass(frozen=True)
class SegmentationParams:
    seated_band_frac: float = 0.05
    seated_min_duration_s: float = 0.5
    turn_recovery_frac: float = 0.8
    step_amplitude_m: float = 0.05

    def __post_init__(self):
        for name in ("seated_band_frac", "turn_recovery_frac"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise InvalidParameter(f"{name} must be in (0, 1), got {v!r}")
        if self.seated_min_duration_s < 0:
            raise InvalidParameter("seated_min_duration_s must be >= 0")
        if self.step_amplitude_m < 0:
            raise InvalidParameter("step_amplitude_m must be >= 0")


@dataclass(frozen=True)
class TurnInterval:
    start: int
    end: int
    recovered_before: bool = True
    recovered_after: bool = True

    @property
    def no_recovery(self) -> bool:
        return not (self.recovered_before and self.recovered_after)


@dataclass(frozen=True)
class PhaseSegmentation:
    n_frames: int
    seated: tuple
    turning: tuple
    walking: tuple
    turn_point: int
    no_recovery: bool = False

    def labels(self) -> np.ndarray:
        """Per-frame phase name."""
        out = np.empty(self.n_frames, dtype=object)
        for a, b in self.seated:
            out[a:b + 1] = "seated"
        for a, b in self.walking:
            out[a:b + 1] = "walking"
        a, b = self.turning
        out[a:b + 1] = "turning"
        return out

    def intervals(self) -> list:
        """All (start, end, phase) triples sorted by start."""
        items = [(a, b, "seated") for a, b in self.seated]
        items += [(a, b, "walking") for a, b in self.walking]
        items.append((*self.turning, "turning"))
        return sorted(items)

    def check(self) -> None:
        """Raise AssertionError if the partition invariants do not hold."""
        items = self.intervals()
        pos = 0
        for a, b, _ in items:
            assert a == pos and b >= a, f"intervals do not tile [0, {self.n_frames}): {items}"
            pos = b + 1
        assert pos == self.n_frames, f"intervals end at {pos}, expected {self.n_frames}"
        a, b = self.turning
        assert a <= self.turn_point <= b, "turn point outside turning interval"
        for a, b in self.seated:
            assert a == 0 or b == self.n_frames - 1, "seated interval not at a sequence end"


def _joint_series(session: Session, joints, name: str) -> tuple[np.ndarray, np.ndarray]:
    """Positions of the given joints with untracked frames interpolated from
    tracked neighbours.  Requires the joints to be tracked in >= 90% of frames."""
    trk = session.tracked[:, list(joints)].all(axis=1)
    n = len(trk)
    if n == 0 or trk.sum() < MIN_TRACKED_FRACTION * n:
        raise InsufficientTracking(
            f"{name}: joints {list(map(int, joints))} tracked in {int(trk.sum())}/{n} frames"
        )
    pos = np.array(session.positions[:, list(joints)])
    if not trk.all():
        t = session.timestamps
        good = np.flatnonzero(trk)
        for j in range(pos.shape[1]):
            for c in range(3):
                pos[:, j, c] = np.interp(t, t[good], pos[good, j, c])
    return pos, session.timestamps


def hip_depth_signal(session: Session) -> TimeSeries:
    pos, t = _joint_series(session, [Joint.HIP_CENTER], "hip depth")
    return TimeSeries(t, pos[:, 0, 2], "hip_z")


def elbow_xdistance_signal(session: Session) -> TimeSeries:
    pos, t = _joint_series(session, [Joint.ELBOW_RIGHT, Joint.ELBOW_LEFT], "elbow distance")
    return TimeSeries(t, np.abs(pos[:, 0, 0] - pos[:, 1, 0]), "elbow_xdist")


def find_turn_point(z1: TimeSeries) -> int:
    if len(z1) == 0:
        raise ValueError("empty series")
    return int(np.argmin(z1.values))


def _true_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    padded = np.concatenate(([0], mask.astype(np.int8), [0]))
    edges = np.flatnonzero(np.diff(padded))
    return [(int(a), int(b) - 1) for a, b in zip(edges[::2], edges[1::2])]


def seated_threshold(z1: TimeSeries, params: SegmentationParams) -> float:
    hi, lo = float(z1.values.max()), float(z1.values.min())
    return hi - params.seated_band_frac * (hi - lo)


def detect_seated_phases(z1: TimeSeries, params: SegmentationParams = SegmentationParams()) -> list:
    """Initial and final seated intervals from the hip-depth plateau.

    A frame is in the seated band when its depth is within
    ``seated_band_frac`` of the range below the maximum.  Runs shorter than
    ``seated_min_duration_s`` are dropped.  Only a run touching the first
    frame (before the turn point) and one touching the last frame (after it)
    are kept.
    """
    if len(z1) == 0:
        raise ValueError("empty series")
    v = z1.values
    span = float(v.max() - v.min())
    if span < MIN_DEPTH_RANGE_M:
        raise DegenerateRange(f"hip depth range {span:.3f} m < {MIN_DEPTH_RANGE_M} m")
    tp = find_turn_point(z1)
    t = z1.timestamps
    n = len(v)
    runs = [
        (a, b) for a, b in _true_runs(v >= seated_threshold(z1, params))
        if (t[b] - t[a]) / 1000.0 >= params.seated_min_duration_s
    ]
    seated = []
    first = [r for r in runs if r[1] < tp and r[0] == 0]
    last = [r for r in runs if r[0] > tp and r[1] == n - 1]
    if first:
        seated.append(first[0])
    if last:
        seated.append(last[-1])
    return seated


def detect_turning_phase(
    elbow: TimeSeries,
    turn_point: int,
    walking_baseline: float,
    params: SegmentationParams = SegmentationParams(),
    bounds: tuple[int, int] | None = None,
) -> TurnInterval:
    """Frames around the turn point where the elbow distance stays below
    ``turn_recovery_frac * walking_baseline``.

    ``bounds`` (inclusive) limits the scan to the walking region; when the
    signal does not recover inside it the interval is clamped to the bound
    and flagged.
    """
    n = len(elbow)
    if not 0 <= turn_point < n:
        raise ValueError("turn point outside series")
    if not walking_baseline > 0:
        raise ValueError("walking baseline must be positive")
    lo, hi = bounds if bounds is not None else (0, n - 1)
    if not lo <= turn_point <= hi:
        raise ValueError("turn point outside scan bounds")
    thr = params.turn_recovery_frac * walking_baseline
    above = elbow.values >= thr

    before = np.flatnonzero(above[lo:turn_point])
    start = lo + int(before[-1]) + 1 if len(before) else lo
    after = np.flatnonzero(above[turn_point + 1:hi + 1])
    end = turn_point + int(after[0]) if len(after) else hi
    return TurnInterval(start, end, bool(len(before)), bool(len(after)))


def segment_phases(session: Session, params: SegmentationParams = SegmentationParams()) -> PhaseSegmentation:
    """Full segmentation of a preprocessed session."""
    z1 = hip_depth_signal(session)
    elbow = elbow_xdistance_signal(session)
    n = len(z1)
    seated = detect_seated_phases(z1, params)
    tp = find_turn_point(z1)

    lo = next((b + 1 for a, b in seated if b < tp), 0)
    hi = next((a - 1 for a, b in seated if a > tp), n - 1)
    pre = elbow.values[lo:tp]
    baseline = float(np.median(pre)) if len(pre) else float(np.median(elbow.values))
    if baseline <= 0:
        baseline = float(np.max(elbow.values)) or 1.0
    turn = detect_turning_phase(elbow, tp, baseline, params, bounds=(lo, hi))

    walking = []
    if turn.start > lo:
        walking.append((lo, turn.start - 1))
    if turn.end < hi:
        walking.append((turn.end + 1, hi))
    return PhaseSegmentation(
        n_frames=n,
        seated=tuple(seated),
        turning=(turn.start, turn.end),
        walking=tuple(walking),
        turn_point=tp,
        no_recovery=turn.no_recovery,
    )


def plot_csv(series: TimeSeries, seg: PhaseSegmentation, extra: dict | None = None) -> str:
    """Signal plus per-frame phase as ``t_ms,value,phase[,extra...]`` CSV."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    extra = extra or {}
    w.writerow(["t_ms", "value", "phase", *extra])
    phases = seg.labels()
    for i, (t, v) in enumerate(zip(series.timestamps.tolist(), series.values.tolist())):
        w.writerow([t, repr(v), phases[i], *(col[i] for col in extra.values())])
    return out.getvalue()
