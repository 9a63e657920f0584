"""Skeleton data model and the on-disk session formats (JSON-lines and CSV).

A session file holds one Get-Up-and-Go trial: a metadata header followed by
one record per frame with 20 joint positions (meters, camera coordinates, z
is distance from the sensor) and 20 tracking flags.  Floats are written with
``repr`` so a write/parse round trip is exact.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import (
    DataError,
    MalformedRecord,
    NonMonotonicTimestamp,
    TooFewSubjects,
    WrongJointCount,
)

N_JOINTS = 20


class Joint(IntEnum):
    """Joint indices of the 20-joint skeleton.

    Only the nine roles used by the pipeline are pinned (hip center, both
    elbows, and hip/knee/ankle of each leg).  The remaining eleven indices
    follow this module's own convention and are carried through opaquely.
    """

    HEAD = 0
    HIP_CENTER = 1
    SPINE = 2
    SHOULDER_CENTER = 3
    FOOT_LEFT = 4
    SHOULDER_RIGHT = 5
    ELBOW_RIGHT = 6
    WRIST_RIGHT = 7
    HAND_RIGHT = 8
    SHOULDER_LEFT = 9
    ELBOW_LEFT = 10
    WRIST_LEFT = 11
    HAND_LEFT = 12
    HIP_RIGHT = 13
    KNEE_RIGHT = 14
    ANKLE_RIGHT = 15
    FOOT_RIGHT = 16
    HIP_LEFT = 17
    KNEE_LEFT = 18
    ANKLE_LEFT = 19


PIPELINE_JOINTS = (
    Joint.HIP_CENTER,
    Joint.ELBOW_RIGHT,
    Joint.ELBOW_LEFT,
    Joint.HIP_RIGHT,
    Joint.KNEE_RIGHT,
    Joint.ANKLE_RIGHT,
    Joint.HIP_LEFT,
    Joint.KNEE_LEFT,
    Joint.ANKLE_LEFT,
)


class Label(Enum):
    LOW = "low"
    HIGH = "high"
    UNLABELED = None

    @property
    def sign(self) -> int:
        """Classifier target: +1 for high risk, -1 for low risk."""
        if self is Label.UNLABELED:
            raise ValueError("unlabeled session has no class sign")
        return 1 if self is Label.HIGH else -1

    @classmethod
    def from_sign(cls, s: float) -> "Label":
        # a zero decision value maps to high risk (conservative side)
        return cls.HIGH if s >= 0 else cls.LOW


@dataclass(frozen=True, eq=False)
class SkeletonFrame:
    timestamp: int
    positions: np.ndarray
    tracked: np.ndarray

    def __post_init__(self):
        pos = np.array(self.positions, dtype=np.float64)
        trk = np.array(self.tracked, dtype=bool)
        pos.setflags(write=False)
        trk.setflags(write=False)
        object.__setattr__(self, "timestamp", int(self.timestamp))
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "tracked", trk)

    @property
    def n_joints(self) -> int:
        return len(self.positions)

    def __eq__(self, other):
        if not isinstance(other, SkeletonFrame):
            return NotImplemented
        return (
            self.timestamp == other.timestamp
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.tracked, other.tracked)
        )


@dataclass(frozen=True, eq=False)
class Session:
    """One trial.  ``frames`` is the canonical content; stacked arrays are
    derived lazily and cached (read-only)."""

    subject_id: str
    trial_id: str
    label: Label = Label.UNLABELED
    frames: tuple = ()
    fps_hint: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))

    @classmethod
    def from_arrays(
        cls,
        subject_id: str,
        trial_id: str,
        timestamps,
        positions,
        tracked=None,
        label: Label = Label.UNLABELED,
        fps_hint: float | None = None,
    ) -> "Session":
        ts = np.asarray(timestamps, dtype=np.int64)
        pos = np.asarray(positions, dtype=np.float64)
        trk = np.ones(pos.shape[:2], dtype=bool) if tracked is None else np.asarray(tracked, dtype=bool)
        frames = tuple(SkeletonFrame(int(t), p, k) for t, p, k in zip(ts, pos, trk))
        s = cls(subject_id, trial_id, label, frames, fps_hint)
        if pos.ndim == 3 and pos.shape[1:] == (N_JOINTS, 3):
            for name, arr in (("timestamps", ts), ("positions", pos), ("tracked", trk)):
                arr = arr.copy()
                arr.setflags(write=False)
                s.__dict__[name] = arr
        return s

    def __len__(self) -> int:
        return len(self.frames)

    def __eq__(self, other):
        if not isinstance(other, Session):
            return NotImplemented
        return (
            self.subject_id == other.subject_id
            and self.trial_id == other.trial_id
            and self.label == other.label
            and self.fps_hint == other.fps_hint
            and self.frames == other.frames
        )

    @property
    def key(self) -> str:
        return f"{self.subject_id}/{self.trial_id}"

    def _require_full_frames(self):
        for i, f in enumerate(self.frames):
            if f.positions.shape != (N_JOINTS, 3) or f.tracked.shape != (N_JOINTS,):
                raise WrongJointCount(f"frame {i}: expected {N_JOINTS} joints, got {f.n_joints}")

    @cached_property
    def timestamps(self) -> np.ndarray:
        ts = np.array([f.timestamp for f in self.frames], dtype=np.int64)
        ts.setflags(write=False)
        return ts

    @cached_property
    def positions(self) -> np.ndarray:
        self._require_full_frames()
        pos = np.stack([f.positions for f in self.frames]) if self.frames else np.empty((0, N_JOINTS, 3))
        pos.setflags(write=False)
        return pos

    @cached_property
    def tracked(self) -> np.ndarray:
        self._require_full_frames()
        trk = np.stack([f.tracked for f in self.frames]) if self.frames else np.empty((0, N_JOINTS), bool)
        trk.setflags(write=False)
        return trk

    @property
    def times_s(self) -> np.ndarray:
        return self.timestamps / 1000.0

    def replace(self, positions=None, tracked=None, label: Label | None = None) -> "Session":
        return Session.from_arrays(
            self.subject_id,
            self.trial_id,
            self.timestamps,
            self.positions if positions is None else positions,
            self.tracked if tracked is None else tracked,
            label=self.label if label is None else label,
            fps_hint=self.fps_hint,
        )


@dataclass(frozen=True)
class LabeledDataset:
    sessions: tuple

    def __post_init__(self):
        object.__setattr__(self, "sessions", tuple(self.sessions))
        for s in self.sessions:
            if s.label is Label.UNLABELED:
                raise DataError(f"session {s.key} is unlabeled")
        if len(self.subjects) < 2:
            raise TooFewSubjects("LOSO requires >=2 subjects")

    @property
    def subjects(self) -> list[str]:
        return sorted({s.subject_id for s in self.sessions})

    def __len__(self) -> int:
        return len(self.sessions)

    def __iter__(self):
        return iter(self.sessions)


# --------------------------------------------------------------------------
# parsing

FORMATS = ("jsonl", "csv")


def _check_format(fmt: str):
    if fmt not in FORMATS:
        raise ValueError(f"unknown session format {fmt!r}")


def _label_from_text(value, line: int) -> Label:
    if value is None or value == "":
        return Label.UNLABELED
    try:
        lab = Label(value)
    except ValueError:
        raise MalformedRecord(line, f"bad label {value!r}") from None
    return lab


def _number(v, line: int, what: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise MalformedRecord(line, f"{what} is not a number")
    v = float(v)
    if not math.isfinite(v):
        raise MalformedRecord(line, f"{what} is not finite")
    return v


class _FrameBuilder:
    def __init__(self):
        self.ts: list[int] = []
        self.pos: list = []
        self.trk: list = []

    def add(self, line: int, t, joints, tracked):
        if len(joints) != N_JOINTS or len(tracked) != N_JOINTS:
            raise WrongJointCount(f"line {line}: expected {N_JOINTS} joints, got {len(joints)}")
        if self.ts and t <= self.ts[-1]:
            raise NonMonotonicTimestamp(f"line {line}: timestamp {t} after {self.ts[-1]}")
        for k, (p, ok) in enumerate(zip(joints, tracked)):
            if ok and p[2] <= 0:
                raise MalformedRecord(line, f"tracked joint {k} has z <= 0")
        self.ts.append(t)
        self.pos.append(joints)
        self.trk.append(tracked)

    def build(self, subject, trial, label, fps_hint) -> Session:
        if not self.ts:
            return Session(subject, trial, label, (), fps_hint)
        return Session.from_arrays(subject, trial, self.ts, self.pos, self.trk, label, fps_hint)


def _parse_jsonl(lines: Iterable[str]) -> Session:
    header = None
    builder = _FrameBuilder()
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as e:
            raise MalformedRecord(lineno, f"invalid JSON ({e.msg})") from None
        if not isinstance(obj, dict):
            raise MalformedRecord(lineno, "record is not an object")
        if header is None:
            for key in ("subject", "trial"):
                if not isinstance(obj.get(key), str):
                    raise MalformedRecord(lineno, f"header field {key!r} missing or not a string")
            fps = obj.get("fps_hint")
            header = (
                obj["subject"],
                obj["trial"],
                _label_from_text(obj.get("label"), lineno),
                None if fps is None else _number(fps, lineno, "fps_hint"),
            )
            continue
        t, joints, trk = obj.get("t"), obj.get("j"), obj.get("trk")
        if isinstance(t, bool) or not isinstance(t, int) or t < 0:
            raise MalformedRecord(lineno, "'t' must be a non-negative integer")
        if not isinstance(joints, list) or not isinstance(trk, list):
            raise MalformedRecord(lineno, "'j' and 'trk' must be arrays")
        pts = []
        for k, p in enumerate(joints):
            if not isinstance(p, list) or len(p) != 3:
                raise MalformedRecord(lineno, f"joint {k} is not an [x, y, z] triple")
            pts.append([_number(c, lineno, f"joint {k} coordinate") for c in p])
        if not all(isinstance(b, bool) for b in trk):
            raise MalformedRecord(lineno, "'trk' entries must be booleans")
        builder.add(lineno, t, pts, trk)
    if header is None:
        raise MalformedRecord(1, "missing header record")
    return builder.build(*header)


def _csv_columns() -> list[str]:
    cols = ["t"]
    for k in range(N_JOINTS):
        cols += [f"j{k}x", f"j{k}y", f"j{k}z", f"trk{k}"]
    return cols


def _parse_csv(lines: Iterable[str]) -> Session:
    rows = csv.reader(lines)
    meta_keys = meta_vals = None
    builder = _FrameBuilder()
    columns = _csv_columns()
    seen_columns = False
    lineno = 0
    for lineno, row in enumerate(rows, start=1):
        if not row:
            continue
        if lineno <= 2:
            if not row[0].startswith("#"):
                raise MalformedRecord(lineno, "expected '#' metadata line")
            row = [row[0][1:]] + row[1:]
            if lineno == 1:
                meta_keys = row
            else:
                meta_vals = row
            continue
        if not seen_columns:
            if row != columns:
                raise MalformedRecord(lineno, "unexpected column header")
            seen_columns = True
            continue
        if len(row) != len(columns):
            n = (len(row) - 1) // 4
            raise WrongJointCount(f"line {lineno}: expected {N_JOINTS} joints, got {n}")
        try:
            t = int(row[0])
            vals = [float(v) for v in row[1:]]
        except ValueError:
            raise MalformedRecord(lineno, "non-numeric field") from None
        if t < 0:
            raise MalformedRecord(lineno, "'t' must be a non-negative integer")
        if not all(math.isfinite(v) for v in vals):
            raise MalformedRecord(lineno, "non-finite coordinate")
        pts = [vals[4 * k: 4 * k + 3] for k in range(N_JOINTS)]
        flags = []
        for k in range(N_JOINTS):
            f = row[1 + 4 * k + 3]
            if f not in ("0", "1"):
                raise MalformedRecord(lineno, f"trk{k} must be 0 or 1")
            flags.append(f == "1")
        builder.add(lineno, t, pts, flags)
    if meta_keys is None or meta_vals is None:
        raise MalformedRecord(max(lineno, 1), "missing metadata lines")
    if len(meta_keys) != len(meta_vals):
        raise MalformedRecord(2, "metadata values do not match metadata keys")
    meta = dict(zip(meta_keys, meta_vals))
    if "subject" not in meta or "trial" not in meta:
        raise MalformedRecord(1, "metadata must name subject and trial")
    fps = meta.get("fps_hint")
    try:
        fps = None if fps in (None, "") else float(fps)
    except ValueError:
        raise MalformedRecord(2, "fps_hint is not a number") from None
    return builder.build(meta["subject"], meta["trial"], _label_from_text(meta.get("label"), 2), fps)


def parse_session(source: TextIO | str, format: str = "jsonl") -> Session:
    """Parse a session from a text stream (or a string holding file content)."""
    _check_format(format)
    if isinstance(source, str):
        source = io.StringIO(source)
    if format == "jsonl":
        return _parse_jsonl(source)
    return _parse_csv(source)


def write_session(session: Session, format: str = "jsonl") -> str:
    _check_format(format)
    out = io.StringIO()
    if format == "jsonl":
        header = {"subject": session.subject_id, "trial": session.trial_id}
        if session.label is not Label.UNLABELED:
            header["label"] = session.label.value
        header["fps_hint"] = session.fps_hint
        out.write(json.dumps(header) + "\n")
        for f in session.frames:
            rec = {"t": f.timestamp, "j": f.positions.tolist(), "trk": f.tracked.tolist()}
            out.write(json.dumps(rec, separators=(",", ":")) + "\n")
        return out.getvalue()

    writer = csv.writer(out, lineterminator="\n")
    keys, vals = ["subject", "trial"], [session.subject_id, session.trial_id]
    if session.label is not Label.UNLABELED:
        keys.append("label")
        vals.append(session.label.value)
    if session.fps_hint is not None:
        keys.append("fps_hint")
        vals.append(repr(float(session.fps_hint)))
    writer.writerow(["#" + keys[0]] + keys[1:])
    writer.writerow(["#" + vals[0]] + vals[1:])
    writer.writerow(_csv_columns())
    for f in session.frames:
        row = [str(f.timestamp)]
        for p, ok in zip(f.positions.tolist(), f.tracked.tolist()):
            row += [repr(p[0]), repr(p[1]), repr(p[2]), "1" if ok else "0"]
        writer.writerow(row)
    return out.getvalue()


def format_for_path(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix in (".jsonl", ".json"):
        return "jsonl"
    raise ValueError(f"cannot infer session format from {path}")


def read_session(path: str | Path) -> Session:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_session(fh, format_for_path(path))


def save_session(session: Session, path: str | Path) -> None:
    Path(path).write_text(write_session(session, format_for_path(path)), encoding="utf-8")


def find_session_files(paths: Sequence[str | Path]) -> list[Path]:
    """Expand directories into the session files they contain (sorted)."""
    found = []
    for p in map(Path, paths):
        if p.is_dir():
            found += sorted(
                q for q in p.rglob("*")
                if q.is_file() and q.suffix in (".jsonl", ".csv")
            )
        else:
            found.append(p)
    return found


def load_sessions(paths: Sequence[str | Path]) -> list[Session]:
    return [read_session(p) for p in find_session_files(paths)]


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    session: str | None = None


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> list[str]:
        return [v.kind for v in self.violations]


def validate_dataset(sessions: Sequence[Session]) -> ValidationReport:
    """Collect every data problem that would block LOSO evaluation."""
    report = ValidationReport()
    for s in sessions:
        key = s.key
        if not s.frames:
            report.violations.append(Violation("EmptySession", "session has no frames", key))
        for i, f in enumerate(s.frames):
            if f.positions.shape != (N_JOINTS, 3) or f.tracked.shape != (N_JOINTS,):
                report.violations.append(
                    Violation("WrongJointCount", f"frame {i} has {f.n_joints} joints", key)
                )
        ts = [f.timestamp for f in s.frames]
        if any(t < 0 for t in ts):
            report.violations.append(Violation("MalformedRecord", "negative timestamp", key))
        if any(b <= a for a, b in zip(ts, ts[1:])):
            report.violations.append(
                Violation("NonMonotonicTimestamp", "timestamps not strictly increasing", key)
            )
        if s.label is Label.UNLABELED:
            report.violations.append(Violation("Unlabeled", "session has no risk label", key))
    if len({s.subject_id for s in sessions}) < 2:
        report.violations.append(Violation("TooFewSubjects", "LOSO requires ≥2 subjects"))
    return report
