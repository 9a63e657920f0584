"""Kinematic generator of synthetic Get-Up-and-Go trials with exact ground truth.

Script of one trial (times in seconds)::

    seated lead | stand up | walk out | turn | walk back | sit down | seated tail

* Hip depth sits on a plateau at the chair distance, moves toward the sensor
  during stand-up and the walk (linear with a small gait bounce), dips a
  few centimetres during the turn and mirrors that on the way back.
* The right-minus-left ankle depth difference is a half-sine per step,
  ``stride/2 * sin(pi * (t - t_walk) / step_duration)``, so the zero
  crossings fall exactly on the scripted step boundaries.  A walk with N
  steps therefore lasts ``(N + 1) * step_duration``: N crossings separate
  N + 1 half-cycles.
* The torso yaws from 0 (facing the sensor) to pi during the turn, which makes
  the horizontal elbow separation collapse.  The shoulders lead the turn: the
  first and last ``TURN_SNAP_S`` seconds carry ``TURN_SNAP_RAD`` of yaw each,
  so the separation drops as soon as the turn starts instead of lagging it.
* The legs keep their own heading (the walking direction) and only flip it
  when the turn completes; the feet stay level in depth while pivoting.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .errors import InvalidProfile
from .skeleton_io import N_JOINTS, Joint, Label, LabeledDataset, Session

TURN_SNAP_S = 0.1
TURN_SNAP_RAD = 1.2
TURN_HIP_DIP_M = 0.05
SEAT_HIP_HEIGHT_M = 0.45
SEAT_FOOT_FORWARD_M = 0.45
ANKLE_HEIGHT_M = 0.08
STANDING_KNEE_RAD = 3.0
ELBOW_HEIGHT_M = 0.25


@dataclass(frozen=True)
class GaitProfile:
    chair_distance_m: float = 3.5
    walk_distance_m: float = 2.0
    seated_lead_s: float = 2.0
    seated_tail_s: float = 2.0
    step_count_oneway: int = 8
    step_duration_s: float = 0.6
    stride_m: float | None = None  # defaults to walk_distance_m / step_count_oneway
    turn_duration_s: float = 1.5
    shoulder_width_m: float = 0.4
    sway_amp_m: float = 0.02
    noise_std_m: float = 0.0
    fps: float = 30.0
    stand_duration_s: float = 0.4
    stand_forward_m: float = 0.3
    hip_height_m: float = 0.9
    stance_width_m: float = 0.2
    knee_flexion_rad: float = 0.4
    dropout_prob: float = 0.0

    def __post_init__(self):
        if self.stride_m is None and self.step_count_oneway > 0:
            object.__setattr__(self, "stride_m", self.walk_distance_m / self.step_count_oneway)
        self.validate()

    def validate(self) -> None:
        positive = (
            "chair_distance_m", "walk_distance_m", "seated_lead_s", "seated_tail_s",
            "step_duration_s", "turn_duration_s", "shoulder_width_m", "fps",
            "stand_duration_s", "hip_height_m",
        )
        for name in positive:
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidProfile(f"{name} must be positive, got {v!r}")
        for name in ("sway_amp_m", "noise_std_m", "stand_forward_m", "stance_width_m", "knee_flexion_rad"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise InvalidProfile(f"{name} must be >= 0, got {v!r}")
        if not 0 <= self.dropout_prob < 1:
            raise InvalidProfile("dropout_prob must be in [0, 1)")
        n = self.step_count_oneway
        if isinstance(n, bool) or not isinstance(n, int) or n < 0:
            raise InvalidProfile(f"step_count_oneway must be a non-negative integer, got {n!r}")
        if n > 0:
            if not self.stride_m > 0:
                raise InvalidProfile("stride_m must be positive")
            if abs(n * self.stride_m - self.walk_distance_m) > 0.1 * self.walk_distance_m:
                raise InvalidProfile("step_count_oneway * stride_m must match walk_distance_m within 10%")
            if self.turn_duration_s <= 2 * TURN_SNAP_S:
                raise InvalidProfile(f"turn_duration_s must exceed {2 * TURN_SNAP_S} s")
        if self.chair_distance_m - self.stand_forward_m - self.walk_distance_m - TURN_HIP_DIP_M <= 0.5:
            raise InvalidProfile("walk would take the subject within 0.5 m of the sensor")

    # script boundaries (seconds)
    def script(self) -> dict:
        L, N = self.seated_lead_s, self.step_count_oneway
        if N == 0:
            return {"seated_lead": (0.0, L), "seated_tail": (L, L + self.seated_tail_s)}
        walk = (N + 1) * self.step_duration_s
        t_walk = L + self.stand_duration_s
        t_turn = t_walk + walk
        t_back = t_turn + self.turn_duration_s
        t_sit = t_back + walk + self.stand_duration_s
        return {
            "seated_lead": (0.0, L),
            "stand_up": (L, t_walk),
            "walk_out": (t_walk, t_turn),
            "turn": (t_turn, t_back),
            "walk_back": (t_back, t_back + walk),
            "sit_down": (t_back + walk, t_sit),
            "seated_tail": (t_sit, t_sit + self.seated_tail_s),
        }

    @property
    def total_duration_s(self) -> float:
        return max(b for _, b in self.script().values())

    @property
    def n_frames(self) -> int:
        return int(round(self.total_duration_s * self.fps))


@dataclass(frozen=True)
class GroundTruth:
    fps: float
    n_frames: int
    phases: dict  # name -> inclusive (start, end) frame interval; partitions [0, n)
    crossing_frames: tuple
    crossing_times_s: tuple
    step_durations_s: tuple
    turn_duration_s: float
    step_count: int

    def to_json(self) -> str:
        d = asdict(self)
        d["phases"] = {k: list(v) for k, v in self.phases.items()}
        return json.dumps(d, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "GroundTruth":
        d = json.loads(text)
        d["phases"] = {k: tuple(v) for k, v in d["phases"].items()}
        for k in ("crossing_frames", "crossing_times_s", "step_durations_s"):
            d[k] = tuple(d[k])
        return cls(**d)


def _first_frame_at(t: float, fps: float) -> int:
    return int(math.ceil(t * fps - 1e-9))


def _rot(theta: np.ndarray):
    """Right and forward unit vectors for headings theta (0 = facing the sensor)."""
    c, s = np.cos(theta), np.sin(theta)
    z = np.zeros_like(theta)
    right = np.stack([c, z, -s], axis=-1)
    fwd = np.stack([-s, z, -c], axis=-1)
    return right, fwd


def _interp_segments(t, knots):
    """Piecewise-linear curve through (time, value) knots, constant outside."""
    ts, vs = zip(*knots)
    return np.interp(t, ts, vs)


def _turn_yaw(s: np.ndarray, T: float) -> np.ndarray:
    r = min(TURN_SNAP_S, T / 4)
    mid = np.pi - 2 * TURN_SNAP_RAD
    return np.where(
        s < r, TURN_SNAP_RAD * s / r,
        np.where(
            s > T - r, np.pi - TURN_SNAP_RAD * (T - s) / r,
            TURN_SNAP_RAD + mid * (s - r) / (T - 2 * r),
        ),
    )


def generate_session(
    profile: GaitProfile,
    seed: int = 0,
    subject_id: str = "S01",
    trial_id: str = "T1",
    label: Label = Label.UNLABELED,
) -> tuple[Session, GroundTruth]:
    p = profile
    p.validate()
    rng = np.random.default_rng(seed)
    fps = float(p.fps)
    n = p.n_frames
    t = np.arange(n) / fps
    timestamps = np.round(np.arange(n) * 1000.0 / fps).astype(np.int64)
    sc = p.script()
    N, d = p.step_count_oneway, p.step_duration_s
    C = p.chair_distance_m
    leg_len = (p.hip_height_m - ANKLE_HEIGHT_M) / (2 * math.sin(STANDING_KNEE_RAD / 2))

    hip = np.zeros((n, 3))
    yaw = np.zeros(n)
    leg_yaw = np.zeros(n)
    heel = np.zeros(n)  # right-minus-left ankle depth, before noise
    flex_r = np.zeros(n)
    flex_l = np.zeros(n)
    swing = np.zeros(n)
    # ankle offset in the leg frame: forward, vertical (relative to hip center)
    seat_ankle = np.array([SEAT_FOOT_FORWARD_M, -(SEAT_HIP_HEIGHT_M - ANKLE_HEIGHT_M)])
    stand_drop = -(p.hip_height_m - ANKLE_HEIGHT_M)
    ankle_fwd = np.full(n, seat_ankle[0])
    ankle_down = np.full(n, seat_ankle[1])
    hip[:, 1] = SEAT_HIP_HEIGHT_M
    hip[:, 2] = C

    crossing_times = []
    if N > 0:
        L0, L1 = sc["stand_up"]
        S0, S1 = sc["sit_down"]
        t_out0, t_turn0 = sc["walk_out"]
        t_turn1, t_back1 = sc["walk_back"]
        T = p.turn_duration_s
        D, r = p.walk_distance_m, p.stand_forward_m
        z_near = C - r - D
        walk_len = (N + 1) * d
        speed = D / walk_len
        bounce_amp = 0.2 * speed * d / (2 * np.pi)

        hip[:, 2] = _interp_segments(t, [(L0, C), (L1, C - r), (t_turn0, z_near),
                                         (t_turn1, z_near), (t_back1, C - r), (S1, C)])
        hip[:, 1] = _interp_segments(t, [(L0, SEAT_HIP_HEIGHT_M), (L1, p.hip_height_m),
                                         (S0, p.hip_height_m), (S1, SEAT_HIP_HEIGHT_M)])
        ankle_fwd = _interp_segments(t, [(L0, seat_ankle[0]), (L1, 0.0), (S0, 0.0), (S1, seat_ankle[0])])
        ankle_down = _interp_segments(t, [(L0, seat_ankle[1]), (L1, stand_drop),
                                          (S0, stand_drop), (S1, seat_ankle[1])])

        for (a, b), direction in (((t_out0, t_turn0), -1.0), ((t_turn1, t_back1), 1.0)):
            m = (t >= a) & (t <= b)
            ph = (t[m] - a) / d
            hip[m, 2] += direction * bounce_amp * np.sin(2 * np.pi * ph)
            hip[m, 1] -= 0.015 * (1 - np.cos(2 * np.pi * ph)) / 2
            hip[m, 0] = p.sway_amp_m * np.sin(np.pi * ph)
            lobe = np.sin(np.pi * ph)
            heel[m] = (p.stride_m / 2) * lobe
            flex_r[m] = p.knee_flexion_rad * np.clip(lobe, 0, None) ** 2
            flex_l[m] = p.knee_flexion_rad * np.clip(-lobe, 0, None) ** 2
            swing[m] = 0.04 * lobe
            crossing_times += [a + k * d for k in range(1, N + 1)]

        m = (t > t_turn0) & (t < t_turn1)
        s = t[m] - t_turn0
        hip[m, 2] = z_near - TURN_HIP_DIP_M * np.sin(np.pi * s / T)
        yaw[m] = _turn_yaw(s, T)
        yaw[t >= t_turn1] = np.pi
        leg_yaw[t >= t_turn1] = np.pi

    right, fwd = _rot(yaw)
    leg_right, leg_fwd = _rot(leg_yaw)
    up = np.array([0.0, 1.0, 0.0])
    pos = np.zeros((n, N_JOINTS, 3))

    def torso(lx, ly, lf):
        return hip + lx * right + ly * up + np.asarray(lf)[..., None] * fwd

    w2 = p.shoulder_width_m / 2
    pos[:, Joint.HIP_CENTER] = hip
    pos[:, Joint.SPINE] = torso(0.0, 0.2, 0.0)
    pos[:, Joint.SHOULDER_CENTER] = torso(0.0, 0.45, 0.0)
    pos[:, Joint.HEAD] = torso(0.0, 0.65, 0.0)
    pos[:, Joint.SHOULDER_RIGHT] = torso(w2, 0.45, 0.0)
    pos[:, Joint.SHOULDER_LEFT] = torso(-w2, 0.45, 0.0)
    pos[:, Joint.ELBOW_RIGHT] = torso(w2, ELBOW_HEIGHT_M, -swing)
    pos[:, Joint.ELBOW_LEFT] = torso(-w2, ELBOW_HEIGHT_M, swing)
    pos[:, Joint.WRIST_RIGHT] = torso(w2, 0.02, -1.6 * swing)
    pos[:, Joint.WRIST_LEFT] = torso(-w2, 0.02, 1.6 * swing)
    pos[:, Joint.HAND_RIGHT] = torso(w2, -0.06, -1.9 * swing)
    pos[:, Joint.HAND_LEFT] = torso(-w2, -0.06, 1.9 * swing)

    # legs: ankle depth offsets chosen so z(right) - z(left) == heel exactly
    cos_leg = np.cos(leg_yaw)
    for side, hip_j, knee_j, ankle_j, foot_j, flex, sign in (
        (1.0, Joint.HIP_RIGHT, Joint.KNEE_RIGHT, Joint.ANKLE_RIGHT, Joint.FOOT_RIGHT, flex_r, -1.0),
        (-1.0, Joint.HIP_LEFT, Joint.KNEE_LEFT, Joint.ANKLE_LEFT, Joint.FOOT_LEFT, flex_l, 1.0),
    ):
        lat = side * p.stance_width_m / 2
        H = hip + lat * leg_right
        stride_off = sign * (heel / 2) * cos_leg
        walking = heel != 0
        down = ankle_down.copy()
        # swing flexion shortens the hip-ankle distance: lift the ankle
        reach = 2 * leg_len * np.sin((STANDING_KNEE_RAD - flex) / 2)
        vert = np.sqrt(np.maximum(reach ** 2 - stride_off ** 2, 0.0))
        down[walking] = -vert[walking]
        A = H + (ankle_fwd + stride_off)[:, None] * leg_fwd + down[:, None] * up
        pos[:, hip_j] = H
        pos[:, ankle_j] = A
        pos[:, foot_j] = A + 0.1 * leg_fwd - 0.05 * up
        pos[:, knee_j] = _knee(H, A, leg_fwd, leg_len)

    # the torso frame and leg frame differ only in heading; hip joints sit on
    # the leg frame so the legs stay level through the pivot
    if p.noise_std_m > 0:
        pos = pos + rng.normal(0.0, p.noise_std_m, size=pos.shape)
    tracked = np.ones((n, N_JOINTS), dtype=bool)
    if p.dropout_prob > 0:
        tracked &= rng.random((n, N_JOINTS)) >= p.dropout_prob

    truth = _ground_truth(p, n, crossing_times)
    session = Session.from_arrays(subject_id, trial_id, timestamps, pos, tracked, label, fps_hint=fps)
    return session, truth


def _knee(H, A, fwd, seg_len):
    """Two-link knee position with equal thigh/shank lengths, bending toward
    the leg's forward direction."""
    v = A - H
    dist = np.linalg.norm(v, axis=-1, keepdims=True)
    u = v / dist
    nrm = fwd - np.sum(fwd * u, axis=-1, keepdims=True) * u
    nrm /= np.linalg.norm(nrm, axis=-1, keepdims=True)
    half = np.minimum(dist / 2, seg_len)
    h = np.sqrt(np.maximum(seg_len ** 2 - half ** 2, 0.0))
    return H + v / 2 + h * nrm


def _ground_truth(p: GaitProfile, n: int, crossing_times) -> GroundTruth:
    fps = float(p.fps)
    sc = p.script()
    f = lambda tt: min(_first_frame_at(tt, fps), n)  # noqa: E731
    if p.step_count_oneway == 0:
        phases = {"seated_lead": (0, n - 1)}
    else:
        bounds = [
            ("seated_lead", 0, f(sc["stand_up"][0])),
            ("walk_out", f(sc["stand_up"][0]), f(sc["turn"][0])),
            ("turn", f(sc["turn"][0]), f(sc["turn"][1])),
            ("walk_back", f(sc["turn"][1]), f(sc["seated_tail"][0])),
            ("seated_tail", f(sc["seated_tail"][0]), n),
        ]
        phases = {name: (a, b - 1) for name, a, b in bounds}
    frames = tuple(f(tt) for tt in crossing_times)
    N = p.step_count_oneway
    durations = tuple([p.step_duration_s] * (2 * max(N - 1, 0)))
    return GroundTruth(
        fps=fps,
        n_frames=n,
        phases=phases,
        crossing_frames=frames,
        crossing_times_s=tuple(crossing_times),
        step_durations_s=durations,
        turn_duration_s=p.turn_duration_s if N > 0 else 0.0,
        step_count=2 * N,
    )


# --------------------------------------------------------------------------
# cohorts


@dataclass(frozen=True)
class ProfileDistribution:
    """A class-level profile: per-subject uniform ranges around ``base`` plus
    per-trial relative jitter.  ``step_count_oneway`` ranges are inclusive
    integer ranges and its trial jitter is an absolute +/- step count."""

    base: GaitProfile = field(default_factory=GaitProfile)
    subject_ranges: dict = field(default_factory=dict)
    trial_jitter: dict = field(default_factory=dict)

    def __post_init__(self):
        names = {f.name for f in fields(GaitProfile)}
        for key in (*self.subject_ranges, *self.trial_jitter):
            if key not in names:
                raise InvalidProfile(f"unknown profile field {key!r}")
        for key, (lo, hi) in self.subject_ranges.items():
            if lo > hi:
                raise InvalidProfile(f"empty range for {key}")

    def draw_subject(self, rng: np.random.Generator) -> GaitProfile:
        kw = {}
        for key, (lo, hi) in self.subject_ranges.items():
            if key == "step_count_oneway":
                kw[key] = int(rng.integers(lo, hi + 1))
            else:
                kw[key] = float(rng.uniform(lo, hi))
        return _with_stride(self.base, kw)

    def draw_trial(self, subject: GaitProfile, rng: np.random.Generator) -> GaitProfile:
        kw = {}
        for key, j in self.trial_jitter.items():
            v = getattr(subject, key)
            if key == "step_count_oneway":
                kw[key] = max(1, v + int(rng.integers(-int(j), int(j) + 1)))
            else:
                kw[key] = float(v * (1 + rng.uniform(-j, j)))
        return _with_stride(subject, kw)


def _with_stride(profile: GaitProfile, kw: dict) -> GaitProfile:
    walk = kw.get("walk_distance_m", profile.walk_distance_m)
    steps = kw.get("step_count_oneway", profile.step_count_oneway)
    if "stride_m" not in kw and steps > 0:
        kw["stride_m"] = walk / steps
    return replace(profile, **kw)


def separable_cohort_profiles(noise_std_m: float = 0.005) -> tuple[ProfileDistribution, ProfileDistribution]:
    """Low- and high-risk distributions whose step counts and turn durations
    do not overlap even after trial jitter."""
    low = ProfileDistribution(
        base=GaitProfile(noise_std_m=noise_std_m, knee_flexion_rad=0.55, hip_height_m=0.92),
        subject_ranges={
            "step_count_oneway": (4, 6),
            "step_duration_s": (0.45, 0.6),
            "turn_duration_s": (1.0, 1.6),
            "shoulder_width_m": (0.38, 0.44),
            "knee_flexion_rad": (0.5, 0.6),
        },
        trial_jitter={"step_count_oneway": 1, "step_duration_s": 0.05, "turn_duration_s": 0.05},
    )
    high = ProfileDistribution(
        base=GaitProfile(noise_std_m=noise_std_m, knee_flexion_rad=0.25, hip_height_m=0.85),
        subject_ranges={
            "step_count_oneway": (10, 12),
            "step_duration_s": (0.8, 1.0),
            "turn_duration_s": (2.5, 4.0),
            "shoulder_width_m": (0.34, 0.40),
            "knee_flexion_rad": (0.2, 0.3),
        },
        trial_jitter={"step_count_oneway": 1, "step_duration_s": 0.05, "turn_duration_s": 0.05},
    )
    return low, high


def generate_cohort(
    low: ProfileDistribution,
    high: ProfileDistribution,
    n_low: int,
    n_high: int | None = None,
    trials: tuple[int, int] = (3, 6),
    seed: int = 0,
    with_truth: bool = False,
):
    """Synthetic labeled cohort.  Subjects ``S01..`` are low risk first, then
    high risk; each gets a uniform number of trials in ``trials`` (inclusive).

    Returns the dataset, or ``(dataset, truths)`` with ``with_truth=True``
    where ``truths`` maps session key to its GroundTruth.
    """
    n_high = n_low if n_high is None else n_high
    if n_low < 1 or n_high < 1:
        raise InvalidProfile("need at least one subject per class")
    lo_t, hi_t = trials
    if not 1 <= lo_t <= hi_t:
        raise InvalidProfile(f"bad trials range {trials}")
    classes = [(low, Label.LOW)] * n_low + [(high, Label.HIGH)] * n_high
    children = np.random.SeedSequence(seed).spawn(len(classes))
    sessions, truths = [], {}
    for idx, ((dist, label), ss) in enumerate(zip(classes, children), start=1):
        rng = np.random.default_rng(ss)
        subject = dist.draw_subject(rng)
        sid = f"S{idx:02d}"
        for k in range(int(rng.integers(lo_t, hi_t + 1))):
            trial = dist.draw_trial(subject, rng)
            sess, gt = generate_session(
                trial, seed=int(rng.integers(2**31)), subject_id=sid, trial_id=f"T{k + 1}", label=label
            )
            sessions.append(sess)
            truths[sess.key] = gt
    ds = LabeledDataset(sessions)
    return (ds, truths) if with_truth else ds


def exact_recovery_grid(
    step_counts=(4, 8, 12),
    step_durations=(0.4, 0.6, 0.9),
    turn_durations=(1.0, 2.0, 4.0),
    **overrides,
) -> list[GaitProfile]:
    """Noise-free profile grid used to check extraction against ground truth."""
    return [
        GaitProfile(step_count_oneway=n, step_duration_s=sd, turn_duration_s=td, **overrides)
        for n in step_counts for sd in step_durations for td in turn_durations
    ]
