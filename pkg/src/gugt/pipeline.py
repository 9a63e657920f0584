"""Per-session extraction: preprocessing, segmentation, gait and anatomical features."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DataError
from .features import (
    AnatomicalSeries,
    GaitFeatures,
    StepEvents,
    anatomical_features,
    detect_steps,
    gait_features,
    heel_depth_difference,
)
from .preprocess import FilterParams, preprocess_session
from .segmentation import PhaseSegmentation, SegmentationParams, segment_phases
from .skeleton_io import Label, Session


@dataclass(frozen=True)
class SessionAnalysis:
    session: Session  # preprocessed
    segmentation: PhaseSegmentation
    steps: StepEvents
    gait: GaitFeatures
    anatomy: AnatomicalSeries


def analyze_session(
    session: Session,
    filter_params: FilterParams = FilterParams(),
    seg_params: SegmentationParams = SegmentationParams(),
) -> SessionAnalysis:
    clean = preprocess_session(session, filter_params)
    seg = segment_phases(clean, seg_params)
    steps = detect_steps(heel_depth_difference(clean), seg.walking, seg_params)
    gait = gait_features(seg, steps, clean)
    return SessionAnalysis(clean, seg, steps, gait, anatomical_features(clean))


@dataclass(frozen=True)
class SessionFeatures:
    """What the classifier needs from one session.  ``error`` is set (and
    ``gait`` is None) when extraction failed."""

    key: str
    subject_id: str
    label: Label
    gait: GaitFeatures | None
    anatomy: AnatomicalSeries | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def extract_features(
    session: Session,
    filter_params: FilterParams = FilterParams(),
    seg_params: SegmentationParams = SegmentationParams(),
) -> SessionFeatures:
    try:
        a = analyze_session(session, filter_params, seg_params)
    except DataError as exc:
        return SessionFeatures(session.key, session.subject_id, session.label, None, None,
                               f"{type(exc).__name__}: {exc}")
    if len(a.anatomy) == 0:
        return SessionFeatures(session.key, session.subject_id, session.label, a.gait, a.anatomy,
                               "EmptyStream: no frame with all anatomical joints tracked")
    return SessionFeatures(session.key, session.subject_id, session.label, a.gait, a.anatomy)
