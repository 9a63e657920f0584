"""Joint-trajectory cleanup: gap repair, then a running median per coordinate."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import EmptySession, InvalidParameter
from .skeleton_io import N_JOINTS, Session


@dataclass(frozen=True)
class FilterParams:
    window: int = 5
    max_gap_frames: int = 5

    def __post_init__(self):
        if not isinstance(self.window, int) or self.window < 1 or self.window % 2 == 0:
            raise InvalidParameter(f"window must be an odd positive integer, got {self.window!r}")
        if not isinstance(self.max_gap_frames, int) or self.max_gap_frames < 0:
            raise InvalidParameter(f"max_gap_frames must be >= 0, got {self.max_gap_frames!r}")


def median_filter(values, window: int = 5) -> np.ndarray:
    """Centered running median along axis 0 with symmetric edge shrink.

    Near the ends the window narrows to ``2*i + 1`` samples so it stays
    inside the data; the very first and last samples pass through unchanged.
    """
    a = np.asarray(values, dtype=np.float64)
    shape = a.shape
    if a.size == 0:
        return a.copy()
    flat = np.ascontiguousarray(a.reshape(shape[0], -1))
    return np.asarray(_kernels.median_filter_shrink(flat, window)).reshape(shape)


def median_filter_session(session: Session, params: FilterParams = FilterParams()) -> Session:
    if len(session) == 0:
        raise EmptySession(f"session {session.key} has no frames")
    if params.window == 1:
        return session
    return session.replace(positions=median_filter(session.positions, params.window))


def _runs(mask: np.ndarray):
    """(start, stop) pairs of the True runs in a 1-d boolean mask."""
    padded = np.concatenate(([False], mask, [False])).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    return list(zip(edges[::2], edges[1::2]))


def fill_gaps(session: Session, params: FilterParams = FilterParams()) -> Session:
    """Linearly interpolate short interior tracking dropouts.

    Interpolation is in time (timestamps), per coordinate, between the two
    tracked frames bracketing the gap.  Leading/trailing gaps and gaps longer
    than ``max_gap_frames`` stay untracked.
    """
    if len(session) == 0:
        return session
    pos = np.array(session.positions)
    trk = np.array(session.tracked)
    t = session.timestamps.astype(np.float64)
    n = len(t)
    changed = False
    for k in range(N_JOINTS):
        for start, stop in _runs(~trk[:, k]):
            if start == 0 or stop == n or stop - start > params.max_gap_frames:
                continue
            lo, hi = start - 1, stop
            w = (t[start:stop] - t[lo]) / (t[hi] - t[lo])
            pos[start:stop, k] = pos[lo, k] + w[:, None] * (pos[hi, k] - pos[lo, k])
            trk[start:stop, k] = True
            changed = True
    if not changed:
        return session
    return session.replace(positions=pos, tracked=trk)


def preprocess_session(session: Session, params: FilterParams = FilterParams()) -> Session:
    """Gap repair followed by median filtering."""
    return median_filter_session(fill_gaps(session, params), params)
