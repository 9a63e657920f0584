from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyTrainingSet


@dataclass(frozen=True, eq=False)
class Scaler:
    """Per-dimension z-score transform."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=np.float64))
        object.__setattr__(self, "std", np.asarray(self.std, dtype=np.float64))

    @property
    def dim(self) -> int:
        return len(self.mean)

    @classmethod
    def identity(cls, dim: int) -> "Scaler":
        return cls(np.zeros(dim), np.ones(dim))

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Scaler":
        return cls(d["mean"], d["std"])

    def __eq__(self, other):
        return (
            isinstance(other, Scaler)
            and np.array_equal(self.mean, other.mean)
            and np.array_equal(self.std, other.std)
        )


def standardize_fit(X) -> Scaler:
    """Column means and population standard deviations; zero-variance
    columns get std 1 so they map to 0 instead of dividing by zero."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[0] == 0:
        raise EmptyTrainingSet("cannot fit a scaler on zero rows")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0] = 1.0
    return Scaler(mean, std)


def standardize_apply(scaler: Scaler, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != scaler.dim:
        raise DimensionMismatch(f"expected {scaler.dim} dimensions, got {x.shape[-1]}")
    return (x - scaler.mean) / scaler.std
