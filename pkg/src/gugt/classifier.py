"""Soft-margin C-SVM with an RBF kernel, trained by sequential minimal
optimization (pairwise dual updates with analytic clipping)."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, InvalidParameter, NonConvergence, SingleClassTraining
from .skeleton_io import Label
from .standardize import Scaler, standardize_apply, standardize_fit

__all__ = [
    "SvmParams", "SvmModel", "rbf_kernel", "rbf_matrix", "svm_train", "svm_predict",
    "decision_function", "dual_objective", "kkt_residuals", "tune_svm",
    "standardize_fit", "standardize_apply",
]


@dataclass(frozen=True)
class SvmParams:
    C: float = 1.0
    gamma: float | None = None  # None: 1 / (dim * mean feature variance)
    kkt_tol: float = 1e-3
    max_passes: int = 1000

    def __post_init__(self):
        if not self.C > 0:
            raise InvalidParameter(f"C must be > 0, got {self.C!r}")
        if self.gamma is not None and not self.gamma > 0:
            raise InvalidParameter(f"gamma must be > 0, got {self.gamma!r}")
        if not self.kkt_tol > 0:
            raise InvalidParameter("kkt_tol must be > 0")
        if not (isinstance(self.max_passes, int) and self.max_passes >= 1):
            raise InvalidParameter("max_passes must be a positive integer")


def rbf_kernel(a, b, gamma: float) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    d = a - b
    return float(np.exp(-gamma * np.dot(d, d)))


def rbf_matrix(A, B, gamma: float) -> np.ndarray:
    A = np.atleast_2d(A)
    B = np.atleast_2d(B)
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"{A.shape[1]} vs {B.shape[1]} dimensions")
    diff = A[:, None, :] - B[None, :, :]
    return np.exp(-gamma * np.einsum("ijk,ijk->ij", diff, diff))


def default_gamma(Xs: np.ndarray) -> float:
    var = float(np.mean(Xs.var(axis=0)))
    dim = Xs.shape[1]
    return 1.0 / (dim * var) if var > 0 else 1.0 / dim


@dataclass(frozen=True, eq=False)
class SvmModel:
    support_vectors: np.ndarray  # in standardized space
    alpha_y: np.ndarray
    bias: float
    params: SvmParams  # gamma resolved
    scaler: Scaler
    # training diagnostics, not serialized
    converged: bool = True
    n_iter: int = 0
    kkt_gap: float = 0.0
    train_alpha: np.ndarray | None = field(default=None, repr=False)

    @property
    def alphas(self) -> np.ndarray:
        return np.abs(self.alpha_y)

    @property
    def labels(self) -> np.ndarray:
        return np.sign(self.alpha_y)

    @property
    def dim(self) -> int:
        return self.scaler.dim

    def to_json(self) -> str:
        return json.dumps({
            "C": self.params.C,
            "gamma": self.params.gamma,
            "kkt_tol": self.params.kkt_tol,
            "max_passes": self.params.max_passes,
            "bias": self.bias,
            "scaler": self.scaler.to_dict(),
            "sv": self.support_vectors.tolist(),
            "alpha_y": self.alpha_y.tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "SvmModel":
        d = json.loads(text)
        params = SvmParams(d["C"], d["gamma"], d.get("kkt_tol", 1e-3), d.get("max_passes", 1000))
        scaler = Scaler.from_dict(d["scaler"])
        sv = np.asarray(d["sv"], dtype=np.float64).reshape(-1, scaler.dim)
        return cls(sv, np.asarray(d["alpha_y"], dtype=np.float64), float(d["bias"]), params, scaler)


def dual_objective(alpha, K, y) -> float:
    """Dual objective sum(alpha) - 1/2 (alpha*y)' K (alpha*y), to be maximized."""
    ay = np.asarray(alpha) * np.asarray(y)
    return float(np.sum(alpha) - 0.5 * ay @ np.asarray(K) @ ay)


def svm_train(X, y, params: SvmParams = SvmParams(), standardize: bool = True) -> SvmModel:
    """Train on rows of X with labels y in {-1, +1}.

    Features are standardized with statistics of X (unless disabled).  When
    the pair budget ``max_passes * n`` runs out before the KKT gap drops
    below ``kkt_tol`` a NonConvergence warning is issued and the model is
    still returned (``converged=False``).
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    if len(X) != len(y):
        raise DimensionMismatch("X and y lengths differ")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if not ((y > 0).any() and (y < 0).any()):
        raise SingleClassTraining("training data contains one class only")
    scaler = standardize_fit(X) if standardize else Scaler.identity(X.shape[1])
    Xs = np.ascontiguousarray(standardize_apply(scaler, X))
    if params.gamma is None:
        params = replace(params, gamma=default_gamma(Xs))
    K = np.ascontiguousarray(rbf_matrix(Xs, Xs, params.gamma))
    alpha, bias, n_iter, gap = _kernels.smo_solve(
        K, np.ascontiguousarray(y), params.C, params.kkt_tol, params.max_passes * len(y)
    )
    alpha = np.asarray(alpha)
    converged = gap < params.kkt_tol
    if not converged:
        res = _residuals(alpha, K, y, bias, params.C)
        warnings.warn(NonConvergence(
            f"SMO stopped after {n_iter} updates with KKT gap {gap:.3g}; "
            f"{int(np.sum(res > params.kkt_tol))} points violate KKT"
        ), stacklevel=2)
    sv = alpha > 0
    return SvmModel(
        support_vectors=Xs[sv].copy(),
        alpha_y=(alpha * y)[sv],
        bias=float(bias),
        params=params,
        scaler=scaler,
        converged=bool(converged),
        n_iter=int(n_iter),
        kkt_gap=float(gap),
        train_alpha=alpha,
    )


def decision_function(model: SvmModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Xs = standardize_apply(model.scaler, X)
    return rbf_matrix(Xs, model.support_vectors, model.params.gamma) @ model.alpha_y + model.bias


def svm_predict(model: SvmModel, x) -> tuple[Label, float]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or len(x) != model.dim:
        raise DimensionMismatch(f"expected a {model.dim}-vector, got shape {x.shape}")
    f = float(decision_function(model, x)[0])
    return Label.from_sign(f), f


def _residuals(alpha, K, y, bias, C) -> np.ndarray:
    yf = y * (K @ (alpha * y) + bias)
    at_zero = alpha <= 0
    at_c = alpha >= C
    free = ~(at_zero | at_c)
    r = np.zeros_like(yf)
    r[at_zero] = np.maximum(0.0, 1.0 - yf[at_zero])
    r[at_c] = np.maximum(0.0, yf[at_c] - 1.0)
    r[free] = np.abs(yf[free] - 1.0)
    return r


def kkt_residuals(model: SvmModel, X, y) -> np.ndarray:
    """Per-training-point KKT violation of a model trained on (X, y)."""
    Xs = standardize_apply(model.scaler, np.atleast_2d(X))
    K = rbf_matrix(Xs, Xs, model.params.gamma)
    return _residuals(model.train_alpha, K, np.asarray(y, float), model.bias, model.params.C)


def tune_svm(
    X,
    y,
    groups,
    base: SvmParams = SvmParams(),
    C_grid=(0.1, 1.0, 10.0, 100.0),
    gamma_factors=(0.01, 0.1, 1.0, 10.0),
) -> SvmParams:
    """Pick (C, gamma) by leave-one-group-out accuracy inside the given
    training data only.  Gamma candidates are multiples of the default gamma
    of the standardized training data.  Ties keep the earlier grid entry."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    groups = np.asarray(groups)
    g0 = default_gamma(standardize_apply(standardize_fit(X), X))
    best, best_acc = None, -1.0
    for C in C_grid:
        for f in gamma_factors:
            params = replace(base, C=C, gamma=g0 * f)
            correct = total = 0
            for g in np.unique(groups):
                tr, te = groups != g, groups == g
                if len(np.unique(y[tr])) < 2:
                    continue
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", NonConvergence)
                    m = svm_train(X[tr], y[tr], params)
                pred = np.where(decision_function(m, X[te]) >= 0, 1.0, -1.0)
                correct += int(np.sum(pred == y[te]))
                total += int(te.sum())
            acc = correct / total if total else 0.0
            if acc > best_acc:
                best, best_acc = params, acc
    return best
