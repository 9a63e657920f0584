"""Leave-one-subject-out evaluation of the bag-of-words + SVM classifier.

Per fold the scaler, codebook and SVM are fit on the training subjects'
sessions only; every fitted object is logged with the sample keys it saw so
subject leakage can be audited afterwards.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .classifier import SvmParams, decision_function, svm_train, tune_svm
from .encoding import bow_histogram, build_feature_vector, fit_codebook
from .errors import FoldError, GugtError, NonConvergence, TooFewSubjects
from .pipeline import extract_features
from .preprocess import FilterParams
from .segmentation import SegmentationParams
from .skeleton_io import Label, LabeledDataset, Session

CLASSES = (Label.LOW, Label.HIGH)


@dataclass(frozen=True)
class LosoFold:
    held_out_subject: str
    train: tuple
    test: tuple

    def __post_init__(self):
        assert all(s.subject_id != self.held_out_subject for s in self.train)
        assert all(s.subject_id == self.held_out_subject for s in self.test)


def loso_split(dataset: LabeledDataset) -> list[LosoFold]:
    subjects = sorted({s.subject_id for s in dataset.sessions})
    if len(subjects) < 2:
        raise TooFewSubjects("LOSO requires >=2 subjects")
    return [
        LosoFold(
            subj,
            tuple(s for s in dataset.sessions if s.subject_id != subj),
            tuple(s for s in dataset.sessions if s.subject_id == subj),
        )
        for subj in subjects
    ]


class ConfusionMatrix:
    """2x2 matrix, rows = true label, columns = predicted, order [LOW, HIGH]."""

    def __init__(self, counts=None):
        self.counts = np.zeros((2, 2)) if counts is None else np.asarray(counts, dtype=np.float64)
        if self.counts.shape != (2, 2):
            raise ValueError("confusion matrix must be 2x2")

    def add(self, true: Label, pred: Label) -> None:
        self.counts[CLASSES.index(true), CLASSES.index(pred)] += 1

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return accuracy_from_confusion(self.counts)

    def tolist(self) -> list:
        return self.counts.tolist()

    def __repr__(self):
        return f"ConfusionMatrix({self.tolist()})"


def accuracy_from_confusion(counts) -> float:
    """Fraction on the diagonal: trace / total."""
    c = np.asarray(counts, dtype=np.float64)
    return float(np.trace(c) / c.sum())


@dataclass(frozen=True)
class AuditEntry:
    repetition: int
    held_out_subject: str
    fitted: str  # "codebook", "svm", ...
    sample_keys: tuple

    def leaks(self) -> bool:
        return any(k.split("/", 1)[0] == self.held_out_subject for k in self.sample_keys)


@dataclass
class AuditLog:
    entries: list = field(default_factory=list)
    tested: list = field(default_factory=list)  # (repetition, key)

    def record(self, rep, subject, fitted, keys):
        self.entries.append(AuditEntry(rep, subject, fitted, tuple(keys)))

    def violations(self) -> list:
        return [e for e in self.entries if e.leaks()]

    def to_dict(self) -> dict:
        return {
            "fitted": [asdict(e) for e in self.entries],
            "tested": [list(t) for t in self.tested],
            "violations": [asdict(e) for e in self.violations()],
        }


@dataclass(frozen=True)
class Prediction:
    key: str
    subject: str
    true: Label
    predicted: Label
    decision: float | None
    flag: str | None = None  # extraction failure recorded as a miss


@dataclass
class LosoResult:
    accuracy: float
    confusion: ConfusionMatrix
    predictions: list
    audit: AuditLog

    def __iter__(self):  # allows ``acc, cm = run_loso(...)``
        return iter((self.accuracy, self.confusion))


def extract_all(
    sessions,
    filter_params: FilterParams = FilterParams(),
    seg_params: SegmentationParams = SegmentationParams(),
) -> dict:
    """Session key -> SessionFeatures.  Extraction does not depend on the
    labels or the fold, so it runs once per dataset."""
    return {s.key: extract_features(s, filter_params, seg_params) for s in sessions}


def fold_seed(seed: int, fold_index: int) -> int:
    return int(np.random.SeedSequence([seed, fold_index]).generate_state(1)[0])


def _other(label: Label) -> Label:
    return Label.HIGH if label is Label.LOW else Label.LOW


def _run_fold(fold, feats, K, svm, seed, rep, audit, tune):
    train = [s for s in fold.train if feats[s.key].ok]
    audit.record(rep, fold.held_out_subject, "excluded_train",
                 [s.key for s in fold.train if not feats[s.key].ok])
    frames = np.concatenate([feats[s.key].anatomy.values for s in train])
    codebook = fit_codebook(frames, K, seed)
    audit.record(rep, fold.held_out_subject, "codebook", [s.key for s in train])

    def vec(s):
        f = feats[s.key]
        return build_feature_vector(f.gait, bow_histogram(codebook, f.anatomy.values)).values

    X = np.array([vec(s) for s in train])
    y = np.array([s.label.sign for s in train], dtype=float)
    params = svm
    if tune:
        params = tune_svm(X, y, [s.subject_id for s in train], base=svm)
        audit.record(rep, fold.held_out_subject, "svm_tuning", [s.key for s in train])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergence)
        model = svm_train(X, y, params)
    audit.record(rep, fold.held_out_subject, "svm", [s.key for s in train])

    out = []
    for s in fold.test:
        audit.tested.append((rep, s.key))
        f = feats[s.key]
        if not f.ok:
            out.append(Prediction(s.key, s.subject_id, s.label, _other(s.label), None, f.error))
            continue
        d = float(decision_function(model, vec(s))[0])
        out.append(Prediction(s.key, s.subject_id, s.label, Label.from_sign(d), d))
    return out


def run_loso(
    dataset: LabeledDataset,
    K: int = 10,
    svm: SvmParams = SvmParams(),
    seed: int = 0,
    features: dict | None = None,
    tune: bool = False,
    repetition: int = 0,
    audit: AuditLog | None = None,
) -> LosoResult:
    feats = features if features is not None else extract_all(dataset.sessions)
    audit = audit if audit is not None else AuditLog()
    cm = ConfusionMatrix()
    preds = []
    for i, fold in enumerate(loso_split(dataset)):
        try:
            fold_preds = _run_fold(fold, feats, K, svm, fold_seed(seed, i), repetition, audit, tune)
        except GugtError as exc:
            raise FoldError(fold.held_out_subject, exc) from exc
        for p in fold_preds:
            cm.add(p.true, p.predicted)
        preds += fold_preds
    return LosoResult(cm.accuracy, cm, preds, audit)


@dataclass
class EvalReport:
    config: dict
    per_repetition: list  # dicts: seed, accuracy, confusion
    mean_accuracy: float
    std_accuracy: float
    mean_confusion: list
    audit: AuditLog
    flagged: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "mean_confusion": self.mean_confusion,
            "per_repetition": self.per_repetition,
            "flagged": self.flagged,
            "audit": self.audit.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def repeat_evaluation(
    dataset: LabeledDataset,
    K: int = 10,
    svm: SvmParams = SvmParams(),
    n_reps: int = 10,
    base_seed: int = 0,
    features: dict | None = None,
    tune: bool = False,
) -> EvalReport:
    """LOSO repeated with seeds base_seed .. base_seed + n_reps - 1 (fresh
    k-means initializations each time); population std over repetitions."""
    if n_reps < 1:
        raise ValueError("n_reps must be >= 1")
    feats = features if features is not None else extract_all(dataset.sessions)
    audit = AuditLog()
    reps, accs, mats, flagged = [], [], [], []
    for r in range(n_reps):
        seed = base_seed + r
        res = run_loso(dataset, K, svm, seed, feats, tune, repetition=r, audit=audit)
        accs.append(res.accuracy)
        mats.append(res.confusion.counts)
        reps.append({"seed": seed, "accuracy": res.accuracy, "confusion": res.confusion.tolist()})
        flagged += [{"repetition": r, "key": p.key, "flag": p.flag} for p in res.predictions if p.flag]
    config = {
        "K": K,
        "svm": asdict(svm),
        "tune": tune,
        "n_reps": n_reps,
        "base_seed": base_seed,
        "seeds": [base_seed + r for r in range(n_reps)],
        "n_sessions": len(dataset),
        "subjects": dataset.subjects,
    }
    return EvalReport(
        config=config,
        per_repetition=reps,
        mean_accuracy=float(np.mean(accs)),
        std_accuracy=float(np.std(accs)),
        mean_confusion=np.mean(mats, axis=0).tolist(),
        audit=audit,
        flagged=flagged,
    )


@dataclass
class SweepResult:
    rows: list  # (K, mean_acc, std_acc)
    best_k: int

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["K", "mean_acc", "std_acc"])
        for k, m, s in self.rows:
            w.writerow([k, repr(m), repr(s)])
        return out.getvalue()


def sweep_clusters(
    dataset: LabeledDataset,
    K_range=range(4, 25),
    svm: SvmParams = SvmParams(),
    n_reps: int = 10,
    seed: int = 0,
    features: dict | None = None,
) -> SweepResult:
    """Mean/std LOSO accuracy per codebook size; best_k is the smallest K
    attaining the highest mean."""
    feats = features if features is not None else extract_all(dataset.sessions)
    rows = []
    for K in K_range:
        rep = repeat_evaluation(dataset, K, svm, n_reps, seed, feats)
        rows.append((int(K), rep.mean_accuracy, rep.std_accuracy))
    if not rows:
        raise ValueError("empty K range")
    best = max(rows, key=lambda r: (r[1], -r[0]))[0]
    return SweepResult(rows, best)


def permuted_labels(dataset: LabeledDataset, seed: int = 0) -> LabeledDataset:
    """Same sessions with the label multiset randomly permuted across them."""
    rng = np.random.default_rng(seed)
    labels = [s.label for s in dataset.sessions]
    order = rng.permutation(len(labels))
    return LabeledDataset(
        [_relabel(s, labels[j]) for s, j in zip(dataset.sessions, order)]
    )


def _relabel(s: Session, label: Label) -> Session:
    return Session(s.subject_id, s.trial_id, label, s.frames, s.fps_hint)
