"""Cross-validation protocols, confusion-matrix metrics and evaluation reports.

Every fold trains a fresh ``TemplateActionClassifier`` on its training
split only; samples are tagged ``provenance="train"``/``"test"`` so the
training-only stages can assert that nothing leaked. Repeats reseed the
forest and (for k-fold and hold-out) reshuffle the subject partition.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .config import PROTOCOL_KINDS, PipelineConfig
from .estimators import TemplateActionClassifier
from .exceptions import InsufficientSubjects, NonSquareMatrix, TrajwarpError

REPORT_SCHEMA = "trajwarp.eval-report/1"


class FoldError(TrajwarpError):
    """A pipeline error raised inside one fold, with the fold attached."""

    def __init__(self, repeat, fold, cause):
        self.repeat, self.fold, self.cause = repeat, fold, cause
        super().__init__(f"repeat {repeat}, fold {fold}: {type(cause).__name__}: {cause}")


@dataclass(frozen=True)
class Protocol:
    kind: str = "losubo"
    folds: int = 2
    repeats: int = 10
    train_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.kind not in PROTOCOL_KINDS:
            raise ValueError(f"protocol kind must be one of {PROTOCOL_KINDS}, got {self.kind!r}")

    @classmethod
    def from_config(cls, cfg: PipelineConfig) -> "Protocol":
        p = cfg.protocol
        return cls(p.kind, p.folds, p.repeats, p.train_fraction, cfg.seed)

    def to_dict(self):
        return {"kind": self.kind, "folds": self.folds, "repeats": self.repeats,
                "train_fraction": self.train_fraction, "seed": self.seed}


def repeat_seed(seed: int, repeat: int) -> int:
    return int(np.random.SeedSequence([seed, repeat]).generate_state(1)[0])


def make_folds(subjects, protocol: Protocol, repeat: int = 0) -> list[np.ndarray]:
    """Boolean test masks, one per fold, over samples with the given subject ids.

    Subject-based protocols never put one subject on both sides.
    """
    subjects = np.asarray(subjects)
    unique = np.unique(subjects)
    rng = np.random.default_rng(np.random.SeedSequence([protocol.seed, repeat, 1]))
    if protocol.kind == "loseqo":
        if len(subjects) < 2:
            raise InsufficientSubjects("leave-one-sequence-out needs at least 2 samples")
        return [np.arange(len(subjects)) == i for i in range(len(subjects))]
    if protocol.kind == "losubo":
        if len(unique) < 2:
            raise InsufficientSubjects(f"LOSubO needs at least 2 subjects, got {len(unique)}")
        return [subjects == s for s in unique]
    if protocol.kind == "kfold":
        if len(unique) < protocol.folds:
            raise InsufficientSubjects(f"{protocol.folds}-fold cross-subject needs at least "
                                       f"{protocol.folds} subjects, got {len(unique)}")
        groups = np.array_split(rng.permutation(unique), protocol.folds)
        return [np.isin(subjects, g) for g in groups]
    # holdout
    if len(unique) < 2:
        raise InsufficientSubjects(f"hold-out needs at least 2 subjects, got {len(unique)}")
    n_train = int(np.clip(round(protocol.train_fraction * len(unique)), 1, len(unique) - 1))
    test = rng.permutation(unique)[n_train:]
    return [np.isin(subjects, test)]


def confusion_matrix(y_true, y_pred, classes) -> np.ndarray:
    index = {c: i for i, c in enumerate(classes)}
    cm = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        cm[index[t], index[p]] += 1
    return cm


def metrics(cm) -> dict:
    """Per-class precision/recall and macro averages of a confusion matrix.

    Rows are true classes, columns predictions. A zero denominator yields 0
    and is listed under ``precision_undefined``/``recall_undefined``.
    """
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise NonSquareMatrix(f"confusion matrix must be square, got shape {cm.shape}")
    if np.any(cm < 0):
        raise ValueError("confusion matrix entries must be non-negative")
    diag = np.diag(cm).astype(float)
    col, row = cm.sum(axis=0).astype(float), cm.sum(axis=1).astype(float)
    precision = np.divide(diag, col, out=np.zeros_like(diag), where=col > 0)
    recall = np.divide(diag, row, out=np.zeros_like(diag), where=row > 0)
    total = cm.sum()
    return {
        "precision": precision.tolist(),
        "recall": recall.tolist(),
        "precision_undefined": np.flatnonzero(col == 0).tolist(),
        "recall_undefined": np.flatnonzero(row == 0).tolist(),
        "macro_precision": float(precision.mean()) if len(diag) else 0.0,
        "macro_recall": float(recall.mean()) if len(diag) else 0.0,
        "accuracy": float(diag.sum() / total) if total else 0.0,
    }


@dataclass
class FoldResult:
    repeat: int
    fold: int
    test_subjects: list
    y_true: list
    y_pred: list
    wavelet: dict

    @property
    def accuracy(self) -> float:
        return float(np.mean(np.asarray(self.y_true) == np.asarray(self.y_pred)))

    def to_dict(self):
        return {"repeat": self.repeat, "fold": self.fold, "test_subjects": self.test_subjects,
                "n_test": len(self.y_true), "accuracy": self.accuracy, "wavelet": self.wavelet}


@dataclass
class EvalReport:
    classes: list
    protocol: dict
    folds: list
    class_names: list | None = None
    config: dict = field(default_factory=dict)

    def repeat_confusions(self) -> list[np.ndarray]:
        n_rep = max(f.repeat for f in self.folds) + 1
        out = [np.zeros((len(self.classes),) * 2, dtype=np.int64) for _ in range(n_rep)]
        for f in self.folds:
            out[f.repeat] += confusion_matrix(f.y_true, f.y_pred, self.classes)
        return out

    @property
    def confusion(self) -> np.ndarray:
        """Summed over repeats; each repeat's own matrix is in ``repeat_confusions``."""
        return np.sum(self.repeat_confusions(), axis=0)

    def summary(self) -> dict:
        """Metrics of each repeat, averaged over repeats with equal weight."""
        per = [metrics(cm) for cm in self.repeat_confusions()]
        out = {}
        for key in ("accuracy", "macro_precision", "macro_recall"):
            vals = np.array([m[key] for m in per])
            out[key] = float(vals.mean())
            out[key + "_std"] = float(vals.std())
        for key in ("precision", "recall"):
            out[key] = np.mean([m[key] for m in per], axis=0).tolist()
        out["precision_undefined"] = sorted({i for m in per for i in m["precision_undefined"]})
        out["recall_undefined"] = sorted({i for m in per for i in m["recall_undefined"]})
        out["mean_fold_accuracy"] = float(np.mean([f.accuracy for f in self.folds]))
        return out

    @property
    def accuracy(self) -> float:
        return self.summary()["accuracy"]

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "classes": [int(c) for c in self.classes],
            "class_names": self.class_names,
            "protocol": self.protocol,
            **self.summary(),
            "confusion": self.confusion.tolist(),
            "repeat_confusions": [cm.tolist() for cm in self.repeat_confusions()],
            "folds": [f.to_dict() for f in self.folds],
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def table(self) -> str:
        s = self.summary()
        names = self.class_names or [str(c) for c in self.classes]
        width = max(9, *(len(n) for n in names))
        lines = [f"{'class':<{width}}  precision  recall"]
        for i, n in enumerate(names):
            flag = "*" if i in s["precision_undefined"] else " "
            lines.append(f"{n:<{width}}  {s['precision'][i]:9.3f}{flag} {s['recall'][i]:6.3f}")
        lines.append(f"{'macro':<{width}}  {s['macro_precision']:9.3f}  {s['macro_recall']:6.3f}")
        lines.append(f"accuracy {s['accuracy']:.4f} (std {s['accuracy_std']:.4f} over "
                     f"{len(self.repeat_confusions())} repeats, {len(self.folds)} folds)")
        if s["precision_undefined"]:
            lines.append("* class never predicted; precision reported as 0")
        lines.append("confusion (rows = true, columns = predicted, summed over repeats):")
        cm = self.confusion
        cw = max(4, len(str(cm.max())) + 1)
        lines.append(" " * width + "".join(f"{str(c):>{cw}}" for c in self.classes))
        for n, row in zip(names, cm):
            lines.append(f"{n:<{width}}" + "".join(f"{v:>{cw}}" for v in row))
        return "\n".join(lines) + "\n"


def _tag(seq, provenance):
    return seq.replace(provenance=provenance)


def run_fold(train, test, params, repeat, fold) -> FoldResult:
    try:
        clf = TemplateActionClassifier(**params).fit([_tag(s, "train") for s in train])
        pred = clf.predict([_tag(s, "test") for s in test])
    except TrajwarpError as exc:
        raise FoldError(repeat, fold, exc) from exc
    return FoldResult(repeat, fold, sorted({int(s.subject_id) for s in test}),
                      [int(s.class_label) for s in test], [int(p) for p in pred],
                      clf.wavelet_spec_.to_dict())


def run_protocol(sequences, config: PipelineConfig | None = None, protocol: Protocol | None = None,
                 dataset_format: str | None = None, skeleton=None, class_names=None) -> EvalReport:
    """Evaluate the full pipeline on ``sequences`` under ``protocol``.

    Folds run in parallel with ``config.jobs`` workers; the result does not
    depend on the worker count.
    """
    config = config or PipelineConfig()
    protocol = protocol or Protocol.from_config(config)
    sequences = list(sequences)
    subjects = [s.subject_id for s in sequences]
    classes = sorted({int(s.class_label) for s in sequences})
    tasks = []
    for r in range(protocol.repeats):
        params = config.classifier_params(dataset_format, skeleton)
        params.update(random_state=repeat_seed(protocol.seed, r), n_jobs=None)
        for f, mask in enumerate(make_folds(subjects, protocol, r)):
            train = [s for s, m in zip(sequences, mask) if not m]
            test = [s for s, m in zip(sequences, mask) if m]
            tasks.append((train, test, params, r, f))
    folds = Parallel(n_jobs=config.jobs)(delayed(run_fold)(*t) for t in tasks)
    # class_names lists every dataset class by label; keep the ones present here
    names = [str(class_names[c - 1]) for c in classes] if class_names else None
    return EvalReport(classes, protocol.to_dict(), list(folds), names, config.to_dict())


@dataclass
class GroupedReport:
    """One report per group (e.g. CAD-60 environment) and their plain average."""

    reports: dict

    def summary(self) -> dict:
        keys = ("accuracy", "macro_precision", "macro_recall")
        per = {g: r.summary() for g, r in self.reports.items()}
        return {k: float(np.mean([p[k] for p in per.values()])) for k in keys}

    def to_dict(self) -> dict:
        return {"schema": REPORT_SCHEMA, "groups": {g: r.to_dict() for g, r in self.reports.items()},
                "average": self.summary()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def table(self) -> str:
        out = []
        for g, r in self.reports.items():
            out.append(f"== {g} ==\n{r.table()}")
        s = self.summary()
        out.append(f"average over {len(self.reports)} groups: precision {s['macro_precision']:.3f} "
                   f"recall {s['macro_recall']:.3f} accuracy {s['accuracy']:.4f}\n")
        return "\n".join(out)


def run_grouped(sequences, config=None, protocol=None, **kwargs) -> GroupedReport:
    """``run_protocol`` on each group of samples separately (per-environment evaluation)."""
    groups = sorted({s.group for s in sequences if s.group is not None})
    if not groups:
        raise ValueError("no sample carries a group")
    return GroupedReport({g: run_protocol([s for s in sequences if s.group == g], config,
                                          protocol, **kwargs) for g in groups})
