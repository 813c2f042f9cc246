"""Input checks shared by the estimators."""
from __future__ import annotations

import numpy as np

from .core import RawSequence, TrajectorySample
from .exceptions import DimensionMismatch, LeakageError


def check_samples(X, kinds=(RawSequence, TrajectorySample), allow_empty=False) -> list:
    """Coerce ``X`` to a list of samples and verify their types."""
    if isinstance(X, (RawSequence, TrajectorySample)):
        raise TypeError("expected a sequence of samples, got a single sample")
    X = list(X)
    if not X and not allow_empty:
        raise ValueError("no samples given")
    for i, s in enumerate(X):
        if not isinstance(s, kinds):
            names = " or ".join(k.__name__ for k in kinds)
            raise TypeError(f"sample {i} is {type(s).__name__}, expected {names}")
    return X


def check_labels(X, y=None) -> np.ndarray:
    """Labels from ``y`` if given, else each sample's ``class_label``."""
    if y is None:
        return np.asarray([s.class_label for s in X])
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != len(X):
        raise ValueError(f"y has shape {y.shape}, expected ({len(X)},)")
    return y


def check_same_k(samples) -> int:
    ks = {s.K for s in samples}
    if len(ks) != 1:
        raise DimensionMismatch(f"samples disagree on K: {sorted(ks)}")
    return ks.pop()


def check_no_test_samples(samples, where="training"):
    for s in samples:
        if getattr(s, "provenance", "") == "test":
            raise LeakageError(f"test-fold sample (subject {s.subject_id}, index "
                               f"{s.sample_index}) reached {where}")
