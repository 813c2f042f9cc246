"""Multilevel discrete wavelet decomposition and feature-vector assembly.

Filter taps come from PyWavelets; the analysis cascade itself is done here
so that the boundary rule and early stopping are under our control. Each
stage extends the input by half-point symmetric reflection of ``F - 1``
samples per side, convolves with the low/high-pass decomposition filters
and keeps every second output, giving ``(L + F - 1) // 2`` coefficients
for an input of length ``L`` and filter length ``F``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import pywt
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import InsufficientSubjects, LeakageError, SignalTooShort

FAMILIES = ("daubechies", "coiflet", "symlet")
_PREFIX = {"daubechies": "db", "coiflet": "coif", "symlet": "sym"}
DEFAULT_ORDERS = {"daubechies": 4, "coiflet": 2, "symlet": 4}
LEVEL_GRID = (1, 3, 5)


@dataclass(frozen=True)
class WaveletSpec:
    family: str = "daubechies"
    order: int | None = None
    levels: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.order is None:
            object.__setattr__(self, "order", DEFAULT_ORDERS[self.family])
        if self.order < 1 or self.levels < 1:
            raise ValueError("order and levels must be positive")
        pywt.Wavelet(self.name)  # rejects orders the family does not define

    @property
    def name(self) -> str:
        return f"{_PREFIX[self.family]}{self.order}"

    @property
    def filter_length(self) -> int:
        return _filters(self.name)[0].shape[0]

    def to_dict(self):
        return {"family": self.family, "order": self.order, "levels": self.levels}


@lru_cache(maxsize=None)
def _filters(name):
    w = pywt.Wavelet(name)
    return np.asarray(w.dec_lo), np.asarray(w.dec_hi)


@lru_cache(maxsize=None)
def _rec_filters(name):
    w = pywt.Wavelet(name)
    return np.asarray(w.rec_lo), np.asarray(w.rec_hi)


def dwt_stage(x: np.ndarray, name: str):
    """One analysis stage along the last axis (leading axes are batched)."""
    lo, hi = _filters(name)
    F = lo.shape[0]
    n_out = (x.shape[-1] + F - 1) // 2
    pad = [(0, 0)] * (x.ndim - 1) + [(F - 1, F - 1)]
    ext = np.pad(x, pad, mode="symmetric")
    # output i of the full convolution at F + 2i sees ext[2i + 1 : 2i + 1 + F] reversed
    win = sliding_window_view(ext, F, axis=-1)[..., 1:2 * n_out:2, :]
    return win @ lo[::-1], win @ hi[::-1]


def wavedec(x, spec: WaveletSpec, strict: bool = True) -> list[np.ndarray]:
    """Return ``[A_L, D_L, ..., D_1]`` for ``L = spec.levels``.

    A stage needs an input at least as long as the filter. With
    ``strict=False`` the cascade stops early instead of raising, and the
    levels it could not compute come back as empty detail arrays, so the
    output always has ``levels + 1`` entries. A 2-D input is treated as a
    batch of rows.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 2:
        raise SignalTooShort("wavelet decomposition needs at least 2 samples")
    F = spec.filter_length
    details = []
    approx = x
    for level in range(spec.levels):
        if approx.shape[-1] < F:
            if strict:
                raise SignalTooShort(f"level {level + 1} input has {approx.shape[-1]} samples, "
                                     f"filter {spec.name} needs {F}")
            break
        approx, d = dwt_stage(approx, spec.name)
        details.append(d)
    missing = [np.empty(x.shape[:-1] + (0,))] * (spec.levels - len(details))
    return [approx] + missing + details[::-1]


def idwt_stage(approx, detail, name: str) -> np.ndarray:
    """Inverse of ``dwt_stage``; returns ``2 N - F + 2`` samples for N coefficients."""
    lo, hi = _rec_filters(name)
    F = lo.shape[0]
    N = len(approx)
    up_a, up_d = np.zeros(2 * N), np.zeros(2 * N)
    up_a[::2], up_d[::2] = approx, detail
    full = np.convolve(up_a, lo) + np.convolve(up_d, hi)
    return full[F - 2:F - 2 + 2 * N - F + 2]


def waverec(coeffs, spec: WaveletSpec, length: int | None = None) -> np.ndarray:
    """Synthesis cascade for ``wavedec`` output (empty detail levels are skipped).

    Each stage may return one extra sample; it is trimmed to the length of
    the next finer detail array, and the result to ``length`` when given.
    """
    approx = np.asarray(coeffs[0], dtype=float)
    details = [np.asarray(d, dtype=float) for d in coeffs[1:] if len(d)]
    for i, d in enumerate(details):
        approx = idwt_stage(approx[:len(d)], d, spec.name)
        if i + 1 < len(details):
            approx = approx[:len(details[i + 1])]
    return approx if length is None else approx[:length]


def coefficient_lengths(length: int, spec: WaveletSpec) -> list[int]:
    """Lengths of the ``wavedec(strict=False)`` output for a signal of ``length``."""
    F = spec.filter_length
    details = []
    n = length
    for _ in range(spec.levels):
        if n < F:
            break
        n = (n + F - 1) // 2
        details.append(n)
    return [n] + [0] * (spec.levels - len(details)) + details[::-1]


def _sets(warped_set):
    return warped_set.warped if hasattr(warped_set, "warped") else warped_set


def feature_vector(warped_set, spec: WaveletSpec) -> np.ndarray:
    """Concatenate coefficients in (template, sub-signal, array, index) order."""
    parts = []
    for sample in _sets(warped_set):
        for x in sample.sub_signals:
            parts.extend(wavedec(x, spec, strict=False))
    return np.concatenate(parts)


def feature_matrix(warped_sets, spec: WaveletSpec) -> np.ndarray:
    """Row-stacked ``feature_vector`` of many sets, batched per sub-signal.

    All sets must share template shapes (true for sets warped onto the
    same templates); the result equals stacking ``feature_vector`` rows.
    """
    sets = [list(_sets(w)) for w in warped_sets]
    if not sets:
        return np.empty((0, 0))
    blocks = []
    for t in range(len(sets[0])):
        for k in range(sets[0][t].K):
            batch = np.stack([w[t].sub_signals[k] for w in sets])
            blocks.extend(wavedec(batch, spec, strict=False))
    return np.concatenate(blocks, axis=1)


def feature_layout(template_lengths, spec: WaveletSpec) -> list[list[int]]:
    """Per-template, per-k block sizes; a pure function of template shapes."""
    return [[sum(coefficient_lengths(L, spec)) for L in lengths] for lengths in template_lengths]


def short_templates(template_lengths, spec: WaveletSpec) -> list[tuple[int, int, int]]:
    """(template, k, length) triples whose decomposition stops early."""
    F = spec.filter_length
    out = []
    for t, lengths in enumerate(template_lengths):
        for k, L in enumerate(lengths):
            n = L
            for _ in range(spec.levels):
                if n < F:
                    out.append((t, k, L))
                    break
                n = (n + F - 1) // 2
    return out


def warn_short(template_lengths, spec: WaveletSpec):
    short = short_templates(template_lengths, spec)
    if short:
        warnings.warn(f"{len(short)} template sub-signals too short for {spec.levels} "
                      f"levels of {spec.name}; decomposition stops early", RuntimeWarning,
                      stacklevel=3)


def wavelet_grid(orders=None):
    """Tuning grid in tie-break order: fewer levels first, then family order."""
    orders = {**DEFAULT_ORDERS, **(orders or {})}
    return [WaveletSpec(f, orders[f], lv) for lv in LEVEL_GRID for f in FAMILIES]


def split_subjects(subjects, seed=0):
    """Deterministically split the distinct subject ids into two halves."""
    unique = np.unique(np.asarray(subjects))
    if len(unique) < 2:
        raise InsufficientSubjects(f"need at least 2 subjects to tune, got {len(unique)}")
    perm = np.random.default_rng(seed).permutation(unique)
    half = (len(perm) + 1) // 2
    return set(perm[:half].tolist()), set(perm[half:].tolist())


def tune_wavelet(warped_sets, labels, subjects, make_classifier, grid=None, seed=0):
    """Grid-search wavelet family and level count on the training data only.

    Subjects are split into two groups; for every grid cell a classifier is
    trained on one group and scored on the other, in both directions, and
    the two accuracies averaged. Returns the best spec and a list of
    ``(spec, accuracy)`` rows. Ties go to the earlier grid cell.
    """
    for w in warped_sets:
        if any(s.provenance == "test" for s in w.warped):
            raise LeakageError("test-fold sample passed to wavelet tuning")
    labels = np.asarray(labels)
    subjects = np.asarray(subjects)
    g1, _ = split_subjects(subjects, seed)
    in_g1 = np.isin(subjects, list(g1))
    grid = wavelet_grid() if grid is None else list(grid)
    scores = []
    for spec in grid:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            X = feature_matrix(warped_sets, spec)
            accs = []
            for train, test in ((in_g1, ~in_g1), (~in_g1, in_g1)):
                clf = make_classifier().fit(X[train], labels[train])
                accs.append(float(np.mean(clf.predict(X[test]) == labels[test])))
        scores.append((spec, float(np.mean(accs))))
    best = max(range(len(scores)), key=lambda i: (scores[i][1], -i))
    return scores[best][0], scores
