"""Per-class mean-samples, action templates, and warping to all templates."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed

from .core import SymmetryMap, TrajectorySample, mirror_sample
from .dtw import pairwise_dtw, warp
from .exceptions import DimensionMismatch, EmptyClass


@dataclass
class MeanSample:
    sub_signals: list
    source_sample_index: list
    class_label: int = 0

    @property
    def K(self):
        return len(self.sub_signals)

    @property
    def lengths(self):
        return tuple(len(x) for x in self.sub_signals)


@dataclass
class ActionTemplate:
    sub_signals: list
    class_label: int = 0
    # "original" or "mirrored"
    variant: str = "original"

    @property
    def K(self):
        return len(self.sub_signals)

    @property
    def lengths(self):
        return tuple(len(x) for x in self.sub_signals)


@dataclass
class WarpedSampleSet:
    """One sample warped onto each template, in template order."""

    warped: list = field(default_factory=list)

    def __len__(self):
        return len(self.warped)

    def __getitem__(self, i):
        return self.warped[i]


def _check_class(samples):
    if len(samples) == 0:
        raise EmptyClass("cannot build a class model from zero samples")
    K = samples[0].K
    if any(s.K != K for s in samples):
        raise DimensionMismatch("all samples of a class must share K")
    return K


def _best_index(signals, window):
    totals = pairwise_dtw(signals, window).sum(axis=1)
    return int(np.argmin(totals))


def mean_sample(samples: Sequence[TrajectorySample], window: int | None = None,
                n_jobs: int | None = None) -> MeanSample:
    """Pick, for each k independently, the sub-signal with the smallest
    summed DTW distance to the k-th sub-signals of the other samples.

    Ties go to the earliest sample. The chosen sub-signals can come from
    different samples and so differ in length.
    """
    K = _check_class(samples)
    picks = Parallel(n_jobs=n_jobs)(
        delayed(_best_index)([s.sub_signals[k] for s in samples], window) for k in range(K)
    )
    return MeanSample(
        sub_signals=[samples[j].sub_signals[k] for k, j in enumerate(picks)],
        source_sample_index=list(picks),
        class_label=samples[0].class_label,
    )


def build_template(samples: Sequence[TrajectorySample], mean: MeanSample,
                   window: int | None = None, n_jobs: int | None = None) -> ActionTemplate:
    """Warp every training sample to the mean-sample and average index-wise."""
    K = _check_class(samples)
    if mean.K != K:
        raise DimensionMismatch(f"mean-sample has K={mean.K}, samples have K={K}")
    warped = Parallel(n_jobs=n_jobs)(delayed(warp)(s, mean, window) for s in samples)
    # mean taken relative to the first sample: exact when all samples agree
    signals = []
    for k in range(K):
        stack = np.stack([w.sub_signals[k] for w in warped])
        signals.append(stack[0] + np.mean(stack - stack[0], axis=0))
    return ActionTemplate(signals, class_label=mean.class_label)


def class_template(samples, window=None, n_jobs=None) -> tuple[ActionTemplate, MeanSample]:
    mean = mean_sample(samples, window, n_jobs)
    return build_template(samples, mean, window, n_jobs), mean


def group_by_class(samples, labels=None):
    labels = [s.class_label for s in samples] if labels is None else list(labels)
    classes = sorted(set(labels))
    return classes, {c: [s for s, y in zip(samples, labels) if y == c] for c in classes}


def build_templates(samples, labels=None, window=None, n_jobs=None):
    """One template per class, ordered by class label."""
    classes, groups = group_by_class(samples, labels)
    templates, means = [], []
    for c in classes:
        t, m = class_template(groups[c], window, n_jobs)
        t.class_label = m.class_label = c
        templates.append(t)
        means.append(m)
    return templates, means


def build_templates_mirrored(samples, symmetry: SymmetryMap, labels=None, window=None, n_jobs=None):
    """Two templates per class: one from the samples, one from their mirrors.

    Returned order is (original class 1..C, mirrored class 1..C), together
    with the doubled training set (originals followed by mirrors) and its
    labels.
    """
    labels = [s.class_label for s in samples] if labels is None else list(labels)
    mirrored = [mirror_sample(s, symmetry) for s in samples]
    orig_t, orig_m = build_templates(samples, labels, window, n_jobs)
    mirr_t, mirr_m = build_templates(mirrored, labels, window, n_jobs)
    for t in mirr_t:
        t.variant = "mirrored"
    return orig_t + mirr_t, orig_m + mirr_m, list(samples) + mirrored, labels + labels


def warp_to_templates(s: TrajectorySample, templates: Sequence[ActionTemplate],
                      window: int | None = None) -> WarpedSampleSet:
    for t in templates:
        if t.K != s.K:
            raise DimensionMismatch(f"sample has K={s.K}, template has K={t.K}")
    return WarpedSampleSet([warp(s, t, window) for t in templates])
