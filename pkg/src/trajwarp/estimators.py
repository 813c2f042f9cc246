"""scikit-learn compatible wrappers around each pipeline stage.

Inputs are lists of ``RawSequence`` or ``TrajectorySample`` objects rather
than arrays, since sub-signal lengths vary between samples. The stages can
be used on their own; ``TemplateActionClassifier`` chains all of them,
including the training-set mirroring and wavelet tuning that a plain
``sklearn.pipeline.Pipeline`` cannot express.
"""
from __future__ import annotations

import warnings

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import RawSequence, TrajectorySample, align_sequence, mirror_sample, to_trajectory_sample
from .exceptions import DimensionMismatch, InsufficientSubjects
from .filtering import FilterParams, smooth_sample
from .forest import RandomDecisionForest
from .skeletons import get_skeleton
from .templates import build_templates, build_templates_mirrored, warp_to_templates
from .validation import check_labels, check_no_test_samples, check_same_k, check_samples
from .wavelets import WaveletSpec, feature_layout, feature_matrix, tune_wavelet, warn_short, wavelet_grid


class TrajectoryPreprocessor(TransformerMixin, BaseEstimator):
    """Person-centric alignment, object padding and smoothing.

    ``fit`` only resolves the skeleton (from the joint count when not given)
    and the object budget (largest object count seen when not given).
    Samples that are already ``TrajectorySample`` pass through untouched.
    """

    def __init__(self, skeleton=None, max_objects=None, median_window=5,
                 savgol_window=11, savgol_order=3):
        self.skeleton = skeleton
        self.max_objects = max_objects
        self.median_window = median_window
        self.savgol_window = savgol_window
        self.savgol_order = savgol_order

    def fit(self, X, y=None):
        X = check_samples(X)
        raw = [s for s in X if isinstance(s, RawSequence)]
        if raw:
            joint_counts = {s.n_joints for s in raw}
            if len(joint_counts) != 1:
                raise DimensionMismatch(f"sequences disagree on joint count: {sorted(joint_counts)}")
            self.skeleton_ = get_skeleton(self.skeleton, joint_counts.pop())
            seen = max(s.objects.shape[1] for s in raw)
        else:
            self.skeleton_ = get_skeleton(self.skeleton) if self.skeleton is not None else None
            seen = 0
        self.max_objects_ = seen if self.max_objects is None else int(self.max_objects)
        self.filter_params_ = FilterParams(self.median_window, self.savgol_window, self.savgol_order)
        return self

    def _one(self, s):
        if isinstance(s, TrajectorySample):
            return s
        aligned = align_sequence(s, self.skeleton_.reference)
        return smooth_sample(to_trajectory_sample(aligned, self.max_objects_), self.filter_params_)

    def transform(self, X):
        check_is_fitted(self, "filter_params_")
        X = check_samples(X)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return [self._one(s) for s in X]


class TemplateWarper(TransformerMixin, BaseEstimator):
    """Learns one template per class (two with ``mirror``) and warps samples onto all of them."""

    def __init__(self, mirror=False, symmetry=None, dtw_window=None, n_jobs=None):
        self.mirror = mirror
        self.symmetry = symmetry
        self.dtw_window = dtw_window
        self.n_jobs = n_jobs

    def _symmetry(self, samples):
        if self.symmetry is not None:
            return self.symmetry
        return get_skeleton(None, samples[0].n_joints).symmetry

    def fit(self, X, y=None):
        X = check_samples(X, kinds=TrajectorySample)
        check_no_test_samples(X, "template construction")
        y = check_labels(X, y)
        self.K_ = check_same_k(X)
        if self.mirror:
            self.symmetry_ = self._symmetry(X)
            self.templates_, self.mean_samples_, _, _ = build_templates_mirrored(
                X, self.symmetry_, list(y), self.dtw_window, self.n_jobs)
        else:
            self.templates_, self.mean_samples_ = build_templates(X, list(y), self.dtw_window, self.n_jobs)
        self.classes_ = np.unique(y)
        return self

    def augment(self, X, y=None):
        """Training set as seen by the classifier: originals, then mirrors when enabled."""
        check_is_fitted(self, "templates_")
        X = list(X)
        y = check_labels(X, y)
        if not self.mirror:
            return X, y
        return X + [mirror_sample(s, self.symmetry_) for s in X], np.concatenate([y, y])

    def transform(self, X):
        check_is_fitted(self, "templates_")
        X = check_samples(X, kinds=TrajectorySample)
        if any(s.K != self.K_ for s in X):
            raise DimensionMismatch(f"templates have K={self.K_}")
        return Parallel(n_jobs=self.n_jobs)(
            delayed(warp_to_templates)(s, self.templates_, self.dtw_window) for s in X)

    @property
    def template_lengths_(self):
        return [t.lengths for t in self.templates_]


class WaveletFeaturizer(TransformerMixin, BaseEstimator):
    """Flattens warped sample sets into fixed-length wavelet coefficient vectors."""

    def __init__(self, family="daubechies", order=None, levels=1):
        self.family = family
        self.order = order
        self.levels = levels

    def fit(self, X, y=None):
        X = list(X)
        self.spec_ = WaveletSpec(self.family, self.order, self.levels)
        self.template_lengths_ = [s.lengths for s in X[0].warped]
        self.layout_ = feature_layout(self.template_lengths_, self.spec_)
        self.n_features_out_ = int(sum(map(sum, self.layout_)))
        warn_short(self.template_lengths_, self.spec_)
        return self

    def transform(self, X):
        check_is_fitted(self, "spec_")
        X = list(X)
        for w in X:
            if [s.lengths for s in w.warped] != self.template_lengths_:
                raise DimensionMismatch("warped set does not match the fitted template shapes")
        return feature_matrix(X, self.spec_) if X else np.empty((0, self.n_features_out_))


class TemplateActionClassifier(ClassifierMixin, BaseEstimator):
    """Template-warping action recogniser.

    Samples are aligned and smoothed, warped onto one DTW-averaged template
    per class, described by multilevel wavelet coefficients and classified
    by a random decision forest. With ``mirror=True`` the training set is
    doubled with mirrored copies and each class gets a second template
    built from the mirrors.

    With ``autotune=True`` the wavelet family and level count are picked on
    the training data (two subject groups scored against each other);
    ``wavelet_family``/``wavelet_levels`` are then only the fallback used
    when there are fewer than two training subjects.
    """

    def __init__(self, skeleton=None, max_objects=None, median_window=5, savgol_window=11,
                 savgol_order=3, mirror=False, dtw_window=None, wavelet_family="daubechies",
                 wavelet_order=None, wavelet_levels=1, autotune=True, n_trees=500,
                 features_per_split="sqrt", max_depth=None, min_samples_leaf=1,
                 random_state=0, n_jobs=None):
        self.skeleton = skeleton
        self.max_objects = max_objects
        self.median_window = median_window
        self.savgol_window = savgol_window
        self.savgol_order = savgol_order
        self.mirror = mirror
        self.dtw_window = dtw_window
        self.wavelet_family = wavelet_family
        self.wavelet_order = wavelet_order
        self.wavelet_levels = wavelet_levels
        self.autotune = autotune
        self.n_trees = n_trees
        self.features_per_split = features_per_split
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _make_forest(self):
        return RandomDecisionForest(
            n_trees=self.n_trees, features_per_split=self.features_per_split,
            max_depth=self.max_depth, min_samples_leaf=self.min_samples_leaf,
            random_state=self.random_state, n_jobs=self.n_jobs)

    def fit(self, X, y=None):
        X = check_samples(X)
        check_no_test_samples(X)
        y = check_labels(X, y)
        self.preprocessor_ = TrajectoryPreprocessor(
            self.skeleton, self.max_objects, self.median_window, self.savgol_window,
            self.savgol_order).fit(X)
        samples = self.preprocessor_.transform(X)
        symmetry = self.preprocessor_.skeleton_.symmetry if self.preprocessor_.skeleton_ else None
        self.warper_ = TemplateWarper(self.mirror, symmetry, self.dtw_window, self.n_jobs).fit(samples, y)
        train, y_train = self.warper_.augment(samples, y)
        warped = self.warper_.transform(train)

        default = WaveletSpec(self.wavelet_family, self.wavelet_order, self.wavelet_levels)
        self.tuning_scores_ = []
        self.wavelet_spec_ = default
        if self.autotune:
            orders = {self.wavelet_family: self.wavelet_order} if self.wavelet_order else None
            try:
                self.wavelet_spec_, self.tuning_scores_ = tune_wavelet(
                    warped, y_train, [s.subject_id for s in train], self._make_forest,
                    grid=wavelet_grid(orders), seed=self.random_state or 0)
            except InsufficientSubjects:
                warnings.warn("fewer than two training subjects; using the configured wavelet",
                              RuntimeWarning, stacklevel=2)
        spec = self.wavelet_spec_
        self.featurizer_ = WaveletFeaturizer(spec.family, spec.order, spec.levels).fit(warped)
        features = self.featurizer_.transform(warped)
        self.forest_ = self._make_forest().fit(features, y_train)
        self.classes_ = self.forest_.classes_
        return self

    def features(self, X) -> np.ndarray:
        check_is_fitted(self, "forest_")
        samples = self.preprocessor_.transform(check_samples(X))
        return self.featurizer_.transform(self.warper_.transform(samples))

    def predict_proba(self, X) -> np.ndarray:
        return self.forest_.predict_proba(self.features(X))

    def predict(self, X) -> np.ndarray:
        return self.forest_.predict(self.features(X))
