"""Template-warping human action recognition from 3-D joint and object trajectories.

The pipeline aligns each sample to person-centric coordinates, smooths it,
builds one DTW-averaged template per class, warps every sample onto every
template, describes the warped signals by multilevel wavelet coefficients
and classifies them with a random decision forest.
"""
__version__ = "0.1.0"

from .core import (Frame, OrientationReference, RawSequence, SymmetryMap, TrajectorySample,
                   align_frame, align_sequence, mirror_sample, mirror_sequence,
                   to_trajectory_sample)
from .dtw import DtwResult, WarpingPath, dtw, dtw_distance, warp, warp_signal
from .estimators import (TemplateActionClassifier, TemplateWarper, TrajectoryPreprocessor,
                         WaveletFeaturizer)
from .filtering import FilterParams, median_filter, savgol_filter
from .forest import ForestParams, RandomDecisionForest, train_forest
from .templates import ActionTemplate, MeanSample, build_template, mean_sample
from .wavelets import WaveletSpec, wavedec

__all__ = [
    "Frame", "OrientationReference", "RawSequence", "SymmetryMap", "TrajectorySample",
    "align_frame", "align_sequence", "mirror_sample", "mirror_sequence", "to_trajectory_sample",
    "DtwResult", "WarpingPath", "dtw", "dtw_distance", "warp", "warp_signal",
    "TemplateActionClassifier", "TemplateWarper", "TrajectoryPreprocessor", "WaveletFeaturizer",
    "FilterParams", "median_filter", "savgol_filter",
    "ForestParams", "RandomDecisionForest", "train_forest",
    "ActionTemplate", "MeanSample", "build_template", "mean_sample",
    "WaveletSpec", "wavedec",
]
