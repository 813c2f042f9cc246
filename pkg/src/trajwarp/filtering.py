"""Spike removal and smoothing of sub-signals."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import savgol_filter as _scipy_savgol

from .core import TrajectorySample
from .exceptions import InvalidWindow, SignalTooShort


@dataclass(frozen=True)
class FilterParams:
    median_window: int = 5
    savgol_window: int = 11
    savgol_order: int = 3

    def __post_init__(self):
        _check_window(self.median_window)
        _check_window(self.savgol_window)
        if not 0 <= self.savgol_order < self.savgol_window:
            raise InvalidWindow(f"savgol_order must be in [0, {self.savgol_window}), "
                                f"got {self.savgol_order}")


def _check_window(window):
    if int(window) != window or window < 1 or window % 2 == 0:
        raise InvalidWindow(f"window must be a positive odd integer, got {window!r}")


def median_filter(x, window: int) -> np.ndarray:
    """Running median; near the ends the window shrinks symmetrically.

    Index ``i`` uses half-width ``min(window // 2, i, n - 1 - i)``, so the
    window stays centred and odd-sized and the end samples are kept as is.
    """
    _check_window(window)
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("median_filter needs at least one sample")
    half = window // 2
    n = len(x)
    out = x.copy()
    if n >= window:
        out[half:n - half] = np.median(np.lib.stride_tricks.sliding_window_view(x, window), axis=1)
    for i in range(min(half, n)):
        for j in (i, n - 1 - i):
            h = min(half, j, n - 1 - j)
            out[j] = np.median(x[j - h:j + h + 1])
    return out


def savgol_filter(x, window: int, order: int) -> np.ndarray:
    """Savitzky-Golay smoothing.

    Interior points take the centre value of the least-squares polynomial
    over the window; the first and last ``window // 2`` points are read off
    the polynomial fitted to the first/last full window, so nothing is
    padded.
    """
    _check_window(window)
    if not 0 <= order < window:
        raise InvalidWindow(f"order must be in [0, {window}), got {order}")
    x = np.asarray(x, dtype=float)
    if len(x) < window:
        raise SignalTooShort(f"signal of length {len(x)} shorter than window {window}")
    return _scipy_savgol(x, window, order, mode="interp")


def smooth_signal(x, params: FilterParams = FilterParams(), on_short: str = "fallback") -> np.ndarray:
    y = median_filter(x, params.median_window)
    try:
        return savgol_filter(y, params.savgol_window, params.savgol_order)
    except SignalTooShort:
        if on_short == "raise":
            raise
        return y


def smooth_sample(s: TrajectorySample, params: FilterParams = FilterParams(),
                  on_short: str = "fallback") -> TrajectorySample:
    """Median filter then Savitzky-Golay on each sub-signal independently.

    Sub-signals shorter than the Savitzky-Golay window are only median
    filtered unless ``on_short="raise"``.
    """
    if on_short == "fallback" and min(s.lengths) < params.savgol_window:
        warnings.warn(f"sample shorter than savgol window {params.savgol_window}; "
                      "median filtering only", RuntimeWarning, stacklevel=2)
    return s.with_signals(smooth_signal(x, params, on_short) for x in s.sub_signals)
