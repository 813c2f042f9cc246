"""Dynamic time warping between sub-signals and template warping.

Local cost is the squared difference; the DTW distance is the plain sum of
local costs along the optimal path (no square root). Steps are the classic
symmetric (1, 0), (0, 1), (1, 1) moves. Backtracking breaks ties by
preferring the diagonal, then the step that advances the source index,
then the one advancing the base index, so paths are deterministic and the
path of a signal against itself is the main diagonal.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import TrajectorySample
from .exceptions import DimensionMismatch, EmptySequence


@dataclass(frozen=True)
class WarpingPath:
    """Index correspondence; ``source``/``base`` are parallel 0-based arrays."""

    source: np.ndarray
    base: np.ndarray

    def pairs(self) -> list[tuple[int, int]]:
        """The path as 1-based ``(p, q)`` pairs."""
        return [(int(p) + 1, int(q) + 1) for p, q in zip(self.source, self.base)]

    def __len__(self):
        return len(self.source)


@dataclass(frozen=True)
class DtwResult:
    distance: float
    path: WarpingPath


@njit(cache=True)
def _accumulate(a, b, window):
    n, m = a.shape[0], b.shape[0]
    D = np.full((n + 1, m + 1), np.inf)
    D[0, 0] = 0.0
    if window >= 0:
        window = max(window, abs(n - m))
    for i in range(1, n + 1):
        lo, hi = 1, m
        if window >= 0:
            lo = max(1, i - window)
            hi = min(m, i + window)
        ai = a[i - 1]
        for j in range(lo, hi + 1):
            d = ai - b[j - 1]
            best = D[i - 1, j - 1]
            if D[i - 1, j] < best:
                best = D[i - 1, j]
            if D[i, j - 1] < best:
                best = D[i, j - 1]
            D[i, j] = d * d + best
    return D


@njit(cache=True)
def _backtrack(D):
    i, j = D.shape[0] - 1, D.shape[1] - 1
    src = np.empty(i + j, dtype=np.int64)
    dst = np.empty(i + j, dtype=np.int64)
    k = 0
    while i > 1 or j > 1:
        src[k] = i - 1
        dst[k] = j - 1
        k += 1
        diag, up, left = D[i - 1, j - 1], D[i - 1, j], D[i, j - 1]
        if diag <= up and diag <= left:
            i -= 1
            j -= 1
        elif up <= left:
            i -= 1
        else:
            j -= 1
    src[k] = 0
    dst[k] = 0
    k += 1
    return src[:k][::-1].copy(), dst[:k][::-1].copy()


@njit(cache=True)
def _warp_along(x, src, dst, m):
    sums = np.zeros(m)
    counts = np.zeros(m, dtype=np.int64)
    for t in range(src.shape[0]):
        sums[dst[t]] += x[src[t]]
        counts[dst[t]] += 1
    return sums, counts


@njit(cache=True)
def _pairwise(flat, offsets, window):
    n = offsets.shape[0] - 1
    out = np.zeros((n, n))
    for p in range(n):
        a = flat[offsets[p]:offsets[p + 1]]
        for q in range(p + 1, n):
            b = flat[offsets[q]:offsets[q + 1]]
            d = _accumulate(a, b, window)[-1, -1]
            out[p, q] = d
            out[q, p] = d
    return out


def _prepare(a, b, window):
    a = np.ascontiguousarray(a, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("dtw operates on 1-D sequences")
    if len(a) == 0 or len(b) == 0:
        raise EmptySequence("dtw needs non-empty sequences")
    return a, b, -1 if window is None else int(window)


def dtw(a, b, window: int | None = None) -> DtwResult:
    """Optimal alignment of ``a`` (source) against ``b`` (base).

    ``window`` enables a Sakoe-Chiba band of that half-width, widened to
    ``|len(a) - len(b)|`` when needed so that a path always exists.
    """
    a, b, w = _prepare(a, b, window)
    D = _accumulate(a, b, w)
    src, dst = _backtrack(D)
    return DtwResult(float(D[-1, -1]), WarpingPath(src, dst))


def dtw_distance(a, b, window: int | None = None) -> float:
    a, b, w = _prepare(a, b, window)
    return float(_accumulate(a, b, w)[-1, -1])


def pairwise_dtw(signals, window: int | None = None) -> np.ndarray:
    """Symmetric matrix of DTW distances between 1-D signals."""
    signals = [np.asarray(s, dtype=float) for s in signals]
    if any(len(s) == 0 for s in signals):
        raise EmptySequence("dtw needs non-empty sequences")
    offsets = np.concatenate([[0], np.cumsum([len(s) for s in signals])]).astype(np.int64)
    flat = np.concatenate(signals) if signals else np.empty(0)
    return _pairwise(flat, offsets, -1 if window is None else int(window))


def warp_along_path(x, path: WarpingPath, base_len: int, return_counts: bool = False):
    """Average the ``x`` values matched to each of ``base_len`` base indices.

    Base indices the path never visits are linearly interpolated from their
    matched neighbours. Paths returned by ``dtw`` are continuous, band or
    not, so this only happens for externally supplied paths.
    """
    x = np.asarray(x, dtype=float)
    src = np.asarray(path.source, dtype=np.int64)
    dst = np.asarray(path.base, dtype=np.int64)
    sums, counts = _warp_along(x, src, dst, int(base_len))
    matched = counts > 0
    if not matched.any():
        raise ValueError("path matches no base index")
    out = np.empty(base_len)
    out[matched] = sums[matched] / counts[matched]
    if not matched.all():
        idx = np.arange(base_len)
        out[~matched] = np.interp(idx[~matched], idx[matched], out[matched])
    if return_counts:
        return out, counts
    return out


def warp_signal(x, base, window: int | None = None, return_counts: bool = False):
    """Resample ``x`` onto the time axis of ``base``.

    Each base index receives the mean of the ``x`` values matched to it by
    ``dtw(x, base)``.
    """
    x, base, w = _prepare(x, base, window)
    src, dst = _backtrack(_accumulate(x, base, w))
    return warp_along_path(x, WarpingPath(src, dst), len(base), return_counts)


def _signals(obj):
    return list(obj.sub_signals) if hasattr(obj, "sub_signals") else list(obj)


def warp(s: TrajectorySample, base, window: int | None = None) -> TrajectorySample:
    """Warp every sub-signal of ``s`` onto the matching sub-signal of ``base``.

    ``base`` may be a TrajectorySample, a template or a plain list of arrays.
    The result keeps the metadata of ``s``.
    """
    base_signals = _signals(base)
    if len(base_signals) != s.K:
        raise DimensionMismatch(f"sample has K={s.K}, base has K={len(base_signals)}")
    return s.with_signals(warp_signal(x, b, window) for x, b in zip(s.sub_signals, base_signals))
