"""Independent reference implementations used as test oracles.

Deliberately naive: exhaustive enumeration, per-point least squares and
plain Python loops, sharing no code with the package.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def monotone_paths(n: int, m: int) -> tuple:
    """Every warping path from (0, 0) to (n-1, m-1) with unit steps."""
    if n == 1 and m == 1:
        return (((0, 0),),)
    out = []
    for dn, dm in ((1, 0), (0, 1), (1, 1)):
        pn, pm = n - dn, m - dm
        if pn >= 1 and pm >= 1:
            out.extend(p + ((n - 1, m - 1),) for p in monotone_paths(pn, pm))
    return tuple(out)


@lru_cache(maxsize=None)
def _incidence(n: int, m: int) -> np.ndarray:
    paths = monotone_paths(n, m)
    M = np.zeros((len(paths), n * m))
    for r, path in enumerate(paths):
        for i, j in path:
            M[r, i * m + j] += 1
    return M


def brute_force_dtw(a, b) -> float:
    """Minimum squared-difference cost over all enumerated paths."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    cost = (a[:, None] - b[None, :]) ** 2
    return float((_incidence(len(a), len(b)) @ cost.ravel()).min())


def path_cost(a, b, pairs) -> float:
    """Cost of a 1-based pair list."""
    return float(sum((a[p - 1] - b[q - 1]) ** 2 for p, q in pairs))


def warp_by_path(x, base_len, pairs):
    """Average the source values matched to each base index; interpolate gaps."""
    buckets = [[] for _ in range(base_len)]
    for p, q in pairs:
        buckets[q - 1].append(x[p - 1])
    out = [float(np.mean(b)) if b else None for b in buckets]
    known = [i for i, v in enumerate(out) if v is not None]
    for i, v in enumerate(out):
        if v is None:
            out[i] = float(np.interp(i, known, [out[k] for k in known]))
    return np.array(out)


def naive_median(x, window):
    n, half = len(x), window // 2
    out = []
    for i in range(n):
        h = min(half, i, n - 1 - i)
        out.append(np.median(x[i - h:i + h + 1]))
    return np.array(out)


def naive_savgol(x, window, order):
    """Per-point polynomial least squares; ends use the first/last full window."""
    x = np.asarray(x, float)
    n, half = len(x), window // 2
    out = np.empty(n)
    t = np.arange(window)
    for i in range(n):
        start = min(max(i - half, 0), n - window)
        coef = np.polyfit(t, x[start:start + window], order)
        out[i] = np.polyval(coef, i - start)
    return out


def rotation_z(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def pairwise_distances(points):
    return np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
