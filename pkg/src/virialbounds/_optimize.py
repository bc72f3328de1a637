"""Scan-then-golden-section maximizer shared by the radius computations."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

INVPHI = (math.sqrt(5) - 1) / 2
N_SCAN = 64
RTOL = 1e-10


@dataclass(frozen=True)
class Maximum:
    x: float
    value: float
    iterations: int
    at_upper: bool


def _safe(f, x):
    try:
        v = f(x)
    except (OverflowError, ZeroDivisionError):
        return -math.inf
    return v if math.isfinite(v) else -math.inf


def maximize(f: Callable[[float], float], lo: float, hi: float, n_scan: int = N_SCAN, rtol: float = RTOL) -> Maximum:
    """Maximize a unimodal ``f`` on ``[lo, hi]``.

    A log-spaced scan of ``n_scan`` points brackets the peak, then golden
    section narrows the bracket to relative width ``rtol``.
    """
    if not hi > lo:
        raise ValueError("empty interval")
    start = lo if lo > 0 else hi * 1e-9
    grid = np.concatenate(([lo], np.geomspace(start, hi, n_scan)))
    grid = np.unique(grid)
    vals = [_safe(f, x) for x in grid]
    i = int(np.argmax(vals))
    at_upper = i == len(grid) - 1
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, len(grid) - 1)]
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = _safe(f, c), _safe(f, d)
    it = 0
    while b - a > rtol * max(abs(a), abs(b), 1e-300):
        it += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = _safe(f, c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = _safe(f, d)
        if it > 500:
            break
    best = max([(vals[i], grid[i]), (fc, c), (fd, d)])
    return Maximum(float(best[1]), float(best[0]), it, at_upper)
