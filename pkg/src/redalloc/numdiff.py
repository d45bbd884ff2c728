"""Central differences with one Richardson extrapolation step."""

from __future__ import annotations

from typing import Callable

import numpy as np


def default_step(x: float) -> float:
    return max(1e-6, abs(x) * 1e-6)


def central_diff(f: Callable, x, h: float | None = None):
    """First derivative of ``f`` at ``x``.

    Combines the central differences at steps ``h`` and ``h/2`` so the
    leading ``O(h^2)`` truncation term cancels.  ``f`` may be vectorized;
    ``x`` may then be an array.
    """
    x = np.asarray(x, dtype=float)
    if h is None:
        h = np.maximum(1e-6, np.abs(x) * 1e-6)
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4 * d2 - d1) / 3


def central_diff2(f: Callable, x, h: float | None = None):
    """Second derivative of ``f`` at ``x`` (three-point stencil + Richardson)."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = np.maximum(1e-4, np.abs(x) * 1e-4)
    fx = f(x)
    s1 = (f(x + h) - 2 * fx + f(x - h)) / h**2
    s2 = (f(x + h / 2) - 2 * fx + f(x - h / 2)) / (h / 2) ** 2
    return (4 * s2 - s1) / 3
