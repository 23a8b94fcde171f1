"""Deterministic derivative-free maximizers.

All searches are coarse-grid scans followed by local refinement (golden
section in one dimension, Nelder-Mead with a fixed initial simplex in two),
so repeated runs produce bit-identical results.  Every refinement result is
checked against the best point seen anywhere; the returned value can
therefore never fall below any coarse-grid sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

__all__ = [
    "BudgetExceededError",
    "SearchSpec",
    "maximize_1d",
    "maximize_2d",
    "maximize_over_gain",
]

COARSE_1D = 129
COARSE_2D = 33
GAIN_GRID = 65
GAIN_MAX_FINITE = 1e3

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class BudgetExceededError(RuntimeError):
    """Raised when an objective would be evaluated past max_evals."""


@dataclass(frozen=True)
class SearchSpec:
    """Box bounds plus termination settings for a maximization."""

    bounds: tuple
    tolerance: float = 1e-7
    max_evals: int = 10000

    def __post_init__(self) -> None:
        b = tuple(self.bounds)
        if len(b) == 2 and all(isinstance(v, (int, float)) for v in b):
            b = (b,)
        pairs = []
        for pair in b:
            lo, hi = (float(v) for v in pair)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"bounds must be finite with lo < hi, got {pair!r}")
            pairs.append((lo, hi))
        if not pairs:
            raise ValueError("at least one bounds pair is required")
        object.__setattr__(self, "bounds", tuple(pairs))
        if not (math.isfinite(self.tolerance) and self.tolerance > 0.0):
            raise ValueError(f"tolerance must be > 0, got {self.tolerance!r}")
        if self.max_evals < 1:
            raise ValueError(f"max_evals must be >= 1, got {self.max_evals!r}")


class _Counter:
    """Budget-enforcing objective wrapper that remembers the best sample.

    Ties keep the earlier sample, so grid order decides between equal values.
    """

    def __init__(self, f: Callable, max_evals: int) -> None:
        self.f = f
        self.max_evals = max_evals
        self.count = 0
        self.best_x = None
        self.best_val = -math.inf

    def __call__(self, x):
        if self.count >= self.max_evals:
            raise BudgetExceededError(f"evaluation budget of {self.max_evals} exhausted")
        self.count += 1
        val = float(self.f(x))
        if val > self.best_val:
            self.best_val = val
            self.best_x = x
        return val


def _golden_section(fn: Callable[[float], float], a: float, b: float, tol: float) -> float:
    """Shrink [a, b] around a maximum of fn; returns the final midpoint.

    On exact ties both ends move inward, so a constant objective converges to
    the midpoint of the initial bracket.
    """
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = fn(c)
    fd = fn(d)
    while (b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        elif fc < fd:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
        else:
            a, b = c, d
            c = b - _INVPHI * (b - a)
            d = a + _INVPHI * (b - a)
            fc = fn(c)
            fd = fn(d)
    return (a + b) / 2.0


def _finish_1d(counter: _Counter, mid: float) -> tuple[float, float]:
    f_mid = counter(mid)
    if f_mid >= counter.best_val:
        return mid, f_mid
    return counter.best_x, counter.best_val


def maximize_1d(f: Callable[[float], float], spec: SearchSpec) -> tuple[float, float]:
    """Maximize f on an interval: 129-point scan, then golden-section refinement.

    Returns (x_opt, f_opt) with f_opt at least as large as every grid sample.
    An exact boundary maximum of a monotone objective is returned exactly.
    """
    if len(spec.bounds) != 1:
        raise ValueError("maximize_1d needs exactly one bounds pair")
    (lo, hi), = spec.bounds
    counter = _Counter(f, spec.max_evals)
    xs = np.linspace(lo, hi, COARSE_1D)
    vals = [counter(float(x)) for x in xs]
    i = int(np.argmax(vals))
    a = float(xs[max(i - 1, 0)])
    b = float(xs[min(i + 1, COARSE_1D - 1)])
    mid = _golden_section(counter, a, b, spec.tolerance)
    return _finish_1d(counter, mid)


def _top_grid_points(xs, ys, vals: np.ndarray, n: int) -> list[tuple[float, float]]:
    order = np.argsort(-vals, axis=None, kind="stable")[:n]
    pts = []
    for flat in order:
        ix, iy = np.unravel_index(int(flat), vals.shape)
        pts.append((float(xs[ix]), float(ys[iy])))
    return pts


def maximize_2d(
    f: Callable[[float, float], float], spec: SearchSpec
) -> tuple[tuple[float, float], float]:
    """Maximize f on a box: 33x33 scan, then Nelder-Mead from the 3 best cells.

    The simplex initialization is fixed and all proposals are clipped to the
    box before evaluation, so the search is deterministic and never samples
    outside the bounds.  Returns ((x, y)_opt, f_opt).
    """
    if len(spec.bounds) != 2:
        raise ValueError("maximize_2d needs exactly two bounds pairs")
    (xlo, xhi), (ylo, yhi) = spec.bounds
    counter = _Counter(lambda p: f(p[0], p[1]), spec.max_evals)

    def sample(x: float, y: float) -> float:
        x = min(max(x, xlo), xhi)
        y = min(max(y, ylo), yhi)
        return counter((x, y))

    xs = np.linspace(xlo, xhi, COARSE_2D)
    ys = np.linspace(ylo, yhi, COARSE_2D)
    vals = np.empty((COARSE_2D, COARSE_2D))
    for ix in range(COARSE_2D):
        for iy in range(COARSE_2D):
            vals[ix, iy] = sample(float(xs[ix]), float(ys[iy]))

    starts = _top_grid_points(xs, ys, vals, 3)
    remaining = spec.max_evals - counter.count
    per_start = max(remaining // 3, 1)
    hx = 0.5 * (xhi - xlo) / (COARSE_2D - 1)
    hy = 0.5 * (yhi - ylo) / (COARSE_2D - 1)
    for x0, y0 in starts:
        sx = hx if x0 + hx <= xhi else -hx
        sy = hy if y0 + hy <= yhi else -hy
        simplex = np.array([[x0, y0], [x0 + sx, y0], [x0, y0 + sy]])
        minimize(
            lambda p: -sample(p[0], p[1]),
            np.array([x0, y0]),
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": spec.tolerance,
                "fatol": 1e-12,
                "maxfev": per_start,
            },
        )
    return counter.best_x, counter.best_val


def maximize_over_gain(
    f: Callable[[float], float], *, tolerance: float = 1e-7, max_evals: int = 10000
) -> tuple[float, float]:
    """Maximize f over gains g in [1, inf].

    Scans a 65-point logarithmic grid up to 1e3, evaluates the infinite-gain
    sentinel, then golden-section refines (in log space) around the best
    finite sample.  The sentinel is returned only when its value strictly
    beats every finite evaluation; a non-increasing objective therefore
    returns exactly g = 1.
    """
    counter = _Counter(f, max_evals)
    grid = np.geomspace(1.0, GAIN_MAX_FINITE, GAIN_GRID)
    vals = [counter(float(g)) for g in grid]
    counter(math.inf)
    i = int(np.argmax(vals))
    ta = math.log(float(grid[max(i - 1, 0)]))
    tb = math.log(float(grid[min(i + 1, GAIN_GRID - 1)]))
    t_mid = _golden_section(lambda t: counter(math.exp(t)), ta, tb, tolerance)
    g_mid = math.exp(t_mid)
    f_mid = counter(g_mid)
    if f_mid >= counter.best_val:
        return g_mid, f_mid
    return counter.best_x, counter.best_val
