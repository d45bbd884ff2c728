"""Majorization and grid-based stochastic-order checks between two systems.

Order conventions (``A`` is the first system, ``B`` the second)::

    A <=_st B   sf_A(t) <= sf_B(t) for all t
    A <=_hr B   sf_B / sf_A increasing
    A <=_rh B   F_B / F_A increasing
    A <=_lr B   f_B / f_A increasing

A verdict is reached from the sign pattern of the pointwise difference (st)
or of the successive differences of the ratio (hr, rh, lr) on a time grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ValidationError
from .systems import Grid, default_grid

MAJORIZATION_TOL = 1e-12
ST_TOL = 1e-9
RATIO_TOL = 1e-9
UNDERFLOW = 1e-300
BISECT_TOL = 1e-8

ORDER_KINDS = ("st", "hr", "rh", "lr")
RELATIONS = ("A_below_B", "B_below_A", "crossing", "indistinguishable")


# -- majorization ------------------------------------------------------------

def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValidationError(f"length mismatch: {x.size} vs {y.size}")
    if x.size == 0:
        raise ValidationError("empty vectors")
    return x, y


def _ascending_partial_sums(x, y):
    x, y = _pair(x, y)
    sx, sy = np.cumsum(np.sort(x)), np.cumsum(np.sort(y))
    tol = MAJORIZATION_TOL * max(1.0, float(np.abs(x).sum()), float(np.abs(y).sum()))
    return sx, sy, tol


def majorize(x, y) -> bool:
    """True iff ``x`` majorizes ``y``.

    Ascending partial sums of ``x`` never exceed those of ``y`` and the
    totals agree, both up to ``1e-12`` (scaled by the vector size).
    """
    sx, sy, tol = _ascending_partial_sums(x, y)
    return bool(np.all(sx[:-1] <= sy[:-1] + tol) and abs(sx[-1] - sy[-1]) <= tol)


def weak_supermajorize(x, y) -> bool:
    """True iff ``x`` weakly supermajorizes ``y`` (no equal-total requirement)."""
    sx, sy, tol = _ascending_partial_sums(x, y)
    return bool(np.all(sx <= sy + tol))


def t_transform(x, i: int, j: int, lam: float) -> np.ndarray:
    """``lam * x + (1 - lam) * x`` with coordinates ``i`` and ``j`` swapped; majorized by ``x``."""
    x = np.asarray(x, dtype=float)
    y = x.copy()
    y[i] = lam * x[i] + (1 - lam) * x[j]
    y[j] = lam * x[j] + (1 - lam) * x[i]
    return y


@dataclass
class SchurProbeResult:
    consistent_with: str
    trials: int
    counterexample: tuple[np.ndarray, np.ndarray] | None = None


def schur_probe(fn: Callable[[np.ndarray], float], dim: int, box: tuple[float, float],
                trials: int = 1000, seed: int = 0, tol: float = 1e-12) -> SchurProbeResult:
    """Classify ``fn`` by its behaviour on random pairs ``T x <=_m x``.

    ``consistent_with`` is ``"Schur-convex"``, ``"Schur-concave"``,
    ``"both"`` (fn is constant on every tested orbit, e.g. a plain sum) or
    ``"neither"``; in the last case one offending pair ``(x, Tx)`` is kept.
    """
    if trials < 100:
        raise ValidationError("the Schur probe needs at least 100 trials")
    if dim < 2:
        raise ValidationError("the Schur probe needs dim >= 2")
    lo, hi = box
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    convex_bad = concave_bad = None
    for _ in range(trials):
        x = rng.uniform(lo, hi, dim)
        i, j = rng.choice(dim, size=2, replace=False)
        y = t_transform(x, i, j, rng.uniform())
        fx, fy = float(fn(x)), float(fn(y))
        scale = tol * max(1.0, abs(fx), abs(fy))
        # y <=_m x: Schur-convex needs fn(y) <= fn(x), Schur-concave the reverse
        if fy > fx + scale and convex_bad is None:
            convex_bad = (x, y)
        if fy < fx - scale and concave_bad is None:
            concave_bad = (x, y)
    if convex_bad is None and concave_bad is None:
        return SchurProbeResult("both", trials)
    if convex_bad is None:
        return SchurProbeResult("Schur-convex", trials)
    if concave_bad is None:
        return SchurProbeResult("Schur-concave", trials)
    return SchurProbeResult("neither", trials, convex_bad)


# -- stochastic orders ---------------------------------------------------------

@dataclass
class OrderVerdict:
    order_kind: str
    relation: str
    max_violation: float
    crossing_points: list[float] = field(default_factory=list)
    points_used: int = 0
    restricted_to: float | None = None

    def __post_init__(self):
        if self.max_violation < 0:
            raise ValueError("max_violation must be nonnegative")
        if bool(self.crossing_points) != (self.relation == "crossing"):
            raise ValueError("crossing points are reported exactly for crossing verdicts")

    def holds(self, direction: str) -> bool:
        """True when the verdict does not contradict ``direction`` (``A_below_B`` or ``B_below_A``)."""
        return self.relation in (direction, "indistinguishable")

    def to_dict(self) -> dict:
        return {"kind": self.order_kind, "relation": self.relation,
                "max_violation": float(self.max_violation),
                "crossings": [float(c) for c in self.crossing_points]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _quantity(kind: str) -> str:
    return {"st": "sf", "hr": "sf", "rh": "cdf", "lr": "pdf"}[kind]


def _evaluator(kind: str, sysA, sysB) -> Callable[[np.ndarray], np.ndarray]:
    """Signed quantity whose sign pattern decides the verdict at times ``x``."""
    q = _quantity(kind)
    fa, fb = getattr(sysA, q), getattr(sysB, q)
    if kind == "st":
        return lambda x: np.asarray(fb(x)) - np.asarray(fa(x))

    def ratio(x):
        a, b = np.asarray(fa(x), dtype=float), np.asarray(fb(x), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(a > UNDERFLOW, b / np.where(a > UNDERFLOW, a, 1.0), np.nan)
    return ratio


def _bisect(sign_at: Callable[[float], int], lo: float, hi: float, s_lo: int) -> float:
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if sign_at(mid) == s_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _signs(values: np.ndarray, tol: np.ndarray) -> np.ndarray:
    return np.where(values > tol, 1, np.where(values < -tol, -1, 0))


def _crossings(x: np.ndarray, y: np.ndarray, s: np.ndarray, sign_at_x) -> list[float]:
    """Bisect between successive significant entries of opposite sign.

    The search runs in ``y``; once ``y = exp(-t)`` has underflowed it falls back to ``t``.
    """
    idx = np.flatnonzero(s)
    out = []
    for a, b in zip(idx[:-1], idx[1:]):
        if s[a] == s[b]:
            continue
        if min(y[a], y[b]) > 0:
            # the smaller y is the later time b
            yc = _bisect(lambda yy: sign_at_x(-np.log(yy)), min(y[a], y[b]), max(y[a], y[b]), s[b])
            out.append(float(-np.log(yc)))
        else:
            out.append(_bisect(sign_at_x, x[a], x[b], s[a]))
    return sorted(out)


def check_order(kind: str, sysA, sysB, grid: Grid | None = None) -> OrderVerdict:
    """Decide ``A <= B``, ``B <= A``, a crossing, or no difference in order ``kind``."""
    if kind not in ORDER_KINDS:
        raise ValidationError(f"unknown order {kind!r}; expected one of {ORDER_KINDS}")
    grid = grid or default_grid()
    if len(grid) < 3:
        raise ValidationError("order checks need a grid of at least 3 points")
    restricted = None
    if kind == "lr":
        # the density ratio only exists where both densities are positive
        restricted = max(sysA.support_start, sysB.support_start)
        grid = grid.restrict(restricted)
        if len(grid) < 3:
            raise ValidationError("fewer than 3 grid points inside both supports")
    # ascending time order makes successive differences follow t
    order = np.argsort(grid.x)
    x, y = grid.x[order], grid.y[order]
    g = _evaluator(kind, sysA, sysB)

    if kind == "st":
        v = g(x)
        s = _signs(v, np.full(v.shape, ST_TOL))

        def sign_at(xx):
            return int(_signs(g(np.array([xx])), np.array([ST_TOL]))[0])
        up, down = max(0.0, float(-v.min())), max(0.0, float(v.max()))
        return _verdict(kind, s, up, down, float(np.abs(v).max()), x, y, sign_at, len(v), restricted)

    r = g(x)
    keep = np.isfinite(r)
    x, y, r = x[keep], y[keep], r[keep]
    if len(r) < 3:
        raise ValidationError(f"fewer than 3 grid points where the {kind} ratio is defined")
    s = _anchored_signs(r)
    up, down, spread = _drift(r)
    xmid, ymid = 0.5 * (x[:-1] + x[1:]), np.sqrt(y[:-1] * y[1:])

    def sign_at(xx):
        # sign of the ratio's slope in t, from a tiny symmetric step
        h = 1e-9 * max(1.0, xx)
        rr = g(np.array([xx - h, xx + h]))
        return int(_signs(np.array([rr[1] - rr[0]]),
                          np.array([RATIO_TOL * max(abs(rr[0]), abs(rr[1]), 1e-300)]))[0])
    return _verdict(kind, s, up, down, spread, xmid, ymid, sign_at, len(r), restricted)


def _anchored_signs(r: np.ndarray) -> np.ndarray:
    """Direction of each step, counting a move once it clears the tolerance.

    Steps are compared with the last significant value rather than the
    previous point, so a slow drift made of sub-tolerance steps still counts.
    """
    s = np.zeros(len(r) - 1, dtype=int)
    anchor = r[0]
    for i in range(1, len(r)):
        d = r[i] - anchor
        if abs(d) > RATIO_TOL * max(abs(anchor), abs(r[i]), 1e-300):
            s[i - 1] = 1 if d > 0 else -1
            anchor = r[i]
    return s


def _drift(r: np.ndarray) -> tuple[float, float, float]:
    """Largest relative fall below the running max, rise above the running min, and total spread."""
    hi, lo = np.maximum.accumulate(r), np.minimum.accumulate(r)
    up = np.max((hi - r) / np.maximum(np.abs(hi), 1e-300))
    down = np.max((r - lo) / np.maximum(np.abs(r), 1e-300))
    spread = (r.max() - r.min()) / max(np.abs(r).max(), 1e-300)
    return float(up), float(down), float(spread)


def _verdict(kind, s, up_violation, down_violation, spread, x, y, sign_at, used, restricted):
    # up_violation: how far the data falls short of "A_below_B"; down_violation likewise
    has_pos, has_neg = bool(np.any(s > 0)), bool(np.any(s < 0))
    if not has_pos and not has_neg:
        return OrderVerdict(kind, "indistinguishable", spread, [], used, restricted)
    if has_pos and not has_neg:
        return OrderVerdict(kind, "A_below_B", up_violation, [], used, restricted)
    if has_neg and not has_pos:
        return OrderVerdict(kind, "B_below_A", down_violation, [], used, restricted)
    cross = _crossings(x, y, s, sign_at)
    if not cross:
        # bisection could not separate the signs; keep the grid midpoint of the first change
        idx = np.flatnonzero(s)
        k = next(a for a, b in zip(idx[:-1], idx[1:]) if s[a] != s[b])
        cross = [float(x[k])]
    return OrderVerdict(kind, "crossing", min(up_violation, down_violation), cross, used, restricted)


def check_all(sysA, sysB, grid: Grid | None = None, kinds: Sequence[str] = ORDER_KINDS) -> dict:
    return {k: check_order(k, sysA, sysB, grid) for k in kinds}
