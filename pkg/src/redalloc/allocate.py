"""Choosing which spares to put in the redundancy slots.

Every ``m``-subset of the candidate pool is turned into a system (the base
unit ``b_0`` followed by the chosen spares), and the candidates are
compared pairwise in the usual stochastic order.  Dominance is usually
partial, so the full verdict matrix is reported; the ranking is a
topological order of strict dominance with mean lifetime as tie-breaker.
Mean lifetime is a heuristic summary, not a guarantee.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

from . import orders
from .conditions import Comparison, TheoremId, check_theorem
from .distributions import LifetimeFamily, check_parameter
from .errors import QuadratureError, ValidationError
from .structure import CoherentStructure
from .systems import ComponentLevelSystem, Grid, SystemLevelSystem, default_grid

MAX_ALLOCATIONS = 10_000
MEAN_RTOL = 1e-6
SF_CUTOFF = 1e-10
T_LIMIT = 2.0**20


@dataclass(frozen=True)
class SparePool:
    family: LifetimeFamily
    candidates: tuple[float, ...]
    m: int

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(float(c) for c in self.candidates))
        if self.m < 1:
            raise ValidationError("at least one spare slot is needed")
        if len(self.candidates) < self.m:
            raise ValidationError(f"{len(self.candidates)} candidates cannot fill {self.m} slots")
        for c in self.candidates:
            check_parameter(c)


@dataclass(frozen=True)
class AllocationBase:
    """What stays fixed: structure, dependence and the original unit ``b0``.

    ``theta`` is a scalar, or for system-level redundancy optionally one value
    per subsystem (original first).
    """

    structure: CoherentStructure
    copula: str
    theta: float | tuple[float, ...]
    b0: float
    theta_range: tuple[float, float] | None = None


def mean_lifetime(sys) -> tuple[float, bool]:
    """``int_0^inf sf(t) dt`` and whether the tail beyond ``T_LIMIT`` is unresolved.

    The range is cut into doubling pieces ``[T, 2T]`` and each piece goes to
    scipy's adaptive quadrature.  Past the last piece the tail is taken as a
    geometric series in the ratio of the last two pieces, which is exact
    asymptotically for power-law tails.  Integration stops once ``sf`` is
    below ``1e-10`` and that tail is negligible.  At ``T_LIMIT`` the result is
    flagged when the pieces are not shrinking or the tail estimate exceeds
    the tolerance (heavy tails).
    """
    def f(t):
        return float(sys.sf(t))

    edges = [0.0] + ([sys.support_start] if sys.support_start > 0 else [])
    upper = max(1.0, edges[-1])
    total = err = 0.0
    prev = tail = None
    ratio = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        a = 0.0
        for b in edges[1:] + [upper]:
            total, err = _piece(f, a, b, total, err)
            a = b
        while True:
            b = 2 * a
            v, e = _piece(f, a, b, 0.0, 0.0)
            total, err = total + v, err + e
            if prev is not None and prev > 0:
                ratio = v / prev
            tail = v * ratio / (1 - ratio) if ratio < 1 else math.inf
            prev, a = v, b
            if f(b) < SF_CUTOFF and tail <= 0.1 * MEAN_RTOL * total:
                break
            if b >= T_LIMIT:
                break
    truncated = not math.isfinite(tail) or tail > MEAN_RTOL * total
    if math.isfinite(tail):
        total += tail
    if err > 10 * MEAN_RTOL * max(total, 1e-300):
        raise QuadratureError(f"mean lifetime error estimate {err:g} exceeds the tolerance")
    return total, truncated


def _piece(f, a, b, total, err):
    try:
        v, e = integrate.quad(f, a, b, epsrel=MEAN_RTOL * 1e-2, epsabs=0.0, limit=200)
    except integrate.IntegrationWarning as w:
        raise QuadratureError(f"mean lifetime quadrature failed on [{a:g}, {b:g}]: {w}") from None
    return total + v, err + e


class _CachedSystem:
    """Serve sf on a fixed grid from a precomputed array; defer everything else."""

    def __init__(self, sys, grid: Grid):
        self._sys = sys
        self._x = grid.x
        self._sf = np.asarray(sys.sf(grid.x))

    def sf(self, t):
        t = np.asarray(t)
        if t.shape == self._x.shape and np.array_equal(t, self._x):
            return self._sf
        return self._sys.sf(t)

    def __getattr__(self, name):
        return getattr(self._sys, name)


@dataclass
class AllocationReport:
    level: str
    allocations: list[tuple[float, ...]]
    means: list[float]
    truncated: list[bool]
    ranking: list[int]
    dominance: list[list[str]]
    majorization: list[list[str]]
    certificates: list[dict] = field(default_factory=list)

    @property
    def chosen(self) -> tuple[float, ...]:
        return self.allocations[self.ranking[0]]

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "chosen": list(self.chosen),
            "ranking": [{"rank": r + 1, "index": i, "spares": list(self.allocations[i]),
                         "mean_lifetime": self.means[i], "mean_truncated": self.truncated[i]}
                        for r, i in enumerate(self.ranking)],
            "dominance": self.dominance,
            "majorization": self.majorization,
            "certificates": self.certificates,
            "note": "mean lifetime is a tie-breaking heuristic",
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_table(self) -> str:
        lines = [f"{'rank':>4}  {'spares':<28} {'mean lifetime':>14}  dominates"]
        for r, i in enumerate(self.ranking):
            beats = [str(j) for j, rel in enumerate(self.dominance[i]) if rel == "B_below_A"]
            mean = f"{self.means[i]:.6g}" + ("+" if self.truncated[i] else "")
            lines.append(f"{r + 1:>4}  {str(self.allocations[i]):<28} {mean:>14}  {','.join(beats) or '-'}")
        lines.append(f"chosen: {self.chosen}")
        if any(self.truncated):
            lines.append("+ tail beyond t = 2^20 unresolved (heavy tail)")
        return "\n".join(lines)


def _build(pool: SparePool, base: AllocationBase, level: str, spares: Sequence[float]):
    b = (base.b0, *spares)
    if level == "component":
        if np.ndim(base.theta) != 0:
            raise ValidationError("component-level redundancy takes a single theta")
        return ComponentLevelSystem.build(base.structure, base.copula, float(base.theta), pool.family, b)
    thetas = (tuple(np.full(len(b), float(base.theta))) if np.ndim(base.theta) == 0
              else tuple(base.theta))
    return SystemLevelSystem(base.structure, base.copula, thetas, pool.family, b)


def _majorization_label(x, y) -> str:
    # relation of allocation x to allocation y, as parameter vectors
    if orders.majorize(y, x):
        return "m"      # x <=_m y
    if orders.weak_supermajorize(y, x):
        return "w"      # x <=^w y
    return ""


def _rank(dominance: list[list[str]], means: list[float]) -> list[int]:
    remaining = list(range(len(means)))
    order = []
    while remaining:
        free = [i for i in remaining
                if not any(dominance[j][i] == "B_below_A" for j in remaining if j != i)]
        pool = free or remaining
        best = min(pool, key=lambda i: (-means[i], i))
        order.append(best)
        remaining.remove(best)
    return order


def recommend(pool: SparePool, base: AllocationBase, level: str = "component",
              grid: Grid | None = None, certify: bool = True) -> AllocationReport:
    """Enumerate, compare and rank every way of filling the ``m`` spare slots."""
    if level not in ("component", "system"):
        raise ValidationError(f"level must be 'component' or 'system', got {level!r}")
    count = math.comb(len(pool.candidates), pool.m)
    if count > MAX_ALLOCATIONS:
        raise ValidationError(f"{count} allocations exceed the enumeration bound {MAX_ALLOCATIONS}")
    grid = grid or default_grid()
    allocs = [tuple(pool.candidates[i] for i in idx)
              for idx in itertools.combinations(range(len(pool.candidates)), pool.m)]
    systems = [_build(pool, base, level, a) for a in allocs]
    cached = [_CachedSystem(s, grid) for s in systems]
    stats = [mean_lifetime(s) for s in systems]
    means = [m for m, _ in stats]
    truncated = [t for _, t in stats]
    k = len(allocs)
    dominance = [["indistinguishable"] * k for _ in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            v = orders.check_order("st", cached[i], cached[j], grid)
            dominance[i][j] = v.relation
            dominance[j][i] = {"A_below_B": "B_below_A", "B_below_A": "A_below_B"}.get(v.relation, v.relation)
    full_b = [s.b for s in systems]
    major = [[_majorization_label(full_b[i], full_b[j]) if i != j else "" for j in range(k)]
             for i in range(k)]
    certs = []
    if certify:
        theorems = ((TheoremId.T3_1, TheoremId.T3_2) if level == "component"
                    else (TheoremId.T4_1, TheoremId.T4_2))
        for i in range(k):
            for j in range(k):
                if i == j or not major[i][j] or full_b[i] == full_b[j]:
                    continue
                if level == "system" and major[i][j] != "m":
                    continue
                cmp = Comparison(systems[i], systems[j], base.theta_range)
                for tid in theorems:
                    c = check_theorem(tid, cmp)
                    certs.append({"pair": [i, j], "theorem": tid.value, "all_pass": c.all_pass,
                                  "implied": c.implied.describe(), "agrees": c.agrees})
    return AllocationReport(level, allocs, means, truncated, _rank(dominance, means),
                            dominance, major, certs)
