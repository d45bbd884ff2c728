"""Simulation oracle for the closed-form survival curves.

Component level
    Draw ``U`` from the copula (one coordinate per position) and set the
    block lifetime ``T_i = Gbar^{-1}(U_i)`` with ``Gbar(t) = 1 - prod_j F(t; b_j)``.
    Because ``Gbar`` is decreasing, ``P(T_1 > t_1, ...) = P(U_1 < Gbar(t_1), ...)
    = C(Gbar(t_1), ...)``: the copula acts as the *survival* copula of the
    block lifetimes, which is exactly the convention behind the distortion
    ``sf = q(Gbar)``.  The system lifetime is the max over path sets of the
    min within each set.

System level
    Every subsystem draws its own copula sample with the unit survival
    function ``Fbar(t; b_j)`` in place of ``Gbar``; the system lifetime is the
    max of the subsystem lifetimes.

Samples are drawn in fixed-size chunks whose seeds depend only on the
master seed and the chunk index, and counts are merged in chunk order, so
the estimate is bitwise identical for any number of worker threads.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import copulas
from . import distributions as dist
from .copulas import CopulaSpec
from .errors import ValidationError
from .systems import ComponentLevelSystem, Grid, SurvivalCurve, SystemLevelSystem, default_grid

MIN_SAMPLES = 10_000
CHUNK = 25_000
BISECT_RTOL = 1e-10
BISECT_MAX_ITER = 200


@dataclass
class McEstimate:
    grid: Grid
    estimates: np.ndarray
    stderr: np.ndarray
    n_samples: int
    seed: int

    def to_curve(self) -> SurvivalCurve:
        return SurvivalCurve(self.grid, self.estimates, "monte-carlo", self.stderr, "estimate")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["y", "x", "estimate", "stderr"])
        for y, x, e, s in zip(self.grid.y, self.grid.x, self.estimates, self.stderr):
            w.writerow([repr(float(y)), repr(float(x)), repr(float(e)), repr(float(s))])
        return buf.getvalue()

    def within(self, reference, k: float = 4.0) -> np.ndarray:
        """Pointwise ``|estimate - reference| <= k * stderr``.

        A zero standard error (estimate of exactly 0 or 1) is widened to the
        resolution ``1/N`` so that the check stays meaningful there.
        """
        se = np.maximum(self.stderr, 1.0 / self.n_samples)
        return np.abs(self.estimates - np.asarray(reference)) <= k * se


def _chunk_seed(seed: int, chunk: int, stream: int) -> int:
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), chunk, stream])
    return int(ss.generate_state(1, np.uint64)[0])


def invert_survival(models, u: np.ndarray) -> np.ndarray:
    """Smallest ``t`` with ``1 - prod_j F(t; b_j) <= u``, by vectorized bisection.

    The bracket starts at ``[support start, 1]`` and the upper end doubles
    until it brackets every target.  Flat stretches of the survival
    function resolve to their infimum.
    """
    u = np.asarray(u, dtype=float)
    target = np.log1p(-np.clip(u, 0.0, 1.0))  # log of the required cdf product

    def logP(t):
        return sum(np.asarray(dist.logcdf(m, t)) for m in models)

    lo = np.full(u.shape, max(m.support_start for m in models))
    hi = np.maximum(lo + 1.0, 1.0)
    idx = np.flatnonzero(logP(hi) < target)
    for _ in range(BISECT_MAX_ITER):
        if idx.size == 0:
            break
        hi[idx] *= 2
        idx = idx[logP(hi[idx]) < target[idx]]
    idx = np.arange(u.size)
    lo, hi, target = lo.ravel(), hi.ravel(), target.ravel()
    for _ in range(BISECT_MAX_ITER):
        idx = idx[hi[idx] - lo[idx] > BISECT_RTOL * hi[idx]]
        if idx.size == 0:
            break
        l, h = lo[idx], hi[idx]
        # geometric midpoints once the bracket is away from 0: heavy tails converge fast
        mid = np.where(l > 0, np.sqrt(l * h), 0.5 * (l + h))
        below = logP(mid) < target[idx]
        lo[idx] = np.where(below, mid, l)
        hi[idx] = np.where(below, h, mid)
    return hi.reshape(u.shape)


def _survival_counts(lifetimes: np.ndarray, t: np.ndarray) -> np.ndarray:
    s = np.sort(lifetimes)
    return s.size - np.searchsorted(s, t, side="right")


def _run(draw, grid: Grid | None, n_samples: int, seed: int, workers: int) -> McEstimate:
    if n_samples < MIN_SAMPLES:
        raise ValidationError(f"need at least {MIN_SAMPLES} samples, got {n_samples}")
    grid = grid or default_grid()
    sizes = [CHUNK] * (n_samples // CHUNK)
    if n_samples % CHUNK:
        sizes.append(n_samples % CHUNK)

    def one(i):
        return _survival_counts(draw(sizes[i], i), grid.x)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(one, range(len(sizes))))
    else:
        parts = [one(i) for i in range(len(sizes))]
    counts = np.zeros(len(grid.x), dtype=np.int64)
    for c in parts:
        counts += c
    p = counts / n_samples
    return McEstimate(grid, p, np.sqrt(p * (1 - p) / n_samples), n_samples, seed)


def simulate_component_level(sys: ComponentLevelSystem, grid: Grid | None = None,
                             n_samples: int = 100_000, seed: int = 0, workers: int = 1) -> McEstimate:
    if sys.structure is None:
        raise ValidationError("simulation needs the system's path sets (build it with a structure)")
    spec = sys.distortion.copula
    models = sys.models

    def draw(count, chunk):
        u = copulas.sample(spec, count, _chunk_seed(seed, chunk, 0))
        blocks = invert_survival(models, u.ravel()).reshape(u.shape)
        return sys.structure.lifetime(blocks)

    return _run(draw, grid, n_samples, seed, workers)


def simulate_system_level(sys: SystemLevelSystem, grid: Grid | None = None,
                          n_samples: int = 100_000, seed: int = 0, workers: int = 1) -> McEstimate:
    n = sys.structure.n

    def draw(count, chunk):
        best = None
        for j, (theta, model) in enumerate(zip(sys.thetas, sys.models)):
            spec = CopulaSpec(sys.copula_family, theta, n)
            u = copulas.sample(spec, count, _chunk_seed(seed, chunk, j))
            life = sys.structure.lifetime(invert_survival([model], u.ravel()).reshape(u.shape))
            best = life if best is None else np.maximum(best, life)
        return best

    return _run(draw, grid, n_samples, seed, workers)


def simulate(sys, grid: Grid | None = None, n_samples: int = 100_000, seed: int = 0,
             workers: int = 1) -> McEstimate:
    if isinstance(sys, ComponentLevelSystem):
        return simulate_component_level(sys, grid, n_samples, seed, workers)
    return simulate_system_level(sys, grid, n_samples, seed, workers)
