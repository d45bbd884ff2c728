"""Reliability of coherent systems with active redundancy.

Component level: every one of the ``n`` positions holds a parallel block of
the original unit and ``m`` spares with parameters ``b_0..b_m``.  The block
failure probability is ``P(t) = prod_j F(t; b_j)`` and::

    sf_c(t) = q(1 - P(t))

System level: the original system and ``m`` duplicates (each built from
units with parameter ``b_j`` and copula parameter ``theta_j``) are wired in
parallel and fail independently of each other::

    sf_s(t) = 1 - prod_j (1 - q_{theta_j}(1 - F(t; b_j)))

Densities and rate functions use the analytic chain-rule formulas; finite
differences appear only in the tests.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import distributions as dist
from .copulas import CopulaFamily, CopulaSpec
from .distributions import LifetimeFamily, LifetimeModel
from .errors import DomainError, PoleError, ValidationError
from .structure import (CoherentStructure, Distortion, distortion_coefficients, q, q_complement,
                        q_derivatives_at_complement)

DEFAULT_GRID_POINTS = 2000
GRID_Y_MIN = 1e-4


def _as_b(b: Sequence[float], family: LifetimeFamily) -> tuple[float, ...]:
    bs = tuple(float(x) for x in np.atleast_1d(np.asarray(b, dtype=float)))
    if not bs:
        raise ValidationError("parameter vector must be nonempty")
    for x in bs:
        dist.check_parameter(x)
    return bs


@dataclass(frozen=True)
class ComponentLevelSystem:
    distortion: Distortion
    family: LifetimeFamily
    b: tuple[float, ...]
    # optional: only the simulation oracle needs the path sets themselves
    structure: CoherentStructure | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "b", _as_b(self.b, self.family))
        if self.structure is not None:
            if (distortion_coefficients(self.structure) != self.distortion.coeffs
                    or self.structure.n != self.distortion.copula.dim):
                raise ValidationError("structure does not match the distortion coefficients")

    @classmethod
    def build(cls, structure: CoherentStructure, copula: CopulaFamily | str, theta: float,
              family: LifetimeFamily, b: Sequence[float]) -> "ComponentLevelSystem":
        return cls(Distortion.of(structure, copula, theta), family, b, structure)

    @property
    def m(self) -> int:
        return len(self.b) - 1

    @property
    def models(self) -> list[LifetimeModel]:
        return [LifetimeModel(self.family, x) for x in self.b]

    @property
    def support_start(self) -> float:
        """Start of the open interval on which every unit has a positive density."""
        return max(m.support_start for m in self.models)

    def sf(self, t):
        return sf_component_level(self, t)

    def cdf(self, t):
        return cdf_component_level(self, t)

    def pdf(self, t):
        return pdf_component_level(self, t)

    def hazard(self, t):
        return hazard_component_level(self, t)

    def rev_hazard(self, t):
        return rev_hazard_component_level(self, t)


@dataclass(frozen=True)
class SystemLevelSystem:
    structure: CoherentStructure
    copula_family: CopulaFamily
    thetas: tuple[float, ...]
    family: LifetimeFamily
    b: tuple[float, ...]
    _distortions: tuple[Distortion, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "copula_family", CopulaFamily(self.copula_family))
        object.__setattr__(self, "b", _as_b(self.b, self.family))
        thetas = tuple(float(x) for x in np.atleast_1d(self.thetas))
        object.__setattr__(self, "thetas", thetas)
        if len(thetas) != len(self.b):
            raise ValidationError(
                f"theta vector has {len(thetas)} entries but b has {len(self.b)}")
        coeffs = distortion_coefficients(self.structure)
        ds = tuple(Distortion(coeffs, CopulaSpec(self.copula_family, th, self.structure.n))
                   for th in thetas)
        object.__setattr__(self, "_distortions", ds)

    @property
    def distortions(self) -> tuple[Distortion, ...]:
        return self._distortions

    @property
    def m(self) -> int:
        return len(self.b) - 1

    @property
    def models(self) -> list[LifetimeModel]:
        return [LifetimeModel(self.family, x) for x in self.b]

    @property
    def support_start(self) -> float:
        return max(m.support_start for m in self.models)

    def sf(self, t):
        return sf_system_level(self, t)

    def cdf(self, t):
        return cdf_system_level(self, t)

    def pdf(self, t):
        return pdf_system_level(self, t)

    def hazard(self, t):
        return hazard_system_level(self, t)

    def rev_hazard(self, t):
        return rev_hazard_system_level(self, t)


def _ret(x, like):
    return float(x) if np.ndim(like) == 0 else np.asarray(x, dtype=float)


def _times(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0):
        raise DomainError("times must be finite and nonnegative")
    return t


def _require_interior(sys, t: np.ndarray, what: str) -> None:
    lo = sys.support_start
    if np.any(t <= lo):
        bad = t[t <= lo].flat[0]
        raise PoleError(f"{what} undefined at t={bad:g}: every unit needs t > {lo:g}")


# -- component level -------------------------------------------------------

def _block_log_cdf(sys: ComponentLevelSystem, t: np.ndarray) -> np.ndarray:
    return sum(np.asarray(dist.logcdf(m, t)) for m in sys.models)


def _block_rev_hazard_sum(models, t: np.ndarray) -> np.ndarray:
    return sum(np.asarray(dist.rev_hazard(m, t)) for m in models)


def sf_component_level(sys: ComponentLevelSystem, t):
    t = _times(t)
    v = -np.expm1(_block_log_cdf(sys, t))
    return _ret(q(sys.distortion, v), t)


def cdf_component_level(sys: ComponentLevelSystem, t):
    t = _times(t)
    p = np.exp(_block_log_cdf(sys, t))
    return _ret(q_complement(sys.distortion, p), t)


def pdf_component_level(sys: ComponentLevelSystem, t):
    """q'(1 - P) * P * sum_j rh(t; b_j)."""
    t = _times(t)
    _require_interior(sys, t, "component-level density")
    p = np.exp(_block_log_cdf(sys, t))
    dq = q_derivatives_at_complement(sys.distortion, p)[0]
    return _ret(dq * p * _block_rev_hazard_sum(sys.models, t), t)


def rev_hazard_component_level(sys: ComponentLevelSystem, t):
    """q'(v) (1 - v) sum_j rh(t; b_j) / (1 - q(v)) with v = 1 - P."""
    t = _times(t)
    _require_interior(sys, t, "component-level reversed hazard")
    p = np.exp(_block_log_cdf(sys, t))
    denom = np.asarray(q_complement(sys.distortion, p))
    if np.any(denom <= 0):
        raise PoleError("component-level reversed hazard pole: system cdf is 0")
    dq = q_derivatives_at_complement(sys.distortion, p)[0]
    return _ret(dq * p * _block_rev_hazard_sum(sys.models, t) / denom, t)


def hazard_component_level(sys: ComponentLevelSystem, t):
    t = _times(t)
    s = np.asarray(sf_component_level(sys, t))
    if np.any(s <= 0):
        raise PoleError("component-level hazard pole: system survival function is 0")
    return _ret(np.asarray(pdf_component_level(sys, t)) / s, t)


# -- system level ------------------------------------------------------------

def _factors(sys: SystemLevelSystem, t: np.ndarray) -> list[np.ndarray]:
    """1 - q_{theta_j}(sf(t; b_j)) for each subsystem."""
    return [np.asarray(q_complement(d, np.asarray(dist.cdf(m, t))))
            for d, m in zip(sys.distortions, sys.models)]


def _log_factor(d: Distortion, m: LifetimeModel, t: np.ndarray) -> np.ndarray:
    """ln(1 - q(sf)), through log1p(-q) where q is small so that tiny system sf keeps its digits."""
    fac = np.asarray(q_complement(d, np.asarray(dist.cdf(m, t))), dtype=float)
    qv = np.asarray(q(d, np.asarray(dist.sf(m, t))), dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(qv < 0.5, np.log1p(-np.minimum(qv, 0.5)), np.log(fac))


def sf_system_level(sys: SystemLevelSystem, t):
    t = _times(t)
    logf = sum(_log_factor(d, m, t) for d, m in zip(sys.distortions, sys.models))
    return _ret(-np.expm1(logf), t)


def cdf_system_level(sys: SystemLevelSystem, t):
    t = _times(t)
    return _ret(np.prod(_factors(sys, t), axis=0), t)


def rev_hazard_system_level(sys: SystemLevelSystem, t):
    """sum_j q'_{theta_j}(sf_j) f_j / (1 - q_{theta_j}(sf_j))."""
    t = _times(t)
    _require_interior(sys, t, "system-level reversed hazard")
    total = np.zeros(t.shape)
    for d, m, fac in zip(sys.distortions, sys.models, _factors(sys, t)):
        if np.any(fac <= 0):
            raise PoleError("system-level reversed hazard pole: a subsystem cdf is 0")
        dq = q_derivatives_at_complement(d, np.asarray(dist.cdf(m, t)))[0]
        total = total + dq * np.asarray(dist.pdf(m, t)) / fac
    return _ret(total, t)


def pdf_system_level(sys: SystemLevelSystem, t):
    t = _times(t)
    _require_interior(sys, t, "system-level density")
    total = np.zeros(t.shape)
    facs = _factors(sys, t)
    for i, (d, m) in enumerate(zip(sys.distortions, sys.models)):
        others = np.prod([f for k, f in enumerate(facs) if k != i], axis=0) if len(facs) > 1 else 1.0
        dq = q_derivatives_at_complement(d, np.asarray(dist.cdf(m, t)))[0]
        total = total + dq * np.asarray(dist.pdf(m, t)) * others
    return _ret(total, t)


def hazard_system_level(sys: SystemLevelSystem, t):
    t = _times(t)
    s = np.asarray(sf_system_level(sys, t))
    if np.any(s <= 0):
        raise PoleError("system-level hazard pole: system survival function is 0")
    return _ret(np.asarray(pdf_system_level(sys, t)) / s, t)


# -- evaluation grids and curves ---------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Times ``x = -ln y`` for ``y`` equally spaced in ``[y_min, 1 - y_min]``; x ascending."""

    y: np.ndarray
    x: np.ndarray

    def __len__(self):
        return len(self.x)

    def restrict(self, lower: float) -> "Grid":
        keep = self.x > lower
        return Grid(self.y[keep], self.x[keep])


def default_grid(points: int = DEFAULT_GRID_POINTS, y_min: float = GRID_Y_MIN) -> Grid:
    if points < 3:
        raise ValidationError("a grid needs at least 3 points")
    y = np.linspace(y_min, 1 - y_min, points)[::-1]
    return Grid(y, -np.log(y))


def time_grid(x) -> Grid:
    x = np.sort(np.asarray(x, dtype=float))
    return Grid(np.exp(-x), x)


@dataclass
class SurvivalCurve:
    grid: Grid
    values: np.ndarray
    provenance: str = "closed-form"
    stderr: np.ndarray | None = None
    label: str = "value"

    def to_rows(self):
        for i in range(len(self.grid)):
            row = {"y": float(self.grid.y[i]), "x": float(self.grid.x[i]), self.label: float(self.values[i])}
            if self.stderr is not None:
                row["stderr"] = float(self.stderr[i])
            yield row

    def to_csv(self) -> str:
        buf = io.StringIO()
        fields = ["y", "x", self.label] + (["stderr"] if self.stderr is not None else [])
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for row in self.to_rows():
            w.writerow({k: repr(v) for k, v in row.items()})
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"provenance": self.provenance, "rows": list(self.to_rows())})

    @classmethod
    def from_csv(cls, text: str, provenance: str = "closed-form") -> "SurvivalCurve":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValidationError("empty curve file")
        label = [k for k in rows[0] if k not in ("y", "x", "stderr")][0]
        y = np.array([float(r["y"]) for r in rows])
        x = np.array([float(r["x"]) for r in rows])
        vals = np.array([float(r[label]) for r in rows])
        se = np.array([float(r["stderr"]) for r in rows]) if "stderr" in rows[0] else None
        return cls(Grid(y, x), vals, provenance, se, label)


QUANTITIES = ("sf", "cdf", "pdf", "hazard", "rev_hazard")


def curve(sys, quantity: str = "sf", grid: Grid | None = None) -> SurvivalCurve:
    """Evaluate one quantity of a system over a grid (rate functions on the open support only)."""
    if quantity not in QUANTITIES:
        raise ValidationError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")
    grid = grid or default_grid()
    if quantity in ("pdf", "hazard", "rev_hazard"):
        grid = grid.restrict(sys.support_start)
    return SurvivalCurve(grid, np.asarray(getattr(sys, quantity)(grid.x)), label=quantity)
