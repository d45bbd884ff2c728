"""Parametric lifetime families F(t; b) used by the redundancy models.

Each family is indexed by a single positive parameter ``b`` (``a`` for the
Rayleigh law).  Everything is computed in log space internally so that the
block products ``prod_j F(t; b_j)`` stay accurate in both tails.

Support convention: below the support the cdf is 0, above it 1.  The
density, hazard and reversed hazard are only defined on the open support
and raise :class:`~redalloc.errors.DomainError` elsewhere.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, ParameterError, PoleError
from .numdiff import central_diff


class FamilyKind(str, enum.Enum):
    LOMAX = "lomax"
    GENERALIZED_EXPONENTIAL = "generalized_exponential"
    INVERTED_EXPONENTIAL = "inverted_exponential"
    PARETO1 = "pareto1"
    WEIBULL = "weibull"
    RAYLEIGH = "rayleigh"
    SHIFTED_EXPONENTIAL = "shifted_exponential"


@dataclass(frozen=True)
class LifetimeFamily:
    """A family tag; ``alpha`` is the fixed Pareto I shape and unused otherwise."""

    kind: FamilyKind
    alpha: float | None = None

    def __post_init__(self):
        if self.kind is FamilyKind.PARETO1:
            if self.alpha is None or not self.alpha > 0:
                raise ParameterError(f"Pareto I needs a shape alpha > 0, got {self.alpha!r}")
        elif self.alpha is not None:
            raise ParameterError(f"{self.kind.value} takes no shape parameter")

    @property
    def token(self) -> str:
        return self.kind.value

    @classmethod
    def from_token(cls, token: str, alpha: float | None = None) -> "LifetimeFamily":
        try:
            kind = FamilyKind(token)
        except ValueError:
            known = ", ".join(k.value for k in FamilyKind)
            raise ParameterError(f"unknown family {token!r}; expected one of {known}") from None
        if kind is FamilyKind.PARETO1 and alpha is None:
            alpha = 1.5
        return cls(kind, alpha)

    def support_start(self, b: float) -> float:
        if self.kind in (FamilyKind.PARETO1, FamilyKind.SHIFTED_EXPONENTIAL):
            return float(b)
        return 0.0

    def __str__(self):
        if self.kind is FamilyKind.PARETO1:
            return f"pareto1(alpha={self.alpha:g})"
        return self.kind.value


LOMAX = LifetimeFamily(FamilyKind.LOMAX)
GENERALIZED_EXPONENTIAL = LifetimeFamily(FamilyKind.GENERALIZED_EXPONENTIAL)
INVERTED_EXPONENTIAL = LifetimeFamily(FamilyKind.INVERTED_EXPONENTIAL)
WEIBULL = LifetimeFamily(FamilyKind.WEIBULL)
RAYLEIGH = LifetimeFamily(FamilyKind.RAYLEIGH)
SHIFTED_EXPONENTIAL = LifetimeFamily(FamilyKind.SHIFTED_EXPONENTIAL)


def pareto1(alpha: float = 1.5) -> LifetimeFamily:
    return LifetimeFamily(FamilyKind.PARETO1, float(alpha))


@dataclass(frozen=True)
class LifetimeModel:
    family: LifetimeFamily
    b: float

    def __post_init__(self):
        check_parameter(self.b)

    @property
    def support_start(self) -> float:
        return self.family.support_start(self.b)


def check_parameter(b: float) -> None:
    if not np.isfinite(b) or b <= 0:
        raise ParameterError(f"parameter b must be a finite positive real, got {b!r}")


# -- per-family kernels, valid for t strictly inside the support ----------

def _log1mexp(x):
    """log(1 - exp(x)) for x < 0, accurate on both sides of -ln 2."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(x > -0.6931471805599453, np.log(-np.expm1(x)), np.log1p(-np.exp(x)))


def _kernels(family: LifetimeFamily, t, b):
    """Return (logcdf, logsf, logpdf, dF/db) at interior times ``t``."""
    k = family.kind
    if k is FamilyKind.LOMAX:
        logsf = -b * np.log1p(t)
        return _log1mexp(logsf), logsf, np.log(b) - (b + 1) * np.log1p(t), np.exp(logsf) * np.log1p(t)
    if k is FamilyKind.GENERALIZED_EXPONENTIAL:
        r = np.sqrt(b)
        base = _log1mexp(-t)  # log(1 - e^{-t})
        logcdf = r * base
        logpdf = np.log(r) + (r - 1) * base - t
        return logcdf, _log1mexp(logcdf), logpdf, np.exp(logcdf) * base / (2 * r)
    if k is FamilyKind.INVERTED_EXPONENTIAL:
        with np.errstate(over="ignore"):
            logcdf = -b / t
        return logcdf, _log1mexp(logcdf), np.log(b) - 2 * np.log(t) + logcdf, -np.exp(logcdf) / t
    if k is FamilyKind.PARETO1:
        a = family.alpha
        logsf = a * (np.log(b) - np.log(t))
        logpdf = np.log(a) + a * np.log(b) - (a + 1) * np.log(t)
        return _log1mexp(logsf), logsf, logpdf, -a * b ** (a - 1) * t**-a
    if k is FamilyKind.WEIBULL:
        tb = t**b
        logpdf = np.log(b) + (b - 1) * np.log(t) - tb
        return _log1mexp(-tb), -tb, logpdf, np.exp(-tb) * tb * np.log(t)
    if k is FamilyKind.RAYLEIGH:
        logsf = -b * t**2
        return _log1mexp(logsf), logsf, np.log(2 * b * t) + logsf, t**2 * np.exp(logsf)
    if k is FamilyKind.SHIFTED_EXPONENTIAL:
        logsf = -(t - b)
        return _log1mexp(logsf), logsf, logsf, -np.exp(logsf)
    raise AssertionError(k)


def _prep(model: LifetimeModel, t):
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)):
        raise DomainError("evaluation times must be finite")
    lo = model.support_start
    return t, t > lo


def _ret(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def logcdf(model: LifetimeModel, t):
    t, inside = _prep(model, t)
    out = np.full(t.shape, -np.inf)
    if np.any(inside):
        out[inside] = _kernels(model.family, t[inside], model.b)[0]
    return _ret(out, t)


def logsf(model: LifetimeModel, t):
    t, inside = _prep(model, t)
    out = np.zeros(t.shape)
    if np.any(inside):
        out[inside] = _kernels(model.family, t[inside], model.b)[1]
    return _ret(out, t)


def cdf(model: LifetimeModel, t):
    """Distribution function; 0 below the support."""
    return _ret(np.exp(np.asarray(logcdf(model, t))), t)


def sf(model: LifetimeModel, t):
    """Survival function ``1 - cdf``; 1 below the support."""
    return _ret(np.exp(np.asarray(logsf(model, t))), t)


def _interior(model: LifetimeModel, t, what: str, pole=False):
    t, inside = _prep(model, t)
    if not np.all(inside):
        bad = t[~inside].flat[0]
        cls = PoleError if pole else DomainError
        raise cls(f"{what} of {model.family} (b={model.b:g}) undefined at t={bad:g}: "
                  f"outside the open support (>{model.support_start:g})")
    return t, _kernels(model.family, t, model.b)


def pdf(model: LifetimeModel, t):
    t, (_, _, lp, _) = _interior(model, t, "pdf")
    return _ret(np.exp(lp), t)


def hazard(model: LifetimeModel, t):
    t, (_, ls, lp, _) = _interior(model, t, "hazard")
    if np.any(np.isneginf(ls)):
        raise PoleError("hazard pole: survival function is 0")
    return _ret(np.exp(lp - ls), t)


def rev_hazard(model: LifetimeModel, t):
    t, (lc, _, lp, _) = _interior(model, t, "reversed hazard", pole=True)
    if np.any(np.isneginf(lc)):
        raise PoleError("reversed hazard pole: cdf is 0")
    return _ret(np.exp(lp - lc), t)


def rev_hazard_dt(model: LifetimeModel, t):
    """Time derivative of the reversed hazard (numerical, Richardson-extrapolated)."""
    t = np.asarray(t, dtype=float)
    h = np.maximum(1e-6, np.abs(t) * 1e-6)
    h = np.minimum(h, (t - model.support_start) / 4)
    return _ret(central_diff(lambda s: np.asarray(rev_hazard(model, s)), t, h), t)


def cdf_partial_b(model: LifetimeModel, t):
    """dF(t; b)/db from the closed form; 0 outside the open support."""
    t, inside = _prep(model, t)
    out = np.zeros(t.shape)
    if np.any(inside):
        out[inside] = _kernels(model.family, t[inside], model.b)[3]
    return _ret(out, t)


def cdf_partial_b_numeric(model: LifetimeModel, t):
    """Finite-difference fallback for dF/db, used to cross-check the closed forms."""
    t = np.asarray(t, dtype=float)
    fam = model.family
    return _ret(central_diff(lambda bb: cdf(LifetimeModel(fam, float(bb)), t), model.b), t)


@dataclass(frozen=True)
class CurvatureReport:
    """Sign pattern of second differences of a function sampled along ``b``."""

    b_grid: np.ndarray
    second_differences: np.ndarray
    tolerance: float

    @property
    def concave(self) -> bool:
        return bool(np.all(self.second_differences <= self.tolerance))

    @property
    def convex(self) -> bool:
        return bool(np.all(self.second_differences >= -self.tolerance))

    @property
    def label(self) -> str:
        if self.concave and self.convex:
            return "linear"
        if self.concave:
            return "concave"
        if self.convex:
            return "convex"
        return "mixed"


def second_differences(values, grid) -> np.ndarray:
    """Divided second differences on a possibly nonuniform grid."""
    v = np.asarray(values, dtype=float)
    x = np.asarray(grid, dtype=float)
    d1 = np.diff(v) / np.diff(x)
    return np.diff(d1) / ((x[2:] - x[:-2]) / 2)


def curvature_tolerance(values, grid) -> float:
    v = np.asarray(values, dtype=float)
    h = np.min(np.diff(np.asarray(grid, dtype=float)))
    return 64 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(v)))) / h**2


def validate_b_grid(b_grid: Sequence[float]) -> np.ndarray:
    g = np.asarray(b_grid, dtype=float)
    if g.ndim != 1 or g.size < 3:
        raise DomainError("b grid needs at least 3 points")
    if np.any(np.diff(g) <= 0):
        raise DomainError("b grid must be strictly increasing")
    if g[0] <= 0 or not np.all(np.isfinite(g)):
        raise DomainError(f"b grid touches the parameter boundary (min {g[0]:g} <= 0)")
    return g


def log_cdf_b_curvature(family: LifetimeFamily, t: float, b_grid) -> CurvatureReport:
    """Curvature of ``b -> ln F(t; b)`` along ``b_grid``."""
    g = validate_b_grid(b_grid)
    if t <= family.support_start(g[-1]):
        raise DomainError(f"t={t:g} must exceed the support start for every b on the grid")
    vals = np.array([logcdf(LifetimeModel(family, float(b)), t) for b in g])
    return CurvatureReport(g, second_differences(vals, g), curvature_tolerance(vals, g))
