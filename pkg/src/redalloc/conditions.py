"""Numerical certificates for the sufficient conditions of the allocation theorems.

Each theorem tag maps to a fixed checklist.  Every item is checked on a
finite grid (``u`` in [0.01, 0.99] plus a logit-spaced grid over the
arguments the systems actually feed the distortion, ``theta`` across the
scenario's stated interval, ``b`` across the hull of the parameter vectors, ``t`` on
the default time grid) and reported with its worst point and margin.  A
margin is a normalized signed quantity that is nonnegative when the
condition holds; an item passes when its margin is within tolerance.

Distortion ratios::

    R1 = (1-u) q'/q       R2 = (1-u) q'/(1-q)
    R3 = (1-u) q''/q' - 1 R4 = u q'/(1-q)
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit, logit

from . import distributions as dist
from . import orders
from .distributions import LifetimeFamily, LifetimeModel
from .errors import DomainError, ValidationError
from .structure import Distortion, q, q_complement, q_derivatives_at_complement
from .systems import ComponentLevelSystem, Grid, SystemLevelSystem, default_grid

MONOTONE_TOL = 1e-9
CURVATURE_TOL = 1e-9
# r~h' is itself a Richardson difference; its second b-differences carry that noise
NUMERIC_CURVATURE_TOL = 1e-6
SIGN_TOL = 1e-9
TINY = 1e-300


class TheoremId(str, enum.Enum):
    T3_1 = "T3_1"
    T3_2 = "T3_2"
    T3_3 = "T3_3"
    T3_4 = "T3_4"
    T3_5 = "T3_5"
    T3_6 = "T3_6"
    T3_7 = "T3_7"
    T3_8 = "T3_8"
    T4_1 = "T4_1"
    T4_2 = "T4_2"
    T4_3 = "T4_3"
    T4_4 = "T4_4"

    @property
    def level(self) -> str:
        return "component" if self.value.startswith("T3") else "system"

    @property
    def single_system(self) -> bool:
        return self in (TheoremId.T3_8, TheoremId.T4_4)


DUAL_THEOREMS = {TheoremId.T3_3, TheoremId.T3_4, TheoremId.T3_5, TheoremId.T3_6, TheoremId.T3_7}


@dataclass(frozen=True)
class GridConfig:
    u_points: int = 400
    u_range: tuple[float, float] = (0.01, 0.99)
    theta_points: int = 20
    b_points: int = 20
    t_points: int = 2000
    y_min: float = 1e-4
    cover_u: bool = True

    def u_grid(self) -> np.ndarray:
        return np.linspace(*self.u_range, self.u_points)

    def t_grid(self) -> Grid:
        return default_grid(self.t_points, self.y_min)


@dataclass
class Comparison:
    """Two systems to compare (``second`` is None for aging-class theorems).

    ``theta_range`` is the dependence interval over which the distortion
    conditions are claimed; the actual thetas are always added to it.
    """

    first: ComponentLevelSystem | SystemLevelSystem
    second: ComponentLevelSystem | SystemLevelSystem | None = None
    theta_range: tuple[float, float] | None = None
    label: str = ""


# -- distortion ratios -----------------------------------------------------------

RATIO_KINDS = ("R1", "R2", "R3", "R4")


def ratio_q(kind: str, d: Distortion, u):
    """One of the ratios R1..R4 at ``u`` in the open interval (0, 1)."""
    if kind not in RATIO_KINDS:
        raise ValidationError(f"unknown ratio {kind!r}; expected one of {RATIO_KINDS}")
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)):
        raise DomainError("ratios are evaluated on the open interval (0, 1) only")
    p = 1 - u
    d1, d2 = q_derivatives_at_complement(d, p)
    if kind == "R1":
        out = p * d1 / np.asarray(q(d, u))
    elif kind == "R2":
        out = p * d1 / np.asarray(q_complement(d, p))
    elif kind == "R3":
        out = p * d2 / d1 - 1
    else:
        out = u * d1 / np.asarray(q_complement(d, p))
    return float(out) if out.ndim == 0 else out


# -- reports -------------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


@dataclass
class ConditionReport:
    condition_id: str
    description: str
    grid: dict
    passed: bool
    worst_point: dict
    worst_margin: float
    tolerance: float

    def __post_init__(self):
        if self.passed != (self.worst_margin >= -self.tolerance):
            raise ValueError("pass flag disagrees with the margin")

    def to_dict(self) -> dict:
        return {"id": self.condition_id, "pass": bool(self.passed),
                "worst_point": _jsonable(self.worst_point), "margin": float(self.worst_margin)}


def _report(cid: str, desc: str, grid: dict, margins: np.ndarray,
            point: Callable[[tuple], dict], tol: float) -> ConditionReport:
    m = np.asarray(margins, dtype=float)
    if m.size == 0:
        return ConditionReport(cid, desc, grid, True, {}, 0.0, tol)
    m = np.where(np.isnan(m), -np.inf, m)
    flat = int(np.argmin(m))
    idx = np.unravel_index(flat, m.shape)
    worst = float(m[idx])
    if not np.isfinite(worst):
        worst = -1.0
    return ConditionReport(cid, desc, grid, worst >= -tol, point(idx), worst, tol)


def _monotone_margins(values: np.ndarray, axis: int, increasing: bool) -> np.ndarray:
    v = np.moveaxis(np.asarray(values, dtype=float), axis, -1)
    d = np.diff(v, axis=-1)
    scale = np.maximum(np.maximum(np.abs(v[..., :-1]), np.abs(v[..., 1:])), TINY)
    out = (d if increasing else -d) / scale
    return np.moveaxis(out, -1, axis)


def _curvature_margins(values: np.ndarray, axis: int, convex: bool) -> np.ndarray:
    # uniform grid along ``axis``; normalized by the magnitudes entering the stencil
    v = np.moveaxis(np.asarray(values, dtype=float), axis, -1)
    d2 = v[..., 2:] - 2 * v[..., 1:-1] + v[..., :-2]
    scale = np.maximum(np.abs(v[..., 2:]) + 2 * np.abs(v[..., 1:-1]) + np.abs(v[..., :-2]), TINY)
    out = (d2 if convex else -d2) / scale
    return np.moveaxis(out, -1, axis)


# -- individual conditions ------------------------------------------------------

def theta_order(theta1: float, theta2: float, relation: str) -> ConditionReport:
    margin = theta2 - theta1 if relation == "le" else theta1 - theta2
    sym = "<=" if relation == "le" else ">="
    return ConditionReport(f"theta1 {sym} theta2", f"dependence ordering theta1 {sym} theta2", {},
                           margin >= 0, {"theta1": theta1, "theta2": theta2}, float(margin), 0.0)


def majorization_hypothesis(b, b_star, weak: bool) -> ConditionReport:
    """``b <=_m b*`` (or ``b <=^w b*`` when ``weak``): sorted partial sums of b* never exceed those of b."""
    b, bs = np.asarray(b, float), np.asarray(b_star, float)
    if b.shape != bs.shape:
        raise ValidationError("b and b* must have the same length")
    sb, ss = np.cumsum(np.sort(b)), np.cumsum(np.sort(bs))
    slack = sb - ss
    if not weak:
        slack = np.concatenate([slack[:-1], [-abs(slack[-1])]])
    tol = orders.MAJORIZATION_TOL * max(1.0, float(np.abs(b).sum()), float(np.abs(bs).sum()))
    holds = (orders.weak_supermajorize(bs, b) if weak else orders.majorize(bs, b))
    name = "b <=^w b*" if weak else "b <=_m b*"
    rep = _report(name, f"parameter vectors satisfy {name}", {}, slack,
                  lambda i: {"partial_sum": int(i[0]) + 1}, tol)
    assert rep.passed == holds
    return rep


def ordered(vec, decreasing: bool, name: str) -> ConditionReport:
    v = np.asarray(vec, dtype=float)
    d = v[:-1] - v[1:] if decreasing else v[1:] - v[:-1]
    cls = "D+" if decreasing else "E+"
    return _report(f"{name} in {cls}", f"{name} is {'nonincreasing' if decreasing else 'nondecreasing'}",
                   {}, d, lambda i: {"index": int(i[0])}, 0.0)


def distortion_in_theta(d: Distortion, thetas: np.ndarray, u: np.ndarray, increasing: bool) -> ConditionReport:
    M = np.array([np.asarray(q(d.with_theta(t), u)) for t in thetas])
    word = "increasing" if increasing else "decreasing"
    return _report(f"q {word} in theta", f"q_theta(u) is {word} in theta",
                   _grid_desc(u=u, theta=thetas), _monotone_margins(M, 0, increasing),
                   lambda i: {"theta": thetas[i[0]], "u": u[i[1]]}, MONOTONE_TOL)


def ratio_monotone(kind: str, d: Distortion, thetas: np.ndarray, u: np.ndarray,
                   along: str, increasing: bool) -> ConditionReport:
    M = np.array([ratio_q(kind, d.with_theta(t), u) for t in thetas])
    word = "increasing" if increasing else "decreasing"
    axis = 1 if along == "u" else 0
    return _report(f"{kind} {word} in {along}", f"{kind} is {word} in {along}",
                   _grid_desc(u=u, theta=thetas), _monotone_margins(M, axis, increasing),
                   lambda i: {"theta": thetas[i[0]], "u": u[i[1]]},
                   MONOTONE_TOL)


def ratio_nonpositive(kind: str, d: Distortion, thetas: np.ndarray, u: np.ndarray) -> ConditionReport:
    M = np.array([ratio_q(kind, d.with_theta(t), u) for t in thetas])
    return _report(f"{kind} <= 0", f"{kind} is nonpositive", _grid_desc(u=u, theta=thetas), -M,
                   lambda i: {"theta": thetas[i[0]], "u": u[i[1]]}, SIGN_TOL)


def _grid_desc(**grids) -> dict:
    return {k: {"min": float(np.min(v)), "max": float(np.max(v)), "points": int(np.size(v))}
            for k, v in grids.items()}


# -- conditions on F(t; b) along b ----------------------------------------------

B_PROPERTIES = ("increasing", "decreasing", "log_concave", "log_convex",
                "rh_concave", "rh_convex", "rh_dt_convex",
                "hazard_increasing", "hazard_convex",
                "composite_increasing", "composite_convex")


def shape_t_grid(family: LifetimeFamily, b_grid, grid: Grid | None = None) -> np.ndarray:
    """Ascending times strictly inside the support for every b on the grid."""
    grid = grid or default_grid()
    lo = family.support_start(float(np.max(b_grid)))
    t = np.sort(grid.x[grid.x > lo])
    if t.size < 2:
        raise DomainError("no grid times inside the support of every b on the grid")
    return t


def _b_matrix(family: LifetimeFamily, b_grid, t, fn) -> np.ndarray:
    return np.array([np.asarray(fn(LifetimeModel(family, float(b)), t), dtype=float) for b in b_grid])


def _composite(d: Distortion):
    # sf * q'(sf) / (1 - q(sf)) written through the cdf for tail accuracy
    def fn(model, t):
        p = np.asarray(dist.cdf(model, t))
        d1 = q_derivatives_at_complement(d, p)[0]
        return (1 - p) * d1 / np.asarray(q_complement(d, p))
    return fn


def check_b_shape(family: LifetimeFamily, prop: str, t_grid, b_grid,
                  distortion: Distortion | None = None) -> ConditionReport:
    """Sign test of first or second differences along ``b`` at every ``t``.

    ``prop`` is one of :data:`B_PROPERTIES`.  ``rh`` is the reversed hazard,
    ``rh_dt`` its time derivative and ``composite`` the map
    ``b -> sf q'(sf) / (1 - q(sf))`` (needs ``distortion``).
    """
    if prop not in B_PROPERTIES:
        raise ValidationError(f"unknown b-shape property {prop!r}; expected one of {B_PROPERTIES}")
    g = dist.validate_b_grid(b_grid)
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= family.support_start(g[-1])):
        raise DomainError(f"t must exceed the support start {family.support_start(g[-1]):g} "
                          f"for every b on the grid")
    tol = CURVATURE_TOL
    if prop in ("increasing", "decreasing", "log_concave", "log_convex"):
        M = _b_matrix(family, g, t, dist.logcdf)
        if prop in ("increasing", "decreasing"):
            margins = _monotone_margins(M, 0, prop == "increasing")
            tol = MONOTONE_TOL
        else:
            margins = _curvature_margins(M, 0, prop == "log_convex")
    elif prop.startswith("rh_dt"):
        M = _b_matrix(family, g, t, dist.rev_hazard_dt)
        margins = _curvature_margins(M, 0, True)
        tol = NUMERIC_CURVATURE_TOL
    elif prop.startswith("rh"):
        M = _b_matrix(family, g, t, dist.rev_hazard)
        margins = _curvature_margins(M, 0, prop == "rh_convex")
    elif prop.startswith("hazard"):
        M = _b_matrix(family, g, t, dist.hazard)
        margins = (_monotone_margins(M, 0, True) if prop == "hazard_increasing"
                   else _curvature_margins(M, 0, True))
        tol = MONOTONE_TOL if prop == "hazard_increasing" else CURVATURE_TOL
    else:
        if distortion is None:
            raise ValidationError("the composite property needs a distortion")
        M = _b_matrix(family, g, t, _composite(distortion))
        margins = (_monotone_margins(M, 0, True) if prop == "composite_increasing"
                   else _curvature_margins(M, 0, True))
        tol = MONOTONE_TOL if prop == "composite_increasing" else CURVATURE_TOL
    offset = 0 if prop in ("increasing", "decreasing", "hazard_increasing", "composite_increasing") else 1
    return _report(f"{prop} in b", f"{_PROP_TEXT[prop]} in b", _grid_desc(b=g, t=t), margins,
                   lambda i: {"b": g[i[0] + offset], "t": t[i[1]]}, tol)


_PROP_TEXT = {
    "increasing": "F(t;b) is increasing", "decreasing": "F(t;b) is decreasing",
    "log_concave": "F(t;b) is log-concave", "log_convex": "F(t;b) is log-convex",
    "rh_concave": "reversed hazard is concave", "rh_convex": "reversed hazard is convex",
    "rh_dt_convex": "time derivative of the reversed hazard is convex",
    "hazard_increasing": "hazard is increasing", "hazard_convex": "hazard is convex",
    "composite_increasing": "sf q'(sf)/(1-q(sf)) is increasing",
    "composite_convex": "sf q'(sf)/(1-q(sf)) is convex",
}


def check_drhr(evaluator: Callable[[np.ndarray], np.ndarray], t_grid,
               condition_id: str = "DRHR", description: str = "reversed hazard is nonincreasing in t"
               ) -> ConditionReport:
    """Pass iff ``evaluator`` is nonincreasing along the ascending ``t_grid`` within tolerance."""
    t = np.sort(np.asarray(t_grid, dtype=float))
    v = np.asarray(evaluator(t), dtype=float) * np.ones(t.shape)
    return _report(condition_id, description, _grid_desc(t=t), _monotone_margins(v, 0, False),
                   lambda i: {"t": t[i[0]]}, MONOTONE_TOL)


def family_drhr(family: LifetimeFamily, b_grid, t_grid) -> ConditionReport:
    g = np.asarray(b_grid, dtype=float)
    t = np.sort(np.asarray(t_grid, dtype=float))
    M = _b_matrix(family, g, t, dist.rev_hazard)
    return _report("F in DRHR", "F(t;b) has nonincreasing reversed hazard for each b",
                   _grid_desc(b=g, t=t), _monotone_margins(M, 1, False),
                   lambda i: {"b": g[i[0]], "t": t[i[1]]}, MONOTONE_TOL)


# -- theorem checklists ------------------------------------------------------------

@dataclass
class Conclusion:
    kind: str               # st, hr, rh, lr or DRHR
    direction: str | None   # A_below_B / B_below_A for orders

    def describe(self) -> str:
        if self.kind == "DRHR":
            return "X in DRHR"
        op = {"A_below_B": "<=", "B_below_A": ">="}[self.direction]
        return f"X {op}_{self.kind} X*"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "direction": self.direction, "statement": self.describe()}


@dataclass
class TheoremCertificate:
    theorem: TheoremId
    variant: str
    reports: list[ConditionReport]
    implied: Conclusion
    verified: orders.OrderVerdict | ConditionReport | None = None

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def failed(self) -> list[ConditionReport]:
        return [r for r in self.reports if not r.passed]

    @property
    def agrees(self) -> bool | None:
        """Whether the independent verification matches the implied conclusion (None if not run)."""
        if self.verified is None:
            return None
        if isinstance(self.verified, ConditionReport):
            return self.verified.passed
        return self.verified.holds(self.implied.direction)

    def to_dict(self) -> dict:
        verified = None
        if isinstance(self.verified, orders.OrderVerdict):
            verified = self.verified.to_dict()
        elif isinstance(self.verified, ConditionReport):
            verified = self.verified.to_dict()
        return {"theorem": self.theorem.value, "variant": self.variant,
                "conditions": [r.to_dict() for r in self.reports],
                "all_pass": self.all_pass, "implied": self.implied.describe(),
                "verified": verified, "agrees": self.agrees}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


_ORDER_CONCLUSIONS = {
    # theorem: (kind, direction of the unbracketed statement)
    TheoremId.T3_1: ("st", "A_below_B"), TheoremId.T3_2: ("st", "B_below_A"),
    TheoremId.T3_3: ("hr", "A_below_B"), TheoremId.T3_4: ("hr", "B_below_A"),
    TheoremId.T3_5: ("rh", "A_below_B"), TheoremId.T3_6: ("rh", "B_below_A"),
    TheoremId.T3_7: ("lr", "A_below_B"),
    TheoremId.T4_1: ("st", "A_below_B"), TheoremId.T4_2: ("st", "B_below_A"),
    TheoremId.T4_3: ("rh", "A_below_B"),
}
_FLIP = {"A_below_B": "B_below_A", "B_below_A": "A_below_B"}


def conclusion_of(tid: TheoremId, variant: str = "primary") -> Conclusion:
    tid = TheoremId(tid)
    if tid.single_system:
        return Conclusion("DRHR", None)
    kind, direction = _ORDER_CONCLUSIONS[tid]
    # the bracketed lr statement keeps its conclusion; only the theta direction flips
    if variant == "dual" and tid is not TheoremId.T3_7:
        direction = _FLIP[direction]
    return Conclusion(kind, direction)


def _check_shape(tid: TheoremId, cmp: Comparison) -> None:
    want = ComponentLevelSystem if tid.level == "component" else SystemLevelSystem
    systems = [cmp.first] if tid.single_system else [cmp.first, cmp.second]
    if any(s is None for s in systems):
        raise ValidationError(f"{tid.value} compares two systems; the scenario has one")
    for s in systems:
        if not isinstance(s, want):
            raise ValidationError(f"{tid.value} needs {tid.level}-level systems, got {type(s).__name__}")
    if tid.single_system:
        return
    a, b = systems
    if a.family != b.family:
        raise ValidationError("both systems must share the lifetime family")
    if len(a.b) != len(b.b):
        raise ValidationError("both systems need the same number of spares")
    if want is ComponentLevelSystem:
        if a.distortion.coeffs != b.distortion.coeffs or a.distortion.copula.family != b.distortion.copula.family:
            raise ValidationError("both systems must share the structure and copula family")
    elif a.structure != b.structure or a.copula_family != b.copula_family:
        raise ValidationError("both systems must share the structure and copula family")


def _thetas_of(sys) -> list[float]:
    return [sys.distortion.theta] if isinstance(sys, ComponentLevelSystem) else list(sys.thetas)


def theta_grid(cmp: Comparison, points: int) -> np.ndarray:
    vals = _thetas_of(cmp.first) + (_thetas_of(cmp.second) if cmp.second is not None else [])
    lo, hi = min(vals), max(vals)
    if cmp.theta_range is not None:
        lo, hi = min(lo, cmp.theta_range[0]), max(hi, cmp.theta_range[1])
    if hi == lo:
        return np.array([lo])
    # the systems' own thetas are grid nodes: monotonicity can fail inside one cell
    return np.unique(np.concatenate([np.linspace(lo, hi, points), vals]))


def b_grid(cmp: Comparison, points: int) -> np.ndarray:
    vals = list(cmp.first.b) + (list(cmp.second.b) if cmp.second is not None else [])
    lo, hi = min(vals), max(vals)
    if hi - lo < 1e-9 * hi:
        lo, hi = 0.9 * lo, 1.1 * hi
    return np.linspace(lo, hi, points)


U_CLAMP = 1e-12


def _distortion_arguments(sys, t: np.ndarray) -> np.ndarray:
    """The u values ``sys`` hands its distortion(s) at times ``t``."""
    if isinstance(sys, ComponentLevelSystem):
        logp = sum(np.asarray(dist.logcdf(m, t)) for m in sys.models)
        return -np.expm1(logp)
    return np.concatenate([np.asarray(dist.sf(m, t)) for m in sys.models])


def condition_u_grid(cmp: Comparison, cfg: GridConfig) -> np.ndarray:
    """The fixed u-grid, joined with a logit-spaced grid over the range the systems reach.

    "For all u" conditions only bite where the systems operate; near the
    ends of (0, 1) the fixed grid alone can miss a failure.
    """
    base = cfg.u_grid()
    if not cfg.cover_u:
        return base
    t = cfg.t_grid().x
    u = np.concatenate([_distortion_arguments(s, t[t > s.support_start])
                        for s in (cmp.first, cmp.second) if s is not None])
    u = u[(u >= U_CLAMP) & (u <= 1 - U_CLAMP)]
    if u.size < 2 or u.min() == u.max():
        return base
    cover = expit(np.linspace(logit(u.min()), logit(u.max()), max(24, cfg.u_points // 8)))
    # inside the fixed range the fixed grid is already dense
    cover = cover[(cover < base.min()) | (cover > base.max())]
    return np.unique(np.concatenate([base, cover]))


def _base_distortion(sys) -> Distortion:
    return sys.distortion if isinstance(sys, ComponentLevelSystem) else sys.distortions[0]


def _checklist(tid: TheoremId, variant: str, cmp: Comparison, cfg: GridConfig) -> list[ConditionReport]:
    dual = variant == "dual"
    A, B = cmp.first, cmp.second
    fam = A.family
    d = _base_distortion(A)
    u = condition_u_grid(cmp, cfg)
    th = theta_grid(cmp, cfg.theta_points)
    bg = b_grid(cmp, cfg.b_points)
    tg = shape_t_grid(fam, bg, cfg.t_grid())
    shape = lambda prop, **kw: check_b_shape(fam, prop, tg, bg, **kw)  # noqa: E731
    maj = lambda weak=False: majorization_hypothesis(A.b, B.b, weak)  # noqa: E731

    if tid is TheoremId.T3_1:
        return [theta_order(A.distortion.theta, B.distortion.theta, "le"),
                distortion_in_theta(d, th, u, True), shape("increasing"), shape("log_concave"),
                maj(weak=True)]
    if tid is TheoremId.T3_2:
        return [theta_order(A.distortion.theta, B.distortion.theta, "le"),
                distortion_in_theta(d, th, u, False), shape("decreasing"), shape("log_convex"),
                maj(weak=True)]
    if tid in (TheoremId.T3_3, TheoremId.T3_4, TheoremId.T3_5, TheoremId.T3_6):
        first_half = tid in (TheoremId.T3_3, TheoremId.T3_5)
        ratio = "R1" if tid in (TheoremId.T3_3, TheoremId.T3_4) else "R2"
        # unbracketed ratio direction: R1 decreasing, R2 increasing
        inc = (ratio == "R2") != dual
        # unbracketed curvature of r~h: T3_3 concave, T3_4 convex, T3_5 convex, T3_6 concave
        convex = {TheoremId.T3_3: False, TheoremId.T3_4: True,
                  TheoremId.T3_5: True, TheoremId.T3_6: False}[tid] != dual
        return [theta_order(A.distortion.theta, B.distortion.theta, "le" if first_half else "ge"),
                shape("log_concave" if first_half else "log_convex"),
                shape("rh_convex" if convex else "rh_concave"),
                ratio_monotone(ratio, d, th, u, "u", inc),
                ratio_monotone(ratio, d, th, u, "theta", inc),
                maj()]
    if tid is TheoremId.T3_7:
        return [theta_order(A.distortion.theta, B.distortion.theta, "le" if dual else "ge"),
                shape("log_concave"), family_drhr(fam, bg, tg),
                shape("rh_convex"), shape("rh_dt_convex"),
                ratio_nonpositive("R3", d, th, u),
                ratio_monotone("R3", d, th, u, "u", False),
                ratio_monotone("R3", d, th, u, "theta", not dual),
                maj()]
    if tid is TheoremId.T3_8:
        t = np.sort(cfg.t_grid().x)
        t = t[t > A.support_start]
        models = A.models
        return [ratio_monotone("R2", d, np.array([d.theta]), u, "u", True),
                check_drhr(lambda s: sum(np.asarray(dist.rev_hazard(m, s)) for m in models), t,
                           "sum of unit reversed hazards decreasing",
                           "sum_j rh(t; b_j) is nonincreasing in t")]
    if tid in (TheoremId.T4_1, TheoremId.T4_2):
        up = tid is TheoremId.T4_1
        reps = [_same_thetas(A, B),
                shape("increasing" if up else "decreasing"),
                shape("log_concave" if up else "log_convex"),
                ratio_monotone("R2", d, th, u, "u", up),
                ratio_monotone("R2", d, th, u, "theta", up),
                ordered(A.b, True, "b"), ordered(B.b, True, "b*")]
        if up:
            reps.append(ordered(A.thetas, False, "theta"))
        reps.append(maj())
        return reps
    if tid is TheoremId.T4_3:
        return [_same_thetas(A, B), _common_theta(A),
                shape("hazard_increasing"), shape("hazard_convex"),
                shape("composite_increasing", distortion=d), shape("composite_convex", distortion=d),
                maj()]
    if tid is TheoremId.T4_4:
        uniq = np.unique(A.thetas)
        t = np.sort(cfg.t_grid().x)
        sys_b = np.unique(A.b)
        return [ratio_monotone("R4", d, uniq, u, "u", True),
                family_drhr(fam, sys_b, t[t > A.support_start])]
    raise AssertionError(tid)


def _same_thetas(A: SystemLevelSystem, B: SystemLevelSystem) -> ConditionReport:
    diff = np.abs(np.asarray(A.thetas) - np.asarray(B.thetas))
    return _report("shared theta vector", "both systems use the same dependence vector", {},
                   -diff, lambda i: {"index": int(i[0])}, 0.0)


def _common_theta(A: SystemLevelSystem) -> ConditionReport:
    th = np.asarray(A.thetas)
    return _report("common theta", "all subsystems share one theta", {}, -np.abs(th - th[0]),
                   lambda i: {"index": int(i[0])}, 0.0)


def verify_conclusion(tid: TheoremId, cmp: Comparison, conclusion: Conclusion, cfg: GridConfig):
    grid = cfg.t_grid()
    if conclusion.kind == "DRHR":
        sys = cmp.first
        t = np.sort(grid.x)
        t = t[t > sys.support_start]
        # where the system cdf underflows the reversed hazard is 0/0; drop those times
        t = t[np.asarray(sys.cdf(t)) > TINY]
        return check_drhr(sys.rev_hazard, t,
                          "system DRHR", "system reversed hazard is nonincreasing in t")
    return orders.check_order(conclusion.kind, cmp.first, cmp.second, grid)


def check_theorem(tid: TheoremId | str, cmp: Comparison, variant: str = "auto",
                  cfg: GridConfig | None = None, verify: bool = True) -> TheoremCertificate:
    """Check every hypothesis of ``tid`` on ``cmp`` and, if all hold, verify the conclusion.

    ``variant`` selects the unbracketed (``"primary"``) or bracketed
    (``"dual"``) statement; ``"auto"`` tries the primary first and falls back
    to the dual when the primary fails and the dual passes.
    """
    tid = TheoremId(tid)
    cfg = cfg or GridConfig()
    if variant not in ("auto", "primary", "dual"):
        raise ValidationError(f"unknown variant {variant!r}")
    if variant == "dual" and tid not in DUAL_THEOREMS:
        raise ValidationError(f"{tid.value} has no bracketed statement")
    _check_shape(tid, cmp)
    variants = [variant] if variant != "auto" else (
        ["primary", "dual"] if tid in DUAL_THEOREMS else ["primary"])
    cert = None
    for v in variants:
        c = TheoremCertificate(tid, v, _checklist(tid, v, cmp, cfg), conclusion_of(tid, v))
        if cert is None:
            cert = c
        if c.all_pass:
            cert = c
            break
    if verify and cert.all_pass:
        cert.verified = verify_conclusion(tid, cmp, cert.implied, cfg)
    return cert


# -- randomized scenarios ---------------------------------------------------------------

def _with_b(sys, b):
    return replace(sys, b=tuple(float(x) for x in b))


def _with_thetas(sys, thetas):
    if isinstance(sys, ComponentLevelSystem):
        return replace(sys, distortion=sys.distortion.with_theta(float(thetas)))
    return SystemLevelSystem(sys.structure, sys.copula_family, tuple(thetas), sys.family, sys.b)


def _spread(rng, b):
    """Random chain of T-transforms: the result is majorized by ``b``."""
    out = np.asarray(b, dtype=float)
    for _ in range(rng.integers(1, 4)):
        i, j = rng.choice(out.size, 2, replace=False)
        out = orders.t_transform(out, i, j, rng.uniform(0.5, 1.0))
    return out


def randomized_comparisons(tid: TheoremId | str, base: Comparison, count: int = 200,
                           seed: int = 0, variant: str = "primary") -> list[Comparison]:
    """Random scenarios around ``base`` whose parameter vectors satisfy the theorem's majorization.

    ``b*`` is a random rescaling of the base ``b*``; ``b`` is obtained from
    it by T-transforms (plus nonnegative bumps for weak majorization).
    Thetas are drawn from the base's stated interval in the direction the
    chosen variant requires.
    """
    tid = TheoremId(tid)
    rng = np.random.default_rng(np.random.SeedSequence([seed, int(tid.value[1]), int(tid.value[3])]))
    if base.theta_range is None:
        raise ValidationError("randomized scenarios need a stated theta interval")
    lo, hi = base.theta_range
    out = []
    for _ in range(count):
        if tid.single_system:
            bb = np.asarray(base.first.b) * rng.uniform(0.7, 1.3, len(base.first.b))
            sys = _with_b(base.first, bb)
            if isinstance(sys, ComponentLevelSystem):
                sys = _with_thetas(sys, rng.uniform(lo, hi))
            else:
                sys = _with_thetas(sys, np.full(len(bb), rng.uniform(lo, hi)))
            out.append(Comparison(sys, None, base.theta_range, base.label))
            continue
        bstar = np.asarray(base.second.b) * rng.uniform(0.7, 1.3, len(base.second.b))
        b = _spread(rng, bstar)
        if tid in (TheoremId.T3_1, TheoremId.T3_2):
            b = b + rng.uniform(0, 0.1, b.size) * (rng.uniform(size=b.size) < 0.5) * b
        if tid.level == "system":
            b, bstar = np.sort(b)[::-1], np.sort(bstar)[::-1]
        first, second = _with_b(base.first, b), _with_b(base.second, bstar)
        if tid.level == "component":
            t1, t2 = np.sort(rng.uniform(lo, hi, 2))
            want_le = {TheoremId.T3_1: True, TheoremId.T3_2: True, TheoremId.T3_3: True,
                       TheoremId.T3_4: False, TheoremId.T3_5: True, TheoremId.T3_6: False,
                       TheoremId.T3_7: variant == "dual"}[tid]
            if not want_le:
                t1, t2 = t2, t1
            first, second = _with_thetas(first, t1), _with_thetas(second, t2)
        else:
            n = len(b)
            thetas = (np.sort(rng.uniform(lo, hi, n)) if tid is TheoremId.T4_1
                      else np.full(n, rng.uniform(lo, hi)))
            first, second = _with_thetas(first, thetas), _with_thetas(second, thetas)
        out.append(Comparison(first, second, base.theta_range, base.label))
    return out
