"""Coherent structures and their distortion functions.

For identically distributed components whose joint survival function is
governed by an exchangeable copula ``C``, the system reliability is a
distortion ``q(u)`` of the component reliability ``u``.  Inclusion-exclusion
over the minimal path sets ``P_1, ..., P_r`` gives::

    q(u) = sum_{S nonempty subset of {1..r}} (-1)^(|S|+1) C_{|union of P_S|}(u)
         = sum_j a_j C_j(u)

where ``C_j`` is the partial diagonal of the copula.
"""

from __future__ import annotations

import functools
import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import copulas
from .copulas import CopulaFamily, CopulaSpec
from .errors import DomainError, ValidationError

MAX_PATH_SETS = 25
ENDPOINT_CLAMP = 1e-12


@dataclass(frozen=True)
class CoherentStructure:
    n: int
    min_path_sets: tuple[frozenset[int], ...]
    k_of_n: tuple[int, int] | None = field(default=None, compare=False)

    def __post_init__(self):
        paths = tuple(frozenset(int(c) for c in p) for p in self.min_path_sets)
        object.__setattr__(self, "min_path_sets", paths)
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"n must be a positive integer, got {self.n!r}")
        if not paths:
            raise ValidationError("a structure needs at least one path set")
        universe = set(range(1, self.n + 1))
        for p in paths:
            if not p:
                raise ValidationError("path sets must be nonempty")
            if not p <= universe:
                raise ValidationError(f"path set {sorted(p)} has components outside 1..{self.n}")
        if len(set(paths)) != len(paths):
            raise ValidationError("duplicate path sets")
        for p, r in itertools.permutations(paths, 2):
            if p < r:
                raise ValidationError(f"path sets are not minimal: {sorted(p)} is inside {sorted(r)}")
        if set().union(*paths) != universe:
            missing = sorted(universe - set().union(*paths))
            raise ValidationError(f"components {missing} are irrelevant (in no path set)")

    @classmethod
    def from_path_sets(cls, path_sets: Iterable[Iterable[int]], n: int | None = None) -> "CoherentStructure":
        paths = tuple(frozenset(p) for p in path_sets)
        if n is None:
            n = max(max(p) for p in paths)
        return cls(n, paths)

    def lifetime(self, component_lifetimes: np.ndarray) -> np.ndarray:
        """System lifetime: max over path sets of the min within each set (last axis = components)."""
        x = np.asarray(component_lifetimes)
        best = None
        for p in self.min_path_sets:
            life = x[..., [c - 1 for c in sorted(p)]].min(axis=-1)
            best = life if best is None else np.maximum(best, life)
        return best

    def to_dict(self) -> dict:
        if self.k_of_n is not None:
            return {"k_of_n": list(self.k_of_n)}
        return {"path_sets": [sorted(p) for p in self.min_path_sets], "n": self.n}


def k_out_of_n(k: int, n: int) -> CoherentStructure:
    """Works iff at least ``k`` of the ``n`` components work."""
    if not 1 <= k <= n:
        raise ValidationError(f"need 1 <= k <= n, got k={k}, n={n}")
    paths = tuple(frozenset(c) for c in itertools.combinations(range(1, n + 1), k))
    return CoherentStructure(n, paths, k_of_n=(k, n))


def series(n: int) -> CoherentStructure:
    return k_out_of_n(n, n)


def parallel(n: int) -> CoherentStructure:
    return k_out_of_n(1, n)


def distortion_coefficients(structure: CoherentStructure) -> dict[int, int]:
    """Integer coefficients ``a_j`` of the partial diagonals ``C_j``.

    Inclusion-exclusion is accumulated path set by path set, keeping a
    signed count per union bitmask.  This visits exactly the same terms as
    the sum over all ``2**r - 1`` sub-collections, merged by union.
    """
    paths = structure.min_path_sets
    if len(paths) > MAX_PATH_SETS:
        raise ValidationError(
            f"{len(paths)} path sets exceed the enumeration bound of {MAX_PATH_SETS}")
    signed: dict[int, int] = defaultdict(int)
    for p in paths:
        mask = sum(1 << (c - 1) for c in p)
        update: dict[int, int] = defaultdict(int)
        update[mask] += 1
        for other, count in signed.items():
            update[other | mask] -= count
        for key, count in update.items():
            signed[key] += count
    coeffs: dict[int, int] = defaultdict(int)
    for mask, count in signed.items():
        if count:
            coeffs[bin(mask).count("1")] += count
    return {j: a for j, a in sorted(coeffs.items()) if a != 0}


def reliability_polynomial(structure: CoherentStructure, u):
    """System reliability for independent components: sum_j a_j u^j."""
    u = np.asarray(u, dtype=float)
    return sum(a * u**j for j, a in distortion_coefficients(structure).items())


@dataclass(frozen=True)
class Distortion:
    coeffs: Mapping[int, int]
    copula: CopulaSpec

    def __post_init__(self):
        coeffs = {int(j): int(a) for j, a in dict(self.coeffs).items() if a != 0}
        object.__setattr__(self, "coeffs", coeffs)
        if not coeffs:
            raise ValidationError("empty distortion")
        if min(coeffs) < 1 or max(coeffs) > self.copula.dim:
            raise ValidationError(f"subset sizes {sorted(coeffs)} must lie in 1..{self.copula.dim}")
        if sum(coeffs.values()) != 1:
            raise ValidationError(f"coefficients must sum to 1 (q(1) = 1), got {sum(coeffs.values())}")

    @classmethod
    def of(cls, structure: CoherentStructure, family: CopulaFamily | str, theta: float) -> "Distortion":
        return cls(distortion_coefficients(structure), CopulaSpec(family, theta, structure.n))

    @property
    def theta(self) -> float:
        return self.copula.theta

    def with_theta(self, theta: float) -> "Distortion":
        return Distortion(self.coeffs, self.copula.with_theta(theta))

    def __hash__(self):
        return hash((tuple(sorted(self.coeffs.items())), self.copula))


def _check_open(u):
    u = np.asarray(u, dtype=float)
    if np.any(~(u >= 0) | ~(u <= 1)):
        raise DomainError("distortion argument must lie in [0, 1]")
    return u


def _ret(x, like):
    return float(x) if np.ndim(like) == 0 else np.asarray(x, dtype=float)


# A signed sum over subset sizes can cancel almost completely (e.g. q'(1) = 0
# for a parallel-of-series structure).  Points that lose more than
# CANCELLATION_DIGITS digits are recomputed in extended precision.
CANCELLATION_DIGITS = 4
MAX_DPS = 2560
AGREEMENT = 1e-17


def _guarded_sum(d: Distortion, terms: list[np.ndarray], p: np.ndarray, slot: int) -> np.ndarray:
    total = np.zeros(p.shape)
    scale = np.zeros(p.shape)
    for t in terms:
        total = total + t
        scale = scale + np.abs(t)
    bad = np.abs(total) < scale * 10.0**-CANCELLATION_DIGITS
    if np.any(bad):
        idx = np.flatnonzero(bad)
        flat_total = total.reshape(-1)
        flat_p = p.reshape(-1)
        for i in idx:
            flat_total[i] = _extended_sum(d, float(flat_p[i]), slot)
        total = flat_total.reshape(p.shape)
    return total


@functools.lru_cache(maxsize=1 << 16)
def _extended_sum(d: Distortion, p: float, slot: int) -> float:
    """The signed sum at one point, doubling the working precision until two levels agree.

    Cached: condition checks revisit the same (distortion, point) pairs.
    """
    import mpmath

    def at(dps):
        with mpmath.workdps(dps):
            return mpmath.fsum(a * copulas.diagonal_extended(d.copula, j, p, dps)[slot]
                               for j, a in d.coeffs.items())

    dps = 40
    prev = at(dps)
    while dps < MAX_DPS:
        dps *= 2
        cur = at(dps)
        if abs(cur - prev) <= AGREEMENT * abs(cur):
            return float(cur)
        prev = cur
    raise DomainError(f"extended-precision sum did not settle at p={p:g} within {MAX_DPS} digits")


def q(d: Distortion, u):
    """System reliability given component reliability ``u``."""
    u = _check_open(u)
    terms = [a * np.asarray(copulas.partial_diagonal(d.copula, j, u)) for j, a in d.coeffs.items()]
    return _ret(_guarded_sum(d, terms, 1 - u, 0), u)


def q_complement(d: Distortion, p):
    """``1 - q(1 - p)``: the system failure probability given component failure probability ``p``."""
    p = _check_open(p)
    terms = [a * np.asarray(copulas.partial_diagonal_complement(d.copula, j, p))
             for j, a in d.coeffs.items()]
    return _ret(_guarded_sum(d, terms, p, 1), p)


def _derivs(d: Distortion, kernel, x, p):
    parts = [kernel(d.copula, j, x) for j in d.coeffs]
    d1 = _guarded_sum(d, [a * g[0] for a, g in zip(d.coeffs.values(), parts)], p, 2)
    d2 = _guarded_sum(d, [a * g[1] for a, g in zip(d.coeffs.values(), parts)], p, 3)
    return d1, d2


def q_derivatives(d: Distortion, u):
    """(q', q'') at ``u``; endpoints are clamped into [1e-12, 1 - 1e-12]."""
    u = _check_open(u)
    uc = np.clip(u, ENDPOINT_CLAMP, 1 - ENDPOINT_CLAMP)
    d1, d2 = _derivs(d, copulas.partial_diagonal_derivatives, uc, 1 - uc)
    return _ret(d1, u), _ret(d2, u)


def q_derivatives_at_complement(d: Distortion, p):
    """(q', q'') at ``u = 1 - p``; accurate when the failure probability ``p`` is tiny.

    Only ``p = 0`` itself needs clamping here: ``log1p(-p)`` is exact down to
    the smallest normal float.
    """
    p = _check_open(p)
    pc = np.clip(p, np.finfo(float).tiny, 1 - ENDPOINT_CLAMP)
    d1, d2 = _derivs(d, copulas.partial_diagonal_derivatives_at_complement, pc, pc)
    return _ret(d1, p), _ret(d2, p)


def q_prime(d: Distortion, u):
    return q_derivatives(d, u)[0]


def q_second(d: Distortion, u):
    return q_derivatives(d, u)[1]


# -- printed closed forms, evaluated literally ---------------------------

def _gumbel_3of4(u, th):
    lu = -np.log(u)
    return 4 * np.exp(-(3 * lu**th) ** (1 / th)) - 3 * np.exp(-(4 * lu**th) ** (1 / th))


def _clayton_1_or_234(u, th):
    return u + (3 * u**-th - 2) ** (-1 / th) - (4 * u**-th - 3) ** (-1 / th)


def _clayton_2of3(u, th):
    return 3 * (2 * u**-th - 1) ** (-1 / th) - 2 * (3 * u**-th - 2) ** (-1 / th)


def _clayton_3of4(u, th):
    return 4 * (3 * u**-th - 2) ** (-1 / th) - 3 * (4 * u**-th - 3) ** (-1 / th)


PRINTED_FORMS = {
    "gumbel_3of4": _gumbel_3of4,
    "clayton_max_1_min_234": _clayton_1_or_234,
    "clayton_2of3": _clayton_2of3,
    "clayton_3of4": _clayton_3of4,
}


def check_closed_form(d: Distortion, printed_form: str, u_grid) -> float:
    """Largest absolute gap between the generic ``q`` and a hard-coded printed formula."""
    try:
        form = PRINTED_FORMS[printed_form]
    except KeyError:
        raise ValidationError(f"unknown printed form {printed_form!r}; "
                              f"known: {', '.join(PRINTED_FORMS)}") from None
    u = np.asarray(u_grid, dtype=float)
    with np.errstate(all="ignore"):
        printed = form(u, d.theta)
    return float(np.max(np.abs(np.asarray(q(d, u)) - printed)))
