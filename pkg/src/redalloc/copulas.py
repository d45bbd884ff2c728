"""Exchangeable Clayton, Gumbel and FGM copulas.

The distortion machinery only ever needs the copula on its *partial
diagonal*: ``j`` arguments equal to ``u`` and the remaining ``n - j`` equal
to 1.  Closed forms (``w_j(u) = j - (j - 1) u^theta``)::

    Clayton  u * w_j(u)^(-1/theta)            (= (j u^-theta - (j-1))^(-1/theta))
    Gumbel   u ** (j ** (1/theta))
    FGM      u**j for j < n,  u**n (1 + theta (1-u)**n) for j = n

The FGM product term carries a factor ``1 - 1 = 0`` whenever some argument
equals 1, so FGM dependence is invisible to every strict subset of the
components.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError, UnsupportedSamplerError


class CopulaFamily(str, enum.Enum):
    CLAYTON = "clayton"
    GUMBEL = "gumbel"
    FGM = "fgm"


def check_theta(family: CopulaFamily, theta: float) -> None:
    family = CopulaFamily(family)
    if not np.isfinite(theta):
        raise ParameterError(f"theta must be finite, got {theta!r}")
    if family is CopulaFamily.CLAYTON and (theta < -1 or theta == 0):
        raise ParameterError(f"Clayton theta must lie in [-1, inf) without 0, got {theta:g}")
    if family is CopulaFamily.GUMBEL and theta < 1:
        raise ParameterError(f"Gumbel theta must be >= 1, got {theta:g}")
    if family is CopulaFamily.FGM and not -1 <= theta <= 1:
        raise ParameterError(f"FGM theta must lie in [-1, 1], got {theta:g}")


@dataclass(frozen=True)
class CopulaSpec:
    family: CopulaFamily
    theta: float
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "family", CopulaFamily(self.family))
        object.__setattr__(self, "theta", float(self.theta))
        check_theta(self.family, self.theta)
        # dim 1 is allowed so a single-component structure has a distortion;
        # its only partial diagonal (j = 1) is the identity
        if int(self.dim) != self.dim or self.dim < 1:
            raise ParameterError(f"copula dimension must be a positive integer, got {self.dim!r}")

    def with_theta(self, theta: float) -> "CopulaSpec":
        return CopulaSpec(self.family, theta, self.dim)


def _check_j(spec: CopulaSpec, j: int) -> None:
    if not 0 <= j <= spec.dim:
        raise DomainError(f"j={j} outside [0, {spec.dim}]")


def _check_u(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if np.any(~(u >= 0) | ~(u <= 1)):
        raise DomainError("copula arguments must lie in [0, 1]")
    return u


def _clayton_logw(theta: float, j: int, logu: np.ndarray) -> np.ndarray:
    # log(j - (j-1) u^theta) = log1p(-(j-1) * expm1(theta * log u))
    with np.errstate(over="ignore", invalid="ignore"):
        arg = -(j - 1) * np.expm1(theta * logu)
        bad = arg <= -1
        if np.any(bad):
            raise DomainError(
                f"Clayton theta={theta:g}, j={j}: j*u^-theta - (j-1) <= 0 at "
                f"u={np.exp(logu[bad].flat[0]):.6g} (outside the grounded region)")
        return np.log1p(arg)


def _log_diag(spec: CopulaSpec, j: int, logu: np.ndarray) -> np.ndarray:
    """log C(u,..,u,1,..,1) for u > 0."""
    th = spec.theta
    if spec.family is CopulaFamily.CLAYTON:
        return logu - _clayton_logw(th, j, logu) / th
    if spec.family is CopulaFamily.GUMBEL:
        return j ** (1.0 / th) * logu
    out = j * logu
    if j == spec.dim:
        out = out + np.log1p(th * (-np.expm1(logu)) ** spec.dim)
    return out


def partial_diagonal(spec: CopulaSpec, j: int, u):
    """C(u, ..., u, 1, ..., 1) with ``j`` arguments equal to ``u``."""
    _check_j(spec, j)
    u = _check_u(u)
    if j == 0:
        out = np.ones(u.shape)
    elif j == 1:
        out = u.copy()
    else:
        out = np.zeros(u.shape)
        pos = u > 0
        if np.any(pos):
            out[pos] = np.exp(_log_diag(spec, j, np.log(u[pos])))
    return float(out) if out.ndim == 0 else out


def partial_diagonal_complement(spec: CopulaSpec, j: int, p):
    """``1 - C_j(1 - p)``, accurate when ``p`` is small."""
    _check_j(spec, j)
    p = _check_u(p)
    if j == 0:
        out = np.zeros(p.shape)
    elif j == 1:
        out = p.copy()
    else:
        out = np.ones(p.shape)
        live = p < 1
        if np.any(live):
            pl = p[live]
            logu = np.log1p(-pl)
            if spec.family is CopulaFamily.FGM and j == spec.dim:
                out[live] = -np.expm1(j * logu) - spec.theta * np.exp(j * logu) * pl**j
            else:
                out[live] = -np.expm1(_log_diag(spec, j, logu))
    return float(out) if out.ndim == 0 else out


def partial_diagonal_derivatives(spec: CopulaSpec, j: int, u):
    """First and second derivatives in ``u`` of the partial diagonal, for u in (0, 1)."""
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)):
        raise DomainError("diagonal derivatives are only evaluated on the open interval (0, 1)")
    return _derivatives(spec, j, np.log(u), u, 1 - u)


def partial_diagonal_derivatives_at_complement(spec: CopulaSpec, j: int, p):
    """Derivatives at ``u = 1 - p``, keeping full precision when ``p`` is tiny."""
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise DomainError("diagonal derivatives are only evaluated on the open interval (0, 1)")
    return _derivatives(spec, j, np.log1p(-p), 1 - p, p)


def _derivatives(spec: CopulaSpec, j: int, logu, u, p):
    _check_j(spec, j)
    th, n = spec.theta, spec.dim
    if j == 0:
        return np.zeros(u.shape), np.zeros(u.shape)
    if j == 1:
        return np.ones(u.shape), np.zeros(u.shape)
    if spec.family is CopulaFamily.CLAYTON:
        logw = _clayton_logw(th, j, logu)
        d1 = j * np.exp((-1.0 / th - 1.0) * logw)
        d2 = j * (1 + th) * (j - 1) * np.exp((th - 1) * logu + (-1.0 / th - 2.0) * logw)
        return d1, d2
    if spec.family is CopulaFamily.GUMBEL:
        c = j ** (1.0 / th)
        return c * np.exp((c - 1) * logu), c * (c - 1) * np.exp((c - 2) * logu)
    d1 = j * np.exp((j - 1) * logu)
    d2 = j * (j - 1) * np.exp((j - 2) * logu)
    if j == n:
        v = u * p
        d1 = d1 + th * n * v ** (n - 1) * (1 - 2 * u)
        d2 = d2 + th * n * v ** (n - 2) * ((n - 1) * (1 - 2 * u) ** 2 - 2 * v)
    return d1, d2


# -- sampling -------------------------------------------------------------

def _log_positive_stable(rng: np.random.Generator, alpha: float, size: int) -> np.ndarray:
    """log of a positive alpha-stable draw with Laplace transform exp(-s**alpha).

    Kanter's representation of the Chambers-Mallows-Stuck generator.
    """
    theta = rng.uniform(0.0, np.pi, size)
    w = rng.standard_exponential(size)
    return (np.log(np.sin(alpha * theta))
            + (1 - alpha) / alpha * (np.log(np.sin((1 - alpha) * theta)) - np.log(w))
            - np.log(np.sin(theta)) / alpha)


def sample(spec: CopulaSpec, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` iid rows from the copula; deterministic in ``seed``.

    Clayton and Gumbel use Marshall-Olkin frailty mixing (Gamma and positive
    stable frailties); FGM uses acceptance-rejection against the uniform
    with the density bound ``1 + |theta|``.
    """
    if count < 1:
        raise ParameterError("count must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))
    n, th = spec.dim, spec.theta
    if spec.family is CopulaFamily.CLAYTON:
        if th <= 0:
            raise UnsupportedSamplerError("Clayton sampling is only supported for theta > 0")
        shape = 1.0 / th
        # Gamma(a) = Gamma(a + 1) * U**(1/a) keeps small-shape draws away from underflow
        logv = np.log(rng.gamma(shape + 1.0, size=count)) + np.log(rng.uniform(size=count)) / shape
        loge = np.log(rng.standard_exponential((count, n)))
        return np.exp(-np.logaddexp(0.0, loge - logv[:, None]) / th)
    if spec.family is CopulaFamily.GUMBEL:
        alpha = 1.0 / th
        logv = np.zeros(count) if th == 1 else _log_positive_stable(rng, alpha, count)
        loge = np.log(rng.standard_exponential((count, n)))
        return np.exp(-np.exp(alpha * (loge - logv[:, None])))
    out = np.empty((count, n))
    filled = 0
    bound = 1 + abs(th)
    while filled < count:
        batch = max(1024, int(1.2 * bound * (count - filled)))
        cand = rng.uniform(size=(batch, n))
        dens = 1 + th * np.prod(1 - 2 * cand, axis=1)
        keep = cand[rng.uniform(size=batch) * bound <= dens]
        take = min(len(keep), count - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
    return out


def diagonal_extended(spec: CopulaSpec, j: int, p: float, dps: int):
    """(C_j, 1 - C_j, C_j', C_j'') at ``u = 1 - p`` in ``dps``-digit arithmetic.

    Used to re-evaluate signed sums over ``j`` that cancel in double
    precision; ``p`` is taken as an exact binary value.  Everything is
    routed through ``log1p``/``expm1`` so each term keeps full relative
    precision even when ``p`` is tiny.
    """
    import mpmath

    with mpmath.workdps(dps):
        p = mpmath.mpf(p)
        u = 1 - p
        logu = mpmath.log1p(-p)
        th = mpmath.mpf(spec.theta)
        if j == 0:
            return mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(0), mpmath.mpf(0)
        if j == 1:
            return u, p, mpmath.mpf(1), mpmath.mpf(0)
        if spec.family is CopulaFamily.CLAYTON:
            arg = -(j - 1) * mpmath.expm1(th * logu)
            if arg <= -1:
                raise DomainError(f"Clayton theta={spec.theta:g}, j={j}: outside the grounded region")
            logw = mpmath.log1p(arg)
            logval = logu - logw / th
            d1 = j * mpmath.exp((-1 / th - 1) * logw)
            d2 = j * (1 + th) * (j - 1) * mpmath.exp((th - 1) * logu + (-1 / th - 2) * logw)
        elif spec.family is CopulaFamily.GUMBEL:
            c = mpmath.mpf(j) ** (1 / th)
            logval = c * logu
            d1 = c * mpmath.exp((c - 1) * logu)
            d2 = c * (c - 1) * mpmath.exp((c - 2) * logu)
        else:
            n = spec.dim
            logval = j * logu
            d1 = j * u ** (j - 1)
            d2 = j * (j - 1) * u ** (j - 2)
            if j == n:
                v = u * p
                logval = logval + mpmath.log1p(th * p**n)
                d1 = d1 + th * n * v ** (n - 1) * (1 - 2 * u)
                d2 = d2 + th * n * v ** (n - 2) * ((n - 1) * (1 - 2 * u) ** 2 - 2 * v)
        return mpmath.exp(logval), -mpmath.expm1(logval), d1, d2
