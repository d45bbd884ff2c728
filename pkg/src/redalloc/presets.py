"""The worked examples as ready-made comparisons.

Each preset records the two systems (or one, for aging-class examples),
the theorem it illustrates, the dependence interval over which its
distortion conditions are claimed, and the quantity it plots.
``ex4.1`` illustrates no theorem; ``t4.2`` is a constructed scenario for
the one theorem without a worked example.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import distributions as dist
from .conditions import Comparison, TheoremId
from .structure import CoherentStructure, k_out_of_n, parallel
from .systems import ComponentLevelSystem, Grid, SystemLevelSystem

ONE_OR_SERIES = CoherentStructure.from_path_sets([[1], [2, 3, 4]])
THREE_OF_FOUR = k_out_of_n(3, 4)
TWO_OF_THREE = k_out_of_n(2, 3)

# Pareto I shape and Clayton parameter for the aging example whose text leaves them open
EX44_ALPHA = 1.5
EX44_THETA = 8.5
# finite stand-in for an interval stated as [lo, inf)
OPEN_END = 50.0


def _component(structure, copula, theta, family, b):
    return ComponentLevelSystem.build(structure, copula, theta, family, b)


@dataclass(frozen=True)
class Preset:
    name: str
    comparison: Comparison
    theorem: TheoremId | None
    quantity: str
    description: str
    claim: str
    variant: str = "primary"

    def evaluate(self, grid: Grid) -> np.ndarray:
        """The plotted quantity on ``grid`` (ascending x)."""
        return QUANTITY_FUNCS[self.quantity](self.comparison, grid.x)


def _diff_sf(c, x):
    return np.asarray(c.second.sf(x)) - np.asarray(c.first.sf(x))


def _diff_sf_rev(c, x):
    return np.asarray(c.first.sf(x)) - np.asarray(c.second.sf(x))


def _ratio(q, flip=False):
    def f(c, x):
        a, b = np.asarray(getattr(c.first, q)(x)), np.asarray(getattr(c.second, q)(x))
        num, den = (a, b) if flip else (b, a)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(den > 1e-300, num / np.where(den > 1e-300, den, 1.0), np.nan)
    return f


def _rev_hazard(c, x):
    return np.asarray(c.first.rev_hazard(x))


def _sum_unit_rh(c, x):
    return sum(np.asarray(dist.rev_hazard(m, x)) for m in c.first.models)


QUANTITY_FUNCS: dict[str, Callable] = {
    "sf_second_minus_first": _diff_sf,
    "sf_first_minus_second": _diff_sf_rev,
    "sf_ratio": _ratio("sf"),
    "cdf_ratio": _ratio("cdf"),
    "pdf_ratio_first_over_second": _ratio("pdf", flip=True),
    "rev_hazard": _rev_hazard,
    "unit_rev_hazard_sum": _sum_unit_rh,
}

# quantities needing t strictly inside the support
INTERIOR_QUANTITIES = {"pdf_ratio_first_over_second", "rev_hazard", "unit_rev_hazard_sum"}


def _build() -> dict[str, Preset]:
    L, GE, IE, W = dist.LOMAX, dist.GENERALIZED_EXPONENTIAL, dist.INVERTED_EXPONENTIAL, dist.WEIBULL
    P = dist.pareto1(1.5)
    out = {}

    def add(name, comparison, theorem, quantity, description, claim, variant="primary"):
        out[name] = Preset(name, comparison, TheoremId(theorem) if theorem else None,
                           quantity, description, claim, variant)

    b1, b1s = (1.2, 0.5, 0.4, 0.2), (1.0, 0.5, 0.3, 0.2)
    add("ex3.1", Comparison(_component(THREE_OF_FOUR, "gumbel", 20, L, b1),
                            _component(THREE_OF_FOUR, "gumbel", 25, L, b1s), (15, OPEN_END), "ex3.1"),
        "T3_1", "sf_second_minus_first",
        "Lomax, Gumbel 3-of-4, theta 20 vs 25", "difference >= 0 (X <=_st X*)")
    add("ex3.2", Comparison(_component(ONE_OR_SERIES, "clayton", 3, GE, b1),
                            _component(ONE_OR_SERIES, "clayton", 4, GE, b1s), (2, OPEN_END), "ex3.2"),
        "T3_2", "sf_first_minus_second",
        "generalized exponential, Clayton max(X1, min(X2,X3,X4)), theta 3 vs 4",
        "difference >= 0 (X >=_st X*)")
    b3, b3s = (0.05, 0.05, 0.04, 0.02), (0.06, 0.05, 0.03, 0.02)
    add("ex3.3", Comparison(_component(THREE_OF_FOUR, "gumbel", 6, IE, b3),
                            _component(THREE_OF_FOUR, "gumbel", 7, IE, b3s), (5, 20), "ex3.3"),
        "T3_3", "sf_ratio", "inverted exponential, Gumbel 3-of-4, theta 6 vs 7",
        "sf ratio nondecreasing (X <=_hr X*)")
    add("ex3.4", Comparison(_component(THREE_OF_FOUR, "gumbel", 10, IE, b3),
                            _component(THREE_OF_FOUR, "gumbel", 7, IE, b3s), (5, 20), "ex3.4"),
        "T3_4", "sf_ratio", "inverted exponential, Gumbel 3-of-4, theta 10 vs 7",
        "sf ratio nonincreasing (X >=_hr X*)")
    b5, b5s = (0.5, 0.5, 0.4, 0.2), (0.6, 0.5, 0.3, 0.2)
    add("ex3.5", Comparison(_component(THREE_OF_FOUR, "gumbel", 20, P, b5),
                            _component(THREE_OF_FOUR, "gumbel", 25, P, b5s), (15, OPEN_END), "ex3.5"),
        "T3_5", "cdf_ratio", "Pareto I (alpha 1.5), Gumbel 3-of-4, theta 20 vs 25",
        "cdf ratio nondecreasing (X <=_rh X*)")
    add("ex3.6", Comparison(_component(THREE_OF_FOUR, "gumbel", 20, GE, b5),
                            _component(THREE_OF_FOUR, "gumbel", 15, GE, b5s), (15, OPEN_END), "ex3.6"),
        "T3_6", "cdf_ratio", "generalized exponential, Gumbel 3-of-4, theta 20 vs 15",
        "cdf ratio nonincreasing (X >=_rh X*)")
    add("ex3.7", Comparison(_component(ONE_OR_SERIES, "clayton", 7, IE, b3),
                            _component(ONE_OR_SERIES, "clayton", 6, IE, b3s), (5, 10), "ex3.7"),
        "T3_7", "pdf_ratio_first_over_second",
        "inverted exponential, Clayton max(X1, min(X2,X3,X4)), theta 7 vs 6",
        "density ratio f/f* nonincreasing (X <=_lr X*)")
    add("ex3.8", Comparison(_component(TWO_OF_THREE, "clayton", 15, W, (1.6, 0.5, 0.3, 0.2)),
                            None, (15, OPEN_END), "ex3.8"),
        "T3_8", "rev_hazard", "Weibull, Clayton 2-of-3, theta 15",
        "reversed hazard nonincreasing (DRHR)")
    add("ex4.1", Comparison(_component(THREE_OF_FOUR, "clayton", 8.5, dist.RAYLEIGH, (1.5, 1.5)),
                            SystemLevelSystem(THREE_OF_FOUR, "clayton", (8.5, 8.5), dist.RAYLEIGH,
                                              (1.5, 1.5)), None, "ex4.1"),
        None, "sf_first_minus_second",
        "Rayleigh a = 1.5, Clayton 3-of-4, theta 8.5, one matching spare; component vs system level",
        "difference changes sign (no BP dominance)")
    th42 = (20, 21, 22, 23)
    add("ex4.2", Comparison(SystemLevelSystem(THREE_OF_FOUR, "gumbel", th42, L, (0.9, 0.4, 0.1, 0.08)),
                            SystemLevelSystem(THREE_OF_FOUR, "gumbel", th42, L, (0.9, 0.5, 0.05, 0.03)),
                            (15, OPEN_END), "ex4.2"),
        "T4_1", "sf_second_minus_first", "Lomax, Gumbel 3-of-4, theta (20,21,22,23)",
        "difference >= 0 (X_s <=_st X_s*)")
    se = dist.SHIFTED_EXPONENTIAL
    add("ex4.3", Comparison(SystemLevelSystem(TWO_OF_THREE, "clayton", (2,) * 4, se, (0.5, 0.5, 0.5, 0.4)),
                            SystemLevelSystem(TWO_OF_THREE, "clayton", (2,) * 4, se, (0.9, 0.5, 0.3, 0.2)),
                            (0.5, 10), "ex4.3"),
        "T4_3", "cdf_ratio", "shifted exponential, Clayton 2-of-3, theta 2",
        "cdf ratio nondecreasing (X_s <=_rh X_s*)")
    add("ex4.4", Comparison(SystemLevelSystem(THREE_OF_FOUR, "clayton", (EX44_THETA,) * 4,
                                              dist.pareto1(EX44_ALPHA), (0.5, 0.5, 0.4, 0.2)),
                            None, (1, 10), "ex4.4"),
        "T4_4", "rev_hazard", "Pareto I (alpha 1.5), Clayton 3-of-4, theta 8.5",
        "reversed hazard nonincreasing (DRHR)")
    add("t4.2", Comparison(SystemLevelSystem(parallel(2), "gumbel", (3,) * 4, GE, (0.5, 0.4, 0.3, 0.2)),
                           SystemLevelSystem(parallel(2), "gumbel", (3,) * 4, GE, (0.6, 0.4, 0.3, 0.1)),
                           (1.5, 6), "t4.2"),
        "T4_2", "sf_first_minus_second",
        "constructed: generalized exponential, Gumbel parallel pair, theta 3",
        "difference >= 0 (X_s >=_st X_s*)")
    return out


PRESETS: dict[str, Preset] = _build()
WORKED_EXAMPLES = tuple(k for k in PRESETS if k.startswith("ex"))


def get(name: str) -> Preset:
    from .errors import ValidationError
    try:
        return PRESETS[name]
    except KeyError:
        raise ValidationError(f"unknown example {name!r}; known: {', '.join(PRESETS)}") from None
