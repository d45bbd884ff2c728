"""Batch command line: curves, comparisons, certificates, simulation, allocation.

Usage::

    redalloc eval --scenario s.json --out curves.csv
    redalloc compare --scenario s.json
    redalloc verify --scenario s.json --theorem T3_1
    redalloc simulate --scenario s.json --seed 7 --samples 100000
    redalloc allocate --scenario s.json --format json
    redalloc example ex3.1 --out ex31.csv

Exit status is 0 on success, 1 for invalid input and 2 for a numerical
failure (a pole, an out-of-domain point, quadrature breakdown).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import allocate as alloc
from . import conditions, montecarlo, orders, presets
from .copulas import CopulaFamily
from .distributions import FamilyKind, LifetimeFamily
from .errors import DomainError, RedallocError, ValidationError
from .structure import CoherentStructure, k_out_of_n, q, q_derivatives
from .systems import ComponentLevelSystem, Grid, SystemLevelSystem, default_grid

SCHEMA = "redalloc.scenario/1"
LEVELS = ("component", "system")
DEFAULT_U_POINTS = 400


# -- scenario ---------------------------------------------------------------------

def _reject_unknown(d: dict, allowed: set, where: str) -> None:
    if not isinstance(d, dict):
        raise ValidationError(f"{where} must be an object")
    extra = sorted(set(d) - allowed)
    if extra:
        raise ValidationError(f"unknown field(s) in {where}: {', '.join(extra)}")


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"{where} must be a number, got {v!r}")
    return float(v)


def _numbers(v, where: str) -> tuple[float, ...]:
    if not isinstance(v, list) or not v:
        raise ValidationError(f"{where} must be a nonempty list of numbers")
    return tuple(_number(x, f"{where}[{i}]") for i, x in enumerate(v))


def _integer(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValidationError(f"{where} must be an integer, got {v!r}")
    return v


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ValidationError(f"missing field {where}.{key}")
    return d[key]


def _num_or_list(v) -> Any:
    return list(v) if isinstance(v, tuple) else v


@dataclass(frozen=True)
class SystemSpec:
    b: tuple[float, ...]
    theta: float | tuple[float, ...]
    level: str

    @classmethod
    def from_dict(cls, d: dict, where: str, default_level: str) -> "SystemSpec":
        _reject_unknown(d, {"b", "theta", "level"}, where)
        b = _numbers(_require(d, "b", where), f"{where}.b")
        raw = _require(d, "theta", where)
        theta = _numbers(raw, f"{where}.theta") if isinstance(raw, list) else _number(raw, f"{where}.theta")
        level = d.get("level", default_level)
        if level not in LEVELS:
            raise ValidationError(f"{where}.level must be one of {LEVELS}, got {level!r}")
        return cls(b, theta, level)

    def to_dict(self) -> dict:
        return {"b": list(self.b), "theta": _num_or_list(self.theta), "level": self.level}


@dataclass(frozen=True)
class AllocationSpec:
    b0: float
    candidates: tuple[float, ...]
    m: int
    theta: float | tuple[float, ...]

    @classmethod
    def from_dict(cls, d: dict) -> "AllocationSpec":
        w = "allocation"
        _reject_unknown(d, {"b0", "candidates", "m", "theta"}, w)
        raw = _require(d, "theta", w)
        theta = _numbers(raw, f"{w}.theta") if isinstance(raw, list) else _number(raw, f"{w}.theta")
        return cls(_number(_require(d, "b0", w), f"{w}.b0"),
                   _numbers(_require(d, "candidates", w), f"{w}.candidates"),
                   _integer(_require(d, "m", w), f"{w}.m"), theta)

    def to_dict(self) -> dict:
        return {"b0": self.b0, "candidates": list(self.candidates), "m": self.m,
                "theta": _num_or_list(self.theta)}


def _structure_from(d) -> CoherentStructure:
    if not isinstance(d, dict):
        raise ValidationError("structure must be an object")
    if "k_of_n" in d:
        _reject_unknown(d, {"k_of_n"}, "structure")
        kn = d["k_of_n"]
        if not isinstance(kn, list) or len(kn) != 2:
            raise ValidationError("structure.k_of_n must be [k, n]")
        return k_out_of_n(_integer(kn[0], "k"), _integer(kn[1], "n"))
    _reject_unknown(d, {"path_sets", "n"}, "structure")
    paths = _require(d, "path_sets", "structure")
    if not isinstance(paths, list) or not all(isinstance(p, list) for p in paths):
        raise ValidationError("structure.path_sets must be a list of lists")
    n = d.get("n")
    return CoherentStructure.from_path_sets(
        [[_integer(c, "component") for c in p] for p in paths],
        None if n is None else _integer(n, "structure.n"))


@dataclass(frozen=True)
class Scenario:
    """Declarative description of one or two systems (plus optional allocation problem).

    Parsing builds every system, so a scenario that parses is executable.
    """

    family: LifetimeFamily
    structure: CoherentStructure
    copula: CopulaFamily
    level: str
    first: SystemSpec
    second: SystemSpec | None = None
    theta_range: tuple[float, float] | None = None
    grid_points: int = 2000
    y_min: float = 1e-4
    theorem: conditions.TheoremId | None = None
    variant: str = "auto"
    allocation: AllocationSpec | None = None

    FIELDS = {"schema", "family", "alpha", "structure", "copula", "level", "first", "second",
              "theta_range", "grid", "theorem", "variant", "allocation"}

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        _reject_unknown(d, cls.FIELDS, "scenario")
        if d.get("schema") != SCHEMA:
            raise ValidationError(f"scenario schema must be {SCHEMA!r}, got {d.get('schema')!r}")
        token = _require(d, "family", "scenario")
        if token not in {k.value for k in FamilyKind}:
            raise ValidationError(f"unknown family {token!r}")
        alpha = d.get("alpha")
        if alpha is not None:
            alpha = _number(alpha, "alpha")
        family = LifetimeFamily.from_token(token, alpha)
        try:
            copula = CopulaFamily(_require(d, "copula", "scenario"))
        except ValueError:
            raise ValidationError(f"unknown copula {d['copula']!r}") from None
        level = d.get("level", "component")
        if level not in LEVELS:
            raise ValidationError(f"level must be one of {LEVELS}, got {level!r}")
        first = SystemSpec.from_dict(_require(d, "first", "scenario"), "first", level)
        second = SystemSpec.from_dict(d["second"], "second", level) if d.get("second") is not None else None
        tr = d.get("theta_range")
        if tr is not None:
            tr = _numbers(tr, "theta_range")
            if len(tr) != 2 or not tr[0] < tr[1]:
                raise ValidationError("theta_range must be [lo, hi] with lo < hi")
        grid = d.get("grid", {})
        _reject_unknown(grid, {"points", "y_min"}, "grid")
        points = _integer(grid.get("points", 2000), "grid.points")
        y_min = _number(grid.get("y_min", 1e-4), "grid.y_min")
        if points < 3 or not 0 < y_min < 0.5:
            raise ValidationError("grid needs points >= 3 and 0 < y_min < 0.5")
        theorem = d.get("theorem")
        if theorem is not None:
            try:
                theorem = conditions.TheoremId(theorem)
            except ValueError:
                raise ValidationError(f"unknown theorem {theorem!r}") from None
        variant = d.get("variant", "auto")
        if variant not in ("auto", "primary", "dual"):
            raise ValidationError(f"unknown variant {variant!r}")
        allocation = AllocationSpec.from_dict(d["allocation"]) if d.get("allocation") is not None else None
        sc = cls(family, _structure_from(_require(d, "structure", "scenario")), copula, level,
                 first, second, tr, points, y_min, theorem, variant, allocation)
        sc.systems()
        return sc

    def to_dict(self) -> dict:
        out = {"schema": SCHEMA, "family": self.family.token}
        if self.family.alpha is not None:
            out["alpha"] = self.family.alpha
        out.update({"structure": self.structure.to_dict(), "copula": self.copula.value,
                    "level": self.level, "first": self.first.to_dict()})
        if self.second is not None:
            out["second"] = self.second.to_dict()
        if self.theta_range is not None:
            out["theta_range"] = list(self.theta_range)
        out["grid"] = {"points": self.grid_points, "y_min": self.y_min}
        if self.theorem is not None:
            out["theorem"] = self.theorem.value
        out["variant"] = self.variant
        if self.allocation is not None:
            out["allocation"] = self.allocation.to_dict()
        return out

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValidationError(f"scenario is not valid JSON: {e}") from None
        return cls.from_dict(d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def _build(self, spec: SystemSpec):
        if spec.level == "component":
            if isinstance(spec.theta, tuple):
                raise ValidationError("component-level redundancy takes a single theta")
            return ComponentLevelSystem.build(self.structure, self.copula, spec.theta, self.family, spec.b)
        thetas = spec.theta if isinstance(spec.theta, tuple) else (spec.theta,) * len(spec.b)
        return SystemLevelSystem(self.structure, self.copula, thetas, self.family, spec.b)

    def systems(self) -> list:
        return [self._build(s) for s in (self.first, self.second) if s is not None]

    def comparison(self) -> conditions.Comparison:
        s = self.systems()
        return conditions.Comparison(s[0], s[1] if len(s) > 1 else None, self.theta_range)

    def grid(self, points: int | None = None) -> Grid:
        return default_grid(points or self.grid_points, self.y_min)


def load_scenario(path: str) -> Scenario:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise ValidationError(f"cannot read scenario {path!r}: {e.strerror}") from None
    return Scenario.from_json(text)


# -- output helpers ------------------------------------------------------------------

def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, str) else repr(float(v)) for v in r])
    return buf.getvalue()


def _rows_json(header: list[str], rows) -> str:
    return json.dumps([{h: (v if isinstance(v, str) else _finite(v)) for h, v in zip(header, r)}
                       for r in rows], indent=1)


def _finite(v):
    v = float(v)
    return v if np.isfinite(v) else None


def _table(header, rows, fmt: str) -> str:
    return _csv(header, rows) if fmt == "csv" else _rows_json(header, rows)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    try:
        with open(out, "w") as f:
            f.write(text)
    except OSError as e:
        raise ValidationError(f"cannot write {out!r}: {e.strerror}") from None


def _names(sc: Scenario) -> list[str]:
    return ["first", "second"][:len(sc.systems())]


# -- commands ------------------------------------------------------------------------

def cmd_distortion(sc: Scenario, args) -> str:
    u = np.linspace(0.01, 0.99, args.grid or DEFAULT_U_POINTS)
    header = ["system", "theta", "u", "q", "dq", "d2q", "R1", "R2", "R3", "R4"]
    rows = []
    for name, s in zip(_names(sc), sc.systems()):
        ds = [s.distortion] if isinstance(s, ComponentLevelSystem) else list(dict.fromkeys(s.distortions))
        for d in ds:
            q0 = np.asarray(q(d, u))
            d1, d2 = q_derivatives(d, u)
            rs = [conditions.ratio_q(k, d, u) for k in conditions.RATIO_KINDS]
            for i in range(u.size):
                rows.append([name, d.theta, u[i], q0[i], d1[i], d2[i], *(r[i] for r in rs)])
    return _table(header, rows, args.format)


def _masked(sys_, quantity: str, x: np.ndarray) -> np.ndarray:
    if quantity in ("sf", "cdf"):
        return np.asarray(getattr(sys_, quantity)(x), dtype=float)
    out = np.full(x.shape, np.nan)
    inside = x > sys_.support_start
    if quantity in ("hazard", "rev_hazard"):
        # rates are undefined where their denominator vanishes
        den = np.asarray(sys_.sf(x) if quantity == "hazard" else sys_.cdf(x))
        inside &= den > orders.UNDERFLOW
    if inside.any():
        out[inside] = getattr(sys_, quantity)(x[inside])
    return out


def cmd_eval(sc: Scenario, args) -> str:
    g = sc.grid(args.grid)
    qs = ["sf", "cdf", "pdf", "hazard", "rev_hazard"]
    header = ["system", "y", "x", *qs]
    rows = []
    for name, s in zip(_names(sc), sc.systems()):
        vals = [_masked(s, q_, g.x) for q_ in qs]
        rows += [[name, g.y[i], g.x[i], *(v[i] for v in vals)] for i in range(len(g))]
    return _table(header, rows, args.format)


def cmd_compare(sc: Scenario, args) -> str:
    systems = sc.systems()
    if len(systems) != 2:
        raise ValidationError("compare needs a scenario with first and second systems")
    a, b = systems
    g = sc.grid(args.grid)
    verdicts = orders.check_all(a, b, g)
    header = ["y", "x", "sf_ratio", "cdf_ratio", "pdf_ratio"]
    ratios = []
    for qn in ("sf", "cdf", "pdf"):
        num, den = _masked(b, qn, g.x), _masked(a, qn, g.x)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios.append(np.where(den > orders.UNDERFLOW, num / den, np.nan))
    rows = [[g.y[i], g.x[i], *(r[i] for r in ratios)] for i in range(len(g))]
    if args.format == "csv":
        sys.stderr.write(json.dumps({k: v.to_dict() for k, v in verdicts.items()}) + "\n")
        return _csv(header, rows)
    return json.dumps({"verdicts": {k: v.to_dict() for k, v in verdicts.items()},
                       "curves": json.loads(_rows_json(header, rows))}, indent=1)


def cmd_verify(sc: Scenario, args) -> str:
    tid = args.theorem or (sc.theorem.value if sc.theorem else None)
    if tid is None:
        raise ValidationError("name a theorem with --theorem or the scenario's 'theorem' field")
    try:
        tid = conditions.TheoremId(tid)
    except ValueError:
        raise ValidationError(f"unknown theorem {tid!r}") from None
    cfg = conditions.GridConfig(t_points=args.grid or sc.grid_points, y_min=sc.y_min)
    return conditions.check_theorem(tid, sc.comparison(), sc.variant, cfg).to_json(indent=1)


def _require_seed(args) -> int:
    if args.seed is None:
        raise ValidationError(f"{args.command} is randomized and needs an explicit --seed")
    if not 0 <= args.seed < 2**64:
        raise ValidationError("--seed must be an unsigned 64-bit integer")
    return args.seed


def cmd_simulate(sc: Scenario, args) -> str:
    seed = _require_seed(args)
    systems = dict(zip(_names(sc), sc.systems()))
    if args.system not in systems:
        raise ValidationError(f"the scenario has no {args.system} system")
    est = montecarlo.simulate(systems[args.system], sc.grid(args.grid), args.samples, seed, args.workers)
    if args.format == "csv":
        return est.to_csv()
    header = ["y", "x", "estimate", "stderr"]
    rows = zip(est.grid.y, est.grid.x, est.estimates, est.stderr)
    return json.dumps({"n_samples": est.n_samples, "seed": est.seed,
                       "rows": json.loads(_rows_json(header, rows))}, indent=1)


def cmd_allocate(sc: Scenario, args) -> str:
    a = sc.allocation
    if a is None:
        raise ValidationError("allocate needs an 'allocation' block in the scenario")
    pool = alloc.SparePool(sc.family, a.candidates, a.m)
    base = alloc.AllocationBase(sc.structure, sc.copula.value, a.theta, a.b0, sc.theta_range)
    report = alloc.recommend(pool, base, sc.level, sc.grid(args.grid))
    if args.format == "json":
        return report.to_json(indent=1)
    header = ["rank", "index", "spares", "mean_lifetime", "mean_truncated"]
    rows = [[str(r + 1), str(i), " ".join(f"{v:g}" for v in report.allocations[i]),
             report.means[i], str(report.truncated[i]).lower()] for r, i in enumerate(report.ranking)]
    return _csv(header, rows)


def cmd_example(args) -> str:
    p = presets.get(args.id)
    g = default_grid(args.grid) if args.grid else default_grid()
    if p.quantity in presets.INTERIOR_QUANTITIES:
        g = g.restrict(max(s.support_start for s in (p.comparison.first, p.comparison.second) if s))
    vals = p.evaluate(g)
    header = ["y", "x", p.quantity]
    rows = [[g.y[i], g.x[i], vals[i]] for i in range(len(g))]
    if args.format == "csv":
        return _csv(header, rows)
    return json.dumps({"example": p.name, "description": p.description, "claim": p.claim,
                       "theorem": p.theorem.value if p.theorem else None,
                       "rows": json.loads(_rows_json(header, rows))}, indent=1)


COMMANDS = {"distortion": cmd_distortion, "eval": cmd_eval, "compare": cmd_compare,
            "verify": cmd_verify, "simulate": cmd_simulate, "allocate": cmd_allocate}


# -- argument parsing ----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    def common(p, fmt):
        # added per subcommand: shared parent actions would share their defaults too
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--grid", type=_positive, help="number of grid points")
        p.add_argument("--format", choices=("csv", "json"), default=fmt)

    parser = _Parser(prog="redalloc", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    defaults = {"distortion": "csv", "eval": "csv", "compare": "json", "verify": "json",
                "simulate": "csv", "allocate": "json"}
    helps = {"distortion": "q, q', q'' and the ratios R1-R4 on a u-grid",
             "eval": "sf, cdf, pdf, hazard and reversed hazard curves",
             "compare": "st/hr/rh/lr verdicts and ratio curves for two systems",
             "verify": "theorem certificate",
             "simulate": "Monte Carlo survival estimate",
             "allocate": "rank the ways of filling the spare slots"}
    for name, fmt in defaults.items():
        p = sub.add_parser(name, help=helps[name])
        common(p, fmt)
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        if name == "verify":
            p.add_argument("--theorem", help="theorem tag such as T3_1 (default: the scenario's)")
        if name == "simulate":
            p.add_argument("--seed", type=int, help="master seed (required)")
            p.add_argument("--samples", type=_positive, default=100_000)
            p.add_argument("--workers", type=_positive, default=1)
            p.add_argument("--system", choices=("first", "second"), default="first")
    p = sub.add_parser("example", help="reproduce a worked example's plotted quantity")
    common(p, "csv")
    p.add_argument("id", help=f"one of {', '.join(presets.PRESETS)}")
    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "example":
            text = cmd_example(args)
        else:
            text = COMMANDS[args.command](load_scenario(args.scenario), args)
        _emit(text, args.out)
    except ValidationError as e:
        sys.stderr.write(f"redalloc: invalid input: {e}\n")
        return 1
    except (DomainError, ArithmeticError, RedallocError) as e:
        sys.stderr.write(f"redalloc: numerical failure: {e}\n")
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
