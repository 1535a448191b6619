"""Command-line front end.

Subcommands: ``orderstat``, ``system``, ``signature``, ``sweep``,
``validate``.  Every run takes a YAML config (``--config``); data goes to
stdout, diagnostics to stderr.  Exit codes: 0 success, 2 config or
validation error, 3 capacity refused, 4 numeric/convergence failure.

Config schema (sections used depend on the subcommand)::

    model:
      kind: independent | finite | multinomial | mvg
      # independent: either an explicit list ...
      marginals:
        - {dist: poisson, lam: 1.0}
        - {dist: negbin, R: 2, p: 0.5}
        - {dist: geometric, pi: 0.5}
        - {dist: finite, probs: [0.5, 0.5]}
      # ... or one spec replicated (declares exchangeability):
      marginal: {dist: poisson, lam: 1.0}
      count: 10
      exchangeable: true            # optional declaration for the list form
      # finite: explicit joint pmf
      points: [[0, 0], [0, 1]]
      probs: [0.5, 0.5]
      # multinomial: counts vector of `trials` balls in len(probs) cells
      trials: 20
      probs: [0.1, 0.1, ...]
      # mvg: common-shock geometric parameters
      n: 3
      theta: {"1": 0.8, "1,2,3": 0.9}   # subset -> theta, keys "i,j,k"
      levels: [0.9, 0.99]               # exchangeable alternative to theta

    structure:
      n: 5
      path_sets: [[1, 2], [3, 4], [1, 3, 5], [2, 4, 5]]
      cut_sets: [[1, 4], [2, 3], [1, 3, 5], [2, 4, 5]]   # optional
      samaniego: ["0", "1/5", "3/5", "1/5", "0"]          # optional

    requests:                       # orderstat / system
      ranks: [1, 2, 3]              # orderstat only; default 1..n
      moments: [1, 2]               # default [1, 2]
      d: 0.0005                     # error bound for truncated runs
    # or an explicit list: requests: [{r: 3, p: 2, d: 0.0005}, ...]

    sweep:                          # sweep: IID systems over a parameter grid
      family: geometric | poisson
      parameter: pi | lam
      values: [0.05, 0.10, 0.15]
      moments: [1, 2]
      d: 0.0005                     # poisson family only

    validate:                       # validate: oracle cross-checks
      rank: 1                       # statistic: a rank ...
      # (or the structure section as the statistic)
      p: 1
      samples: 200000
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from fractions import Fraction
from typing import Sequence

import yaml

from .distributions import (
    ExplicitFinitePMF,
    FinitePMF,
    Geometric,
    IndependentMarginals,
    JointModel,
    MarginalDist,
    MvgModel,
    NegBin,
    Poisson,
    multinomial_pmf,
)
from .errors import CapacityError, LifemomentsError, NumericError, ValidationError
from .mvg import (
    MvgParams,
    factorial_to_raw,
    mvg_orderstat_factorial_moment,
)
from .oracle import enumerate_moment, mc_moment
from .orderstats import (
    MomentRequest,
    approx_moment,
    exact_moment_finite,
    plan_generic,
    plan_negbin,
    plan_poisson,
)
from .systems import (
    SystemStructure,
    alpha_coefficients,
    beta_coefficients,
    maximal_signature,
    minimal_signature,
    signature_from_samaniego,
    system_moment_approx,
    system_moment_exact,
    system_moment_mvg,
)

__all__ = ["main"]

_RNG_NAME = "numpy.default_rng (PCG64)"


def _note(msg: str):
    print(f"# {msg}", file=sys.stderr)


def _require(mapping, key: str, where: str):
    if not isinstance(mapping, dict):
        raise ValidationError(f"{where} must be a mapping")
    if key not in mapping:
        raise ValidationError(f"{where} is missing required key {key!r}")
    return mapping[key]


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = yaml.safe_load(fh)
    except OSError as e:
        raise ValidationError(f"cannot read config {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ValidationError(f"config {path} is not valid YAML: {e}") from e
    if not isinstance(cfg, dict):
        raise ValidationError(f"config {path} must be a mapping at top level")
    return cfg


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def build_marginal(spec) -> MarginalDist:
    dist = _require(spec, "dist", "marginal spec")
    if dist == "poisson":
        return Poisson(_require(spec, "lam", "poisson spec"))
    if dist == "negbin":
        return NegBin(_require(spec, "R", "negbin spec"), _require(spec, "p", "negbin spec"))
    if dist == "geometric":
        return Geometric(_require(spec, "pi", "geometric spec"))
    if dist == "finite":
        return FinitePMF(_require(spec, "probs", "finite marginal spec"))
    raise ValidationError(f"unknown marginal dist {dist!r}")


def _parse_subset_key(key) -> frozenset[int]:
    if isinstance(key, int):
        return frozenset([key])
    try:
        return frozenset(int(tok) for tok in str(key).split(","))
    except ValueError as e:
        raise ValidationError(f"theta key {key!r} is not a comma-separated index set") from e


def build_mvg_params(spec) -> MvgParams:
    n = int(_require(spec, "n", "mvg model spec"))
    has_theta = "theta" in spec
    has_levels = "levels" in spec
    if has_theta == has_levels:
        raise ValidationError("mvg model spec needs exactly one of 'theta' or 'levels'")
    if has_theta:
        theta = {_parse_subset_key(k): float(v) for k, v in _require(spec, "theta", "mvg spec").items()}
        return MvgParams(n, theta=theta)
    return MvgParams(n, exchangeable_levels=[float(v) for v in spec["levels"]])


def build_model(spec) -> JointModel:
    kind = _require(spec, "kind", "model spec")
    if kind == "independent":
        if "count" in spec:
            count = int(spec["count"])
            if count < 1:
                raise ValidationError(f"count={count} must be >= 1")
            base = _require(spec, "marginal", "model spec with count")
            margs = [build_marginal(base) for _ in range(count)]
            return IndependentMarginals(margs, exchangeable=True)
        margs = [build_marginal(s) for s in _require(spec, "marginals", "independent model spec")]
        return IndependentMarginals(margs, exchangeable=bool(spec.get("exchangeable", False)))
    if kind == "finite":
        return ExplicitFinitePMF(
            _require(spec, "points", "finite model spec"),
            _require(spec, "probs", "finite model spec"),
            exchangeable=bool(spec.get("exchangeable", False)),
        )
    if kind == "multinomial":
        return multinomial_pmf(
            int(_require(spec, "trials", "multinomial spec")),
            [float(x) for x in _require(spec, "probs", "multinomial spec")],
        )
    if kind == "mvg":
        return MvgModel(build_mvg_params(spec))
    raise ValidationError(f"unknown model kind {kind!r}")


def build_structure(spec) -> SystemStructure:
    return SystemStructure(
        int(_require(spec, "n", "structure spec")),
        path_sets=spec.get("path_sets"),
        cut_sets=spec.get("cut_sets"),
    )


def _expand_requests(cfg: dict, n: int, flag_d, with_ranks: bool) -> list[tuple[int | None, int, float | None]]:
    """Normalize the requests section to a list of (r, p, d) triples."""
    raw = cfg.get("requests", {})
    out: list[tuple[int | None, int, float | None]] = []
    if isinstance(raw, list):
        for item in raw:
            r = int(_require(item, "r", "request")) if with_ranks else None
            p = int(_require(item, "p", "request"))
            d = item.get("d", flag_d)
            out.append((r, p, None if d is None else float(d)))
        return out
    if not isinstance(raw, dict):
        raise ValidationError("requests must be a list or a mapping")
    moments = [int(p) for p in raw.get("moments", [1, 2])]
    d = flag_d if flag_d is not None else raw.get("d")
    d = None if d is None else float(d)
    if with_ranks:
        ranks = [int(r) for r in raw.get("ranks", range(1, n + 1))]
        return [(r, p, d) for r in ranks for p in moments]
    return [(None, p, d) for p in moments]


# ---------------------------------------------------------------------------
# routing
# ---------------------------------------------------------------------------

def _plan_for(model: IndependentMarginals, req: MomentRequest):
    margs = model.marginals
    if all(isinstance(m, Poisson) for m in margs):
        return plan_poisson([m.lam for m in margs], req)
    if all(isinstance(m, NegBin) for m in margs) and len({m.R for m in margs}) == 1:
        return plan_negbin(margs[0].R, [m.p for m in margs], req)
    j0 = max(range(len(margs)), key=lambda j: (margs[j].mean(), -j)) + 1
    dist = margs[j0 - 1]
    return plan_generic(lambda m: dist.tail_moment(req.p, m), req, j0)


def _orderstat_cell(model: JointModel, r: int, p: int, d) -> dict:
    """value plus truncation metadata for one (rank, moment) cell."""
    n = model.n
    if isinstance(model, MvgModel):
        fms = [mvg_orderstat_factorial_moment(model.params, r, n, q) for q in range(1, p + 1)]
        return {"value": factorial_to_raw(fms)[p - 1], "M0": None}
    if model.support_max() is not None:
        res = exact_moment_finite(model, MomentRequest(r=r, n=n, p=p))
        return {"value": res.value, "M0": None}
    if d is None:
        raise ValidationError(
            f"rank {r}, p={p}: infinite support needs an error bound (request d or --d)"
        )
    req = MomentRequest(r=r, n=n, p=p, d=d)
    plan = _plan_for(model, req)
    res = approx_moment(model, req, plan)
    return {"value": res.value, "M0": plan.M0}


def _system_cell(model: JointModel, structure: SystemStructure, p: int, d) -> dict:
    if isinstance(model, MvgModel):
        fms = [system_moment_mvg(model.params, structure, q) for q in range(1, p + 1)]
        return {"value": factorial_to_raw(fms)[p - 1], "M0": None}
    if model.support_max() is not None:
        return {"value": system_moment_exact(model, structure, p).value, "M0": None}
    if d is None:
        raise ValidationError(f"p={p}: infinite support needs an error bound (request d or --d)")
    res = system_moment_approx(model, structure, p, d)
    return {"value": res.value, "M0": res.M0_used}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(x, full: bool) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, Fraction)):
        return str(x)
    if isinstance(x, float):
        return repr(x) if full else f"{x:.3f}"
    return str(x)


def _emit(header: list[str], rows: list[list], fmt: str, full: bool):
    cells = [[_fmt(c, full) for c in row] for row in rows]
    if fmt == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows(cells)
        return
    widths = [
        max(len(h), *(len(row[i]) for row in cells)) if cells else len(h)
        for i, h in enumerate(header)
    ]
    print("  ".join(h.rjust(w) for h, w in zip(header, widths)))
    for row in cells:
        print("  ".join(c.rjust(w) for c, w in zip(row, widths)))


def _moment_row(cells: dict[int, dict], moments: list[int]) -> tuple[list[str], list]:
    """Columns p<q> (+ M0_p<q> when truncated) for each moment, then var."""
    header, row = [], []
    any_m0 = any(cells[p]["M0"] is not None for p in moments)
    for p in moments:
        header.append(f"p{p}")
        row.append(cells[p]["value"])
        if any_m0:
            header.append(f"M0_p{p}")
            row.append(cells[p]["M0"])
    if 1 in cells and 2 in cells:
        header.append("var")
        m1, m2 = cells[1]["value"], cells[2]["value"]
        row.append(m2 - m1 * m1)
    return header, row


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_orderstat(cfg: dict, args) -> int:
    model = build_model(_require(cfg, "model", "config"))
    triples = _expand_requests(cfg, model.n, args.d, with_ranks=True)
    if not triples:
        _emit(["r"], [], args.format, args.precision == "full")
        return 0
    ranks = list(dict.fromkeys(r for r, _, _ in triples))
    moments = list(dict.fromkeys(p for _, p, _ in triples))
    cells: dict[int, dict[int, dict]] = {}
    for r, p, d in triples:
        cells.setdefault(r, {})[p] = _orderstat_cell(model, r, p, d)
    header, rows = None, []
    for r in ranks:
        h, row = _moment_row(cells[r], [p for p in moments if p in cells[r]])
        if header is None:
            header = ["r"] + h
        rows.append([r] + row)
    _note(f"model n={model.n}; ranks={ranks}; moments={moments}")
    _emit(header, rows, args.format, args.precision == "full")
    return 0


def cmd_system(cfg: dict, args) -> int:
    model = build_model(_require(cfg, "model", "config"))
    structure = build_structure(_require(cfg, "structure", "config"))
    triples = _expand_requests(cfg, model.n, args.d, with_ranks=False)
    if not triples:
        _emit(["p1"], [], args.format, args.precision == "full")
        return 0
    cells = {p: _system_cell(model, structure, p, d) for _, p, d in triples}
    moments = list(dict.fromkeys(p for _, p, _ in triples))
    header, row = _moment_row(cells, moments)
    _note(f"system n={structure.n}; moments={moments}")
    _emit(header, [row], args.format, args.precision == "full")
    return 0


def cmd_signature(cfg: dict, args) -> int:
    spec = _require(cfg, "structure", "config")
    structure = build_structure(spec)
    rows: list[list] = []
    if structure.path_sets is not None:
        for K, c in sorted(alpha_coefficients(structure).items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))):
            rows.append(["alpha_subset", ",".join(map(str, sorted(K))), c])
        for i, a in enumerate(minimal_signature(structure), start=1):
            rows.append(["alpha", i, a])
    if structure.cut_sets is not None:
        for K, c in sorted(beta_coefficients(structure).items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))):
            rows.append(["beta_subset", ",".join(map(str, sorted(K))), c])
        for i, b in enumerate(maximal_signature(structure), start=1):
            rows.append(["beta", i, b])
    if "samaniego" in spec:
        sam = [Fraction(str(x)) for x in spec["samaniego"]]
        for i, a in enumerate(signature_from_samaniego(sam, structure.n), start=1):
            rows.append(["alpha_from_samaniego", i, a])
    _emit(["section", "key", "value"], rows, args.format, args.precision == "full")
    return 0


def cmd_sweep(cfg: dict, args) -> int:
    spec = _require(cfg, "sweep", "config")
    structure = build_structure(_require(cfg, "structure", "config"))
    family = _require(spec, "family", "sweep spec")
    if family not in ("geometric", "poisson"):
        raise ValidationError(f"sweep family must be geometric or poisson, not {family!r}")
    param = spec.get("parameter", "pi" if family == "geometric" else "lam")
    values = [float(v) for v in _require(spec, "values", "sweep spec")]
    d = args.d if args.d is not None else float(spec.get("d", 0.0005))
    n = structure.n
    rows = []
    for v in values:
        try:
            if family == "geometric":
                params = MvgParams(n, theta={frozenset([i]): 1.0 - v for i in range(1, n + 1)})
                m1 = system_moment_mvg(params, structure, 1)
                m2_raw = factorial_to_raw([m1, system_moment_mvg(params, structure, 2)])[1]
            else:
                model = IndependentMarginals([Poisson(v)] * n, exchangeable=True)
                m1 = system_moment_approx(model, structure, 1, d).value
                m2_raw = system_moment_approx(model, structure, 2, d).value
            rows.append([v, m1, m2_raw, m2_raw - m1 * m1])
        except LifemomentsError as e:
            _note(f"{param}={v} failed: {e}")
    _note(f"sweep family={family} points={len(values)} emitted={len(rows)}")
    _emit([param, "ET", "ET2", "var"], rows, args.format, args.precision == "full")
    return 0


def cmd_validate(cfg: dict, args) -> int:
    spec = cfg.get("validate", {})
    if not isinstance(spec, dict):
        raise ValidationError("validate section must be a mapping")
    model = build_model(_require(cfg, "model", "config"))
    if "structure" in cfg:
        statistic = build_structure(cfg["structure"])
        label = "system"
    else:
        statistic = int(spec.get("rank", 1))
        label = f"rank {statistic}"
    p = int(spec.get("p", 1))
    samples = int(spec.get("samples", 200_000))
    d = args.d if args.d is not None else float(spec.get("d", 1e-6))
    seed = args.seed if args.seed is not None else 0

    if isinstance(statistic, SystemStructure):
        analytic = _system_cell(model, statistic, p, d)["value"]
    else:
        analytic = _orderstat_cell(model, statistic, p, d)["value"]

    rows = []
    est = mc_moment(model, statistic, p, samples, seed)
    band = 3.0 * est.stderr + 1e-12
    status = "PASS" if abs(analytic - est.mean) <= band else "FAIL"
    rows.append(["mc_3sigma", status, analytic, est.mean, band])
    if model.support_max() is not None:
        try:
            exact = enumerate_moment(model, statistic, p)
            status = "PASS" if abs(analytic - exact) <= 1e-9 else "FAIL"
            rows.append(["enumerate", status, analytic, exact, 1e-9])
        except CapacityError as e:
            _note(f"enumeration skipped: {e}")
    _note(f"validate {label} p={p} samples={samples} seed={seed} rng={_RNG_NAME}")
    _emit(["check", "status", "analytic", "estimate", "tolerance"], rows, args.format, True)
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lifemoments",
        description="Moments of discrete order statistics and coherent-system lifetimes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("orderstat", cmd_orderstat),
        ("system", cmd_system),
        ("signature", cmd_signature),
        ("sweep", cmd_sweep),
        ("validate", cmd_validate),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML config file")
        p.add_argument("--format", choices=("csv", "table"), default="table")
        p.add_argument("--precision", choices=("full",), default=None,
                       help="print full float precision instead of 3 decimals")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (validate)")
        p.add_argument("--d", type=float, default=None,
                       help="default error bound for truncated runs")
        p.set_defaults(fn=fn)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.fn(cfg, args)
    except CapacityError as e:
        _note(f"capacity error: {e}")
        return 3
    except NumericError as e:
        _note(f"numeric error: {e}")
        return 4
    except ValidationError as e:
        _note(f"config error: {e}")
        return 2
    except (KeyError, TypeError, ValueError) as e:
        _note(f"config error: {e!r}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
