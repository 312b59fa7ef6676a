"""Command-line drivers.

    manhattan-workbench SUBCOMMAND --config PATH [--out DIR] [--n-max N] [--max-power M]
                        [--rays K] [--seed S] [--tol-root TOL]

Exit codes: 0 success, 1 a mathematical condition or cross-check failed,
2 bad configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import manhattan as mh
from . import orbit_oracle as oo
from .coding import Alphabet, positivity_gap, random_cyclic_word
from .config import RunConfig, finite
from .errors import ConditionFailure, ConfigError, NumericalFailure
from .moebius import classify, translation_length, IsometryClass
from .pressure import WeightedPotentialQuery, pressure_estimate
from .schottky import evaluate, verify_conditions

EXIT_OK, EXIT_CONDITION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

CURVE_COLUMNS = ("theta", "a", "b", "t_root", "residual", "error_bar")
ORACLE_COLUMNS = ("a", "b", "bowen_root", "root_error", "oracle_delta", "ci_low", "ci_high",
                  "relative_difference", "within_tolerance")
ORACLE_TOLERANCE = 0.10
POSITIVITY_WORDS = 200


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=finite) + "\n"


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return finite(float(x))
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _header(cfg: RunConfig, command: str) -> dict:
    return {"command": command, "config_hash": cfg.config_hash, "version": __version__}


def _write(cfg: RunConfig, name: str, text: str) -> Path:
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


# -- subcommands -----------------------------------------------------------

def cmd_validate(cfg: RunConfig) -> int:
    pair = cfg.pair
    rng = np.random.default_rng(cfg.seed)
    alpha = Alphabet.from_pair(pair)
    report = dict(_header(cfg, "validate"))
    passed = True
    for name, rep in (("rho1", pair.rho1), ("rho2", pair.rho2)):
        cond = verify_conditions(rep)
        passed &= cond.passed
        report[name] = cond.to_dict()
        print(f"[{name}]\n{cond.summary()}")
    words = [random_cyclic_word(rng, alpha, int(rng.integers(3, 7)), 5) for _ in range(POSITIVITY_WORDS)]
    report["positivity_gap"] = {"rho1": positivity_gap(pair.rho1, words),
                                "rho2": positivity_gap(pair.rho2, words), "words": POSITIVITY_WORDS}
    lengths = []
    for w in cfg.words:
        row = {"word": str(w)}
        for name, rep in (("rho1", pair.rho1), ("rho2", pair.rho2)):
            g = evaluate(rep, w)
            cls = classify(g)
            row[name] = {"class": cls.value,
                         "length": translation_length(g) if cls is IsometryClass.HYPERBOLIC else 0.0}
        lengths.append(row)
    report["words"] = lengths
    report["passed"] = bool(passed)
    _write(cfg, "validate.json", _json(_clean(report)))
    print(_json(_clean(report)), end="")
    return EXIT_OK if passed else EXIT_CONDITION


def _roots(cfg: RunConfig):
    pair, params = cfg.pair, cfg.params
    return [mh.entropy(pair, which, params, cfg.tol_root) for which in (1, 2)]


def cmd_entropy(cfg: RunConfig) -> int:
    r1, r2 = _roots(cfg)
    out = dict(_header(cfg, "entropy"))
    out.update({"h1": r1.t, "h1_error": r1.error_bar, "h2": r2.t, "h2_error": r2.error_bar,
                "h1_root": r1.to_dict(), "h2_root": r2.to_dict()})
    _write(cfg, "entropy.json", _json(_clean(out)))
    print(f"h1 = {r1.t:.10f} +/- {r1.error_bar:.2e}")
    print(f"h2 = {r2.t:.10f} +/- {r2.error_bar:.2e}")
    return EXIT_OK


def cmd_pressure(cfg: RunConfig) -> int:
    p = cfg.section("pressure")
    q = WeightedPotentialQuery(p["a"], p["b"], p["t"])
    est = pressure_estimate(cfg.pair, q, cfg.params)
    out = dict(_header(cfg, "pressure"))
    out.update({"query": p, "estimate": est.to_dict()})
    _write(cfg, "pressure.json", _json(_clean(out)))
    if est.is_infinite:
        print(f"P(-t(a tau + b kappa)) = Infinite at (a, b, t) = ({q.a}, {q.b}, {q.t})")
    else:
        print(f"P = {est.value:.10f} +/- {est.error_bar:.2e} (tail {est.tail_bound:.2e})")
    return EXIT_OK


def curve_csv(cfg: RunConfig, points) -> str:
    buf = io.StringIO()
    buf.write(f"# config_hash={cfg.config_hash} version={__version__}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_COLUMNS)
    for p in sorted(points, key=lambda p: p.theta):
        w.writerow([repr(float(getattr(p, c))) for c in CURVE_COLUMNS])
    return buf.getvalue()


def read_curve_csv(path) -> tuple[dict, list[dict]]:
    """Header fields and rows (floats) of a curve CSV."""
    with open(path, newline="") as fh:
        first = fh.readline().lstrip("# ").split()
        header = dict(item.split("=", 1) for item in first)
        rows = [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]
    return header, rows


def _trace(cfg: RunConfig):
    return mh.trace_curve(cfg.pair, cfg.rays, cfg.params, cfg.tol_root)


def cmd_curve(cfg: RunConfig) -> int:
    points = _trace(cfg)
    path = _write(cfg, "curve.csv", curve_csv(cfg, points))
    worst = max(abs(p.residual) for p in points)
    print(f"{len(points)} points written to {path}; max |residual| = {worst:.2e}")
    return EXIT_OK


def cmd_rigidity(cfg: RunConfig) -> int:
    solver = cfg.section("solver")
    points = _trace(cfg)
    rep = mh.rigidity_report(cfg.pair, cfg.params, points, cfg.rays, cfg.tol_root,
                             line_tol=solver["line_tol"], tol=solver["rigidity_tol"])
    out = dict(_header(cfg, "rigidity"))
    out.update(rep.to_dict())
    _write(cfg, "rigidity.json", _json(_clean(out)))
    _write(cfg, "curve.csv", curve_csv(cfg, points))
    print(f"h1 = {rep.h1:.8f}  h2 = {rep.h2:.8f}  delta11 = {rep.delta11:.8f}")
    print(f"Bishop-Steger gap = {rep.bishop_steger_gap:.3e} +/- {rep.errors['bishop_steger_gap']:.1e}")
    print(f"Thurston gap      = {rep.thurston_gap:.3e} +/- {rep.errors['thurston_gap']:.1e}")
    print(f"chord deviation   = {rep.line_deviation:.3e}")
    for k, v in sorted(rep.verdicts.items()):
        print(f"  {k}: {v}")
    violated = rep.verdicts["bishop_steger_violated"] or rep.verdicts["thurston_violated"]
    return EXIT_CONDITION if violated else EXIT_OK


def cmd_oracle(cfg: RunConfig) -> int:
    o = cfg.section("oracle")
    pair = cfg.pair
    enum = oo.enumerate_orbit(pair, oo.EnumerationBudget(o["max_blocks"], o["max_power"]))
    rows = []
    for a, b in o["weights"]:
        root = mh.bowen_root(pair, a, b, cfg.params, cfg.tol_root)
        est = oo.delta_estimate(pair, a, b, enum=enum)
        rel = abs(root.t - est.value) / root.t
        rows.append([a, b, root.t, root.error_bar, est.value, est.ci[0], est.ci[1], rel,
                     rel <= ORACLE_TOLERANCE])
    buf = io.StringIO()
    buf.write(f"# config_hash={cfg.config_hash} version={__version__} "
              f"max_blocks={o['max_blocks']} max_power={o['max_power']}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ORACLE_COLUMNS)
    for r in rows:
        w.writerow([repr(float(x)) if not isinstance(x, bool) else str(x) for x in r])
    _write(cfg, "oracle.csv", buf.getvalue())
    print(buf.getvalue(), end="")
    return EXIT_OK if all(r[-1] for r in rows) else EXIT_CONDITION


def cmd_compare(cfg: RunConfig) -> int:
    """Length spectra of the two representations against the curve functionals."""
    o = cfg.section("oracle")
    pair = cfg.pair
    T = o["thurston_length"]
    geos = [g for g in oo.closed_geodesics(pair, 1.0, 0.0, T) if g.primitive]
    r1, r2 = _roots(cfg)
    out = dict(_header(cfg, "compare"))
    ratios = [g.l2 / g.l1 for g in geos]
    out.update({
        "thurston_length": T,
        "classes": len(geos),
        "length_ratio_min": min(ratios) if ratios else math.nan,
        "length_ratio_max": max(ratios) if ratios else math.nan,
        "thurston_ratio": (math.fsum(g.l2 for g in geos) / math.fsum(g.l1 for g in geos)) if geos else math.nan,
        "h1": r1.t, "h2": r2.t, "entropy_ratio": r1.t / r2.t,
        "shortest": [{"word": g.word.labelled(Alphabet.from_pair(pair)), "l1": g.l1, "l2": g.l2}
                     for g in geos[:20]],
    })
    _write(cfg, "compare.json", _json(_clean(out)))
    print(f"{len(geos)} primitive classes with l1 <= {T}")
    print(f"l2/l1 in [{out['length_ratio_min']:.6f}, {out['length_ratio_max']:.6f}], "
          f"ratio of sums {out['thurston_ratio']:.8f}, h1/h2 = {out['entropy_ratio']:.8f}")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "entropy": cmd_entropy,
    "pressure": cmd_pressure,
    "curve": cmd_curve,
    "rigidity": cmd_rigidity,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="manhattan-workbench",
                                     description="Manhattan curves of pairs of extended Schottky representations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or name).strip().splitlines()[0])
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path)
        p.add_argument("--n-max", type=int)
        p.add_argument("--max-power", type=int)
        p.add_argument("--rays", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--tol-root", type=float)
    return parser


def _overrides(args) -> dict:
    over = {}
    trunc = {k: v for k, v in (("n_max", args.n_max), ("max_power", args.max_power)) if v is not None}
    if trunc:
        over["truncation"] = trunc
    solver = {k: v for k, v in (("rays", args.rays), ("tol_root", args.tol_root)) if v is not None}
    if solver:
        over["solver"] = solver
    if args.seed is not None:
        over["seed"] = args.seed
    if args.out is not None:
        over["output"] = {"dir": str(args.out)}
    return over


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
        over = _overrides(args)
        if over:
            cfg = cfg.replace(**over)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConditionFailure as exc:
        print(f"condition failure: {exc}", file=sys.stderr)
        return EXIT_CONDITION
    except (NumericalFailure, ArithmeticError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
