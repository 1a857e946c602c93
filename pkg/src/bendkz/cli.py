"""Command-line driver.  Exit codes: 0 PASS, 1 FAIL or INCONCLUSIVE, 2 usage error."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import fox, polygon, verify
from .braids import parse_braid
from .verify import ConfigError, ScenarioConfig, VerificationReport

SCENARIO_COMMANDS = {
    "monodromy": verify.monodromy_report,
    "periods": verify.periods_check,
    "polygon": verify.polygon_check,
    "theorem-a": verify.theorem_a_check,
    "theorem-c": verify.theorem_c_check,
    "hyper-check": verify.hyper_parallel_check,
    "all": verify.run_all,
}


HELP = {
    "monodromy": "monodromy matrices of the pure-braid generators",
    "periods": "period matrix, w_inf lemma and rank",
    "polygon": "Poisson identities and linearization at the degenerate polygon",
    "theorem-a": "tangent model vs Jordan-Pochhammer matrices",
    "theorem-c": "KZ monodromy vs dual specialized quotient Gassner",
    "hyper-check": "period rows transported by the KZ connection",
    "all": "every check for each scenario",
}


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(" ", "").split(",") if x]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.replace(" ", "").split(",") if x]


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="scenario file (JSON, see config.schema.json)")
    p.add_argument("--n", type=int, help="number of edges / punctures")
    p.add_argument("--eps", help="orientation vector, e.g. '+,+,-' or '1,1,-1'")
    p.add_argument("--r", help="edge lengths, e.g. '1,1,2'")
    p.add_argument("--tol", type=float, help="transport tolerance")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")
    p.add_argument("--matrices", action="store_true", help="embed matrices in the report")
    p.add_argument("--timing", action="store_true", help="record wall time (breaks byte-determinism)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bendkz", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("relations", help="infinitesimal braid relations for random lambda")
    _add_common(p)
    p.add_argument("--samples", type=int, default=100)
    p = sub.add_parser("gassner", help="Gassner matrix of a pure braid over Z[t^+-1]")
    _add_common(p)
    p.add_argument("--braid", required=True, help="braid word, e.g. 'A(1,2) s1^-1 s2^2'")
    p.add_argument("--reduced", action="store_true", help="reduced (n-1) x (n-1) matrix")
    p = sub.add_parser("plot", help="bending-flow trajectory as CSV")
    _add_common(p)
    p.add_argument("--edges", default="1,2", help="index set I, e.g. '1,2'")
    p.add_argument("--t-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=50)
    for name, fn in SCENARIO_COMMANDS.items():
        p = sub.add_parser(name, help=HELP[name])
        _add_common(p)
    return parser


def _eps(text: str | None):
    if text is None:
        return None
    return polygon.OrientationVector.parse(text).signs


def scenario_configs(args) -> list[ScenarioConfig]:
    over = {"transport_tol": args.tol, "seed": args.seed}
    if args.matrices:
        over["include_matrices"] = True
    if args.timing:
        over["timing"] = True
    eps, r = _eps(args.eps), _float_list(args.r) if args.r else None
    if args.config is not None:
        base = [verify.load_config(args.config)]
    elif eps is not None or r is not None:
        if eps is None or r is None:
            raise UsageError("--eps and --r must be given together")
        n = args.n if args.n is not None else len(eps)
        base = [ScenarioConfig(n=n, eps=eps, r=tuple(r), paths=verify.default_paths(n))]
        return [c.with_overrides(**over) for c in base]
    else:
        base = verify.shipped_scenarios()
        if args.n is not None:
            base = [c for c in base if c.n == args.n]
            if not base:
                raise UsageError(f"no shipped scenario with n={args.n}; pass --eps and --r")
        return [c.with_overrides(**over) for c in base]
    kw = dict(over)
    if eps is not None:
        kw["eps"] = eps
    if r is not None:
        kw["r"] = tuple(r)
    if args.n is not None:
        kw["n"] = args.n
    return [c.with_overrides(**kw) for c in base]


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def run(args) -> int:
    if args.command == "relations":
        n = args.n
        if n is None:
            raise UsageError("relations needs --n")
        if n < 2:
            raise UsageError("--n must be at least 2")
        cfg = ScenarioConfig(n=n, eps=(1,) * n, r=(1.0,) * n, seed=args.seed or 0, timing=args.timing)
        report = verify.relations_check(cfg, samples=args.samples)
    elif args.command == "gassner":
        if args.n is None:
            raise UsageError("gassner needs --n")
        b = parse_braid(args.braid, args.n)
        m = fox.reduced_gassner(b) if args.reduced else fox.gassner(b)
        report = VerificationReport(
            "gassner", verify.PASS, {"n": args.n, "braid": args.braid, "reduced": args.reduced},
            {"size": m.shape[0]}, {"text": str(m).splitlines()})
        report.matrices = {"laurent": m.to_dict()}
    elif args.command == "plot":
        n = args.n or 5
        rng = np.random.default_rng(args.seed or 0)
        e = polygon.random_config(n, rng)
        times = np.linspace(0.0, args.t_max, args.steps + 1)
        _emit(polygon.flow_trajectory_csv(e, _int_list(args.edges), times), args.out)
        return 0
    else:
        fn = SCENARIO_COMMANDS[args.command]
        reports = [fn(cfg) for cfg in scenario_configs(args)]
        report = reports[0] if len(reports) == 1 else verify.combine(args.command, reports)
    _emit(report.to_json(), args.out)
    return 0 if report.passed else 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return run(args)
    except (UsageError, ConfigError, fox.NonPureBraidError, ValueError, IndexError) as exc:
        print(f"bendkz {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
