"""Command-line front end.

Usage::

    witness invert    --spec family.json [--p0 0.1]
    witness solve     --spec partial.json [--mode l1] [--p0 0.1]
    witness realize   --spec weights_or_targets.json --p0 0.1 [--format csv]
    witness sample    --spec weights.json --p0 0.1 --n 1000 [--seed 7]
    witness diagnose  --spec weights.json --p0 0.1 --p-grid 0.1,0.05 [--samples N]
    witness benchmark [--alpha 0.2] [--p0 0.1] [--runs 20] [--samples 500000]
    witness incidence --d 3 [--signs LU]
    witness hasse     --d 3 [--signs LU]

Exit codes: 0 success, 1 input error, 2 infeasible or inadmissible,
3 solver trouble (unbounded, iteration cap, numerical failure).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from .exceptions import InadmissibleError, SolverError, SpecError
from .inversion import complete_recovery_report, tail_values_from_weights
from .keys import as_alphabet, build_incidence_matrix, hasse_dot
from .lp import solve_spec
from .realization import CENTRAL_TOL, check_threshold, q_from_weights
from .simplex import Status
from .simulation import run_benchmark_report, run_variable_p_diagnostics, sample_canonical
from .specfile import SpecFile, load_spec, records

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_SOLVER = 0, 1, 2, 3
TABLE_ALPHAS = (0.0, 0.10, 0.20, 0.24, 0.25, 0.26)


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; input errors here are status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list:
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(doc, out: Optional[str]) -> None:
    _emit(json.dumps(doc, indent=2) + "\n", out)


def _resolve_seed(flag: Optional[int], spec: Optional[SpecFile] = None) -> int:
    if flag is not None:
        return flag
    if spec is not None and spec.seed is not None:
        return spec.seed
    env = os.environ.get("WITNESS_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise SpecError(f"WITNESS_SEED must be an integer, got {env!r}") from None
    seed = int(np.random.SeedSequence().entropy % (2 ** 63))
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _p0(args, spec: Optional[SpecFile], required: bool = True):
    p0 = args.p0 if getattr(args, "p0", None) is not None else (spec.p0 if spec else None)
    if p0 is None and required:
        raise SpecError("p0: supply --p0 or a 'p0' field in the spec file")
    if p0 is not None:
        check_threshold(p0)
    return p0


def _weights_from_spec(spec: SpecFile, p0):
    """Weights given directly, recovered from a complete family, or chosen by the LP."""
    if spec.weights is not None:
        return spec.weights
    fam = spec.family
    if fam.is_complete:
        rep = complete_recovery_report(fam)
        if not rep.success:
            raise InadmissibleError(
                f"complete family is not realizable: min weight {float(rep.min_weight):.6g}, "
                f"margins {'ok' if rep.margins_ok else 'violated'}")
        return rep.weights
    sol = solve_spec(spec.target_spec(p0=p0))
    if sol.status is Status.INFEASIBLE:
        raise InadmissibleError("targets are not realizable at this p0")
    if sol.status is not Status.OPTIMAL:
        raise SolverError(f"solver ended with status {sol.status.value}")
    return sol.weights


# -- commands -------------------------------------------------------------------

def cmd_invert(args) -> int:
    spec = load_spec(args.spec)
    rep = complete_recovery_report(spec.family)
    doc = rep.to_dict()
    doc["d"], doc["signs"] = spec.d, "".join(spec.alphabet)
    code = EXIT_OK if rep.success else EXIT_INFEASIBLE
    p0 = _p0(args, spec, required=False)
    if p0 is not None:
        central = 1 - p0 * rep.total_mass
        doc["p0"], doc["central_mass"] = p0, float(central)
        doc["admissible"] = bool(rep.success and central >= -CENTRAL_TOL)
        if not doc["admissible"]:
            code = EXIT_INFEASIBLE
    _emit_json(doc, args.out)
    return code


def cmd_solve(args) -> int:
    spec = load_spec(args.spec)
    target = spec.target_spec(mode=args.mode, p0=_p0(args, spec, required=False))
    sol = solve_spec(target)
    doc = {"d": spec.d, "signs": "".join(spec.alphabet), "mode": target.mode}
    doc.update(sol.to_dict())
    if sol.optimal:
        if target.p0 is not None:
            doc["p0"] = target.p0
            doc["central_mass"] = float(1 - target.p0 * sol.weights.total_mass)
        if target.mode == "l1":
            attained = tail_values_from_weights(sol.weights, list(target.targets))
            doc["attained_targets"] = records(attained.entries)
    _emit_json(doc, args.out)
    if sol.status is Status.OPTIMAL:
        return EXIT_OK
    if sol.status is Status.INFEASIBLE:
        return EXIT_INFEASIBLE
    return EXIT_SOLVER


def cmd_realize(args) -> int:
    spec = load_spec(args.spec)
    p0 = _p0(args, spec)
    q = q_from_weights(_weights_from_spec(spec, p0), p0)
    if args.format == "csv":
        lines = ["state,mass"] + [f"{s},{m!r}" for s, m in q.to_rows()]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit_json(q.to_dict(), args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    spec = load_spec(args.spec)
    if args.n < 1:
        raise SpecError(f"--n must be at least 1, got {args.n}")
    p0 = _p0(args, spec)
    w = _weights_from_spec(spec, p0)
    seed = _resolve_seed(args.seed, spec)
    _emit(sample_canonical(w, p0, args.n, seed).to_csv(), args.out)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    spec = load_spec(args.spec)
    p0 = _p0(args, spec)
    w = _weights_from_spec(spec, p0)
    n = args.samples or spec.samples or 100_000
    seed = _resolve_seed(args.seed, spec)
    grid = args.p_grid or [p0, p0 / 2]
    report = run_variable_p_diagnostics(w, p0, grid, n, seed=seed)
    doc = report.to_dict()
    doc["seed"] = seed
    _emit_json(doc, args.out)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    alphas = args.alpha or list(TABLE_ALPHAS)
    p0 = args.p0 if args.p0 is not None else 0.10
    check_threshold(p0)
    seed = _resolve_seed(args.seed)
    rows = []
    for n, alpha in enumerate(alphas):
        # offset the seed per alpha so rows are independent yet reproducible
        rep = run_benchmark_report(alpha, p0, args.runs, args.samples, seed + n, args.workers)
        rows.append(rep.to_dict())
    _emit_json(rows[0] if len(rows) == 1 else rows, args.out)
    return EXIT_OK


def cmd_incidence(args) -> int:
    mat = build_incidence_matrix(args.d, alphabet=as_alphabet(args.signs))
    _emit(mat.to_csv(), args.out)
    return EXIT_OK


def cmd_hasse(args) -> int:
    if args.d < 1:
        raise SpecError("--d must be positive")
    _emit(hasse_dot(args.d, as_alphabet(args.signs)), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="witness", description="Signed tail-dependence witness toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, func, help_text, spec=True):
        p = sub.add_parser(name, help=help_text)
        if spec:
            p.add_argument("--spec", required=True, help="JSON specification or weight file")
        p.add_argument("--out", help="write output here instead of stdout")
        p.set_defaults(func=func)
        return p

    p = command("invert", cmd_invert, "recover witness weights from a complete family")
    p.add_argument("--p0", type=float)

    p = command("solve", cmd_solve, "solve the feasibility / min-mass / l1 linear program")
    p.add_argument("--mode", choices=["feasibility", "min_total_mass", "l1"])
    p.add_argument("--p0", type=float)

    p = command("realize", cmd_realize, "ternary cell masses at threshold p0")
    p.add_argument("--p0", type=float)
    p.add_argument("--format", choices=["json", "csv"], default="json")

    p = command("sample", cmd_sample, "draw from the canonical witness copula (CSV)")
    p.add_argument("--p0", type=float)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int)

    p = command("diagnose", cmd_diagnose, "empirical versus theoretical tail coefficients")
    p.add_argument("--p0", type=float)
    p.add_argument("--p-grid", type=_floats, help="comma-separated levels in (0, p0]")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)

    p = command("benchmark", cmd_benchmark, "five-dimensional benchmark report", spec=False)
    p.add_argument("--alpha", type=_floats, help="one value or a comma-separated list")
    p.add_argument("--p0", type=float)
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--samples", type=int, default=500_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)

    for name, func, text in (("incidence", cmd_incidence, "incidence matrix as CSV"),
                             ("hasse", cmd_hasse, "Hasse diagram as Graphviz DOT")):
        p = command(name, func, text, spec=False)
        p.add_argument("--d", type=int, required=True)
        p.add_argument("--signs", choices=["U", "LU"], default="LU")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InadmissibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (SpecError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
