"""Command-line interface: ``qsimpson <command> [flags]``.

Exit status is 0 on success, 1 on a usage error and 2 when a scenario fails
validation or a checked invariant does not hold.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernel
from .bound import check_bound, ell_table, ratios_and_s_prime, verify_identities
from .classical import classical_rates, sample_distributions, verify_convexity
from .construction import build_paper_scenario, family_S
from .engine import (
    MeasurementScenario,
    classicality_check,
    conditional_rates,
    convexity_residuals_from_rates,
    normalization_residuals,
    rate_intervals_disjoint,
    simpson_statistics,
)
from .errors import InvalidEpsilon, InvariantViolation, ParseError, QSimpsonError, UndefinedRate, ValidationError
from .optimizer import curve_params, optimize_family, optimize_general, sweep_family
from .scenario_file import load_scenario

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT = 0, 1, 2
# Classical statistics are exact up to rounding.
CLASSICAL_TOL = 1e-12
# eval reports a normalization failure above this.
NORMALIZATION_TOL = 1e-12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(value) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


@dataclass
class Table:
    header: tuple[str, ...]
    rows: list

    def render(self, style: str) -> str:
        cells = [list(self.header)] + [[fmt(v) for v in row] for row in self.rows]
        if style == "csv":
            return "".join(",".join(r) + "\n" for r in cells)
        widths = [max(len(r[i]) for r in cells) for i in range(len(self.header))]
        return "".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in cells)


class Run:
    """Mutable result of a command: the table plus an invariant verdict."""

    def __init__(self, table: Table, ok: bool = True, summary: str = ""):
        self.table = table
        self.ok = ok
        self.summary = summary


def _ranks(text: str) -> tuple[int, int, int]:
    try:
        parts = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated integers, got {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated integers, got {text!r}")
    return parts


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "table"), default="csv")
    common.add_argument("--verbose", "-v", action="count", default=0)

    p = _Parser(prog="qsimpson", description="Quantum reversal statistics for sequential measurements.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("eval", parents=[common], help="rates, S and diagnostics for a scenario file")
    ev.add_argument("--scenario", required=True)

    pa = sub.add_parser("paper", parents=[common], help="evaluate the Q1 or Q2 family member")
    pa.add_argument("--family", choices=("q1", "q2"), required=True)
    pa.add_argument("--epsilon", type=float, required=True)

    sw = sub.add_parser("sweep", parents=[common], help="S over a geometric epsilon grid")
    sw.add_argument("--family", choices=("q1", "q2"), default="q2")
    sw.add_argument("--eps-start", type=float, default=1.0)
    sw.add_argument("--eps-end", type=float, default=1e-3)
    sw.add_argument("--steps", type=_positive_int, default=31)

    op = sub.add_parser("optimize", parents=[common], help="search for large |S|")
    op.add_argument("--mode", choices=("family", "general"), default="general")
    op.add_argument("--floor", type=float, default=1e-4, help="family mode: smallest p (and q)")
    op.add_argument("--curve", choices=("q2", "free"), default="q2", help="family mode: q = p^2 or free (p, q)")
    op.add_argument("--grid", type=_positive_int, default=100)
    op.add_argument("--descent", action="store_true", help="family mode: refine the grid optimum")
    op.add_argument("--dim", type=int, default=8)
    op.add_argument("--ranks", type=_ranks)
    op.add_argument("--restarts", type=_positive_int, default=16)
    op.add_argument("--iters", type=_positive_int, default=2000)
    op.add_argument("--seed", type=int, default=0)
    op.add_argument("--workers", type=_positive_int, default=1)
    op.add_argument("--check", choices=("sampled", "all"), default="sampled")
    op.add_argument("--backend", choices=sorted(kernel.BACKENDS))

    cl = sub.add_parser("classical", parents=[common], help="seeded random classical distributions")
    cl.add_argument("--samples", type=_positive_int, default=100_000)
    cl.add_argument("--seed", type=int, default=0)

    bo = sub.add_parser("bound", parents=[common], help="lengths, ratios and identities behind |S| < 2")
    src = bo.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario")
    src.add_argument("--family", choices=("q1", "q2"))
    bo.add_argument("--epsilon", type=float)
    return p


def _family_scenario(family: str, eps: float):
    if not 0.0 < eps <= 1.0:
        raise InvalidEpsilon(f"epsilon must lie in (0, 1], got {eps!r}")
    params = curve_params(family, eps)
    return params, build_paper_scenario(params)


def _eval_rows(sc: MeasurementScenario, verbose: int, err) -> tuple[list, bool]:
    rates = conditional_rates(sc)
    rows = [("dim", sc.dim)]
    rows += [(name, getattr(rates, name)) for name in rates._fields]
    try:
        stats = simpson_statistics(rates)
        d_t, d_c, s = stats.d_t, stats.d_c, stats.s
        disjoint = rate_intervals_disjoint(rates)
    except UndefinedRate:
        d_t = d_c = s = disjoint = None
    try:
        res_t, res_u = convexity_residuals_from_rates(rates)
    except UndefinedRate:
        res_t = res_u = None
    cls = classicality_check(sc)
    rows += [
        ("d_t", d_t), ("d_c", d_c), ("s", s),
        ("convexity_residual_t", res_t), ("convexity_residual_u", res_u),
        ("intervals_disjoint", disjoint),
        ("commutator_gender_treatment", cls.gender_treatment),
        ("commutator_gender_result", cls.gender_result),
        ("commutator_treatment_result", cls.treatment_result),
        ("classical", cls.classical),
    ]
    norm3, norm2 = normalization_residuals(sc)
    if verbose:
        for name, m in zip(("gender", "treatment", "result"), sc.measurements):
            print(f"{name}: complement residual {m.complement_residual:.3g}", file=err)
        print(f"normalization residuals: {norm3:.3g} (three-step), {norm2:.3g} (two-step)", file=err)
    ok = max(abs(norm3), abs(norm2)) <= NORMALIZATION_TOL
    if s is not None and not abs(s) < 2.0:
        ok = False
    return rows, ok


def cmd_eval(args) -> Run:
    rows, ok = _eval_rows(load_scenario(args.scenario), args.verbose, args.err)
    return Run(Table(("quantity", "value"), rows), ok)


def cmd_paper(args) -> Run:
    params, sc = _family_scenario(args.family, args.epsilon)
    rows, ok = _eval_rows(sc, args.verbose, args.err)
    closed = family_S(params)
    s = dict(rows)["s"]
    if s is None or abs(s - closed) > 1e-10:
        ok = False
    head = [("family", args.family), ("epsilon", args.epsilon), ("p", params.p), ("q", params.q)]
    return Run(Table(("quantity", "value"), head + rows + [("family_s", closed)]), ok)


def cmd_sweep(args) -> Run:
    eps = np.geomspace(args.eps_start, args.eps_end, args.steps) if args.steps > 1 else [args.eps_start]
    for e in eps:
        if not 0.0 < e <= 1.0:
            raise InvalidEpsilon(f"epsilon grid must lie in (0, 1], got {e!r}")
    rows = [(r.epsilon, r.s, r.reference, r.margin) for r in sweep_family(eps, args.family)]
    return Run(Table(("epsilon", "s", "two_minus_two_epsilon", "margin"), rows))


def cmd_optimize(args) -> Run:
    if args.mode == "family":
        if not 0.0 < args.floor <= 1.0:
            raise UsageError(f"--floor must lie in (0, 1], got {args.floor!r}")
        rep = optimize_family(
            floor=args.floor,
            curve=None if args.curve == "free" else "q2",
            grid=args.grid,
            method="descent" if args.descent else "grid",
        )
        params = f"p={rep.best_params.p!r} q={rep.best_params.q!r}"
    else:
        if not 2 <= args.dim <= kernel.MAX_DIM:
            raise UsageError(f"--dim must be in [2, {kernel.MAX_DIM}], got {args.dim}")
        if args.ranks is not None and any(not 0 <= r <= args.dim for r in args.ranks):
            raise UsageError(f"--ranks must lie in [0, {args.dim}], got {args.ranks}")
        rep = optimize_general(
            args.dim, args.ranks, seed=args.seed, restarts=args.restarts, iters=args.iters,
            workers=args.workers, check=args.check, backend=args.backend,
        )
        params = f"dim={args.dim} ranks={rep.config['ranks']} backend={rep.config['backend']}"
    rows = [(i, ev, best) for i, (ev, best) in enumerate(rep.trace)]
    summary = (
        f"best |S| = {fmt(rep.best_s)} ({params}); evaluations = {rep.evaluations}; "
        f"seed = {fmt(rep.seed)}; max |S| seen = {fmt(rep.max_abs_s_seen)}"
    )
    return Run(Table(("step", "evaluations", "best_so_far"), rows), summary=summary)


def cmd_classical(args) -> Run:
    max_s = max_t = max_u = 0.0
    undefined = 0
    for dist in sample_distributions(args.seed, args.samples):
        rates = classical_rates(dist)
        if rates.undefined:
            undefined += 1
            continue
        s = (rates.rf_t + rates.rm_t - rates.r_t) - (rates.rf_c + rates.rm_c - rates.r_c)
        res_t, res_u = verify_convexity(dist)
        max_s = max(max_s, abs(s))
        max_t = max(max_t, abs(res_t))
        max_u = max(max_u, abs(res_u))
    ok = max_s <= 1.0 + CLASSICAL_TOL and max(max_t, max_u) <= CLASSICAL_TOL
    header = ("samples", "seed", "max_abs_s", "max_abs_residual_t", "max_abs_residual_u", "undefined_samples")
    return Run(Table(header, [(args.samples, args.seed, max_s, max_t, max_u, undefined)]), ok)


def cmd_bound(args) -> Run:
    if args.scenario is not None:
        if args.epsilon is not None:
            raise UsageError("--epsilon only applies with --family")
        sc = load_scenario(args.scenario)
    else:
        if args.epsilon is None:
            raise UsageError("--family requires --epsilon")
        _, sc = _family_scenario(args.family, args.epsilon)
    ells = ell_table(sc)
    ratios, s_prime = ratios_and_s_prime(ells)
    rows = [(f"ell_{k}", v) for k, v in zip(ells._fields, ells)]
    rows += [(k, v if ok else None) for k, v, ok in zip(ratios._fields, ratios, ratios.defined)]
    rows.append(("s_prime", s_prime))
    rep = verify_identities(sc)
    rows += [
        ("triangle_slack_t", rep.triangle_t),
        ("triangle_slack_u", rep.triangle_u),
        ("master_residual", rep.master_residual),
        ("case", rep.case),
        ("eqn_a_margin", _finite(rep.eqn_a_margin)),
        ("eqn_u_margin", _finite(rep.eqn_u_margin)),
        ("branch_sum", _finite(rep.branch_sum)),
        ("identities_ok", rep.ok),
    ]
    ok = rep.ok
    try:
        verdict = check_bound(sc)
        rows += [("s", verdict.s), ("s_prime_minus_s", verdict.s_prime - verdict.s),
                 ("margin", verdict.margin), ("holds", verdict.holds)]
        ok = ok and verdict.holds and abs(verdict.s_prime - verdict.s - 3.0) <= 1e-10
    except UndefinedRate as exc:
        rows += [("s", None), ("s_prime_minus_s", None), ("margin", None), ("holds", None)]
        if args.verbose:
            print(f"S undefined: {exc}", file=args.err)
    return Run(Table(("quantity", "value"), rows), ok)


def _finite(x: float) -> Optional[float]:
    return None if math.isnan(x) else x


COMMANDS = {
    "eval": cmd_eval,
    "paper": cmd_paper,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "classical": cmd_classical,
    "bound": cmd_bound,
}


def run(argv: Sequence[str], stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    try:
        args = build_parser().parse_args(argv)
        args.err = stderr
        result = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"qsimpson: error: {exc}", file=stderr)
        return EXIT_USAGE
    except (InvalidEpsilon, OSError) as exc:
        print(f"qsimpson: error: {exc}", file=stderr)
        return EXIT_USAGE
    except (ParseError, ValidationError) as exc:
        print(f"qsimpson: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_INVARIANT
    except (InvariantViolation, QSimpsonError) as exc:
        print(f"qsimpson: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_INVARIANT

    text = result.table.render(args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if result.summary:
        print(result.summary, file=stderr)
    if not result.ok:
        print(f"qsimpson: {args.command}: invariant check failed", file=stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(sys.argv[1:] if argv is None else list(argv))


if __name__ == "__main__":
    sys.exit(main())
