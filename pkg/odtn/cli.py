"""Command-line interface for odtn."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from collections.abc import Callable
from fractions import Fraction
from pathlib import Path
from typing import Any

from rich.console import Console
from rich.logging import RichHandler

from odtn.bounds import compute_bounds, entropy_lower_bound, sparsity_lower_bound
from odtn.diagnostics import max_side, separability, uncertainty_stats
from odtn.errors import EnumerationInfeasibleError, OdtnError, RegressionFailure, UsageError
from odtn.generators import Kind, generate_instance
from odtn.harness import (
    ALGORITHMS,
    InteractiveOracle,
    exact_policy_cost,
    is_randomized,
    make_policy,
    monte_carlo_cost,
)
from odtn.loader import load_instance, save_instance
from odtn.models import EvalReport, OdtnInstance
from odtn.naming import generated_filename, instance_id
from odtn.nonident import Criterion, NonIdentPolicy
from odtn.report import (
    REGRESS_SCHEMA,
    bounds_to_dict,
    eval_rows_to_csv,
    to_json,
    write_output,
)
from odtn.settings import Caps, load_caps

console = Console(stderr=True)
logger = logging.getLogger(__name__)

EXPECTATIONS = "expectations.json"
REGRESS_ALGORITHMS = ("adaptive-c", "adaptive-r", "meta", "nonadaptive")
RATIO_SLACK = 1.05


def _cfg(label: str, value: object) -> str:
    """Format a config line with dim label and bold value."""
    return f"  [dim]{label:<14}:[/dim] [bold]{value}[/bold]"


def _banner(title: str, lines: dict[str, object]) -> None:
    console.rule(f"[bold cyan]{title}[/bold cyan]", style="cyan")
    for label, value in lines.items():
        console.print(_cfg(label, value))
    console.rule(style="cyan")


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--verbose",
        "-v",
        action="store_true",
        help="Log per-step decisions",
    )
    parser.add_argument(
        "--enum-cap",
        type=int,
        default=None,
        help="Max star entries per hypothesis for exact enumeration (default: 16)",
    )


def _caps(args: argparse.Namespace) -> Caps:
    return load_caps(enumeration_cap=args.enum_cap)


def _check_seed(args: argparse.Namespace) -> None:
    if args.seed is not None and args.seed < 0:
        raise UsageError(f"--seed must be a non-negative integer, got {args.seed}")


def build_parser() -> argparse.ArgumentParser:
    """Build the top-level parser (help only; each subcommand has its own)."""
    return argparse.ArgumentParser(
        prog="odtn",
        description="Decision trees with persistent noisy outcomes",
        epilog="subcommands:\n"
        "  gen          Generate a synthetic instance\n"
        "  run          Evaluate algorithms on instances (CSV)\n"
        "  bounds       Exact optima and lower bounds (JSON)\n"
        "  interactive  Identify a hypothesis by answering tests yourself\n"
        "  regress      Replay a corpus against recorded expectations\n"
        "\nrun 'odtn <subcommand> -h' for options",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )


def _build_gen_parser() -> argparse.ArgumentParser:
    """Build the argument parser for the ``gen`` subcommand."""
    parser = argparse.ArgumentParser(
        prog="odtn gen",
        description="Generate a synthetic instance as JSON",
    )
    parser.add_argument("--kind", choices=[k.value for k in Kind], required=True)
    parser.add_argument("--m", type=int, required=True, help="Number of hypotheses")
    parser.add_argument("--n", type=int, required=True, help="Number of tests")
    parser.add_argument("--seed", type=int, required=True, help="Random seed")
    parser.add_argument("--alpha", type=float, default=0.5, help="Sparsity exponent (sparse)")
    parser.add_argument("--c", type=int, default=2, help="Max stars per hypothesis")
    parser.add_argument("--r", type=int, default=2, help="Max stars per test")
    parser.add_argument("--d", type=int, default=1, help="Max similarity degree (nonident)")
    parser.add_argument("--prior", choices=["uniform", "dirichlet"], default="uniform")
    parser.add_argument(
        "--output",
        "-o",
        type=Path,
        default=None,
        help="Output file (default: <kind>-m<m>-n<n>-s<seed>.json)",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Log generator retries")
    return parser


def _main_gen(argv: list[str]) -> int:
    """Handle the ``gen`` subcommand."""
    args = _build_gen_parser().parse_args(argv)
    _check_seed(args)
    _configure_logging(args.verbose)
    output = args.output or Path(generated_filename(args.kind, args.m, args.n, args.seed))

    _banner(
        "odtn gen",
        {"kind": args.kind, "size": f"m={args.m}, n={args.n}", "seed": args.seed, "output": output},
    )
    inst = generate_instance(
        args.kind,
        args.m,
        args.n,
        args.seed,
        c=args.c,
        r=args.r,
        alpha=args.alpha,
        d=args.d,
        prior=args.prior,
    )
    save_instance(inst, output)
    stats = uncertainty_stats(inst)
    console.print(
        f"[bold green]Wrote {output}[/bold green] "
        f"[dim](c={stats.c}, r={stats.r}, alpha={stats.alpha:.3f})[/dim]"
    )
    return 0


def _build_run_parser() -> argparse.ArgumentParser:
    """Build the argument parser for the ``run`` subcommand."""
    parser = argparse.ArgumentParser(
        prog="odtn run",
        description="Evaluate algorithms on instances and write a CSV report",
    )
    parser.add_argument(
        "--algo",
        action="append",
        choices=ALGORITHMS,
        required=True,
        help="Algorithm id (repeat for several)",
    )
    parser.add_argument(
        "--instance",
        action="append",
        type=Path,
        required=True,
        help="Instance JSON file (repeat for several)",
    )
    parser.add_argument("--trials", type=int, default=0, help="Monte Carlo trials (needs --seed)")
    parser.add_argument("--seed", type=int, default=None, help="Random seed")
    parser.add_argument("--exact", action="store_true", help="Exact expected cost by enumeration")
    parser.add_argument("--samples", type=int, default=None, help="Samples per nonadaptive score")
    parser.add_argument(
        "--stop",
        choices=[c.value for c in Criterion],
        default=None,
        help="Stopping criterion for nonident and opt",
    )
    parser.add_argument("--bounds", action="store_true", help="Fill ssc_lb and opt columns")
    parser.add_argument("--workers", type=int, default=1, help="Threads for Monte Carlo trials")
    parser.add_argument(
        "--output", "-o", type=Path, default=None, help="CSV file (default: stdout)"
    )
    _add_common(parser)
    return parser


def _evaluate(
    inst: OdtnInstance, ident: str, algorithm: str, args: argparse.Namespace, caps: Caps
) -> EvalReport:
    criterion = Criterion(args.stop) if args.stop else None
    policy = make_policy(
        algorithm,
        inst,
        seed=args.seed,
        samples=args.samples,
        exact=is_randomized(algorithm) and args.exact and args.seed is None,
        caps=caps,
        criterion=criterion,
    )
    report = EvalReport(instance_id=ident, policy=policy.name, trials=args.trials)
    report.entropy_lb = entropy_lower_bound(inst)
    if max_side(inst):
        report.sparsity_lb = sparsity_lower_bound(inst)
    if args.exact:
        try:
            exact = exact_policy_cost(inst, policy, caps)
            report.exact_cost = exact.cost
            report.per_hypothesis = exact.per_hypothesis
            report.error_rate = float(exact.error_rate)
        except EnumerationInfeasibleError as e:
            console.print(f"[yellow]{ident}/{policy.name}: exact cost skipped ({e})[/yellow]")
    if args.trials:
        estimate = monte_carlo_cost(inst, policy, args.trials, args.seed, args.workers)
        report.mean_cost = estimate.mean
        report.ci_halfwidth = estimate.halfwidth
        report.error_rate = estimate.error_rate
        report.error_lo, report.error_hi = estimate.error_ci
    if args.bounds:
        stop = NonIdentPolicy(inst, criterion).stop if criterion else None
        bounds = compute_bounds(inst, caps, stop)
        report.ssc_lb = bounds.ssc_lb
        report.opt = bounds.opt_adaptive
    return report


def _main_run(argv: list[str]) -> int:
    """Handle the ``run`` subcommand."""
    args = _build_run_parser().parse_args(argv)
    _check_seed(args)
    _configure_logging(args.verbose)
    if not args.exact and not args.trials:
        raise UsageError("nothing to evaluate: pass --exact, --trials N, or both")
    if args.trials and args.seed is None:
        raise UsageError("--trials needs --seed")
    caps = _caps(args)

    _banner(
        "odtn run",
        {
            "instances": len(args.instance),
            "algorithms": ", ".join(args.algo),
            "trials": args.trials or "none",
            "exact": args.exact,
            "seed": args.seed if args.seed is not None else "none",
        },
    )
    reports: list[EvalReport] = []
    with console.status("", spinner="dots") as status:
        for path in args.instance:
            inst = load_instance(path)
            ident = instance_id(path)
            for algorithm in args.algo:
                status.update(f"[yellow]{ident}: {algorithm}...[/yellow]")
                reports.append(_evaluate(inst, ident, algorithm, args, caps))
    write_output(eval_rows_to_csv(reports), args.output)
    console.print(f"[bold green]{len(reports)} row(s) written[/bold green]")
    return 0


def _build_bounds_parser() -> argparse.ArgumentParser:
    """Build the argument parser for the ``bounds`` subcommand."""
    parser = argparse.ArgumentParser(
        prog="odtn bounds",
        description="Compute exact optima and lower bounds for one instance (JSON)",
    )
    parser.add_argument("instance", type=Path, help="Instance JSON file")
    parser.add_argument(
        "--stop",
        choices=[c.value for c in Criterion],
        default=None,
        help="Stopping criterion for the adaptive optimum (default: unique)",
    )
    parser.add_argument(
        "--output", "-o", type=Path, default=None, help="JSON file (default: stdout)"
    )
    _add_common(parser)
    return parser


def _main_bounds(argv: list[str]) -> int:
    """Handle the ``bounds`` subcommand."""
    args = _build_bounds_parser().parse_args(argv)
    _configure_logging(args.verbose)
    inst = load_instance(args.instance)
    caps = _caps(args)
    _banner("odtn bounds", {"instance": args.instance, "size": f"m={inst.m}, n={inst.n}"})
    stop = NonIdentPolicy(inst, Criterion(args.stop)).stop if args.stop else None
    report = compute_bounds(inst, caps, stop)
    write_output(to_json(bounds_to_dict(report, instance_id(args.instance))), args.output)
    return 0


def _build_interactive_parser() -> argparse.ArgumentParser:
    """Build the argument parser for the ``interactive`` subcommand."""
    parser = argparse.ArgumentParser(
        prog="odtn interactive",
        description="Identify a hypothesis by answering each test at the prompt ('q' quits)",
    )
    parser.add_argument("instance", type=Path, help="Instance JSON file")
    parser.add_argument("--algo", choices=ALGORITHMS, default="meta")
    parser.add_argument("--seed", type=int, default=None, help="Seed for randomized algorithms")
    parser.add_argument("--stop", choices=[c.value for c in Criterion], default=None)
    _add_common(parser)
    return parser


def _main_interactive(
    argv: list[str], ask: Callable[..., str] | None = None
) -> int:
    """Handle the ``interactive`` subcommand."""
    args = _build_interactive_parser().parse_args(argv)
    _configure_logging(args.verbose)
    _check_seed(args)
    if is_randomized(args.algo) and args.seed is None:
        raise UsageError(f"{args.algo} is randomized and needs --seed")
    inst = load_instance(args.instance)
    policy = make_policy(
        args.algo,
        inst,
        seed=args.seed,
        caps=_caps(args),
        criterion=Criterion(args.stop) if args.stop else None,
    )
    _banner("odtn interactive", {"instance": args.instance, "policy": policy.name})
    oracle = InteractiveOracle(inst, console, ask) if ask else InteractiveOracle(inst, console)
    transcript = policy.run(oracle, args.seed)
    console.print()
    if transcript.identified is not None:
        console.print(
            f"[bold green]Identified hypothesis {transcript.identified}[/bold green] "
            f"after {transcript.test_count} test(s)"
        )
    else:
        console.print(
            f"[bold yellow]Compatible set {list(transcript.verdict)}[/bold yellow] "
            f"after {transcript.test_count} test(s) ({transcript.stop})"
        )
    return 0


def _build_regress_parser() -> argparse.ArgumentParser:
    """Build the argument parser for the ``regress`` subcommand."""
    parser = argparse.ArgumentParser(
        prog="odtn regress",
        description=f"Replay a corpus of instances against {EXPECTATIONS}",
    )
    parser.add_argument("corpus", type=Path, help="Directory of instance JSON files")
    parser.add_argument("--record", action="store_true", help=f"Rewrite {EXPECTATIONS}")
    parser.add_argument("--output", "-o", type=Path, default=None, help="Summary JSON file")
    _add_common(parser)
    return parser


def ratio_ceiling(inst: OdtnInstance, algorithm: str) -> float:
    """Largest acceptable cost/optimum ratio before the regression alarm fires."""
    epsilon = separability(inst)
    if algorithm == "nonadaptive":
        return 1 + math.log(1 / epsilon) + 1
    stats = uncertainty_stats(inst)
    noise = min(stats.c * math.log2(inst.outcomes.size), stats.r)
    return 3 * (noise + math.log2(inst.m / epsilon) + 1)


def _measure(inst: OdtnInstance, caps: Caps) -> dict[str, dict[str, Any]]:
    bounds = compute_bounds(inst, caps)
    measured: dict[str, dict[str, Any]] = {}
    for algorithm in REGRESS_ALGORITHMS:
        policy = make_policy(algorithm, inst, exact=True, caps=caps)
        cost = exact_policy_cost(inst, policy, caps).cost
        optimum = bounds.opt_nonadaptive if algorithm == "nonadaptive" else bounds.opt_adaptive
        ratio = float(cost / optimum) if optimum else None
        measured[algorithm] = {"exact_cost": str(cost), "ratio": ratio}
    return measured


def _compare(
    name: str,
    inst: OdtnInstance,
    measured: dict[str, dict[str, Any]],
    expected: dict[str, dict[str, Any]],
) -> list[str]:
    failures = []
    for algorithm, now in measured.items():
        ratio = now["ratio"]
        if ratio is not None and ratio > ratio_ceiling(inst, algorithm):
            failures.append(f"{name}/{algorithm}: ratio {ratio:.4f} above ceiling")
        before = expected.get(algorithm)
        if before is None:
            failures.append(f"{name}/{algorithm}: no recorded expectation")
            continue
        if Fraction(now["exact_cost"]) != Fraction(before["exact_cost"]):
            failures.append(
                f"{name}/{algorithm}: cost {now['exact_cost']} != recorded {before['exact_cost']}"
            )
        if ratio is not None and before.get("ratio") and ratio > before["ratio"] * RATIO_SLACK:
            failures.append(
                f"{name}/{algorithm}: ratio {ratio:.4f} regressed from {before['ratio']:.4f}"
            )
    return failures


def _main_regress(argv: list[str]) -> int:
    """Handle the ``regress`` subcommand."""
    args = _build_regress_parser().parse_args(argv)
    _configure_logging(args.verbose)
    caps = _caps(args)
    paths = sorted(p for p in args.corpus.glob("*.json") if p.name != EXPECTATIONS)
    if not paths:
        raise UsageError(f"no instance files in {args.corpus}")
    expectations_path = args.corpus / EXPECTATIONS

    _banner("odtn regress", {"corpus": args.corpus, "instances": len(paths), "record": args.record})
    recorded: dict[str, Any] = {}
    if not args.record:
        if not expectations_path.exists():
            raise UsageError(f"{expectations_path} missing; run with --record first")
        recorded = json.loads(expectations_path.read_text(encoding="utf-8"))["instances"]

    measured: dict[str, Any] = {}
    failures: list[str] = []
    for path in paths:
        name = instance_id(path)
        inst = load_instance(path)
        measured[name] = _measure(inst, caps)
        if not args.record:
            failures.extend(_compare(name, inst, measured[name], recorded.get(name, {})))

    if args.record:
        expectations_path.write_text(
            to_json({"schema": REGRESS_SCHEMA, "instances": measured}), encoding="utf-8"
        )
        console.print(f"[bold green]Recorded {len(paths)} instance(s)[/bold green]")
        return 0

    summary = {
        "schema": REGRESS_SCHEMA,
        "instances": len(paths),
        "failures": failures,
        "passed": not failures,
    }
    write_output(to_json(summary), args.output)
    if failures:
        for failure in failures:
            console.print(f"  [red]✗[/red] {failure}")
        raise RegressionFailure(f"{len(failures)} regression(s)")
    console.print(f"[bold green]All {len(paths)} instance(s) match[/bold green]")
    return 0


_SUBCOMMANDS: dict[str, Callable[[list[str]], int]] = {
    "gen": _main_gen,
    "run": _main_run,
    "bounds": _main_bounds,
    "interactive": _main_interactive,
    "regress": _main_regress,
}


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the CLI."""
    args_list = argv if argv is not None else sys.argv[1:]

    handler = None
    rest: list[str] = []
    for position, arg in enumerate(args_list):
        if arg.startswith("-"):
            continue
        handler = _SUBCOMMANDS.get(arg)
        rest = args_list[position + 1 :]
        break

    if handler is None:
        parser = build_parser()
        if any(a in ("-h", "--help") for a in args_list):
            parser.print_help()
            return 0
        parser.print_usage(sys.stderr)
        console.print("[bold red]choose a subcommand: " + ", ".join(_SUBCOMMANDS) + "[/bold red]")
        return UsageError.exit_code

    try:
        return handler(rest)
    except OdtnError as e:
        console.print(f"[bold red]{type(e).__name__}: {e}[/bold red]")
        return e.exit_code
    except Exception as e:  # noqa: BLE001
        logger.debug("unhandled error", exc_info=True)
        console.print(f"[bold red]internal error: {type(e).__name__}: {e}[/bold red]")
        return OdtnError.exit_code


if __name__ == "__main__":
    sys.exit(main())
