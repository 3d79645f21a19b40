from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable

from pydantic import ValidationError

from cyccon import __version__
from cyccon.coupling import maximal_coupling, verify_coupling
from cyccon.criterion import (
    check_consistent,
    check_main,
    get_criterion,
    interval_verdict,
    list_criteria,
)
from cyccon.env import load_env_file, settings_from_env
from cyccon.errors import CycconError, InfeasibleContext, InfeasibleCycle, InputError, MultipleCycles
from cyccon.exact import exact_str, to_fraction
from cyccon.model import (
    CyclicSystem,
    SystemLayout,
    build_cyclic_systems,
    decompose_cycles,
    parse_system_json,
)
from cyccon.oracle import build_problem, feasible, feasible_traditional, verify_certificate, verify_solution
from cyccon.report import (
    ConnectionTestJson,
    CouplingFile,
    IntervalVerdictJson,
    NumberFormat,
    OracleJson,
    RunReport,
    VerdictJson,
    input_digest,
    load_coupling,
)
from cyccon.settings import CycconSettings
from cyccon.stats import (
    conservative_box,
    estimate_moments,
    estimates_from_system_file,
    get_dataset,
    list_datasets,
    read_records_csv,
    simulate_records,
    system_from_estimates,
    terms_from_estimates,
    two_sample_t,
    write_records_csv,
)
from cyccon.sweep import run_grid, run_sweep

logger = logging.getLogger("cyccon")

EXIT_OK = 0
EXIT_CONTEXTUAL = 3
EXIT_DISAGREE = 4


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _rational(text: str) -> Fraction:
    try:
        return to_fraction(text)
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from e


def _say(msg: str) -> None:
    """Human-readable line on standard error; standard output is JSON only."""
    print(msg, file=sys.stderr)


def _emit(report: RunReport) -> None:
    print(report.to_json())


def _read(path: Path) -> bytes:
    return Path(path).read_bytes()


def _systems(raw: bytes, *, clamp: bool) -> list[CyclicSystem]:
    sf = parse_system_json(raw)
    return build_cyclic_systems(sf.layout, sf.moments, clamp=clamp)


def _single(systems: list[CyclicSystem]) -> CyclicSystem:
    if len(systems) != 1:
        raise MultipleCycles(len(systems))
    return systems[0]


def _clamp_warnings(systems: list[CyclicSystem]) -> list[str]:
    return [
        f"cycle {'-'.join(s.labels)} context {a.context}: corr {a.original} clamped to {a.clamped}"
        for s in systems
        for a in s.adjustments
    ]


def _describe(kind: str, cycle: tuple[str, ...], v_json: VerdictJson) -> str:
    if v_json.contextual:
        state = "contextual"
        rel = ">"
    elif v_json.inconclusive:
        state = "inconclusive"
        rel = "<="
    else:
        state = "noncontextual"
        rel = "<="
    return f"{'-'.join(cycle)} [{kind}]: {state} (lhs {v_json.lhs} {rel} {v_json.bound})"


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_check(args: argparse.Namespace, settings: CycconSettings, fmt: NumberFormat) -> int:
    raw = _read(args.system)
    systems = _systems(raw, clamp=args.clamp)
    criterion = get_criterion(args.kind)
    verdicts = []
    contextual = False
    for system in systems:
        v = criterion(system)
        vj = VerdictJson.from_verdict(v, fmt, system.labels)
        verdicts.append(vj)
        contextual |= v.contextual
        _say(_describe(args.kind, system.labels, vj))
    _emit(
        RunReport(
            command="check",
            input_digest=input_digest(raw),
            verdicts=verdicts,
            warnings=_clamp_warnings(systems),
        )
    )
    return EXIT_CONTEXTUAL if contextual else EXIT_OK


def cmd_couple(args: argparse.Namespace, settings: CycconSettings, fmt: NumberFormat) -> int:
    raw = _read(args.system)
    systems = _systems(raw, clamp=args.clamp)
    system = _single(systems)
    digest = input_digest(raw)
    try:
        joint = maximal_coupling(system, max_variables=settings.max_coupling_variables)
    except InfeasibleCycle as e:
        verdict = check_main(system)
        _say(
            f"no maximal coupling: s1 = {fmt(e.lhs)} > {fmt(e.bound)}, "
            f"witness {list(e.witness.coefficients)}"
        )
        _emit(
            RunReport(
                command="couple",
                input_digest=digest,
                verdicts=[VerdictJson.from_verdict(verdict, fmt, system.labels)],
                warnings=_clamp_warnings(systems),
            )
        )
        return EXIT_CONTEXTUAL

    coupling = CouplingFile.from_joint(joint)
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(coupling.model_dump_json(indent=2) + "\n", encoding="utf-8")
        _say(f"wrote coupling over {joint.k} variables ({len(coupling.atoms)} atoms) to {args.out}")
    _emit(
        RunReport(
            command="couple",
            input_digest=digest,
            coupling=None if args.out is not None else coupling,
            coupling_path=None if args.out is None else str(args.out),
            warnings=_clamp_warnings(systems),
        )
    )
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, settings: CycconSettings, fmt: NumberFormat) -> int:
    raw_coupling = _read(args.coupling)
    raw_system = _read(args.system)
    joint = load_coupling(args.coupling)
    system = _single(_systems(raw_system, clamp=args.clamp))
    problems = verify_coupling(joint, system)
    for p in problems:
        _say(f"mismatch: {p}")
    if not problems:
        _say("ok")
    _emit(
        RunReport(
            command="verify",
            input_digest=input_digest(raw_coupling, raw_system),
            warnings=problems,
        )
    )
    return 1 if problems else EXIT_OK


def cmd_oracle(args: argparse.Namespace, settings: CycconSettings, fmt: NumberFormat) -> int:
    raw = _read(args.system)
    system = _single(_systems(raw, clamp=args.clamp))
    cap = settings.oracle_max_rank

    if args.traditional:
        result = feasible_traditional(system, max_rank=cap, force=args.force)
        check = None if result.note else check_consistent(system)
        problem = None if result.note else build_problem(system, traditional=True)
    else:
        result = feasible(system, max_rank=cap)
        check = check_main(system)
        problem = build_problem(system)

    sound = True
    if problem is not None:
        if result.feasible:
            sound = result.joint is not None and verify_solution(problem, result.joint)
        else:
            sound = result.certificate is not None and verify_certificate(problem, result.certificate)

    agreement = None
    if check is not None:
        agreement = "AGREE" if sound and result.feasible == (not check.contextual) else "DISAGREE"

    cert = None if result.certificate is None else [exact_str(z) for z in result.certificate]
    oj = OracleJson(
        variant="traditional" if args.traditional else "maximal",
        feasible=result.feasible,
        certificate=cert,
        row_labels=list(result.row_labels) if cert is not None else [],
        check=None if check is None else VerdictJson.from_verdict(check, fmt, system.labels),
        agreement=agreement,
        note=result.note,
    )
    _say(
        f"oracle: {'feasible' if result.feasible else 'infeasible'}"
        + ("" if agreement is None else f"; criterion: {'contextual' if check.contextual else 'noncontextual'}; {agreement}")
    )
    _emit(RunReport(command="oracle", input_digest=input_digest(raw), verdicts=[oj]))

    if agreement == "DISAGREE":
        return EXIT_DISAGREE
    return EXIT_OK if result.feasible else EXIT_CONTEXTUAL


def cmd_analyze(args: argparse.Namespace, settings: CycconSettings, fmt: NumberFormat) -> int:
    sources = [s for s in (args.records, args.demo, args.system) if s is not None]
    if len(sources) != 1:
        raise InputError("analyze takes exactly one of RECORDS, --demo, --system")
    warnings: list[str] = []
    tests: list[ConnectionTestJson] = []
    point_verdicts: list[VerdictJson] = []

    if args.demo is not None:
        dataset = get_dataset(args.demo)
        digest = input_digest(f"demo:{args.demo}".encode())
        terms = dataset.terms()
        df = args.df if args.df is not None else dataset.df
        for pair in dataset.marginals():
            r = two_sample_t(pair.here, pair.before, dataset.df)
            tests.append(ConnectionTestJson.from_result(pair.connection, r, fmt))
        point = dataset.point_system()
        point_verdicts.append(VerdictJson.from_verdict(get_criterion("necessary")(point), fmt, point.labels))
    else:
        if args.records is not None:
            raw = _read(args.records)
            estimates = estimate_moments(read_records_csv(args.records, rank=args.rank))
        else:
            if args.df is None:
                raise InputError("--system needs --df")
            raw = _read(args.system)
            estimates = estimates_from_system_file(parse_system_json(raw), df=args.df)
        digest = input_digest(raw)
        terms = terms_from_estimates(estimates)
        df = args.df
        n = len(estimates)
        for i in range(n):
            here, before = estimates[i].first, estimates[i - 1].second
            if here.se == 0 and before.se == 0:
                warnings.append(f"connection {i + 1}: zero standard errors, no t-test")
                continue
            r = two_sample_t(here, before, min(here.df, before.df))
            tests.append(ConnectionTestJson.from_result(i + 1, r, fmt))
        try:
            point = system_from_estimates(estimates, clamp=args.clamp)
        except InfeasibleContext as e:
            warnings.append(f"point estimates not realizable ({e}); rerun with --clamp")
        else:
            warnings += _clamp_warnings([point])
            point_verdicts.append(VerdictJson.from_verdict(get_criterion("necessary")(point), fmt, point.labels))

    box = conservative_box(terms, alpha=settings.alpha, factor_override=args.factor, df=df)
    verdict = interval_verdict(
        box,
        args.mode,
        spacing=settings.grid_spacing,
        max_points=settings.max_grid_points,
    )
    vj = IntervalVerdictJson.from_verdict(
        verdict,
        fmt,
        factor=box.factor,
        alpha=box.alpha,
        quantile=box.quantile,
        tests=tests,
    )
    _say(
        f"s1(corr) - sum|Δ| in [{vj.interval[0]}, {vj.interval[1]}], bound {vj.bound}: "
        + ("contextual (certified)" if verdict.certified else "not certified")
    )
    for t in tests:
        level = "0.1%" if t.significant_0_1_percent else "1%" if t.significant_1_percent else None
        _say(f"connection {t.connection}: t = {t.t}" + (f", significant at {level}" if level else ", not significant"))
    _emit(RunReport(command="analyze", input_digest=digest, verdicts=[vj, *point_verdicts], warnings=warnings))
    return EXIT_CONTEXTUAL if verdict.certified else EXIT_OK


def cmd_decompose(args: argparse.Namespace, settings: CycconSettings, fmt: NumberFormat) -> int:
    raw = _read(args.layout)
    layout = SystemLayout.model_validate_json(raw)
    cycles = decompose_cycles(layout)
    for c in cycles:
        _say(" - ".join(c))
    _emit(RunReport(command="decompose", input_digest=input_digest(raw), cycles=[list(c) for c in cycles]))
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, settings: CycconSettings, fmt: NumberFormat) -> int:
    raw = _read(args.system)
    system = _single(_systems(raw, clamp=args.clamp))
    records = simulate_records(system, replications=args.replications, trials=args.trials, seed=args.seed)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_records_csv(records, args.out)
    _say(f"wrote {len(records)} trials to {args.out}")
    _emit(
        RunReport(
            command="simulate",
            input_digest=input_digest(raw),
            summary={"trials": len(records), "replications": args.replications, "contexts": system.rank},
        )
    )
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, settings: CycconSettings, fmt: NumberFormat) -> int:
    limits = {"max_rank": settings.oracle_max_rank, "max_variables": settings.max_coupling_variables}
    if args.exhaustive:
        summary = run_grid(rank=args.rank, denominator=args.denominator, progress=not args.no_progress, **limits)
    else:
        summary = run_sweep(
            rank=args.rank,
            count=args.count,
            seed=args.seed,
            denominator=args.denominator,
            progress=not args.no_progress,
            **limits,
        )
    _say(
        f"rank {args.rank}: {summary.checked} systems, {summary.contextual} contextual, "
        f"{summary.boundary} on the boundary, {len(summary.disagreements)} disagreement(s)"
    )
    _emit(
        RunReport(
            command="sweep",
            input_digest=input_digest(
                f"sweep:{args.rank}:{args.count}:{args.seed}:{args.denominator}:{args.exhaustive}".encode()
            ),
            summary={
                "checked": summary.checked,
                "contextual": summary.contextual,
                "boundary": summary.boundary,
                "disagreements": len(summary.disagreements),
            },
            warnings=[s.model_dump_json() for s in summary.disagreements],
        )
    )
    return EXIT_DISAGREE if summary.disagreements else EXIT_OK


COMMANDS: dict[str, Callable[[argparse.Namespace, CycconSettings, NumberFormat], int]] = {
    "check": cmd_check,
    "couple": cmd_couple,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
    "analyze": cmd_analyze,
    "decompose": cmd_decompose,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--exact", action="store_true", help="Print exact rationals instead of rounded decimals.")
    common.add_argument("--precision", type=int, default=None, help="Decimal digits in reported numbers.")
    common.add_argument("--seed", type=int, default=None, help="Seed for randomized subcommands.")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging on standard error.")

    p = argparse.ArgumentParser(
        prog="cyccon",
        description="Contextuality analysis of cyclic systems of +-1 random variables.",
    )
    p.add_argument("--version", action="version", version=f"cyccon {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True)

    # ---- check -----------------------------------------------------------
    check = sub.add_parser("check", parents=[common], help="Run a criterion on a system file.")
    check.add_argument("system", type=Path)
    check.add_argument("--kind", choices=list_criteria(), default="main")
    check.add_argument("--clamp", action="store_true", help="Project infeasible correlations onto their bounds.")

    # ---- couple ----------------------------------------------------------
    couple = sub.add_parser("couple", parents=[common], help="Build a maximally noncontextual coupling.")
    couple.add_argument("system", type=Path)
    couple.add_argument("--out", type=Path, default=None)
    couple.add_argument("--clamp", action="store_true")

    # ---- verify ----------------------------------------------------------
    verify = sub.add_parser("verify", parents=[common], help="Check a coupling file against a system file.")
    verify.add_argument("coupling", type=Path)
    verify.add_argument("system", type=Path)
    verify.add_argument("--clamp", action="store_true")

    # ---- oracle ----------------------------------------------------------
    oracle = sub.add_parser("oracle", parents=[common], help="Brute-force feasibility check plus agreement.")
    oracle.add_argument("system", type=Path)
    oracle.add_argument("--traditional", action="store_true", help="Connections equal with probability 1.")
    oracle.add_argument("--force", action="store_true", help="With --traditional: answer no for inconsistent systems.")
    oracle.add_argument("--max-rank", type=int, default=None)
    oracle.add_argument("--clamp", action="store_true")

    # ---- analyze ---------------------------------------------------------
    analyze = sub.add_parser("analyze", parents=[common], help="Conservative interval analysis of estimated moments.")
    analyze.add_argument("records", type=Path, nargs="?", default=None, help="Records CSV.")
    analyze.add_argument("--demo", choices=list_datasets(), default=None, help="Embedded dataset.")
    analyze.add_argument("--system", type=Path, default=None, help="System JSON with per-moment 'se' entries.")
    analyze.add_argument("--df", type=int, default=None, help="Degrees of freedom (required with --system).")
    analyze.add_argument("--rank", type=int, default=None, help="Cycle rank of a records file.")
    analyze.add_argument("--alpha", type=float, default=None)
    analyze.add_argument("--factor", type=_rational, default=None, help="Fixed half-width factor (x standard error).")
    analyze.add_argument("--mode", choices=["conservative", "grid"], default="conservative")
    analyze.add_argument("--spacing", type=_rational, default=None, help="Grid spacing h for --mode grid.")
    analyze.add_argument("--max-points", type=int, default=None)
    analyze.add_argument("--clamp", action="store_true")

    # ---- decompose -------------------------------------------------------
    decompose = sub.add_parser("decompose", parents=[common], help="List the cycles of a layout.")
    decompose.add_argument("layout", type=Path)

    # ---- simulate --------------------------------------------------------
    simulate = sub.add_parser("simulate", parents=[common], help="Write synthetic trial records for a system.")
    simulate.add_argument("system", type=Path)
    simulate.add_argument("--out", type=Path, required=True)
    simulate.add_argument("--replications", type=int, default=20)
    simulate.add_argument("--trials", type=int, default=1000)
    simulate.add_argument("--clamp", action="store_true")

    # ---- sweep -----------------------------------------------------------
    sweep = sub.add_parser("sweep", parents=[common], help="Randomized criterion / coupling / oracle agreement.")
    sweep.add_argument("--rank", type=int, required=True)
    sweep.add_argument("--count", type=int, default=1000)
    sweep.add_argument("--denominator", type=int, default=8)
    sweep.add_argument(
        "--exhaustive",
        action="store_true",
        help="Check every system on the 1/denominator grid instead of --count random ones.",
    )
    sweep.add_argument("--no-progress", action="store_true")

    return p


def main(argv: list[str] | None = None) -> int:
    load_env_file(".env")
    p = build_parser()
    args = p.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        settings = settings_from_env(
            precision=args.precision,
            alpha=getattr(args, "alpha", None),
            grid_spacing=getattr(args, "spacing", None),
            max_grid_points=getattr(args, "max_points", None),
            oracle_max_rank=getattr(args, "max_rank", None),
        )
        logger.debug("settings: %s", settings)
        fmt = NumberFormat(precision=settings.precision, exact=args.exact)
        return COMMANDS[args.cmd](args, settings, fmt)
    except CycconError as e:
        _say(f"error: {e}")
        return e.exit_code
    except ValidationError as e:
        _say(f"error: invalid input: {e}")
        return 1
    except OSError as e:
        _say(f"error: {e}")
        return 1
