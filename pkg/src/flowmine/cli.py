"""Command-line interface: one subcommand per pipeline stage.

Exit codes: 0 on success, 1 for input problems (missing or malformed
files, bad parameter values), 2 for pipeline failures.
"""

from __future__ import annotations

import argparse
import io
import logging
import sys
from pathlib import Path

from .conformance import DEFAULT_SILENT_DEPTH, fitness, fitness_table_csv
from .dfg import build_dfg, log_stats, transitions_csv
from .errors import FlowmineError, UnmappableClass
from .experiment import ExperimentConfig, load_log, run_experiment
from .flows import packets_to_event_log, write_event_log
from .fuzzy import FuzzyParams, mine_fuzzy
from .inductive import mine_inductive
from .packets import parse_packet_table, parse_pcap
from .petri import to_pnml, tree_to_petri
from .reference import (
    KIND_ABNORMAL,
    KIND_RARE_NORMAL,
    bishop_matrix,
    check_trace,
    rfc_strict_matrix,
    run_scenario_suite,
    stage_majority,
)
from .render import export_dot
from .synth import ANOMALY_KINDS, TrafficProfile, generate_anomalous_log, generate_normal_log

LOGGER = logging.getLogger(__name__)

__all__ = ["main"]


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _log_to_text(log) -> str:
    buffer = io.StringIO()
    write_event_log(log, buffer)
    return buffer.getvalue()


def _fuzzy_params(args) -> FuzzyParams:
    return FuzzyParams(
        activity_cutoff=args.activity_cutoff, path_cutoff=args.paths_cutoff
    )


def _add_input_options(parser, formats=("pcap", "table", "log"), default="log"):
    parser.add_argument("--input", required=True, help="input file")
    parser.add_argument(
        "--format", choices=formats, default=default, help="input file format"
    )


def _add_fuzzy_options(parser):
    parser.add_argument(
        "--activity-cutoff", type=float, default=0.0, metavar="F",
        help="drop classes below this fraction of the busiest class",
    )
    parser.add_argument(
        "--paths-cutoff", type=float, default=0.0, metavar="F",
        help="share of remaining edges to retain beyond the skeleton",
    )


def _sizes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad sizes {text!r}: {exc}") from None


def _cmd_ingest(args) -> int:
    path = Path(args.input)
    if args.format == "pcap":
        parse = parse_pcap(path.read_bytes())
    else:
        parse = parse_packet_table(path.read_text())
    log, stats = packets_to_event_log(
        parse.records, complete_only=not args.keep_incomplete
    )
    _emit(_log_to_text(log), args.out)
    print(
        f"packets={stats.input_packets} cases={stats.cases_kept} "
        f"events={stats.events} no_syn={stats.cases_no_syn} "
        f"incomplete={stats.cases_incomplete}",
        file=sys.stderr,
    )
    return 0


def _cmd_synth(args) -> int:
    if args.kind == "normal":
        log = generate_normal_log(args.cases, TrafficProfile(seed=args.seed))
    else:
        log = generate_anomalous_log(args.kind, args.cases, seed=args.seed)
    _emit(_log_to_text(log), args.out)
    return 0


def _cmd_mine(args) -> int:
    log = load_log(args.input, args.format)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    dfg = build_dfg(log)
    stages = stage_majority(log) if args.color_stages else None
    (out_dir / "dfg.dot").write_text(export_dot(dfg, stages))
    (out_dir / "transitions.csv").write_text(transitions_csv(dfg))
    if args.miner in ("inductive", "both"):
        tree = mine_inductive(log)
        net = tree_to_petri(tree)
        (out_dir / "tree.txt").write_text(str(tree) + "\n")
        (out_dir / "inductive.pnml").write_text(to_pnml(net))
        (out_dir / "inductive.dot").write_text(export_dot(net, stages))
    if args.miner in ("fuzzy", "both"):
        model = mine_fuzzy(dfg, _fuzzy_params(args))
        (out_dir / "fuzzy.dot").write_text(export_dot(model, stages))
    stats = log_stats(log)
    print(
        f"cases={stats.case_count} events={stats.event_count} "
        f"classes={stats.event_class_count}",
        file=sys.stderr,
    )
    return 0


def _cmd_conform(args) -> int:
    train = load_log(args.train, args.format)
    evaluate = load_log(args.input, args.format)
    net = tree_to_petri(mine_inductive(train))
    report = fitness(net, evaluate, silent_depth=args.silent_depth)
    _emit(fitness_table_csv([(Path(args.input).stem, report)]), args.out)
    return 0


def _cmd_check_matrix(args) -> int:
    log = load_log(args.input, args.format)
    matrices = []
    if args.matrix in ("bishop", "both"):
        matrices.append(bishop_matrix())
    if args.matrix in ("rfc-strict", "both"):
        matrices.append(rfc_strict_matrix())
    lines = ["case_id,matrix,verdict,index,source,target"]
    passes = {m.name: 0 for m in matrices}
    for case in log.cases:
        for matrix in matrices:
            try:
                result = check_trace(matrix, case.trace)
            except UnmappableClass as exc:
                lines.append(
                    f"{case.case_id},{matrix.name},unmappable,{exc.index},"
                    f"{exc.event_class},"
                )
                continue
            if result.passed:
                passes[matrix.name] += 1
                lines.append(f"{case.case_id},{matrix.name},pass,,,")
            else:
                source, target = result.step
                lines.append(
                    f"{case.case_id},{matrix.name},fail,{result.index},"
                    f"{source},{target}"
                )
    _emit("\n".join(lines) + "\n", args.out)
    summary = " ".join(
        f"{name}={count}/{len(log.cases)}" for name, count in passes.items()
    )
    print(f"passing: {summary}", file=sys.stderr)
    return 0


def _cmd_scenarios(args) -> int:
    models: dict[str, object] = {}
    if args.input is not None:
        log = load_log(args.input, args.format)
        if args.miner in ("inductive", "both"):
            models[f"inductive-{len(log)}"] = mine_inductive(log)
        if args.miner in ("fuzzy", "both"):
            models[f"fuzzy-{len(log)}"] = mine_fuzzy(build_dfg(log), _fuzzy_params(args))
    table = run_scenario_suite(models)
    rare = table.to_csv(kind=KIND_RARE_NORMAL)
    abnormal = table.to_csv(kind=KIND_ABNORMAL)
    if args.out == "-":
        sys.stdout.write(rare + "\n" + abnormal)
    else:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "scenarios_rare_normal.csv").write_text(rare)
        (out_dir / "scenarios_abnormal.csv").write_text(abnormal)
    return 0


def _cmd_export(args) -> int:
    log = load_log(args.input, args.format)
    stages = stage_majority(log) if args.color_stages else None
    if args.model == "dfg":
        rendered = export_dot(build_dfg(log), stages)
    elif args.model == "fuzzy":
        rendered = export_dot(mine_fuzzy(build_dfg(log), _fuzzy_params(args)), stages)
    else:
        rendered = export_dot(tree_to_petri(mine_inductive(log)), stages)
    _emit(rendered, args.out)
    return 0


def _cmd_experiment(args) -> int:
    config = ExperimentConfig(
        out_dir=args.out,
        input_path=args.input,
        input_format=args.format,
        sizes=args.sizes,
        miner=args.miner,
        fuzzy_params=_fuzzy_params(args),
        silent_depth=args.silent_depth,
        seed=args.seed,
        heldout_cases=args.heldout,
        anomaly_cases=args.anomaly_cases,
        color_stages=args.color_stages,
    )
    bundle = run_experiment(config)
    for message in bundle.errors:
        print(f"stage failed: {message}", file=sys.stderr)
    print(f"wrote {len(bundle.files)} files to {bundle.out_dir}", file=sys.stderr)
    return 0 if bundle.ok else 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowmine",
        description="Mine process models from TCP traffic and check conformance.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="parse packets into an event log")
    _add_input_options(ingest, formats=("pcap", "table"), default="pcap")
    ingest.add_argument("--out", default="-", help="output event log file, - for stdout")
    ingest.add_argument(
        "--keep-incomplete", action="store_true",
        help="keep flows that fail the completeness filter",
    )
    ingest.set_defaults(handler=_cmd_ingest)

    synth = sub.add_parser("synth", help="generate a synthetic event log")
    synth.add_argument(
        "--kind", choices=("normal",) + ANOMALY_KINDS, default="normal"
    )
    synth.add_argument("--cases", type=int, default=100)
    synth.add_argument("--seed", type=int, default=7)
    synth.add_argument("--out", default="-", help="output event log file, - for stdout")
    synth.set_defaults(handler=_cmd_synth)

    mine = sub.add_parser("mine", help="discover models from an event log")
    _add_input_options(mine)
    mine.add_argument("--miner", choices=("inductive", "fuzzy", "both"), default="both")
    _add_fuzzy_options(mine)
    mine.add_argument("--color-stages", action="store_true")
    mine.add_argument("--out", required=True, help="output directory")
    mine.set_defaults(handler=_cmd_mine)

    conform = sub.add_parser(
        "conform", help="replay a log against a model mined from training data"
    )
    _add_input_options(conform)
    conform.add_argument("--train", required=True, help="training event log")
    conform.add_argument("--silent-depth", type=int, default=DEFAULT_SILENT_DEPTH)
    conform.add_argument("--out", default="-")
    conform.set_defaults(handler=_cmd_conform)

    check = sub.add_parser(
        "check-matrix", help="validate flows against the reference matrices"
    )
    _add_input_options(check)
    check.add_argument(
        "--matrix", choices=("bishop", "rfc-strict", "both"), default="both"
    )
    check.add_argument("--out", default="-")
    check.set_defaults(handler=_cmd_check_matrix)

    scenarios = sub.add_parser(
        "scenarios", help="run the built-in scenario suite against models"
    )
    scenarios.add_argument("--input", help="optional training log to mine models from")
    scenarios.add_argument(
        "--format", choices=("pcap", "table", "log"), default="log"
    )
    scenarios.add_argument(
        "--miner", choices=("inductive", "fuzzy", "both"), default="both"
    )
    _add_fuzzy_options(scenarios)
    scenarios.add_argument("--out", default="-", help="output directory, - for stdout")
    scenarios.set_defaults(handler=_cmd_scenarios)

    export = sub.add_parser("export", help="render a model as DOT")
    _add_input_options(export)
    export.add_argument("--model", choices=("dfg", "fuzzy", "petri"), default="dfg")
    _add_fuzzy_options(export)
    export.add_argument("--color-stages", action="store_true")
    export.add_argument("--out", default="-")
    export.set_defaults(handler=_cmd_export)

    experiment = sub.add_parser("experiment", help="run the full pipeline")
    experiment.add_argument("--input", help="input traffic; omit for synthetic")
    experiment.add_argument(
        "--format", choices=("pcap", "table", "log"), default="log"
    )
    experiment.add_argument("--sizes", type=_sizes, default=(5, 100, 20000))
    experiment.add_argument(
        "--miner", choices=("inductive", "fuzzy", "both"), default="both"
    )
    _add_fuzzy_options(experiment)
    experiment.add_argument("--silent-depth", type=int, default=DEFAULT_SILENT_DEPTH)
    experiment.add_argument("--seed", type=int, default=7)
    experiment.add_argument("--heldout", type=int, default=2000)
    experiment.add_argument("--anomaly-cases", type=int, default=500)
    experiment.add_argument("--color-stages", action="store_true")
    experiment.add_argument("--out", required=True, help="output directory")
    experiment.set_defaults(handler=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (FlowmineError, FileNotFoundError, IsADirectoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        LOGGER.exception("pipeline failure")
        print(f"pipeline failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
