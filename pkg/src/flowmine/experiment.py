"""End-to-end experiment runs: subsample, mine, score, compare, export.

A run takes one traffic source (a capture, a packet table, an event log,
or the synthetic generator), mines models at several subsample sizes,
replays held-out normal traffic and anomaly logs against the inductive
net, runs the scenario suites, and writes every artifact under one
output directory. Stages are independent: a failing size records an
error in the bundle and later sizes still run, so completed artifacts
always persist.
"""

from __future__ import annotations

import io
import logging
import platform
import random
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .conformance import DEFAULT_SILENT_DEPTH, FitnessReport, fitness, fitness_table_csv
from .dfg import build_dfg, log_stats, subsample, transitions_csv
from .errors import FlowmineError
from .flows import EventLog, packets_to_event_log, read_event_log, write_event_log
from .fuzzy import FuzzyParams, mine_fuzzy
from .inductive import mine_inductive
from .packets import parse_packet_table, parse_pcap
from .petri import to_pnml, tree_to_petri
from .reference import (
    KIND_ABNORMAL,
    KIND_RARE_NORMAL,
    ComparisonTable,
    run_scenario_suite,
    stage_majority,
)
from .render import export_dot
from .synth import (
    ANOMALY_KINDS,
    TrafficProfile,
    generate_anomalous_log,
    generate_normal_log,
    profile_with_seed,
)

LOGGER = logging.getLogger(__name__)

__all__ = ["ExperimentConfig", "ReportBundle", "run_experiment", "load_log"]

_MINERS = ("inductive", "fuzzy", "both")
_FORMATS = ("pcap", "table", "log")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs; two runs with equal configs write equal
    artifacts (manifest timings aside)."""

    out_dir: str | Path
    input_path: str | Path | None = None
    input_format: str = "log"
    sizes: tuple[int, ...] = (5, 100, 20000)
    miner: str = "both"
    fuzzy_params: FuzzyParams = field(default_factory=FuzzyParams)
    silent_depth: int = DEFAULT_SILENT_DEPTH
    seed: int = 7
    heldout_cases: int = 2000
    anomaly_cases: int = 500
    profile: TrafficProfile | None = None
    color_stages: bool = False

    def __post_init__(self):
        if not self.sizes:
            raise ValueError("sizes must be nonempty")
        if any(s < 1 for s in self.sizes):
            raise ValueError(f"sizes must be positive, got {self.sizes}")
        if list(self.sizes) != sorted(self.sizes):
            raise ValueError(f"sizes must be nondecreasing, got {self.sizes}")
        if self.miner not in _MINERS:
            raise ValueError(f"miner must be one of {_MINERS}, got {self.miner!r}")
        if self.input_format not in _FORMATS:
            raise ValueError(
                f"input_format must be one of {_FORMATS}, got {self.input_format!r}"
            )
        if self.input_path is not None and not Path(self.input_path).exists():
            raise FileNotFoundError(f"input not found: {self.input_path}")


@dataclass
class ReportBundle:
    """Artifacts and in-memory results of one experiment run."""

    out_dir: Path
    files: list[str] = field(default_factory=list)
    fitness: dict[str, dict[str, FitnessReport]] = field(default_factory=dict)
    tables: dict[str, ComparisonTable] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def load_log(path: str | Path, fmt: str) -> EventLog:
    """Load an event log from a capture, a packet table, or a log file."""
    path = Path(path)
    if fmt == "pcap":
        parse = parse_pcap(path.read_bytes())
        if parse.total_skipped:
            LOGGER.info("skipped %d non-TCP records: %s", parse.total_skipped, parse.skipped)
        log, stats = packets_to_event_log(parse.records)
        LOGGER.info("kept %d of %d assembled cases", stats.cases_kept, stats.cases_assigned)
        return log
    if fmt == "table":
        parse = parse_packet_table(path.read_text())
        log, _ = packets_to_event_log(parse.records)
        return log
    if fmt == "log":
        return read_event_log(path)
    raise ValueError(f"unknown input format {fmt!r}")


def _stats_text(stats) -> str:
    lines = [
        f"case_count={stats.case_count}",
        f"event_count={stats.event_count}",
        f"event_class_count={stats.event_class_count}",
        f"min_case_length={stats.min_case_length}",
        f"max_case_length={stats.max_case_length}",
        f"mean_case_length={stats.mean_case_length:.6f}",
    ]
    return "\n".join(lines) + "\n"


def _split_heldout(log: EventLog, n: int, seed: int) -> tuple[EventLog, EventLog]:
    """Deterministically carve ``n`` held-out cases off a log."""
    if n >= len(log.cases):
        raise ValueError(f"cannot hold out {n} of {len(log.cases)} cases")
    chosen = set(random.Random(seed).sample(range(len(log.cases)), n))
    heldout = EventLog(cases=[c for i, c in enumerate(log.cases) if i in chosen])
    pool = EventLog(cases=[c for i, c in enumerate(log.cases) if i not in chosen])
    return pool, heldout


def run_experiment(config: ExperimentConfig) -> ReportBundle:
    """Run the full pipeline and write all artifacts under ``out_dir``."""
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bundle = ReportBundle(out_dir=out_dir)
    timings: dict[str, float] = {}

    def write(relative: str, text: str) -> None:
        target = out_dir / relative
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text)
        bundle.files.append(relative)

    started = time.perf_counter()
    try:
        if config.input_path is None:
            profile = config.profile or TrafficProfile(seed=config.seed)
            pool = generate_normal_log(max(config.sizes), profile)
            heldout = generate_normal_log(
                config.heldout_cases, profile_with_seed(profile, profile.seed + 1)
            )
        else:
            full = load_log(config.input_path, config.input_format)
            pool, heldout = _split_heldout(full, config.heldout_cases, config.seed)
        anomalies = {
            kind: generate_anomalous_log(kind, config.anomaly_cases, seed=config.seed + 2 + i)
            for i, kind in enumerate(ANOMALY_KINDS)
        }
    except (FlowmineError, OSError, ValueError) as exc:
        bundle.errors.append(f"input: {exc}")
        _write_manifest(write, config, bundle, timings)
        return bundle
    timings["load"] = time.perf_counter() - started

    write("training_stats.txt", _stats_text(log_stats(pool)))
    write("heldout_stats.txt", _stats_text(log_stats(heldout)))
    write("heldout.csv", _log_text(heldout))
    for kind, log in anomalies.items():
        write(f"anomaly_{kind}.csv", _log_text(log))

    for index, size in enumerate(config.sizes):
        label = f"size_{size}" if config.sizes.count(size) == 1 else f"size_{size}_{index}"
        started = time.perf_counter()
        try:
            _run_size(
                config, pool, heldout, anomalies, size, index, label, write, bundle
            )
        except (FlowmineError, ValueError, RuntimeError) as exc:
            LOGGER.error("stage %s failed: %s", label, exc)
            bundle.errors.append(f"{label}: {exc}")
        timings[label] = time.perf_counter() - started

    _write_manifest(write, config, bundle, timings)
    return bundle


def _log_text(log: EventLog) -> str:
    buffer = io.StringIO()
    write_event_log(log, buffer)
    return buffer.getvalue()


def _run_size(config, pool, heldout, anomalies, size, index, label, write, bundle):
    train = subsample(pool, size, config.seed + 100 + index)
    dfg = build_dfg(train)
    stages = stage_majority(train) if config.color_stages else None
    write(f"{label}/transitions.csv", transitions_csv(dfg))
    write(f"{label}/dfg.dot", export_dot(dfg, stages))
    write(f"{label}/training.csv", _log_text(train))

    models: dict[str, object] = {}
    if config.miner in ("inductive", "both"):
        tree = mine_inductive(train)
        net = tree_to_petri(tree)
        models[f"inductive-{size}"] = tree
        write(f"{label}/tree.txt", str(tree) + "\n")
        write(f"{label}/inductive.pnml", to_pnml(net))
        write(f"{label}/inductive.dot", export_dot(net, stages))
        rows = [("normal-heldout", fitness(net, heldout, silent_depth=config.silent_depth))]
        for kind, anomaly_log in anomalies.items():
            rows.append((kind, fitness(net, anomaly_log, silent_depth=config.silent_depth)))
        write(f"{label}/fitness.csv", fitness_table_csv(rows))
        bundle.fitness[label] = dict(rows)
    if config.miner in ("fuzzy", "both"):
        fuzzy_model = mine_fuzzy(dfg, config.fuzzy_params)
        models[f"fuzzy-{size}"] = fuzzy_model
        write(f"{label}/fuzzy.dot", export_dot(fuzzy_model, stages))

    table = run_scenario_suite(models)
    write(f"{label}/scenarios_rare_normal.csv", table.to_csv(kind=KIND_RARE_NORMAL))
    write(f"{label}/scenarios_abnormal.csv", table.to_csv(kind=KIND_ABNORMAL))
    bundle.tables[label] = table


def _write_manifest(write, config: ExperimentConfig, bundle: ReportBundle, timings) -> None:
    try:
        from importlib.metadata import version

        package_version = version("flowmine")
    except Exception:  # not installed; running from a checkout
        package_version = "unknown"
    lines = [
        f"flowmine_version={package_version}",
        f"python_version={sys.version.split()[0]}",
        f"platform={platform.platform()}",
        f"input={config.input_path or 'synthetic'}",
        f"input_format={config.input_format}",
        f"sizes={','.join(str(s) for s in config.sizes)}",
        f"miner={config.miner}",
        f"activity_cutoff={config.fuzzy_params.activity_cutoff}",
        f"path_cutoff={config.fuzzy_params.path_cutoff}",
        f"silent_depth={config.silent_depth}",
        f"seed={config.seed}",
        f"heldout_cases={config.heldout_cases}",
        f"anomaly_cases={config.anomaly_cases}",
        f"color_stages={config.color_stages}",
    ]
    lines.extend(f"timing_{name}={seconds:.3f}" for name, seconds in timings.items())
    lines.extend(f"error={message}" for message in bundle.errors)
    lines.extend(f"file={name}" for name in sorted(bundle.files))
    write("manifest.txt", "\n".join(lines) + "\n")
