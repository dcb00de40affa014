"""Directly-follows graphs and event-log summary helpers."""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .errors import NotEnoughCases
from .flows import EventLog

__all__ = [
    "START",
    "END",
    "DFG",
    "LogStats",
    "build_dfg",
    "dfg_from_traces",
    "log_stats",
    "subsample",
    "transition_frequencies",
    "transitions_csv",
]

START = "START"
END = "END"


@dataclass
class DFG:
    """Directly-follows counts with virtual START/END boundary edges.

    ``edges`` holds class-to-class transitions; transitions from START and
    to END are kept separately in ``start_counts`` and ``end_counts``.
    Cases with no events are counted in ``empty_cases`` (they contribute
    no edges at all).
    """

    case_count: int = 0
    node_events: Counter = field(default_factory=Counter)
    node_cases: Counter = field(default_factory=Counter)
    edges: Counter = field(default_factory=Counter)
    start_counts: Counter = field(default_factory=Counter)
    end_counts: Counter = field(default_factory=Counter)
    empty_cases: int = 0

    @property
    def nodes(self) -> set[str]:
        return set(self.node_events)

    @property
    def start_nodes(self) -> set[str]:
        return set(self.start_counts)

    @property
    def end_nodes(self) -> set[str]:
        return set(self.end_counts)


@dataclass
class LogStats:
    case_count: int
    event_count: int
    event_class_count: int
    min_case_length: int
    max_case_length: int
    mean_case_length: float


def dfg_from_traces(traces: Iterable[tuple[str, ...]], counts: Iterable[int] | None = None) -> DFG:
    """Build a DFG from event-class sequences.

    ``counts`` gives a multiplicity per trace; omitted means one each.
    """
    dfg = DFG()
    if counts is None:
        pairs = ((trace, 1) for trace in traces)
    else:
        pairs = zip(traces, counts)
    for trace, weight in pairs:
        dfg.case_count += weight
        if not trace:
            dfg.empty_cases += weight
            continue
        dfg.start_counts[trace[0]] += weight
        dfg.end_counts[trace[-1]] += weight
        for cls in set(trace):
            dfg.node_cases[cls] += weight
        for cls in trace:
            dfg.node_events[cls] += weight
        for left, right in zip(trace, trace[1:]):
            dfg.edges[(left, right)] += weight
    return dfg


def build_dfg(log: EventLog) -> DFG:
    """DFG of an event log; one START and one END edge per nonempty case."""
    return dfg_from_traces(log.traces())


def log_stats(log: EventLog) -> LogStats:
    lengths = [len(case.events) for case in log.cases]
    if not lengths:
        return LogStats(0, 0, 0, 0, 0, 0.0)
    return LogStats(
        case_count=len(lengths),
        event_count=sum(lengths),
        event_class_count=len(log.alphabet()),
        min_case_length=min(lengths),
        max_case_length=max(lengths),
        mean_case_length=sum(lengths) / len(lengths),
    )


def subsample(log: EventLog, n: int, seed: int) -> EventLog:
    """Uniform sample of ``n`` whole cases, without replacement.

    Deterministic for a given seed; selected cases keep their original
    relative order and their internal event order.
    """
    if n > len(log.cases):
        raise NotEnoughCases(f"asked for {n} cases from a log with {len(log.cases)}")
    chosen = sorted(random.Random(seed).sample(range(len(log.cases)), n))
    return EventLog(cases=[log.cases[i] for i in chosen])


def transition_frequencies(dfg: DFG) -> list[tuple[str, str, int, float]]:
    """Class-to-class transitions by descending count.

    Virtual START/END edges are excluded, and relative shares are taken
    over the non-virtual total. Ties are broken by source then target.
    """
    total = sum(dfg.edges.values())
    rows = [
        (source, target, count, count / total if total else 0.0)
        for (source, target), count in dfg.edges.items()
    ]
    rows.sort(key=lambda row: (-row[2], row[0], row[1]))
    return rows


def transitions_csv(dfg: DFG) -> str:
    lines = ["source,target,count,relative"]
    for source, target, count, relative in transition_frequencies(dfg):
        lines.append(f"{source},{target},{count},{relative:.6f}")
    return "\n".join(lines) + "\n"
