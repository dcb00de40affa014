"""Directly-follows graph construction, sampling and the transition table."""

from __future__ import annotations

import random

import pytest

from flowmine.dfg import (
    DFG,
    build_dfg,
    dfg_from_traces,
    log_stats,
    subsample,
    transition_frequencies,
    transitions_csv,
)
from flowmine.errors import NotEnoughCases
from flowmine.flows import EventLog
from flowmine.synth import generate_normal_log


def test_dfg_from_traces_counts():
    dfg = dfg_from_traces([("a", "b", "c"), ("a", "b", "b")])
    assert dfg.case_count == 2
    assert dfg.node_events == {"a": 2, "b": 3, "c": 1}
    assert dfg.node_cases == {"a": 2, "b": 2, "c": 1}
    assert dfg.edges == {("a", "b"): 2, ("b", "c"): 1, ("b", "b"): 1}
    assert dfg.start_counts == {"a": 2}
    assert dfg.end_counts == {"c": 1, "b": 1}
    assert dfg.empty_cases == 0


def test_dfg_weighted_and_empty_traces():
    dfg = dfg_from_traces([("a",), ()], counts=[10, 3])
    assert dfg.case_count == 13
    assert dfg.empty_cases == 3
    assert dfg.start_counts == {"a": 10}
    assert dfg.edges == {}
    assert dfg.nodes == {"a"}


def test_captured_log_edges(captured_log):
    """Recounted by hand from the transcribed rows."""
    dfg = build_dfg(captured_log)
    assert dfg.case_count == 2
    assert dfg.edges[("000.SYN|C", "000.ACK.SYN|S")] == 2
    assert dfg.edges[("000.ACK.SYN|S", "000.ACK|C")] == 2
    assert dfg.edges[("000.ACK.PSH|S", "000.ACK|C")] == 5
    assert dfg.edges[("000.RST|C", "000.RST|C")] == 1
    assert dfg.start_counts == {"000.SYN|C": 2}
    assert dfg.end_counts == {"000.ACK|S": 1, "000.RST|C": 1}
    assert dfg.node_events["000.ACK|C"] == 9
    assert dfg.node_cases["000.ACK.FIN|C"] == 2


def test_log_stats(captured_log):
    stats = log_stats(captured_log)
    assert stats.case_count == 2
    assert stats.event_count == 39
    assert stats.event_class_count == 9
    assert (stats.min_case_length, stats.max_case_length) == (17, 22)
    assert stats.mean_case_length == pytest.approx(19.5)


def test_log_stats_empty():
    stats = log_stats(EventLog())
    assert stats.case_count == 0
    assert stats.mean_case_length == 0.0


def test_subsample_deterministic():
    log = generate_normal_log(50)
    first = subsample(log, 10, seed=3)
    second = subsample(log, 10, seed=3)
    assert first.traces() == second.traces()
    assert len(first) == 10
    # Selected cases keep their original relative order.
    positions = [log.cases.index(case) for case in first.cases]
    assert positions == sorted(positions)
    assert subsample(log, 10, seed=4).traces() != first.traces()


def test_subsample_not_enough_cases():
    log = generate_normal_log(3)
    with pytest.raises(NotEnoughCases):
        subsample(log, 4, seed=1)
    assert len(subsample(log, 3, seed=1)) == 3


def test_transition_frequencies_ordering():
    dfg = dfg_from_traces([("a", "b"), ("a", "b"), ("b", "a"), ("a", "c")])
    rows = transition_frequencies(dfg)
    assert rows[0] == ("a", "b", 2, 0.5)
    # Ties break by source then target.
    assert [(r[0], r[1]) for r in rows[1:]] == [("a", "c"), ("b", "a")]
    assert sum(r[3] for r in rows) == pytest.approx(1.0)


def test_transitions_csv_format():
    dfg = dfg_from_traces([("a", "b"), ("a", "b"), ("a", "c")])
    text = transitions_csv(dfg)
    lines = text.splitlines()
    assert lines[0] == "source,target,count,relative"
    assert lines[1] == "a,b,2,0.666667"
    assert lines[2] == "a,c,1,0.333333"
    assert text.endswith("\n")


def test_transitions_csv_empty_graph():
    assert transitions_csv(DFG()) == "source,target,count,relative\n"


def test_dfg_start_end_exclude_inner_edges():
    # START/END counts never leak into the class-to-class edge table.
    rng = random.Random(11)
    for _ in range(20):
        traces = [
            tuple(rng.choice("abc") for _ in range(rng.randint(1, 6)))
            for _ in range(rng.randint(1, 15))
        ]
        dfg = dfg_from_traces(traces)
        assert sum(dfg.start_counts.values()) == len(traces)
        assert sum(dfg.end_counts.values()) == len(traces)
        assert sum(dfg.edges.values()) == sum(len(t) - 1 for t in traces)
        assert sum(dfg.node_events.values()) == sum(len(t) for t in traces)
