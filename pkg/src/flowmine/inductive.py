"""Inductive process discovery.

Recursively detects a cut of the directly-follows graph (exclusive
choice, then sequence, then parallel, then loop), splits the log along
it, and mines the sublogs. When no cut applies the recursion falls
through to the flower model over the remaining alphabet, so every trace
of the input log is always a word of the mined tree.
"""

from __future__ import annotations

import logging
from collections import Counter, deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .dfg import DFG, dfg_from_traces
from .errors import CutMismatch
from .flows import Case, EventLog, event_class
from .trees import (
    Operator,
    ProcessTree,
    activity,
    choice,
    flower,
    loop,
    parallel,
    seq,
    tau,
)

LOGGER = logging.getLogger(__name__)

__all__ = ["Cut", "find_cut", "split_log", "mine_inductive"]


@dataclass(frozen=True)
class Cut:
    """An ordered partition of the DFG's event classes.

    For sequence cuts the block order is execution order; for loop cuts
    the first block is the body and the rest are redo parts. Choice and
    parallel blocks are ordered by their smallest member.
    """

    kind: Operator
    blocks: tuple[tuple[str, ...], ...]

    def block_index(self) -> dict[str, int]:
        mapping: dict[str, int] = {}
        for index, block in enumerate(self.blocks):
            for label in block:
                mapping[label] = index
        return mapping


def _undirected_components(nodes: Sequence[str], pairs: set[tuple[str, str]]) -> list[set[str]]:
    neighbors: dict[str, set[str]] = {n: set() for n in nodes}
    for a, b in pairs:
        if a in neighbors and b in neighbors and a != b:
            neighbors[a].add(b)
            neighbors[b].add(a)
    seen: set[str] = set()
    components = []
    for node in nodes:
        if node in seen:
            continue
        component = {node}
        frontier = deque([node])
        seen.add(node)
        while frontier:
            current = frontier.popleft()
            for other in neighbors[current]:
                if other not in seen:
                    seen.add(other)
                    component.add(other)
                    frontier.append(other)
        components.append(component)
    return components


def _sorted_blocks(components: Iterable[set[str]]) -> tuple[tuple[str, ...], ...]:
    blocks = [tuple(sorted(c)) for c in components]
    blocks.sort(key=lambda block: block[0])
    return tuple(blocks)


def _reachability(nodes: Sequence[str], edges: set[tuple[str, str]]) -> dict[str, set[str]]:
    succ: dict[str, set[str]] = {n: set() for n in nodes}
    for a, b in edges:
        succ[a].add(b)
    reach: dict[str, set[str]] = {}
    for node in nodes:
        seen: set[str] = set()
        frontier = deque([node])
        while frontier:
            current = frontier.popleft()
            for other in succ[current]:
                if other not in seen:
                    seen.add(other)
                    frontier.append(other)
        reach[node] = seen
    return reach


def _choice_cut(dfg: DFG) -> Cut | None:
    nodes = sorted(dfg.nodes)
    components = _undirected_components(nodes, set(dfg.edges))
    if len(components) < 2:
        return None
    return Cut(Operator.CHOICE, _sorted_blocks(components))


def _sequence_cut(dfg: DFG) -> Cut | None:
    nodes = sorted(dfg.nodes)
    reach = _reachability(nodes, set(dfg.edges))

    groups: list[set[str]] = [{n} for n in nodes]

    def group_reaches(a: set[str], b: set[str]) -> bool:
        return any(y in reach[x] for x in a for y in b)

    def merge_pass() -> bool:
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                forward = group_reaches(groups[i], groups[j])
                backward = group_reaches(groups[j], groups[i])
                if forward == backward:
                    # Mutually reachable or mutually unreachable groups
                    # cannot sit in distinct sequence blocks.
                    groups[i] |= groups[j]
                    del groups[j]
                    return True
        return False

    while True:
        while merge_pass():
            pass
        if len(groups) < 2:
            return None
        # A group that reaches k other groups comes k places from the end.
        groups.sort(
            key=lambda g: -sum(group_reaches(g, h) for h in groups if h is not g)
        )
        violation = next(
            (
                (i, j)
                for i in range(len(groups))
                for j in range(i + 1, len(groups))
                if not group_reaches(groups[i], groups[j])
                or group_reaches(groups[j], groups[i])
            ),
            None,
        )
        if violation is None:
            return Cut(Operator.SEQUENCE, tuple(tuple(sorted(g)) for g in groups))
        i, j = violation
        groups[i] |= groups[j]
        del groups[j]


def _parallel_cut(dfg: DFG) -> Cut | None:
    nodes = sorted(dfg.nodes)
    edges = set(dfg.edges)
    negated = {
        (a, b)
        for a in nodes
        for b in nodes
        if a < b and not ((a, b) in edges and (b, a) in edges)
    }
    components = _undirected_components(nodes, negated)
    if len(components) < 2:
        return None
    starts, ends = dfg.start_nodes, dfg.end_nodes
    components.sort(key=min)
    valid = [c for c in components if c & starts and c & ends]
    invalid = [c for c in components if not (c & starts and c & ends)]
    if not valid:
        return None
    for component in invalid:
        valid[0] |= component
    if len(valid) < 2:
        return None
    return Cut(Operator.PARALLEL, _sorted_blocks(valid))


def _loop_cut(dfg: DFG) -> Cut | None:
    starts, ends = dfg.start_nodes, dfg.end_nodes
    body = set(starts | ends)
    candidates = dfg.nodes - body
    if not candidates:
        return None
    components = _undirected_components(
        sorted(candidates),
        {(a, b) for (a, b) in dfg.edges if a in candidates and b in candidates},
    )
    edges = set(dfg.edges)

    def is_valid_redo(component: set[str]) -> bool:
        for a, b in edges:
            if a in body and b in component and a not in ends:
                return False
            if a in component and b in body and b not in starts:
                return False
        return True

    changed = True
    while changed:
        changed = False
        for component in sorted(components, key=min):
            if not is_valid_redo(component):
                body |= component
                components.remove(component)
                changed = True
                break
    if not components:
        return None
    blocks = (tuple(sorted(body)),) + _sorted_blocks(components)
    return Cut(Operator.LOOP, blocks)


def find_cut(dfg: DFG) -> Cut | None:
    """First applicable cut in the order choice, sequence, parallel, loop."""
    if len(dfg.nodes) < 2:
        raise ValueError("cut detection needs at least two event classes")
    for detector in (_choice_cut, _sequence_cut, _parallel_cut, _loop_cut):
        cut = detector(dfg)
        if cut is not None:
            return cut
    return None


# --- splitting -------------------------------------------------------------


def _choice_block_of(trace: Sequence[str], block_of: Mapping[str, int]) -> int:
    indices = set()
    for label in trace:
        index = block_of.get(label)
        if index is None:
            raise CutMismatch(f"class {label!r} is in no block")
        indices.add(index)
    if len(indices) != 1:
        raise CutMismatch(f"trace spans blocks {sorted(indices)}")
    return indices.pop()


def _sequence_spans(
    trace: Sequence[str], block_of: Mapping[str, int], block_count: int
) -> list[tuple[int, int]]:
    """Contiguous (start, end) spans, one per block, in block order."""
    spans = []
    position = 0
    for block in range(block_count):
        start = position
        while position < len(trace):
            index = block_of.get(trace[position])
            if index is None:
                raise CutMismatch(f"class {trace[position]!r} is in no block")
            if index < block:
                raise CutMismatch(
                    f"class {trace[position]!r} of block {index} after block {block}"
                )
            if index != block:
                break
            position += 1
        spans.append((start, position))
    if position != len(trace):
        raise CutMismatch("trace does not end in the final block")
    return spans


def _parallel_indices(
    trace: Sequence[str], block_of: Mapping[str, int], block_count: int
) -> list[list[int]]:
    picks: list[list[int]] = [[] for _ in range(block_count)]
    for position, label in enumerate(trace):
        index = block_of.get(label)
        if index is None:
            raise CutMismatch(f"class {label!r} is in no block")
        picks[index].append(position)
    return picks


def _loop_runs(
    trace: Sequence[str], block_of: Mapping[str, int]
) -> list[tuple[int, int, int]]:
    """Maximal same-block runs as (block, start, end); must alternate with body."""
    runs: list[tuple[int, int, int]] = []
    for position, label in enumerate(trace):
        index = block_of.get(label)
        if index is None:
            raise CutMismatch(f"class {label!r} is in no block")
        if runs and runs[-1][0] == index:
            runs[-1] = (index, runs[-1][1], position + 1)
        else:
            runs.append((index, position, position + 1))
    if not runs:
        return [(0, 0, 0)]
    if runs[0][0] != 0 or runs[-1][0] != 0:
        raise CutMismatch("trace must start and end in the loop body")
    for left, right in zip(runs, runs[1:]):
        if left[0] != 0 and right[0] != 0:
            raise CutMismatch("adjacent redo parts without a body visit")
    return runs


def _split_counter(traces: Counter, cut: Cut) -> list[Counter]:
    block_of = cut.block_index()
    count = len(cut.blocks)
    sublogs: list[Counter] = [Counter() for _ in range(count)]
    for trace, weight in traces.items():
        if cut.kind is Operator.CHOICE:
            sublogs[_choice_block_of(trace, block_of)][trace] += weight
        elif cut.kind is Operator.SEQUENCE:
            for block, (start, end) in enumerate(_sequence_spans(trace, block_of, count)):
                sublogs[block][trace[start:end]] += weight
        elif cut.kind is Operator.PARALLEL:
            for block, picks in enumerate(_parallel_indices(trace, block_of, count)):
                sublogs[block][tuple(trace[i] for i in picks)] += weight
        else:
            for block, start, end in _loop_runs(trace, block_of):
                sublogs[block][trace[start:end]] += weight
    return sublogs


def split_log(log: EventLog, cut: Cut) -> list[EventLog]:
    """Split an event log along a cut, preserving event objects.

    Loop splits produce one sub-case per body or redo visit; their case
    IDs get a ``#k`` suffix to stay unique.
    """
    block_of = cut.block_index()
    count = len(cut.blocks)
    sublogs = [EventLog() for _ in range(count)]
    for case in log.cases:
        trace = case.trace
        if cut.kind is Operator.CHOICE:
            block = _choice_block_of(trace, block_of)
            sublogs[block].cases.append(case)
        elif cut.kind is Operator.SEQUENCE:
            for block, (start, end) in enumerate(_sequence_spans(trace, block_of, count)):
                sublogs[block].cases.append(
                    Case(case_id=case.case_id, events=case.events[start:end])
                )
        elif cut.kind is Operator.PARALLEL:
            for block, picks in enumerate(_parallel_indices(trace, block_of, count)):
                sublogs[block].cases.append(
                    Case(
                        case_id=case.case_id,
                        events=tuple(case.events[i] for i in picks),
                    )
                )
        else:
            visits = 0
            for block, start, end in _loop_runs(trace, block_of):
                visits += 1
                sublogs[block].cases.append(
                    Case(
                        case_id=f"{case.case_id}#{visits}",
                        events=case.events[start:end],
                    )
                )
    return sublogs


# --- mining ----------------------------------------------------------------


def _as_trace_counter(log) -> Counter:
    if isinstance(log, EventLog):
        return Counter(log.traces())
    if isinstance(log, Counter):
        return Counter(log)
    return Counter(tuple(trace) for trace in log)


def mine_inductive(log) -> ProcessTree:
    """Mine a process tree from an event log (or an iterable of traces)."""
    traces = _as_trace_counter(log)
    if not traces:
        raise ValueError("cannot mine an empty log")
    return _mine(traces)


def _mine(traces: Counter) -> ProcessTree:
    if traces.get((), 0):
        rest = Counter({t: n for t, n in traces.items() if t != ()})
        if not rest:
            return tau()
        return choice(tau(), _mine(rest))

    alphabet = sorted({label for trace in traces for label in trace})
    if len(alphabet) == 1:
        label = alphabet[0]
        if all(trace == (label,) for trace in traces):
            return activity(label)
        return flower(alphabet)

    dfg = dfg_from_traces(traces.keys(), traces.values())
    cut = find_cut(dfg)
    if cut is None:
        LOGGER.debug("no cut over %d classes; falling through to flower", len(alphabet))
        return flower(alphabet)
    children = [_mine(sublog) for sublog in _split_counter(traces, cut)]
    if cut.kind is Operator.CHOICE:
        return choice(*children)
    if cut.kind is Operator.SEQUENCE:
        return seq(*children)
    if cut.kind is Operator.PARALLEL:
        return parallel(*children)
    return loop(*children)
