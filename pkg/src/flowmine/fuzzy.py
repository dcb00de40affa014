"""Frequency-filtered dependency models in the style of the fuzzy miner.

The miner keeps the most significant activities and edges of a directly-
follows graph, the way Disco's sliders do: an activity cutoff relative to
the busiest class, a guaranteed best incoming and outgoing edge per kept
node, and a path cutoff that admits a descending-frequency share of the
remaining edges. Every retained edge is an observed DFG edge; the miner
never invents transitions.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field

from .dfg import DFG, END, START
from .errors import EmptyModel

LOGGER = logging.getLogger(__name__)

__all__ = [
    "FuzzyParams",
    "FuzzyModel",
    "FuzzyAdmission",
    "mine_fuzzy",
    "fuzzy_admits",
]


@dataclass(frozen=True)
class FuzzyParams:
    """Slider settings: both cutoffs are fractions in [0, 1].

    Defaults keep every activity and only the minimal edge structure,
    mirroring Disco's out-of-the-box behaviour.
    """

    activity_cutoff: float = 0.0
    path_cutoff: float = 0.0

    def __post_init__(self):
        for name in ("activity_cutoff", "path_cutoff"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value!r}")


@dataclass
class FuzzyModel:
    """Filtered dependency graph with virtual START and END endpoints."""

    nodes: Counter = field(default_factory=Counter)
    edges: Counter = field(default_factory=Counter)
    start_edges: Counter = field(default_factory=Counter)
    end_edges: Counter = field(default_factory=Counter)
    params: FuzzyParams = field(default_factory=FuzzyParams)

    def has_edge(self, source: str, target: str) -> bool:
        if source == START:
            return target in self.start_edges
        if target == END:
            return source in self.end_edges
        return (source, target) in self.edges

    def all_edges(self) -> list[tuple[str, str, int]]:
        """Every retained edge, virtual ones included, as (source, target, count)."""
        combined = [(START, node, count) for node, count in self.start_edges.items()]
        combined.extend((a, b, count) for (a, b), count in self.edges.items())
        combined.extend((node, END, count) for node, count in self.end_edges.items())
        return sorted(combined)


@dataclass(frozen=True)
class FuzzyAdmission:
    """Outcome of walking a trace over a model's retained edges.

    ``index`` is the 0-based position of the event the walk could not
    reach; the failing final hop to END reports ``index == len(trace)``.
    """

    admitted: bool
    step: tuple[str, str] | None = None
    index: int = -1

    def __bool__(self) -> bool:
        return self.admitted


def _edge_pool(dfg: DFG, nodes: set[str]) -> Counter:
    """Observed edges restricted to kept nodes, START/END hops included."""
    pool: Counter = Counter()
    for (a, b), count in dfg.edges.items():
        if a in nodes and b in nodes:
            pool[(a, b)] = count
    for node, count in dfg.start_counts.items():
        if node in nodes:
            pool[(START, node)] = count
    for node, count in dfg.end_counts.items():
        if node in nodes:
            pool[(node, END)] = count
    return pool


def _reachable(nodes: set[str], edges, root: str, forward: bool) -> set[str]:
    adjacency: dict[str, list[str]] = {}
    for a, b in edges:
        if forward:
            adjacency.setdefault(a, []).append(b)
        else:
            adjacency.setdefault(b, []).append(a)
    seen = {root}
    stack = [root]
    while stack:
        for neighbor in adjacency.get(stack.pop(), ()):
            if neighbor not in seen:
                seen.add(neighbor)
                stack.append(neighbor)
    return seen & nodes


def _bridge(kept: set[str], edges: set, pool: Counter, root: str, forward: bool) -> None:
    """Grow ``edges`` with best pool edges until every node touches ``root``."""
    while True:
        covered = _reachable(kept, edges, root, forward)
        missing = kept - covered
        if not missing:
            return
        if forward:
            crossing = [
                (a, b)
                for (a, b) in pool
                if (a == root or a in covered) and b in missing
            ]
        else:
            crossing = [
                (a, b)
                for (a, b) in pool
                if (b == root or b in covered) and a in missing
            ]
        if not crossing:  # unreachable even in the full pool; caller pruned wrong
            raise AssertionError(f"no bridge toward {root} for {sorted(missing)}")
        crossing.sort(key=lambda edge: (-pool[edge], edge))
        edges.add(crossing[0])


def mine_fuzzy(dfg: DFG, params: FuzzyParams | None = None) -> FuzzyModel:
    """Mine a filtered dependency model from a directly-follows graph.

    Four steps: drop activities under ``activity_cutoff`` times the busiest
    class; keep each surviving node's highest-frequency incoming and
    outgoing edge; top up with the most frequent ``path_cutoff`` share of
    the remaining observed edges; bridge any node still off every
    START-to-END path with the strongest connecting edges. Nodes that no
    observed edge could ever connect are dropped instead.

    The skeleton and bridge edges do not depend on ``path_cutoff``, so
    raising it only ever adds edges.
    """
    params = params or FuzzyParams()
    if not dfg.node_events:
        raise EmptyModel("directly-follows graph has no activities")
    threshold = params.activity_cutoff * max(dfg.node_events.values())
    kept = {node for node, count in dfg.node_events.items() if count >= threshold}
    if not kept:
        raise EmptyModel(
            f"activity cutoff {params.activity_cutoff} removed every class"
        )

    pool = _edge_pool(dfg, kept)
    # Prune nodes no observed edge can place on a START-to-END walk; they
    # would be unconnectable at any path cutoff.
    connectable = _reachable(kept, pool, START, forward=True) & _reachable(
        kept, pool, END, forward=False
    )
    dropped = kept - connectable
    if dropped:
        LOGGER.debug("dropping unconnectable classes: %s", sorted(dropped))
        kept = connectable
        pool = _edge_pool(dfg, kept)
    if not kept:
        raise EmptyModel("no activity lies on a START-to-END path")

    retained: set[tuple[str, str]] = set()
    for node in sorted(kept):
        incoming = [(a, b) for (a, b) in pool if b == node]
        outgoing = [(a, b) for (a, b) in pool if a == node]
        for candidates in (incoming, outgoing):
            if candidates:
                candidates.sort(key=lambda edge: (-pool[edge], edge))
                retained.add(candidates[0])
    _bridge(kept, retained, pool, START, forward=True)
    _bridge(kept, retained, pool, END, forward=False)

    extras = sorted(
        (edge for edge in pool if edge not in retained),
        key=lambda edge: (-pool[edge], edge),
    )
    take = math.ceil(params.path_cutoff * len(extras))
    retained.update(extras[:take])

    model = FuzzyModel(params=params)
    for node in kept:
        model.nodes[node] = dfg.node_events[node]
    for a, b in retained:
        if a == START:
            model.start_edges[b] = pool[(a, b)]
        elif b == END:
            model.end_edges[a] = pool[(a, b)]
        else:
            model.edges[(a, b)] = pool[(a, b)]
    return model


def fuzzy_admits(model: FuzzyModel, trace) -> FuzzyAdmission:
    """Check whether a trace walks only retained edges, START to END.

    The first hop is START to the opening event class, then every
    consecutive pair, then the closing class to END. The first step whose
    edge is absent is reported.
    """
    trace = tuple(trace)
    if not trace:
        if model.has_edge(START, END):
            return FuzzyAdmission(True)
        return FuzzyAdmission(False, (START, END), 0)
    walk = [(START, trace[0])]
    walk.extend(zip(trace, trace[1:]))
    walk.append((trace[-1], END))
    for index, (source, target) in enumerate(walk):
        if not model.has_edge(source, target):
            return FuzzyAdmission(False, (source, target), index)
    return FuzzyAdmission(True)
