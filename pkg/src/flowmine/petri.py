"""Workflow nets built from process trees, plus PNML serialization."""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

from .trees import Operator, ProcessTree

__all__ = ["PetriNet", "tree_to_petri", "is_workflow_net", "reachable_markings", "to_pnml"]


@dataclass
class PetriNet:
    """A place/transition net with one-weight arcs.

    ``transitions`` maps transition ID to its label, ``None`` meaning
    silent. Markings are Counters over place IDs.
    """

    places: list[str] = field(default_factory=list)
    transitions: dict[str, str | None] = field(default_factory=dict)
    arcs: set[tuple[str, str]] = field(default_factory=set)
    initial_marking: Counter = field(default_factory=Counter)
    final_marking: Counter = field(default_factory=Counter)

    def inputs(self, transition: str) -> tuple[str, ...]:
        return tuple(sorted(p for (p, t) in self.arcs if t == transition))

    def outputs(self, transition: str) -> tuple[str, ...]:
        return tuple(sorted(p for (t, p) in self.arcs if t == transition))

    def labeled(self, label: str) -> list[str]:
        return sorted(t for t, l in self.transitions.items() if l == label)

    @property
    def labels(self) -> set[str]:
        return {l for l in self.transitions.values() if l is not None}


class _Builder:
    def __init__(self):
        self.net = PetriNet()
        self._p = 0
        self._t = 0

    def place(self) -> str:
        name = f"p{self._p:04d}"
        self._p += 1
        self.net.places.append(name)
        return name

    def transition(self, label: str | None) -> str:
        name = f"t{self._t:04d}"
        self._t += 1
        self.net.transitions[name] = label
        return name

    def arc(self, source: str, target: str):
        self.net.arcs.add((source, target))


def tree_to_petri(tree: ProcessTree) -> PetriNet:
    """Compositional construction; the result is a workflow net.

    Each subtree is wired between a source and a sink place. Parallel
    children get silent split/join transitions; loops get silent enter
    and exit transitions, with redo children wired backwards.
    """
    builder = _Builder()
    source = builder.place()
    sink = builder.place()
    _wire(builder, tree, source, sink)
    builder.net.initial_marking = Counter({source: 1})
    builder.net.final_marking = Counter({sink: 1})
    return builder.net


def _wire(builder: _Builder, node: ProcessTree, source: str, sink: str):
    if node.operator is None:
        transition = builder.transition(node.label)
        builder.arc(source, transition)
        builder.arc(transition, sink)
        return
    if node.operator is Operator.CHOICE:
        for child in node.children:
            _wire(builder, child, source, sink)
        return
    if node.operator is Operator.SEQUENCE:
        previous = source
        for child in node.children[:-1]:
            middle = builder.place()
            _wire(builder, child, previous, middle)
            previous = middle
        _wire(builder, node.children[-1], previous, sink)
        return
    if node.operator is Operator.PARALLEL:
        split = builder.transition(None)
        join = builder.transition(None)
        builder.arc(source, split)
        builder.arc(join, sink)
        for child in node.children:
            child_in = builder.place()
            child_out = builder.place()
            builder.arc(split, child_in)
            builder.arc(child_out, join)
            _wire(builder, child, child_in, child_out)
        return
    # loop: body runs source-side to done-side, redos run backwards
    do_place = builder.place()
    done_place = builder.place()
    enter = builder.transition(None)
    leave = builder.transition(None)
    builder.arc(source, enter)
    builder.arc(enter, do_place)
    builder.arc(done_place, leave)
    builder.arc(leave, sink)
    _wire(builder, node.children[0], do_place, done_place)
    for redo in node.children[1:]:
        _wire(builder, redo, done_place, do_place)


def is_workflow_net(net: PetriNet) -> bool:
    """Unique source and sink places, every node on a source-sink path."""
    no_in = [p for p in net.places if not any(t == p for (_, t) in net.arcs)]
    no_out = [p for p in net.places if not any(s == p for (s, _) in net.arcs)]
    if len(no_in) != 1 or len(no_out) != 1:
        return False
    source, sink = no_in[0], no_out[0]
    if set(net.initial_marking) != {source} or set(net.final_marking) != {sink}:
        return False
    forward: dict[str, set[str]] = {}
    backward: dict[str, set[str]] = {}
    for a, b in net.arcs:
        forward.setdefault(a, set()).add(b)
        backward.setdefault(b, set()).add(a)
    every_node = set(net.places) | set(net.transitions)
    return (
        _closure(source, forward) == every_node
        and _closure(sink, backward) == every_node
    )


def _closure(start: str, adjacency: dict[str, set[str]]) -> set[str]:
    seen = {start}
    frontier = deque([start])
    while frontier:
        node = frontier.popleft()
        for other in adjacency.get(node, ()):
            if other not in seen:
                seen.add(other)
                frontier.append(other)
    return seen


def reachable_markings(net: PetriNet, limit: int = 100_000) -> set[tuple]:
    """Exhaustive marking exploration from the initial marking.

    Markings are frozen as sorted (place, tokens) tuples. Raises
    ``RuntimeError`` when the state space exceeds ``limit``.
    """
    inputs = {t: net.inputs(t) for t in net.transitions}
    outputs = {t: net.outputs(t) for t in net.transitions}
    initial = _freeze(net.initial_marking)
    seen = {initial}
    frontier = deque([initial])
    while frontier:
        state = frontier.popleft()
        marking = Counter(dict(state))
        for transition in net.transitions:
            if any(marking[p] < 1 for p in inputs[transition]):
                continue
            successor = Counter(marking)
            for p in inputs[transition]:
                successor[p] -= 1
            for p in outputs[transition]:
                successor[p] += 1
            frozen = _freeze(successor)
            if frozen not in seen:
                if len(seen) >= limit:
                    raise RuntimeError(f"state space larger than {limit}")
                seen.add(frozen)
                frontier.append(frozen)
    return seen


def _freeze(marking: Counter) -> tuple:
    return tuple(sorted((p, n) for p, n in marking.items() if n > 0))


def to_pnml(net: PetriNet) -> str:
    """Serialize to place/transition PNML with the initial marking."""
    lines = [
        '<?xml version="1.0" encoding="utf-8"?>',
        "<pnml>",
        '  <net id="net1" type="http://www.pnml.org/version-2009/grammar/ptnet">',
        '    <page id="page1">',
    ]
    for place in sorted(net.places):
        tokens = net.initial_marking.get(place, 0)
        lines.append(f'      <place id="{place}">')
        lines.append(f"        <name><text>{place}</text></name>")
        if tokens:
            lines.append(f"        <initialMarking><text>{tokens}</text></initialMarking>")
        lines.append("      </place>")
    for transition in sorted(net.transitions):
        label = net.transitions[transition]
        lines.append(f'      <transition id="{transition}">')
        if label is None:
            lines.append(f"        <name><text>{transition}</text></name>")
            lines.append(
                '        <toolspecific tool="ProM" version="6.4" activity="$invisible$"/>'
            )
        else:
            lines.append(f"        <name><text>{escape(label)}</text></name>")
        lines.append("      </transition>")
    for number, (source, target) in enumerate(sorted(net.arcs)):
        lines.append(
            f'      <arc id="a{number:04d}" source="{source}" target="{target}"/>'
        )
    lines.extend(["    </page>", "  </net>", "</pnml>"])
    return "\n".join(lines) + "\n"
