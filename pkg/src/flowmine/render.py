"""DOT export for directly-follows graphs, fuzzy models and Petri nets.

Output is deterministic: nodes and edges are emitted in sorted order, so
exporting the same model twice yields identical bytes. Stage coloring
paints activity nodes by connection stage (handshake yellow, established
green, closing left uncolored), taking a mapping from event class to
stage as produced by :func:`flowmine.reference.stage_majority`.
"""

from __future__ import annotations

import logging

from .dfg import DFG, END, START
from .fuzzy import FuzzyModel
from .petri import PetriNet
from .reference import STAGE_ESTABLISHED, STAGE_HANDSHAKE

LOGGER = logging.getLogger(__name__)

__all__ = ["export_dot"]

_STAGE_COLORS = {
    STAGE_HANDSHAKE: "gold",
    STAGE_ESTABLISHED: "palegreen",
}


def _quote(name: str) -> str:
    escaped = name.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def _stage_fill(name: str, stages: dict[str, str] | None) -> str:
    if not stages:
        return ""
    color = _STAGE_COLORS.get(stages.get(name, ""))
    if color is None:
        return ""
    return f', style="rounded,filled", fillcolor="{color}"'


def _graph_lines(
    title: str,
    activity_counts: dict[str, int],
    edges: list[tuple[str, str, int]],
    stages: dict[str, str] | None,
) -> str:
    lines = [f"digraph {title} {{", "  rankdir=LR;", '  node [shape=box, style=rounded];']
    lines.append(f'  {_quote(START)} [shape=triangle, style=solid];')
    for name in sorted(activity_counts):
        count = activity_counts[name]
        fill = _stage_fill(name, stages)
        lines.append(f'  {_quote(name)} [label="{name}\\n({count})"{fill}];')
    lines.append(f'  {_quote(END)} [shape=doublecircle, style=solid];')
    for source, target, count in edges:
        lines.append(f'  {_quote(source)} -> {_quote(target)} [label="{count}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dfg_dot(dfg: DFG, stages: dict[str, str] | None) -> str:
    edges = [(START, node, count) for node, count in sorted(dfg.start_counts.items())]
    edges.extend((a, b, count) for (a, b), count in sorted(dfg.edges.items()))
    edges.extend((node, END, count) for node, count in sorted(dfg.end_counts.items()))
    return _graph_lines("dfg", dict(dfg.node_events), edges, stages)


def _fuzzy_dot(model: FuzzyModel, stages: dict[str, str] | None) -> str:
    return _graph_lines("fuzzy", dict(model.nodes), model.all_edges(), stages)


def _petri_dot(net: PetriNet, stages: dict[str, str] | None) -> str:
    lines = ["digraph petri {", "  rankdir=LR;"]
    for place in sorted(net.places):
        attrs = ["shape=circle", 'label=""', "width=0.35"]
        if net.initial_marking.get(place):
            attrs.append('xlabel="start"')
            attrs.append("penwidth=2")
        if net.final_marking.get(place):
            attrs.append("shape=doublecircle")
        lines.append(f'  {_quote(place)} [{", ".join(attrs)}];')
    for transition in sorted(net.transitions):
        label = net.transitions[transition]
        if label is None:
            lines.append(
                f'  {_quote(transition)} [shape=box, style=filled, '
                f'fillcolor=black, label="", height=0.15];'
            )
            continue
        fill = ""
        if stages:
            color = _STAGE_COLORS.get(stages.get(label, ""))
            if color is not None:
                fill = f', style=filled, fillcolor="{color}"'
        lines.append(f'  {_quote(transition)} [shape=box, label={_quote(label)}{fill}];')
    for source, target in sorted(net.arcs):
        lines.append(f"  {_quote(source)} -> {_quote(target)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(model, stages: dict[str, str] | None = None) -> str:
    """Render a model as a DOT digraph string.

    ``stages`` turns on stage coloring: a mapping from event class to
    stage tag; classes missing from it, and closing-stage classes, stay
    uncolored.
    """
    if isinstance(model, DFG):
        return _dfg_dot(model, stages)
    if isinstance(model, FuzzyModel):
        return _fuzzy_dot(model, stages)
    if isinstance(model, PetriNet):
        return _petri_dot(model, stages)
    raise TypeError(f"cannot export {type(model).__name__} as DOT")
