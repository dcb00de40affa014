"""Reference TCP transition matrices and trace validation against them.

Two adjacency matrices over ten abstract states describe which packet
kinds may follow which: one transcribed from the state diagram of Bishop
et al. (derived from observed traffic, so it includes reset and
retransmission transitions), and a strict three-way-handshake reading of
the RFC 793 lifecycle. Flows validate by mapping each event class to a
state and walking the matrix from START to END.

The module also ships the fixed suite of rare-normal and abnormal
scenario traces used for generality and accuracy comparisons, and the
stage classifier (handshake, established, closing) used to color models.
"""

from __future__ import annotations

import csv
import io
import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from .errors import UnmappableClass
from .flows import SIDE_CLIENT, Case, EventLog, event_class
from .fuzzy import FuzzyModel, fuzzy_admits
from .petri import PetriNet
from .trees import ProcessTree, tree_admits

LOGGER = logging.getLogger(__name__)

__all__ = [
    "MatrixState",
    "AdjacencyMatrix",
    "ValidationResult",
    "ScenarioTrace",
    "ComparisonTable",
    "SCENARIOS",
    "STAGE_HANDSHAKE",
    "STAGE_ESTABLISHED",
    "STAGE_CLOSING",
    "bishop_matrix",
    "rfc_strict_matrix",
    "map_event_to_state",
    "check_trace",
    "classify_stage",
    "stage_majority",
    "run_scenario_suite",
]

STAGE_HANDSHAKE = "handshake"
STAGE_ESTABLISHED = "established"
STAGE_CLOSING = "closing"


class MatrixState(Enum):
    """The ten abstract packet states of the transition matrices."""

    SYN = "SYN."
    ACK = "ACK."
    ACK_SYN = "ACK.SYN."
    ACK_RST = "ACK.RST."
    FIN = "FIN."
    DATA = "DATA"
    ACK_FIN = "ACK.FIN."
    RST = "RST."
    START = "START"
    END = "END"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class AdjacencyMatrix:
    """A 10 by 10 boolean transition matrix over :class:`MatrixState`."""

    name: str
    cells: frozenset[tuple[MatrixState, MatrixState]]

    def __post_init__(self):
        for source, target in self.cells:
            if source is MatrixState.END:
                raise ValueError("END is terminal; its row must stay empty")
            if not isinstance(source, MatrixState) or not isinstance(target, MatrixState):
                raise TypeError("cells must pair MatrixState members")

    def allows(self, source: MatrixState, target: MatrixState) -> bool:
        return (source, target) in self.cells

    def row(self, source: MatrixState) -> tuple[MatrixState, ...]:
        return tuple(t for t in MatrixState if (source, t) in self.cells)

    @property
    def true_cell_count(self) -> int:
        return len(self.cells)


def _matrix(name: str, rows: dict[MatrixState, tuple[MatrixState, ...]]) -> AdjacencyMatrix:
    cells = frozenset(
        (source, target) for source, targets in rows.items() for target in targets
    )
    return AdjacencyMatrix(name=name, cells=cells)


_S = MatrixState


def bishop_matrix() -> AdjacencyMatrix:
    """Transition matrix of the Bishop et al. state diagram, cell for cell.

    Read literally, the matrix is strict about endings: only SYN.,
    ACK.RST. and RST. rows reach END, and the ACK. row has no self
    transition, so plain-ACK runs and FIN-closed flows fail validation
    even though real traffic contains them. Validation reports surface
    these mismatches rather than patching the matrix.
    """
    return _matrix(
        "bishop",
        {
            _S.SYN: (_S.SYN, _S.ACK, _S.ACK_SYN, _S.ACK_RST, _S.RST, _S.END),
            _S.ACK: (_S.DATA, _S.RST),
            _S.ACK_SYN: (_S.SYN, _S.ACK, _S.ACK_SYN, _S.ACK_RST, _S.FIN),
            _S.ACK_RST: (_S.END,),
            _S.FIN: (_S.SYN, _S.ACK, _S.FIN, _S.ACK_FIN, _S.RST),
            _S.DATA: (_S.SYN, _S.ACK, _S.ACK_RST, _S.FIN, _S.ACK_FIN, _S.RST),
            _S.ACK_FIN: (_S.SYN, _S.ACK, _S.FIN),
            _S.RST: (_S.START, _S.END),
            _S.START: (_S.SYN, _S.RST, _S.START),
        },
    )


def rfc_strict_matrix() -> AdjacencyMatrix:
    """Strict canonical TCP lifecycle: handshake, data, orderly close.

    Every flow must open SYN, SYN+ACK, ACK; data may repeat; closing runs
    through FIN exchanges to a final ACK. Resets have no legal place, so
    every reset-bearing trace fails, as do retransmissions outside DATA.
    """
    return _matrix(
        "rfc-strict",
        {
            _S.START: (_S.SYN,),
            _S.SYN: (_S.ACK_SYN,),
            _S.ACK_SYN: (_S.ACK,),
            _S.ACK: (_S.DATA, _S.FIN, _S.END),
            _S.DATA: (_S.DATA, _S.FIN),
            _S.FIN: (_S.ACK, _S.ACK_FIN),
            _S.ACK_FIN: (_S.ACK,),
        },
    )


_LITERAL_STATES = {
    frozenset({"SYN"}): _S.SYN,
    frozenset({"ACK"}): _S.ACK,
    frozenset({"ACK", "SYN"}): _S.ACK_SYN,
    frozenset({"ACK", "RST"}): _S.ACK_RST,
    frozenset({"FIN"}): _S.FIN,
    frozenset({"ACK", "FIN"}): _S.ACK_FIN,
    frozenset({"RST"}): _S.RST,
}


def _class_flags(event_class: str) -> frozenset[str]:
    body = event_class.split("|", 1)[0]
    parts = [p for p in body.split(".") if p]
    if parts and set(parts[0]) <= {"0", "1"} and len(parts[0]) == 3:
        parts = parts[1:]
    return frozenset(parts)


def map_event_to_state(event_class: str) -> MatrixState:
    """Map an event class onto a matrix state.

    The side label and the reserved-bits prefix carry no state
    information and are stripped. A PSH-bearing class signals payload and
    maps to DATA; other classes map to the state named by their literal
    flag set. Anything else (URG-only, ECN combinations) has no state.
    """
    names = _class_flags(event_class)
    if "PSH" in names:
        return _S.DATA
    state = _LITERAL_STATES.get(names)
    if state is None:
        raise UnmappableClass(event_class)
    return state


@dataclass(frozen=True)
class ValidationResult:
    """Outcome of walking a trace through an adjacency matrix.

    ``index`` is the 0-based position of the event whose arrival broke
    the walk; the final hop into END reports ``index == len(trace)``.
    """

    passed: bool
    matrix: str
    index: int = -1
    step: tuple[MatrixState, MatrixState] | None = None
    states: tuple[MatrixState, ...] = ()

    def __bool__(self) -> bool:
        return self.passed


def check_trace(matrix: AdjacencyMatrix, trace) -> ValidationResult:
    """Validate a trace of event classes against a transition matrix.

    Events map to states, START is prepended and END appended, and every
    adjacent pair must be a true cell. The first disallowed pair fails
    the trace; an event class with no state raises
    :class:`UnmappableClass` carrying its position.
    """
    trace = tuple(trace)
    mapped = []
    for position, event_class in enumerate(trace):
        try:
            mapped.append(map_event_to_state(event_class))
        except UnmappableClass:
            raise UnmappableClass(event_class, position) from None
    walk = [_S.START, *mapped, _S.END]
    for i in range(len(walk) - 1):
        if not matrix.allows(walk[i], walk[i + 1]):
            return ValidationResult(
                passed=False,
                matrix=matrix.name,
                index=i,
                step=(walk[i], walk[i + 1]),
                states=tuple(mapped),
            )
    return ValidationResult(passed=True, matrix=matrix.name, states=tuple(mapped))


def _event_flags(event) -> frozenset[str]:
    return _class_flags(event.flag_string)


def classify_stage(trace) -> list[str]:
    """Tag each event of a case with its connection stage.

    The handshake runs up to and including the first client plain ACK
    after the first SYN+ACK (or the leading run of SYN-bearing events
    when no SYN+ACK exists). Closing starts at the first FIN- or
    RST-bearing event and wins any overlap. Everything between is the
    established stage, so tags are monotone within a trace.
    """
    events = trace.events if isinstance(trace, Case) else list(trace)
    n = len(events)
    flags = [_event_flags(e) for e in events]
    closing_at = n
    for i, names in enumerate(flags):
        if names & {"FIN", "RST"}:
            closing_at = i
            break
    syn_ack_at = None
    for i, names in enumerate(flags):
        if {"SYN", "ACK"} <= names:
            syn_ack_at = i
            break
    if syn_ack_at is not None:
        handshake_end = syn_ack_at
        for i in range(syn_ack_at + 1, n):
            if events[i].side == SIDE_CLIENT and flags[i] == {"ACK"}:
                handshake_end = i
                break
    else:
        handshake_end = -1
        for i, names in enumerate(flags):
            if "SYN" not in names:
                break
            handshake_end = i
    tags = []
    for i in range(n):
        if i >= closing_at:
            tags.append(STAGE_CLOSING)
        elif i <= handshake_end:
            tags.append(STAGE_HANDSHAKE)
        else:
            tags.append(STAGE_ESTABLISHED)
    return tags


_STAGE_ORDER = (STAGE_HANDSHAKE, STAGE_ESTABLISHED, STAGE_CLOSING)


def stage_majority(log: EventLog) -> dict[str, str]:
    """Majority stage per event class over a whole log.

    Ties resolve toward the earlier stage, so a class split evenly
    between handshake and established counts as handshake.
    """
    votes: dict[str, Counter] = {}
    for case in log.cases:
        tags = classify_stage(case)
        for event, tag in zip(case.events, tags):
            votes.setdefault(event_class(event), Counter())[tag] += 1
    return {
        cls: max(_STAGE_ORDER, key=lambda s: (counter[s], -_STAGE_ORDER.index(s)))
        for cls, counter in votes.items()
    }


KIND_RARE_NORMAL = "rare_normal"
KIND_ABNORMAL = "abnormal"


@dataclass(frozen=True)
class ScenarioTrace:
    """A named flow shape with its expected verdicts where fixed.

    Names keep the exact printed spellings of the comparison tables they
    come from, typos included, so emitted grids line up verbatim.
    """

    name: str
    kind: str
    trace: tuple[str, ...]
    expected: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.trace:
            raise ValueError("scenario trace must be nonempty")


_HS = ("000.SYN|C", "000.ACK.SYN|S", "000.ACK|C")

SCENARIOS: tuple[ScenarioTrace, ...] = (
    ScenarioTrace(
        name="PSH in established stage.",
        kind=KIND_RARE_NORMAL,
        trace=(
            *_HS,
            "000.ACK.PSH|C",
            "000.ACK|S",
            "000.ACK.PSH|S",
            "000.ACK|C",
            "000.ACK.FIN|C",
            "000.ACK.FIN|S",
            "000.ACK|C",
        ),
        expected={"bishop": "N", "rfc-strict": "N"},
    ),
    ScenarioTrace(
        name="Duplicate pakages.",
        kind=KIND_RARE_NORMAL,
        trace=(
            "000.SYN|C",
            "000.SYN|C",
            "000.ACK.SYN|S",
            "000.ACK|C",
            "000.ACK.PSH|C",
            "000.RST|S",
        ),
        expected={"bishop": "Y", "rfc-strict": "N"},
    ),
    ScenarioTrace(
        name="Reset during handskake.",
        kind=KIND_RARE_NORMAL,
        trace=("000.SYN|C", "000.ACK.SYN|S", "000.ACK.RST|C"),
        expected={"bishop": "Y", "rfc-strict": "N"},
    ),
    ScenarioTrace(
        name="Send of receive SYN after estanblished.",
        kind=KIND_RARE_NORMAL,
        trace=(
            *_HS,
            "000.SYN|C",
            "000.ACK.SYN|S",
            "000.ACK|C",
            "000.ACK.FIN|C",
            "000.ACK.FIN|S",
            "000.ACK|C",
        ),
        expected={"bishop": "N", "rfc-strict": "N"},
    ),
    ScenarioTrace(
        name="Reset during closing",
        kind=KIND_RARE_NORMAL,
        trace=(*_HS, "000.ACK.PSH|C", "000.FIN|S", "000.RST|C"),
        expected={"bishop": "Y", "rfc-strict": "N"},
    ),
    ScenarioTrace(
        name="Data transmission without handshake",
        kind=KIND_ABNORMAL,
        trace=(
            "000.ACK.PSH|C",
            "000.ACK|S",
            "000.ACK.PSH|S",
            "000.ACK|C",
            "000.ACK.FIN|C",
            "000.ACK.FIN|S",
            "000.ACK|C",
        ),
        expected={"bishop": "N", "rfc-strict": "N"},
    ),
    ScenarioTrace(
        name="RST or FIN before handshake",
        kind=KIND_ABNORMAL,
        trace=(
            "000.RST|C",
            "000.SYN|C",
            "000.ACK.SYN|S",
            "000.ACK|C",
            "000.ACK.FIN|C",
            "000.ACK.FIN|S",
            "000.ACK|C",
        ),
        expected={"bishop": "N", "rfc-strict": "N"},
    ),
    ScenarioTrace(
        name="Loop through Close and Established stages",
        kind=KIND_ABNORMAL,
        trace=(
            *_HS,
            "000.ACK.PSH|C",
            "000.ACK.FIN|S",
            "000.ACK.PSH|C",
            "000.ACK.FIN|S",
            "000.ACK|C",
        ),
        expected={"bishop": "N", "rfc-strict": "N"},
    ),
    ScenarioTrace(
        name="Sending same packets infinitely without response from the other side",
        kind=KIND_ABNORMAL,
        trace=(*_HS, *("000.ACK.PSH|C",) * 5),
        expected={"bishop": "N", "rfc-strict": "N"},
    ),
)


@dataclass
class ComparisonTable:
    """Y/N admittance grid: scenario rows against model columns."""

    columns: list[str]
    rows: list[tuple[ScenarioTrace, dict[str, str]]]

    def verdict(self, scenario_name: str, column: str) -> str:
        for scenario, cells in self.rows:
            if scenario.name == scenario_name:
                return cells[column]
        raise KeyError(scenario_name)

    def to_csv(self, kind: str | None = None) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["scenario", *self.columns])
        for scenario, cells in self.rows:
            if kind is not None and scenario.kind != kind:
                continue
            writer.writerow([scenario.name, *(cells[c] for c in self.columns)])
        return buffer.getvalue()


def _admits(model, trace: tuple[str, ...]) -> bool:
    if isinstance(model, AdjacencyMatrix):
        try:
            return bool(check_trace(model, trace))
        except UnmappableClass:
            return False
    if isinstance(model, FuzzyModel):
        return bool(fuzzy_admits(model, trace))
    if isinstance(model, ProcessTree):
        return tree_admits(model, trace)
    if isinstance(model, PetriNet):
        from .conformance import replay_trace

        return replay_trace(model, trace).fits
    raise TypeError(f"cannot evaluate admittance for {type(model).__name__}")


def run_scenario_suite(models: dict[str, object] | None = None,
                       matrices=None,
                       scenarios: tuple[ScenarioTrace, ...] = SCENARIOS) -> ComparisonTable:
    """Evaluate every scenario against every model and matrix.

    ``models`` maps column names to mined models (process trees, fuzzy
    models or Petri nets); ``matrices`` defaults to the Bishop and
    RFC-strict matrices, named by their tags. Cells hold "Y" or "N".
    """
    if matrices is None:
        matrices = (bishop_matrix(), rfc_strict_matrix())
    columns: dict[str, object] = dict(models or {})
    for matrix in matrices:
        columns[matrix.name] = matrix
    table = ComparisonTable(columns=list(columns), rows=[])
    for scenario in scenarios:
        cells = {
            name: "Y" if _admits(model, scenario.trace) else "N"
            for name, model in columns.items()
        }
        table.rows.append((scenario, cells))
    return table
