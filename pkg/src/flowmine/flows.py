"""Flow reassembly: packets -> cases -> side-labeled event logs.

A case is one TCP connection on a socket pair. Packets are grouped by the
unordered endpoint pair, ordered by timestamp, split when the pair is
reused for a fresh connection, labeled with the side that sent them
(client or server), and finally filtered down to complete flows.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MalformedRow, NoSynFound
from .packets import (
    PacketRecord,
    TcpFlags,
    format_timestamp,
    parse_flag_string,
    parse_timestamp,
)

LOGGER = logging.getLogger(__name__)

__all__ = [
    "CaseKey",
    "Endpoint",
    "Event",
    "Case",
    "EventLog",
    "Flow",
    "IngestStats",
    "SIDE_CLIENT",
    "SIDE_SERVER",
    "EVENT_LOG_COLUMNS",
    "case_key",
    "event_class",
    "assign_cases",
    "label_sides",
    "filter_complete",
    "build_event_log",
    "packets_to_event_log",
    "write_event_log",
    "read_event_log",
]

Endpoint = tuple[str, int]
CaseKey = tuple[Endpoint, Endpoint]

SIDE_CLIENT = "C"
SIDE_SERVER = "S"

# The Scr_port spelling is part of the on-disk format; do not correct it.
EVENT_LOG_COLUMNS = (
    "Case_ID",
    "Timestamp",
    "Src_IP",
    "Dst_IP",
    "Scr_port",
    "Dst_port",
    "Flags",
    "Side",
)


@dataclass(frozen=True)
class Event:
    """One packet of a case, as it appears in an event log row."""

    case_id: str
    timestamp: int
    src_ip: str
    src_port: int
    dst_ip: str
    dst_port: int
    flag_string: str
    side: str


def event_class(event: Event) -> str:
    """Event class of an event: flag string without its final dot, plus side.

    ``Event(..., flag_string="000.SYN.", side="C")`` -> ``"000.SYN|C"``.
    """
    return f"{event.flag_string.rstrip('.')}|{event.side}"


@dataclass(frozen=True)
class Case:
    case_id: str
    events: tuple[Event, ...]

    @property
    def trace(self) -> tuple[str, ...]:
        return tuple(event_class(e) for e in self.events)


@dataclass
class EventLog:
    """An ordered collection of cases."""

    cases: list[Case] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.cases)

    def __iter__(self):
        return iter(self.cases)

    @property
    def event_count(self) -> int:
        return sum(len(c.events) for c in self.cases)

    def traces(self) -> list[tuple[str, ...]]:
        return [c.trace for c in self.cases]

    def alphabet(self) -> set[str]:
        classes: set[str] = set()
        for case in self.cases:
            classes.update(case.trace)
        return classes


@dataclass
class Flow:
    """A case during assembly: key, time-ordered packets, optional sides."""

    key: CaseKey
    packets: list[PacketRecord]
    sides: list[str] | None = None
    client: Endpoint | None = None


@dataclass
class IngestStats:
    input_packets: int = 0
    cases_assigned: int = 0
    cases_no_syn: int = 0
    cases_incomplete: int = 0
    cases_kept: int = 0
    events: int = 0


def case_key(packet: PacketRecord) -> CaseKey:
    """Canonical socket-pair key: the lexicographically smaller endpoint first."""
    a = (packet.src_ip, packet.src_port)
    b = (packet.dst_ip, packet.dst_port)
    return (a, b) if a <= b else (b, a)


def _is_plain_syn(packet: PacketRecord) -> bool:
    return bool(packet.flags & TcpFlags.SYN) and not packet.flags & TcpFlags.ACK


def _is_closing(packet: PacketRecord) -> bool:
    return bool(packet.flags & (TcpFlags.FIN | TcpFlags.RST))


def assign_cases(packets: list[PacketRecord]) -> list[Flow]:
    """Group packets into cases by socket pair, with port-reuse splitting.

    Packets in a case are sorted by timestamp (ties keep input order). A
    SYN-without-ACK arriving after the current case has seen a FIN or RST
    opens a new case on the same key. Cases are ordered by the timestamp
    of their first packet, then by input position.
    """
    by_key: dict[CaseKey, list[tuple[int, PacketRecord]]] = {}
    for position, packet in enumerate(packets):
        by_key.setdefault(case_key(packet), []).append((position, packet))

    flows: list[tuple[int, int, Flow]] = []
    for key, members in by_key.items():
        members.sort(key=lambda item: (item[1].timestamp, item[0]))
        current: list[tuple[int, PacketRecord]] = []
        closing_seen = False
        for position, packet in members:
            if current and closing_seen and _is_plain_syn(packet):
                flows.append(_finish_flow(key, current))
                current = []
                closing_seen = False
            current.append((position, packet))
            closing_seen = closing_seen or _is_closing(packet)
        if current:
            flows.append(_finish_flow(key, current))

    flows.sort(key=lambda item: (item[0], item[1]))
    return [flow for _, _, flow in flows]


def _finish_flow(key: CaseKey, members: list[tuple[int, PacketRecord]]):
    first_position, first_packet = members[0]
    flow = Flow(key=key, packets=[p for _, p in members])
    return (first_packet.timestamp, first_position, flow)


def label_sides(cases: list[Flow], on_error: str = "raise") -> list[Flow]:
    """Label each packet with the side that sent it.

    The sender of the first SYN-without-ACK packet is the client (``"C"``);
    the opposite endpoint is the server (``"S"``). ``on_error`` is
    ``"raise"`` (propagate :class:`NoSynFound`) or ``"drop"`` (discard
    unlabelable cases).
    """
    if on_error not in ("raise", "drop"):
        raise ValueError(f"on_error must be 'raise' or 'drop', got {on_error!r}")
    labeled: list[Flow] = []
    for flow in cases:
        client = None
        for packet in flow.packets:
            if _is_plain_syn(packet):
                client = (packet.src_ip, packet.src_port)
                break
        if client is None:
            if on_error == "raise":
                raise NoSynFound(f"no SYN-without-ACK packet on {flow.key}")
            continue
        sides = [
            SIDE_CLIENT if (p.src_ip, p.src_port) == client else SIDE_SERVER
            for p in flow.packets
        ]
        labeled.append(Flow(key=flow.key, packets=flow.packets, sides=sides, client=client))
    return labeled


def filter_complete(cases: list[Flow]) -> list[Flow]:
    """Keep flows that start with a SYN-bearing packet and contain FIN or RST.

    The discard count is ``len(cases) - len(result)``.
    """
    kept = []
    for flow in cases:
        if not flow.packets:
            continue
        starts_syn = bool(flow.packets[0].flags & TcpFlags.SYN)
        has_close = any(_is_closing(p) for p in flow.packets)
        if starts_syn and has_close:
            kept.append(flow)
    return kept


def build_event_log(cases: list[Flow]) -> EventLog:
    """Turn labeled flows into an event log with dense numeric case IDs."""
    log = EventLog()
    for number, flow in enumerate(cases, 1):
        if flow.sides is None:
            raise ValueError("flows must be side-labeled before building a log")
        case_id = str(number)
        events = tuple(
            Event(
                case_id=case_id,
                timestamp=p.timestamp,
                src_ip=p.src_ip,
                src_port=p.src_port,
                dst_ip=p.dst_ip,
                dst_port=p.dst_port,
                flag_string=p.flag_string,
                side=side,
            )
            for p, side in zip(flow.packets, flow.sides)
        )
        log.cases.append(Case(case_id=case_id, events=events))
    return log


def packets_to_event_log(
    packets: list[PacketRecord], *, complete_only: bool = True
) -> tuple[EventLog, IngestStats]:
    """Full assembly pipeline: assign, label, filter, build."""
    stats = IngestStats(input_packets=len(packets))
    assigned = assign_cases(packets)
    stats.cases_assigned = len(assigned)
    labeled = label_sides(assigned, on_error="drop")
    stats.cases_no_syn = len(assigned) - len(labeled)
    if complete_only:
        complete = filter_complete(labeled)
        stats.cases_incomplete = len(labeled) - len(complete)
    else:
        complete = labeled
    log = build_event_log(complete)
    stats.cases_kept = len(log)
    stats.events = log.event_count
    return log, stats


def write_event_log(log: EventLog, destination) -> None:
    """Write a log as comma-separated rows under the eight standard columns."""
    if hasattr(destination, "write"):
        _write_rows(log, destination)
        return
    with open(destination, "w", newline="") as handle:
        _write_rows(log, handle)


def _write_rows(log: EventLog, handle) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(EVENT_LOG_COLUMNS)
    for case in log.cases:
        for event in case.events:
            writer.writerow(
                [
                    event.case_id,
                    format_timestamp(event.timestamp),
                    event.src_ip,
                    event.dst_ip,
                    event.src_port,
                    event.dst_port,
                    event.flag_string,
                    event.side,
                ]
            )


def read_event_log(source) -> EventLog:
    """Read a log written by :func:`write_event_log`.

    Cases keep their file order (order of first appearance) and events keep
    their file order within each case. Raises :class:`MalformedRow` with the
    1-based row number on bad rows.
    """
    if hasattr(source, "read"):
        return _read_rows(source)
    with open(Path(source), "r", newline="") as handle:
        return _read_rows(handle)


def _read_rows(handle) -> EventLog:
    reader = csv.reader(handle)
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(1, "empty file") from None
    if tuple(header) != EVENT_LOG_COLUMNS:
        raise MalformedRow(1, f"unexpected header {header!r}")
    by_case: dict[str, list[Event]] = {}
    for row_number, row in enumerate(reader, 2):
        if not row:
            continue
        if len(row) != len(EVENT_LOG_COLUMNS):
            raise MalformedRow(row_number, f"expected 8 columns, got {len(row)}")
        case_id, raw_ts, src_ip, dst_ip, raw_sport, raw_dport, flag_string, side = row
        try:
            timestamp = parse_timestamp(raw_ts)
        except ValueError as exc:
            raise MalformedRow(row_number, f"bad timestamp: {exc}") from exc
        try:
            parse_flag_string(flag_string)
        except ValueError as exc:
            raise MalformedRow(row_number, str(exc)) from exc
        if side not in (SIDE_CLIENT, SIDE_SERVER):
            raise MalformedRow(row_number, f"bad side {side!r}")
        try:
            src_port = int(raw_sport)
            dst_port = int(raw_dport)
        except ValueError as exc:
            raise MalformedRow(row_number, f"bad port: {exc}") from exc
        event = Event(
            case_id=case_id,
            timestamp=timestamp,
            src_ip=src_ip,
            src_port=src_port,
            dst_ip=dst_ip,
            dst_port=dst_port,
            flag_string=flag_string,
            side=side,
        )
        by_case.setdefault(case_id, []).append(event)
    log = EventLog()
    for case_id, events in by_case.items():
        log.cases.append(Case(case_id=case_id, events=tuple(events)))
    return log
