"""Shared fixtures: two hand-transcribed real flows and small builders.

The two flows come from a 2017 packet capture: a port-80 fetch that the
server closes with FIN (17 packets) and a port-443 session the client
tears down with two resets (22 packets). They are kept verbatim, row for
row, because several tests recount their transitions and stages by hand.
"""

from __future__ import annotations

import random

import pytest

from flowmine.flows import Case, Event, EventLog
from flowmine.packets import PacketRecord, TcpFlags, parse_flag_string, parse_timestamp

# (case_id, timestamp, src_ip, dst_ip, src_port, dst_port, flags, side)
SERVER_CLOSE_ROWS = (
    ("151043", "2017/07/04 14:00:35.190179000", "192.168.10.5", "68.67.178.110", 52892, 80, "000.SYN.", "C"),
    ("151043", "2017/07/04 14:00:35.222535000", "68.67.178.110", "192.168.10.5", 80, 52892, "000.ACK.SYN.", "S"),
    ("151043", "2017/07/04 14:00:35.222586000", "192.168.10.5", "68.67.178.110", 52892, 80, "000.ACK.", "C"),
    ("151043", "2017/07/04 14:00:35.237412000", "192.168.10.5", "68.67.178.110", 52892, 80, "000.ACK.PSH.", "C"),
    ("151043", "2017/07/04 14:00:35.270301000", "68.67.178.110", "192.168.10.5", 80, 52892, "000.ACK.", "S"),
    ("151043", "2017/07/04 14:00:35.270305000", "68.67.178.110", "192.168.10.5", 80, 52892, "000.ACK.", "S"),
    ("151043", "2017/07/04 14:00:35.467062000", "68.67.178.110", "192.168.10.5", 80, 52892, "000.ACK.", "S"),
    ("151043", "2017/07/04 14:00:35.467285000", "68.67.178.110", "192.168.10.5", 80, 52892, "000.ACK.PSH.", "S"),
    ("151043", "2017/07/04 14:00:35.467347000", "192.168.10.5", "68.67.178.110", 52892, 80, "000.ACK.", "C"),
    ("151043", "2017/07/04 14:00:35.467352000", "68.67.178.110", "192.168.10.5", 80, 52892, "000.ACK.PSH.", "S"),
    ("151043", "2017/07/04 14:00:35.511515000", "192.168.10.5", "68.67.178.110", 52892, 80, "000.ACK.", "C"),
    ("151043", "2017/07/04 14:00:45.461285000", "192.168.10.5", "68.67.178.110", 52892, 80, "000.ACK.", "C"),
    ("151043", "2017/07/04 14:00:45.466144000", "68.67.178.110", "192.168.10.5", 80, 52892, "000.ACK.FIN.", "S"),
    ("151043", "2017/07/04 14:00:45.466173000", "192.168.10.5", "68.67.178.110", 52892, 80, "000.ACK.", "C"),
    ("151043", "2017/07/04 14:00:45.466198000", "192.168.10.5", "68.67.178.110", 52892, 80, "000.ACK.FIN.", "C"),
    ("151043", "2017/07/04 14:00:45.493763000", "68.67.178.110", "192.168.10.5", 80, 52892, "000.ACK.", "S"),
    ("151043", "2017/07/04 14:00:45.498542000", "68.67.178.110", "192.168.10.5", 80, 52892, "000.ACK.", "S"),
)

CLIENT_RESET_ROWS = (
    ("281008", "2017/07/05 17:03:45.498235000", "192.168.10.16", "23.194.141.47", 51226, 443, "000.SYN.", "C"),
    ("281008", "2017/07/05 17:03:45.521284000", "23.194.141.47", "192.168.10.16", 443, 51226, "000.ACK.SYN.", "S"),
    ("281008", "2017/07/05 17:03:45.521360000", "192.168.10.16", "23.194.141.47", 51226, 443, "000.ACK.", "C"),
    ("281008", "2017/07/05 17:03:45.521561000", "192.168.10.16", "23.194.141.47", 51226, 443, "000.ACK.PSH.", "C"),
    ("281008", "2017/07/05 17:03:45.544708000", "23.194.141.47", "192.168.10.16", 443, 51226, "000.ACK.", "S"),
    ("281008", "2017/07/05 17:03:45.545025000", "23.194.141.47", "192.168.10.16", 443, 51226, "000.ACK.PSH.", "S"),
    ("281008", "2017/07/05 17:03:45.545073000", "192.168.10.16", "23.194.141.47", 51226, 443, "000.ACK.", "C"),
    ("281008", "2017/07/05 17:03:45.561805000", "192.168.10.16", "23.194.141.47", 51226, 443, "000.ACK.PSH.", "C"),
    ("281008", "2017/07/05 17:03:45.624241000", "23.194.141.47", "192.168.10.16", 443, 51226, "000.ACK.", "S"),
    ("281008", "2017/07/05 17:03:45.820846000", "192.168.10.16", "23.194.141.47", 51226, 443, "000.ACK.PSH.", "C"),
    ("281008", "2017/07/05 17:03:45.843822000", "23.194.141.47", "192.168.10.16", 443, 51226, "000.ACK.", "S"),
    ("281008", "2017/07/05 17:03:45.921777000", "23.194.141.47", "192.168.10.16", 443, 51226, "000.ACK.PSH.", "S"),
    ("281008", "2017/07/05 17:03:45.964684000", "192.168.10.16", "23.194.141.47", 51226, 443, "000.ACK.", "C"),
    ("281008", "2017/07/05 17:03:46.802581000", "192.168.10.16", "23.194.141.47", 51226, 443, "000.ACK.PSH.", "C"),
    ("281008", "2017/07/05 17:03:46.825827000", "23.194.141.47", "192.168.10.16", 443, 51226, "000.ACK.", "S"),
    ("281008", "2017/07/05 17:03:46.827025000", "23.194.141.47", "192.168.10.16", 443, 51226, "000.ACK.PSH.", "S"),
    ("281008", "2017/07/05 17:03:46.827041000", "192.168.10.16", "23.194.141.47", 51226, 443, "000.ACK.", "C"),
    ("281008", "2017/07/05 17:03:53.457141000", "192.168.10.16", "23.194.141.47", 51226, 443, "000.ACK.FIN.", "C"),
    ("281008", "2017/07/05 17:03:53.480155000", "23.194.141.47", "192.168.10.16", 443, 51226, "000.ACK.PSH.", "S"),
    ("281008", "2017/07/05 17:03:53.480156000", "23.194.141.47", "192.168.10.16", 443, 51226, "000.ACK.FIN.", "S"),
    ("281008", "2017/07/05 17:03:53.480264000", "192.168.10.16", "23.194.141.47", 51226, 443, "000.RST.", "C"),
    ("281008", "2017/07/05 17:03:53.480268000", "192.168.10.16", "23.194.141.47", 51226, 443, "000.RST.", "C"),
)

CAPTURED_ROWS = SERVER_CLOSE_ROWS + CLIENT_RESET_ROWS


def rows_to_case(rows) -> Case:
    events = tuple(
        Event(
            case_id=case_id,
            timestamp=parse_timestamp(timestamp),
            src_ip=src_ip,
            src_port=src_port,
            dst_ip=dst_ip,
            dst_port=dst_port,
            flag_string=flags,
            side=side,
        )
        for case_id, timestamp, src_ip, dst_ip, src_port, dst_port, flags, side in rows
    )
    return Case(case_id=rows[0][0], events=events)


def rows_to_packets(rows) -> list[PacketRecord]:
    packets = []
    for _, timestamp, src_ip, dst_ip, src_port, dst_port, flags, _ in rows:
        reserved, flag_bits = parse_flag_string(flags)
        packets.append(
            PacketRecord(
                timestamp=parse_timestamp(timestamp),
                src_ip=src_ip,
                src_port=src_port,
                dst_ip=dst_ip,
                dst_port=dst_port,
                reserved_bits=reserved,
                flags=flag_bits,
            )
        )
    return packets


def case_from_classes(case_id: str, classes) -> Case:
    """Build a case whose trace is exactly ``classes``, with filler endpoints."""
    events = []
    for i, cls in enumerate(classes):
        body, side = cls.split("|")
        src, dst = ("10.0.0.1", "10.0.0.2") if side == "C" else ("10.0.0.2", "10.0.0.1")
        sport, dport = (40000, 80) if side == "C" else (80, 40000)
        events.append(
            Event(
                case_id=case_id,
                timestamp=1_000_000_000 * (i + 1),
                src_ip=src,
                src_port=sport,
                dst_ip=dst,
                dst_port=dport,
                flag_string=body + ".",
                side=side,
            )
        )
    return Case(case_id=case_id, events=tuple(events))


def make_record(
    timestamp=0,
    src="10.0.0.1",
    sport=1111,
    dst="10.0.0.2",
    dport=80,
    flags=TcpFlags.SYN,
    reserved=0,
) -> PacketRecord:
    return PacketRecord(
        timestamp=timestamp,
        src_ip=src,
        src_port=sport,
        dst_ip=dst,
        dst_port=dport,
        reserved_bits=reserved,
        flags=TcpFlags(flags),
    )


def random_record(rng: random.Random) -> PacketRecord:
    return PacketRecord(
        timestamp=rng.randrange(2**31) * 1_000_000_000 + rng.randrange(1_000_000) * 1_000,
        src_ip=f"{rng.randint(1, 223)}.{rng.randint(0, 255)}.{rng.randint(0, 255)}.{rng.randint(1, 254)}",
        src_port=rng.randint(0, 65535),
        dst_ip=f"{rng.randint(1, 223)}.{rng.randint(0, 255)}.{rng.randint(0, 255)}.{rng.randint(1, 254)}",
        dst_port=rng.randint(0, 65535),
        reserved_bits=rng.randint(0, 7),
        flags=TcpFlags(rng.randint(0, 0x1FF)),
    )


@pytest.fixture
def server_close_case() -> Case:
    return rows_to_case(SERVER_CLOSE_ROWS)


@pytest.fixture
def client_reset_case() -> Case:
    return rows_to_case(CLIENT_RESET_ROWS)


@pytest.fixture
def captured_log(server_close_case, client_reset_case) -> EventLog:
    return EventLog(cases=[server_close_case, client_reset_case])
