"""Packet capture and packet table ingestion.

Decodes classic capture files (Ethernet link type) and delimiter-separated
packet tables into :class:`PacketRecord` values carrying the TCP header
fields the rest of the toolkit needs: endpoints, a nanosecond timestamp,
and the 12-bit reserved-bits/flags field.
"""

from __future__ import annotations

import ipaddress
import logging
import re
import struct
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import IntFlag

from .errors import BadMagic, MalformedRow, TruncatedHeader

LOGGER = logging.getLogger(__name__)

__all__ = [
    "TcpFlags",
    "PacketRecord",
    "CaptureParse",
    "TableParse",
    "FLAG_RENDER_ORDER",
    "render_flag_string",
    "parse_flag_string",
    "parse_pcap",
    "write_pcap",
    "parse_packet_table",
    "format_timestamp",
    "parse_timestamp",
]

MAGIC = 0xA1B2C3D4
MAGIC_SWAPPED = 0xD4C3B2A1
ETHERTYPE_IPV4 = 0x0800
IP_PROTO_TCP = 6

GLOBAL_HEADER_LEN = 24
RECORD_HEADER_LEN = 16
ETHERNET_HEADER_LEN = 14

SKIP_NON_IPV4 = "non_ipv4"
SKIP_NON_TCP = "non_tcp"
SKIP_TRUNCATED = "truncated"


class TcpFlags(IntFlag):
    """The nine TCP flag bits, low bit first as they sit on the wire."""

    FIN = 0x001
    SYN = 0x002
    RST = 0x004
    PSH = 0x008
    ACK = 0x010
    URG = 0x020
    ECE = 0x040
    CWR = 0x080
    NS = 0x100


#: Flag names in the order they appear in a rendered flag string.
FLAG_RENDER_ORDER = (
    TcpFlags.ACK,
    TcpFlags.CWR,
    TcpFlags.ECE,
    TcpFlags.FIN,
    TcpFlags.NS,
    TcpFlags.PSH,
    TcpFlags.RST,
    TcpFlags.SYN,
    TcpFlags.URG,
)

_FLAG_STRING_RE = re.compile(r"^([01]{3})\.((?:[A-Z]{2,3}\.)*)$")


@dataclass(frozen=True)
class PacketRecord:
    """One TCP packet, reduced to the fields used downstream.

    ``timestamp`` is nanoseconds since the epoch. Capture files with
    microsecond resolution are zero-extended.
    """

    timestamp: int
    src_ip: str
    src_port: int
    dst_ip: str
    dst_port: int
    reserved_bits: int
    flags: TcpFlags

    def __post_init__(self):
        if not 0 <= self.src_port <= 65535 or not 0 <= self.dst_port <= 65535:
            raise ValueError(f"port out of range: {self.src_port}, {self.dst_port}")
        if not 0 <= self.reserved_bits <= 7:
            raise ValueError(f"reserved bits out of range: {self.reserved_bits}")

    @property
    def flag_string(self) -> str:
        return render_flag_string(self.reserved_bits, self.flags)


@dataclass
class CaptureParse:
    """Result of reading a capture file: decoded records plus skip counters."""

    records: list[PacketRecord] = field(default_factory=list)
    skipped: dict[str, int] = field(default_factory=dict)

    @property
    def total_skipped(self) -> int:
        return sum(self.skipped.values())


@dataclass
class TableParse:
    """Result of reading a packet table: records plus skipped row numbers."""

    records: list[PacketRecord] = field(default_factory=list)
    skipped_rows: list[tuple[int, str]] = field(default_factory=list)


def render_flag_string(reserved_bits: int, flags: TcpFlags | int) -> str:
    """Render the 12-bit flag field as e.g. ``"000.ACK.SYN."``.

    Three binary digits for the reserved bits, then each set flag name in
    a fixed alphabetical order, each followed by a dot.
    """
    if not 0 <= reserved_bits <= 7:
        raise ValueError(f"reserved bits out of range: {reserved_bits}")
    flags = TcpFlags(flags)
    parts = [f"{reserved_bits:03b}."]
    for flag in FLAG_RENDER_ORDER:
        if flags & flag:
            parts.append(f"{flag.name}.")
    return "".join(parts)


def parse_flag_string(text: str) -> tuple[int, TcpFlags]:
    """Inverse of :func:`render_flag_string`; rejects out-of-order names."""
    match = _FLAG_STRING_RE.match(text)
    if match is None:
        raise ValueError(f"not a flag string: {text!r}")
    reserved_bits = int(match.group(1), 2)
    names = [part for part in match.group(2).split(".") if part]
    flags = TcpFlags(0)
    order = [f.name for f in FLAG_RENDER_ORDER]
    last = -1
    for name in names:
        if name not in order:
            raise ValueError(f"unknown flag name {name!r} in {text!r}")
        position = order.index(name)
        if position <= last:
            raise ValueError(f"flag names out of order in {text!r}")
        last = position
        flags |= TcpFlags[name]
    return reserved_bits, flags


def _decode_frame(data: bytes) -> tuple[PacketRecord | None, str | None]:
    """Decode one Ethernet frame; returns (record, None) or (None, skip reason).

    The timestamp is filled in by the caller.
    """
    if len(data) < ETHERNET_HEADER_LEN:
        return None, SKIP_TRUNCATED
    ethertype = struct.unpack_from(">H", data, 12)[0]
    if ethertype != ETHERTYPE_IPV4:
        return None, SKIP_NON_IPV4
    ip = data[ETHERNET_HEADER_LEN:]
    if len(ip) < 20:
        return None, SKIP_TRUNCATED
    version_ihl = ip[0]
    if version_ihl >> 4 != 4:
        return None, SKIP_NON_IPV4
    ihl = (version_ihl & 0x0F) * 4
    if ihl < 20 or len(ip) < ihl:
        return None, SKIP_TRUNCATED
    if ip[9] != IP_PROTO_TCP:
        return None, SKIP_NON_TCP
    src_ip = ".".join(str(b) for b in ip[12:16])
    dst_ip = ".".join(str(b) for b in ip[16:20])
    tcp = ip[ihl:]
    if len(tcp) < 14:
        return None, SKIP_TRUNCATED
    src_port, dst_port = struct.unpack_from(">HH", tcp, 0)
    offset_flags = struct.unpack_from(">H", tcp, 12)[0]
    reserved_bits = (offset_flags >> 9) & 0x7
    flags = TcpFlags(offset_flags & 0x1FF)
    record = PacketRecord(
        timestamp=0,
        src_ip=src_ip,
        src_port=src_port,
        dst_ip=dst_ip,
        dst_port=dst_port,
        reserved_bits=reserved_bits,
        flags=flags,
    )
    return record, None


def parse_pcap(data: bytes) -> CaptureParse:
    """Parse a classic capture file into TCP packet records.

    Both byte orders of the classic magic are accepted; the link type is
    assumed to be Ethernet. Non-IPv4, non-TCP and truncated records are
    skipped and counted in :attr:`CaptureParse.skipped`.
    """
    if len(data) < 4:
        raise TruncatedHeader("file shorter than the magic number")
    magic_be = struct.unpack_from(">I", data, 0)[0]
    if magic_be == MAGIC:
        order = ">"
    elif magic_be == MAGIC_SWAPPED:
        order = "<"
    else:
        raise BadMagic(f"unrecognized magic 0x{magic_be:08x}")
    if len(data) < GLOBAL_HEADER_LEN:
        raise TruncatedHeader("file shorter than the global header")
    network = struct.unpack_from(order + "I", data, 20)[0]
    if network != 1:
        LOGGER.warning("link type %d is not Ethernet; decoding may skip everything", network)

    result = CaptureParse()

    def skip(reason: str):
        result.skipped[reason] = result.skipped.get(reason, 0) + 1

    offset = GLOBAL_HEADER_LEN
    while offset < len(data):
        if len(data) - offset < RECORD_HEADER_LEN:
            skip(SKIP_TRUNCATED)
            break
        ts_sec, ts_usec, incl_len, _orig_len = struct.unpack_from(
            order + "IIII", data, offset
        )
        offset += RECORD_HEADER_LEN
        if len(data) - offset < incl_len:
            skip(SKIP_TRUNCATED)
            break
        frame = data[offset : offset + incl_len]
        offset += incl_len
        record, reason = _decode_frame(frame)
        if record is None:
            skip(reason)
            continue
        timestamp = ts_sec * 1_000_000_000 + ts_usec * 1_000
        result.records.append(replace(record, timestamp=timestamp))
    return result


def _build_frame(record: PacketRecord) -> bytes:
    eth = b"\x00" * 12 + struct.pack(">H", ETHERTYPE_IPV4)
    src = ipaddress.IPv4Address(record.src_ip).packed
    dst = ipaddress.IPv4Address(record.dst_ip).packed
    ip = struct.pack(
        ">BBHHHBBH4s4s",
        0x45,  # version 4, header length 5 words
        0,
        40,
        0,
        0,
        64,
        IP_PROTO_TCP,
        0,
        src,
        dst,
    )
    offset_flags = (5 << 12) | (record.reserved_bits << 9) | int(record.flags)
    tcp = struct.pack(
        ">HHIIHHHH",
        record.src_port,
        record.dst_port,
        0,
        0,
        offset_flags,
        65535,
        0,
        0,
    )
    return eth + ip + tcp


def write_pcap(records: list[PacketRecord]) -> bytes:
    """Serialize records to a classic little-endian capture file.

    Timestamps are stored at microsecond resolution, so sub-microsecond
    digits are truncated.
    """
    out = [struct.pack("<IHHiIII", MAGIC, 2, 4, 0, 0, 65535, 1)]
    for record in records:
        frame = _build_frame(record)
        ts_sec, ts_ns = divmod(record.timestamp, 1_000_000_000)
        out.append(
            struct.pack("<IIII", ts_sec, ts_ns // 1_000, len(frame), len(frame))
        )
        out.append(frame)
    return b"".join(out)


_TS_BODY_FORMAT = "%Y/%m/%d %H:%M:%S"


def format_timestamp(timestamp: int) -> str:
    """Nanoseconds since the epoch -> ``YYYY/MM/DD HH:MM:SS.fffffffff`` (UTC)."""
    seconds, nanos = divmod(timestamp, 1_000_000_000)
    body = datetime.fromtimestamp(seconds, tz=timezone.utc).strftime(_TS_BODY_FORMAT)
    return f"{body}.{nanos:09d}"


def parse_timestamp(text: str) -> int:
    """Inverse of :func:`format_timestamp`; fractional digits may be short."""
    body, _, fraction = text.partition(".")
    moment = datetime.strptime(body, _TS_BODY_FORMAT).replace(tzinfo=timezone.utc)
    if fraction and (len(fraction) > 9 or not fraction.isdigit()):
        raise ValueError(f"bad fractional seconds in {text!r}")
    nanos = int(fraction.ljust(9, "0")) if fraction else 0
    return int(moment.timestamp()) * 1_000_000_000 + nanos


def parse_packet_table(
    text: str,
    *,
    delimiter: str = "\t",
    header: bool = False,
    on_error: str = "raise",
) -> TableParse:
    """Parse a delimited packet table.

    Expected columns: timestamp, source IP, destination IP, source port,
    destination port, numeric flags value (the 12-bit field, ``0x``-prefixed
    hex or decimal). ``on_error`` is either ``"raise"`` (abort on the first
    malformed row) or ``"skip"`` (collect row numbers and continue).
    """
    if on_error not in ("raise", "skip"):
        raise ValueError(f"on_error must be 'raise' or 'skip', got {on_error!r}")
    result = TableParse()
    for row_number, line in enumerate(text.splitlines(), 1):
        if header and row_number == 1:
            continue
        if not line.strip():
            continue
        try:
            result.records.append(_parse_table_row(line, delimiter, row_number))
        except MalformedRow as exc:
            if on_error == "raise":
                raise
            result.skipped_rows.append((exc.row, exc.reason))
    return result


def _parse_table_row(line: str, delimiter: str, row_number: int) -> PacketRecord:
    parts = [part.strip() for part in line.split(delimiter)]
    if len(parts) != 6:
        raise MalformedRow(row_number, f"expected 6 columns, got {len(parts)}")
    raw_ts, src_ip, dst_ip, raw_sport, raw_dport, raw_flags = parts
    try:
        timestamp = parse_timestamp(raw_ts)
    except ValueError as exc:
        raise MalformedRow(row_number, f"bad timestamp: {exc}") from exc
    try:
        src_ip = str(ipaddress.IPv4Address(src_ip))
        dst_ip = str(ipaddress.IPv4Address(dst_ip))
    except ipaddress.AddressValueError as exc:
        raise MalformedRow(row_number, f"bad address: {exc}") from exc
    try:
        src_port = int(raw_sport)
        dst_port = int(raw_dport)
        value = int(raw_flags, 0)
    except ValueError as exc:
        raise MalformedRow(row_number, f"bad numeric field: {exc}") from exc
    if not 0 <= value <= 0xFFF:
        raise MalformedRow(row_number, f"flags value out of range: {value:#x}")
    try:
        return PacketRecord(
            timestamp=timestamp,
            src_ip=src_ip,
            src_port=src_port,
            dst_ip=dst_ip,
            dst_port=dst_port,
            reserved_bits=(value >> 9) & 0x7,
            flags=TcpFlags(value & 0x1FF),
        )
    except ValueError as exc:
        raise MalformedRow(row_number, str(exc)) from exc
