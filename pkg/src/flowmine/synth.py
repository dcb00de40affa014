"""Synthetic TCP event logs: normal traffic and TCP-compliant anomalies.

Normal cases come from six hand-written flow templates (handshake, data
exchange, orderly or abortive close) whose shapes follow real captured
flows. Anomalous logs stay protocol-compliant on purpose: scans, floods
and oversized transfers differ from normal traffic only in frequency,
concurrency and length, never in transition structure, which is exactly
why transition-based models cannot separate them.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, replace

from .flows import SIDE_CLIENT, Case, Event, EventLog

LOGGER = logging.getLogger(__name__)

__all__ = [
    "TrafficProfile",
    "SCANLIKE",
    "FLOODLIKE",
    "CHATTYLIKE",
    "ANOMALY_KINDS",
    "generate_normal_log",
    "generate_anomalous_log",
    "profile_with_seed",
]

SCANLIKE = "scanlike"
FLOODLIKE = "floodlike"
CHATTYLIKE = "chattylike"
ANOMALY_KINDS = (SCANLIKE, FLOODLIKE, CHATTYLIKE)

_BASE_NS = 1_499_170_000_000_000_000  # 2017-07-04, matching the capture era

_HANDSHAKE = ("000.SYN|C", "000.ACK.SYN|S", "000.ACK|C")
_DATA_ROUND = ("000.ACK.PSH|C", "000.ACK|S", "000.ACK.PSH|S", "000.ACK|C")
_CLIENT_CLOSE = ("000.ACK.FIN|C", "000.ACK.FIN|S", "000.ACK|C")


@dataclass(frozen=True)
class TrafficProfile:
    """Mix weights over the flow templates, plus length and seed knobs.

    ``data_exchange_p`` is the success parameter of the geometric
    distribution drawing how many request/response rounds a bulk
    transfer runs.
    """

    short_request_response: float = 0.35
    bulk_transfer: float = 0.25
    client_close: float = 0.12
    server_close: float = 0.12
    rst_close: float = 0.10
    handshake_reset: float = 0.06
    data_exchange_p: float = 0.5
    seed: int = 7

    def __post_init__(self):
        weights = self.template_weights
        if any(w < 0 for w in weights.values()):
            raise ValueError("template weights must be nonnegative")
        if not any(w > 0 for w in weights.values()):
            raise ValueError("at least one template weight must be positive")
        if not 0.0 < self.data_exchange_p <= 1.0:
            raise ValueError(
                f"data_exchange_p must be in (0, 1], got {self.data_exchange_p!r}"
            )

    @property
    def template_weights(self) -> dict[str, float]:
        return {
            "short_request_response": self.short_request_response,
            "bulk_transfer": self.bulk_transfer,
            "client_close": self.client_close,
            "server_close": self.server_close,
            "rst_close": self.rst_close,
            "handshake_reset": self.handshake_reset,
        }


def _geometric(rng: random.Random, p: float) -> int:
    count = 1
    while rng.random() >= p:
        count += 1
    return count


def _template_short_request_response(rng: random.Random, profile: TrafficProfile):
    return [*_HANDSHAKE, *_DATA_ROUND, *_CLIENT_CLOSE]


def _template_bulk_transfer(rng: random.Random, profile: TrafficProfile):
    rounds = _geometric(rng, profile.data_exchange_p) + 1
    return [*_HANDSHAKE, *(_DATA_ROUND * rounds), *_CLIENT_CLOSE]


def _template_client_close(rng: random.Random, profile: TrafficProfile):
    # Client FIN answered by a late server push, server FIN, client resets.
    return [
        *_HANDSHAKE,
        *_DATA_ROUND,
        "000.ACK.FIN|C",
        "000.ACK.PSH|S",
        "000.ACK.FIN|S",
        "000.RST|C",
        "000.RST|C",
    ]


def _template_server_close(rng: random.Random, profile: TrafficProfile):
    # Includes plain-ACK runs (window updates, delayed ACKs) before the
    # server closes first.
    return [
        *_HANDSHAKE,
        "000.ACK.PSH|C",
        "000.ACK|S",
        "000.ACK|S",
        "000.ACK|S",
        "000.ACK.PSH|S",
        "000.ACK|C",
        "000.ACK.PSH|S",
        "000.ACK|C",
        "000.ACK|C",
        "000.ACK.FIN|S",
        "000.ACK|C",
        "000.ACK.FIN|C",
        "000.ACK|S",
        "000.ACK|S",
    ]


def _template_rst_close(rng: random.Random, profile: TrafficProfile):
    side = rng.choice("CS")
    return [*_HANDSHAKE, *_DATA_ROUND, f"000.RST|{side}"]


def _template_handshake_reset(rng: random.Random, profile: TrafficProfile):
    if rng.random() < 0.5:
        return ["000.SYN|C", "000.RST|S"]  # connection refused
    return ["000.SYN|C", "000.ACK.SYN|S", "000.ACK.RST|C"]  # client aborts


_TEMPLATES = {
    "short_request_response": _template_short_request_response,
    "bulk_transfer": _template_bulk_transfer,
    "client_close": _template_client_close,
    "server_close": _template_server_close,
    "rst_close": _template_rst_close,
    "handshake_reset": _template_handshake_reset,
}

_SERVER_PORTS = (80, 443, 8080, 22, 25)


def _materialize(
    case_id: str,
    labels,
    rng: random.Random,
    start_ns: int,
    client: tuple[str, int],
    server: tuple[str, int],
    max_gap_ns: int = 80_000_000,
) -> Case:
    client_ip, client_port = client
    server_ip, server_port = server
    timestamp = start_ns
    events = []
    for label in labels:
        body, side = label.split("|")
        timestamp += rng.randint(40_000, max_gap_ns)
        if side == SIDE_CLIENT:
            src_ip, src_port, dst_ip, dst_port = client_ip, client_port, server_ip, server_port
        else:
            src_ip, src_port, dst_ip, dst_port = server_ip, server_port, client_ip, client_port
        events.append(
            Event(
                case_id=case_id,
                timestamp=timestamp,
                src_ip=src_ip,
                src_port=src_port,
                dst_ip=dst_ip,
                dst_port=dst_port,
                flag_string=body + ".",
                side=side,
            )
        )
    return Case(case_id=case_id, events=tuple(events))


def _random_endpoints(rng: random.Random) -> tuple[tuple[str, int], tuple[str, int]]:
    client = (f"192.168.10.{rng.randint(5, 60)}", rng.randint(49152, 65535))
    server = (f"203.0.113.{rng.randint(1, 40)}", rng.choice(_SERVER_PORTS))
    return client, server


def generate_normal_log(n: int, profile: TrafficProfile | None = None) -> EventLog:
    """Generate ``n`` complete normal flows from the template mix.

    Output is a pure function of ``(n, profile)``: the same profile seed
    always yields the same log. Every case starts with a SYN and ends the
    connection, so the whole log survives the completeness filter.
    """
    if n < 1:
        raise ValueError(f"need at least one case, got {n}")
    profile = profile or TrafficProfile()
    rng = random.Random(profile.seed)
    names = list(_TEMPLATES)
    weights = [profile.template_weights[name] for name in names]
    cases = []
    for i in range(n):
        template = _TEMPLATES[rng.choices(names, weights=weights)[0]]
        labels = template(rng, profile)
        client, server = _random_endpoints(rng)
        start = _BASE_NS + i * 1_500_000_000 + rng.randint(0, 1_000_000_000)
        cases.append(_materialize(str(i + 1), labels, rng, start, client, server))
    return EventLog(cases=cases)


def _scanlike_cases(n: int, rng: random.Random) -> list[Case]:
    scanner = f"198.51.100.{rng.randint(2, 9)}"
    target = f"192.168.10.{rng.randint(5, 60)}"
    cases = []
    for i in range(n):
        client = (scanner, rng.randint(49152, 65535))
        server = (target, 1 + i % 65535)
        start = _BASE_NS + i * 2_000_000  # a probe every 2 ms
        labels = ["000.SYN|C", "000.RST|S"]
        cases.append(
            _materialize(str(i + 1), labels, rng, start, client, server, max_gap_ns=400_000)
        )
    return cases


def _floodlike_cases(n: int, rng: random.Random) -> list[Case]:
    attacker = f"198.51.100.{rng.randint(10, 60)}"
    victim = (f"192.168.10.{rng.randint(5, 60)}", 80)
    cases = []
    for i in range(n):
        client = (attacker, 49152 + i % 16384)
        start = _BASE_NS + i * 300_000  # hundreds of near-concurrent flows
        labels = [*_HANDSHAKE, *_DATA_ROUND, *_CLIENT_CLOSE]
        cases.append(
            _materialize(str(i + 1), labels, rng, start, client, victim, max_gap_ns=500_000)
        )
    return cases


def _chattylike_cases(n: int, rng: random.Random) -> list[Case]:
    cases = []
    for i in range(n):
        rounds = 25 + _geometric(rng, 0.5)
        labels = [*_HANDSHAKE, *(_DATA_ROUND * rounds), *_CLIENT_CLOSE]
        client, server = _random_endpoints(rng)
        start = _BASE_NS + i * 1_500_000_000 + rng.randint(0, 1_000_000_000)
        cases.append(_materialize(str(i + 1), labels, rng, start, client, server))
    return cases


def generate_anomalous_log(kind: str, n: int, seed: int = 7) -> EventLog:
    """Generate ``n`` anomalous yet TCP-compliant flows of one kind.

    scanlike: two-packet SYN then RST-refused probes against a port
    sweep. floodlike: near-concurrent identical short flows against one
    service. chattylike: bulk transfers with far more data rounds than
    normal traffic ever shows. All shapes use only event classes the
    normal templates also produce, and every case passes the
    completeness filter.
    """
    if n < 1:
        raise ValueError(f"need at least one case, got {n}")
    rng = random.Random(seed)
    if kind == SCANLIKE:
        cases = _scanlike_cases(n, rng)
    elif kind == FLOODLIKE:
        cases = _floodlike_cases(n, rng)
    elif kind == CHATTYLIKE:
        cases = _chattylike_cases(n, rng)
    else:
        raise ValueError(f"unknown anomaly kind {kind!r}; expected one of {ANOMALY_KINDS}")
    return EventLog(cases=cases)


def profile_with_seed(profile: TrafficProfile, seed: int) -> TrafficProfile:
    """The same mix with a different seed, for disjoint companion logs."""
    return replace(profile, seed=seed)
