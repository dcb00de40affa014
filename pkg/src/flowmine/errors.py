"""Exception types raised across the toolkit."""

from __future__ import annotations

__all__ = [
    "FlowmineError",
    "BadMagic",
    "TruncatedHeader",
    "MalformedRow",
    "NoSynFound",
    "NotEnoughCases",
    "CutMismatch",
    "EmptyModel",
    "UnknownLabel",
    "UnmappableClass",
]


class FlowmineError(Exception):
    """Base class for all toolkit errors."""


class BadMagic(FlowmineError):
    """Capture file does not start with a recognized magic number."""


class TruncatedHeader(FlowmineError):
    """Capture file ends inside a global or record header."""


class MalformedRow(FlowmineError):
    """A delimited text row could not be parsed.

    Carries the 1-based row number in ``row``.
    """

    def __init__(self, row: int, reason: str):
        super().__init__(f"row {row}: {reason}")
        self.row = row
        self.reason = reason


class NoSynFound(FlowmineError):
    """A flow contains no SYN-without-ACK packet, so sides cannot be labeled."""


class NotEnoughCases(FlowmineError):
    """A subsample of n cases was requested from a log with fewer than n."""


class CutMismatch(FlowmineError):
    """A log cannot be split along the given cut partition."""


class EmptyModel(FlowmineError):
    """Model discovery was attempted on an empty graph."""


class UnknownLabel(FlowmineError):
    """A trace event class does not appear on any net transition."""


class UnmappableClass(FlowmineError):
    """An event class has no corresponding abstract protocol state.

    Carries the 0-based event index in ``index`` when raised during a
    trace walk (-1 when mapping a single class).
    """

    def __init__(self, event_class: str, index: int = -1):
        where = f" at event {index}" if index >= 0 else ""
        super().__init__(f"no protocol state for class {event_class!r}{where}")
        self.event_class = event_class
        self.index = index
