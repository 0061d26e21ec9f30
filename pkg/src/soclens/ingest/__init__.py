"""Readers turning external trace formats into :class:`~soclens.trace.TraceSet`."""

from .events import (
    EventLog,
    EventLogError,
    EventRecord,
    functions_to_traces,
    parse_eventlog,
)
from .vcd import VcdDocument, VcdParseError, densify, parse_vcd, write_vcd

__all__ = [
    "EventLog",
    "EventLogError",
    "EventRecord",
    "VcdDocument",
    "VcdParseError",
    "densify",
    "functions_to_traces",
    "parse_eventlog",
    "parse_vcd",
    "write_vcd",
]
