"""Function enter/exit event logs (CSV) and their activity traces."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from ..trace import BinTrace, MeasurementId, TraceSet

log = logging.getLogger(__name__)

HEADER = ("timestamp", "source", "function", "kind")
KINDS = ("enter", "exit")


class EventLogError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class EventRecord(NamedTuple):
    timestamp: int
    source: str
    function: str
    kind: str


@dataclass(frozen=True)
class EventLog:
    records: tuple[EventRecord, ...] = ()

    def __len__(self) -> int:
        return len(self.records)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HEADER)
        for r in self.records:
            w.writerow(r)
        return buf.getvalue()


def parse_eventlog(data: Union[str, bytes]) -> EventLog:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    reader = csv.reader(io.StringIO(data))
    try:
        header = next(reader)
    except StopIteration:
        raise EventLogError("empty input, expected header " + ",".join(HEADER), 1) from None
    if tuple(h.strip() for h in header) != HEADER:
        raise EventLogError(f"bad header {header!r}, expected {','.join(HEADER)}", 1)

    records = []
    last: dict[str, int] = {}
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise EventLogError(f"expected 4 fields, got {len(row)}", line)
        ts_text, source, function, kind = (c.strip() for c in row)
        if not ts_text.isdigit():
            raise EventLogError(f"timestamp must be an unsigned integer, got {ts_text!r}", line)
        if kind not in KINDS:
            raise EventLogError(f"unknown kind {kind!r} (expected enter or exit)", line)
        if not source or not function:
            raise EventLogError("source and function must be non-empty", line)
        ts = int(ts_text)
        if ts < last.get(source, 0):
            raise EventLogError(
                f"timestamp {ts} goes backwards for source {source!r} (previous {last[source]})",
                line,
            )
        last[source] = ts
        records.append(EventRecord(ts, source, function, kind))
    return EventLog(tuple(records))


def functions_to_traces(
    log_: EventLog, T: Optional[int] = None, quantum: int = 1
) -> TraceSet:
    """One activity trace per ``source.function``, high on ``[enter, exit)``.

    Nested entries are counted; a function is active while its counter is
    positive. Traces appear in order of first appearance in the log.
    """
    if quantum < 1:
        raise ValueError("quantum must be >= 1")
    cycles = [r.timestamp // quantum for r in log_.records]
    if T is None:
        T = max(cycles, default=0) + 1
    if T < 1:
        raise ValueError("T must be >= 1")

    order: list[tuple[str, str]] = []
    deltas: dict[tuple[str, str], np.ndarray] = {}
    depth: dict[tuple[str, str], int] = {}
    for i, (r, c) in enumerate(zip(log_.records, cycles)):
        if c > T:
            raise ValueError(f"record {i}: cycle {c} lies beyond T={T}")
        key = (r.source, r.function)
        if key not in deltas:
            order.append(key)
            deltas[key] = np.zeros(T + 1, dtype=np.int64)
            depth[key] = 0
        if r.kind == "enter":
            depth[key] += 1
            deltas[key][c] += 1
        else:
            if depth[key] == 0:
                raise EventLogError(
                    f"record {i}: exit from {r.source}.{r.function} without a matching enter"
                )
            depth[key] -= 1
            deltas[key][c] -= 1

    items = []
    for idx, key in enumerate(order):
        if depth[key] > 0:
            log.warning("%s.%s still active at end of log; held high through T", *key)
        active = (np.cumsum(deltas[key][:T]) > 0).astype(np.uint8)
        items.append((MeasurementId(idx, f"{key[0]}.{key[1]}", key[0]), BinTrace(active)))
    return TraceSet(tuple(items), T)
