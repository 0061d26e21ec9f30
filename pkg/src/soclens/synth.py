"""Seeded synthetic traces shaped like an AXI master/slave run and a
two-processor instrumented program.

Randomness comes from SplitMix64 used as a counter-based generator: the
``i``-th draw of stream ``s`` under seed ``k`` is::

    z = (k + (s * 2**32 + i + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    z =  z ^ (z >> 31)

and a uniform double is ``(z >> 11) * 2**-53``. Streams are independent
of each other and of evaluation order, which keeps fixtures reproducible
in any language with 64-bit wrapping integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .ingest.events import EventLog, EventRecord
from .trace import BinTrace, MeasurementId, TraceSet

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, stream: int, count: int, start: int = 0) -> np.ndarray:
    """Draws ``start .. start+count-1`` of *stream* as ``uint64``."""
    if not 0 <= stream < 2**32:
        raise ValueError("stream id must fit in 32 bits")
    counter = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    counter += np.uint64(stream << 32)
    with np.errstate(over="ignore"):
        z = np.uint64(seed % 2**64) + counter * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def uniform(seed: int, stream: int, count: int) -> np.ndarray:
    z = splitmix64(seed, stream, count)
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


def bernoulli(seed: int, stream: int, count: int, p: float) -> np.ndarray:
    return (uniform(seed, stream, count) < p).astype(np.uint8)


@dataclass(frozen=True)
class ChannelModel:
    """A request channel firing with *probability* per cycle, or a reply
    firing exactly ``latency`` cycles after the channel it answers."""

    name: str
    probability: float = 0.0
    reply_to: Optional[tuple[str, int]] = None
    seed: Optional[int] = None
    group: Optional[str] = None

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"{self.name}: probability must lie in [0, 1]")
        if self.reply_to is not None and self.reply_to[1] < 0:
            raise ValueError(f"{self.name}: latency must be >= 0")


SIDE_CHANNELS = ("busy", "stall", "idle")


def gen_probsys(
    channels: Sequence[ChannelModel],
    T: int,
    seed: int = 0,
    stall_probability: float = 0.25,
    side_channels: bool = True,
) -> TraceSet:
    """Request/reply channel traces plus slave ``busy``/``stall``/``idle``.

    ``busy`` is high while any request awaits its reply (cycles
    ``[t, t + latency)`` after a request fired at ``t``); ``idle`` is its
    complement and ``stall`` is a Bernoulli stream gated by ``busy``.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    by_name = {c.name: c for c in channels}
    if len(by_name) != len(channels):
        raise ValueError("channel names must be unique")
    for c in channels:
        if c.reply_to is not None and c.reply_to[0] not in by_name:
            raise ValueError(f"{c.name}: reply_to references unknown channel {c.reply_to[0]!r}")

    fired: dict[str, np.ndarray] = {}

    def resolve(c: ChannelModel, chain: tuple[str, ...] = ()) -> np.ndarray:
        if c.name in fired:
            return fired[c.name]
        if c.name in chain:
            raise ValueError(f"reply_to cycle through {' -> '.join(chain + (c.name,))}")
        if c.reply_to is None:
            stream = channels.index(c)
            vals = bernoulli(seed if c.seed is None else c.seed, stream, T, c.probability)
        else:
            src, lat = c.reply_to
            base = resolve(by_name[src], chain + (c.name,))
            vals = np.zeros(T, dtype=np.uint8)
            if lat < T:
                vals[lat:] = base[: T - lat]
        fired[c.name] = vals
        return vals

    for c in channels:
        resolve(c)

    named = [(c.name, fired[c.name], c.group) for c in channels]
    if side_channels:
        # outstanding[t] counts requests fired in (t - latency, t]
        outstanding = np.zeros(T + 1, dtype=np.int64)
        for c in channels:
            if c.reply_to is None or c.reply_to[1] == 0:
                continue
            src, lat = c.reply_to
            starts = np.flatnonzero(fired[src])
            np.add.at(outstanding, starts, 1)
            np.add.at(outstanding, np.minimum(starts + lat, T), -1)
        busy = (np.cumsum(outstanding[:T]) > 0).astype(np.uint8)
        stall = bernoulli(seed, len(channels), T, stall_probability) & busy
        named += [("busy", busy, "slave"), ("stall", stall, "slave"), ("idle", 1 - busy, "slave")]

    items = tuple(
        (MeasurementId(i, name, group), BinTrace(vals))
        for i, (name, vals, group) in enumerate(named)
    )
    return TraceSet(items, T)


def axi_channels(
    p_write: float = 0.05,
    p_read: float = 0.05,
    read_latency: int = 5,
    write_latency: int = 3,
) -> list[ChannelModel]:
    """The five AXI channels: ``AW -> W -> B`` and ``AR -> R``."""
    return [
        ChannelModel("AW", p_write, group="write"),
        ChannelModel("W", reply_to=("AW", 1), group="write"),
        ChannelModel("B", reply_to=("W", write_latency), group="write"),
        ChannelModel("AR", p_read, group="read"),
        ChannelModel("R", reply_to=("AR", read_latency), group="read"),
    ]


# -- instrumented-program fixture ----------------------------------------


@dataclass(frozen=True)
class Phase:
    """Periodic activity over ``[start, end)``: active for the first
    ``round(duty * period)`` cycles of each period, after ``offset``."""

    start: int
    end: int
    period: int = 1
    duty: float = 1.0
    offset: int = 0

    def intervals(self) -> list[tuple[int, int]]:
        if self.period < 1:
            raise ValueError("period must be >= 1")
        on = round(self.duty * self.period)
        if on <= 0 or self.end <= self.start:
            return []
        if on >= self.period:
            return [(self.start, self.end)]
        out = []
        t = self.start + self.offset
        while t < self.end:
            out.append((t, min(t + on, self.end)))
            t += self.period
        return out


@dataclass(frozen=True)
class FunctionSchedule:
    source: str
    name: str
    phases: tuple[Phase, ...] = ()
    depth: int = 0


def gen_tinn_like(functions: Sequence[FunctionSchedule], T: int) -> EventLog:
    """Enter/exit records following each function's phase schedule.

    Functions of one source at the same nesting depth may not overlap.
    Activity is clipped to ``[0, T)``.
    """
    per_level: dict[tuple[str, int], list[tuple[int, int, str]]] = {}
    events: list[tuple[int, int, int, EventRecord]] = []
    for fi, fn in enumerate(functions):
        spans = []
        for ph in fn.phases:
            for a, b in ph.intervals():
                a, b = max(a, 0), min(b, T)
                if a < b:
                    spans.append((a, b))
        spans.sort()
        merged: list[tuple[int, int]] = []
        for a, b in spans:
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(b, merged[-1][1]))
            else:
                merged.append((a, b))
        level = per_level.setdefault((fn.source, fn.depth), [])
        for a, b in merged:
            for oa, ob, other in level:
                if a < ob and oa < b:
                    raise ValueError(
                        f"{fn.source}.{fn.name} overlaps {fn.source}.{other} "
                        f"at depth {fn.depth} around cycle {max(a, oa)}"
                    )
            level.append((a, b, fn.name))
        for a, b in merged:
            # exits sort before enters at the same time; deeper frames close first
            events.append((a, 1, fn.depth, EventRecord(a, fn.source, fn.name, "enter")))
            events.append((b, 0, -fn.depth, EventRecord(b, fn.source, fn.name, "exit")))
    events.sort(key=lambda e: (e[0], e[1], e[2], e[3].source, e[3].function))
    return EventLog(tuple(e[3] for e in events))


def tinn_schedule(T: int = 8192, period: int = 64) -> list[FunctionSchedule]:
    """Two-processor train-then-infer program.

    ``ACPU`` gathers batches and hands them to ``SCPU``. During the first
    half ``SCPU`` spends most of each period in ``train`` while ``ACPU``
    waits; in the second half ``SCPU`` runs short ``infer`` bursts and
    ``ACPU`` is mostly collecting input.
    """
    half = T // 2
    p = period

    def ph(start, end, duty, offset):
        return Phase(start, end, p, duty, offset)

    return [
        FunctionSchedule("ACPU", "main", (Phase(0, T),), depth=0),
        FunctionSchedule("ACPU", "collect", (ph(0, half, 0.125, 0), ph(half, T, 0.5, 0)), 1),
        FunctionSchedule("ACPU", "send", (ph(0, half, 0.0625, 8), ph(half, T, 0.125, 32)), 1),
        FunctionSchedule("ACPU", "wait", (ph(0, half, 0.75, 14), ph(half, T, 0.25, 42)), 1),
        FunctionSchedule("SCPU", "main", (Phase(0, T),), depth=0),
        FunctionSchedule("SCPU", "recv", (ph(0, half, 0.0625, 10), ph(half, T, 0.125, 34)), 1),
        FunctionSchedule("SCPU", "train", (ph(0, half, 0.8125, 14),), 1),
        FunctionSchedule("SCPU", "infer", (ph(half, T, 0.25, 42),), 1),
        FunctionSchedule("SCPU", "predict", (ph(half, T, 0.125, 44),), 2),
    ]
