"""Binary measurement timelines and the implied-measurement algebra."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np


class ImpliedKind(enum.IntEnum):
    """The four derived views of a binary measurement, in fixed order."""

    LEVEL = 0
    REFLECT = 1
    RISE = 2
    FALL = 3

    @property
    def label(self) -> str:
        return self.name.capitalize()

    @classmethod
    def parse(cls, text: str) -> "ImpliedKind":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(
                f"unknown implied kind {text!r} (expected one of "
                f"{', '.join(k.label for k in cls)})"
            ) from None


ALL_KINDS: tuple[ImpliedKind, ...] = tuple(ImpliedKind)


@dataclass(frozen=True)
class MeasurementId:
    index: int
    name: str
    group: Optional[str] = None

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"measurement index must be >= 0, got {self.index}")
        if not self.name:
            raise ValueError("measurement name must be non-empty")


class BinTrace:
    """Immutable dense binary timeline over cycles ``[0, T)``.

    Samples are held as a read-only ``uint8`` array.
    """

    __slots__ = ("_values",)

    def __init__(self, values: Iterable[int] | np.ndarray):
        arr = np.asarray(values if isinstance(values, np.ndarray) else list(values))
        if arr.ndim != 1:
            raise ValueError("trace must be one-dimensional")
        if arr.size < 1:
            raise ValueError("trace must contain at least one sample")
        if arr.dtype != np.uint8:
            if not np.isin(arr, (0, 1)).all():
                raise ValueError("trace samples must be 0 or 1")
            arr = arr.astype(np.uint8)
        elif arr.max() > 1:
            raise ValueError("trace samples must be 0 or 1")
        else:
            arr = arr.copy()
        arr.setflags(write=False)
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __len__(self) -> int:
        return self._values.size

    def __getitem__(self, t):
        return self._values[t]

    def __iter__(self) -> Iterator[int]:
        return (int(v) for v in self._values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinTrace):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    def __hash__(self) -> int:
        return hash(self._values.tobytes())

    def __repr__(self) -> str:
        if len(self) <= 16:
            return f"BinTrace({self._values.tolist()})"
        return f"BinTrace(T={len(self)}, ones={int(self._values.sum())})"

    def tolist(self) -> list[int]:
        return self._values.tolist()


def implied_values(levels: np.ndarray, kind: ImpliedKind) -> np.ndarray:
    """Apply *kind* along the last axis of a 0/1 array (t=0 never has an edge)."""
    f = np.asarray(levels, dtype=np.int8)
    if kind is ImpliedKind.LEVEL:
        return f.astype(np.uint8)
    if kind is ImpliedKind.REFLECT:
        return (1 - f).astype(np.uint8)
    prev = np.concatenate([f[..., :1], f[..., :-1]], axis=-1)
    if kind is ImpliedKind.RISE:
        return np.maximum(0, f - prev).astype(np.uint8)
    return np.maximum(0, prev - f).astype(np.uint8)


def implied(trace: BinTrace, kind: ImpliedKind) -> BinTrace:
    """Level, Reflect (1-f), Rise (0->1) or Fall (1->0) view of *trace*."""
    if kind is ImpliedKind.LEVEL:
        return trace
    return BinTrace(implied_values(trace.values, kind))


def shifted_sample(trace: BinTrace, t: int, delta: int) -> int:
    """``f(t + delta)``, or 0 outside the record."""
    i = t + delta
    if i < 0 or i >= len(trace):
        return 0
    return int(trace.values[i])


def implied_block(
    levels: np.ndarray, lo: int, hi: int, kinds: Sequence[ImpliedKind]
) -> np.ndarray:
    """Implied values for global cycles ``[lo, hi)`` with zeros outside ``[0, T)``.

    *levels* is ``(M, T)``. The result is ``(M * len(kinds), hi - lo)`` with
    rows ordered measurement-major, kind-minor.
    """
    m, total = levels.shape
    out = np.zeros((m, len(kinds), hi - lo), dtype=np.uint8)
    a, b = max(lo, 0), min(hi, total)
    if a < b:
        seg = levels[:, a:b].astype(np.int8)
        # edges at the first sample need the one before it, if it exists
        prev = levels[:, a - 1 : a].astype(np.int8) if a > 0 else seg[:, :1]
        before = np.concatenate([prev, seg[:, :-1]], axis=1)
        for j, kind in enumerate(kinds):
            if kind is ImpliedKind.LEVEL:
                vals = seg
            elif kind is ImpliedKind.REFLECT:
                vals = 1 - seg
            elif kind is ImpliedKind.RISE:
                vals = np.maximum(0, seg - before)
            else:
                vals = np.maximum(0, before - seg)
            out[:, j, a - lo : b - lo] = vals
    return out.reshape(m * len(kinds), hi - lo)


@dataclass(frozen=True)
class TraceSet:
    """Named binary traces sharing one length."""

    measurements: tuple[tuple[MeasurementId, BinTrace], ...]
    length: int
    timescale: Optional[str] = None
    _levels: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        names = [m.name for m, _ in self.measurements]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate measurement names: {dupes}")
        indices = [m.index for m, _ in self.measurements]
        if len(set(indices)) != len(indices):
            raise ValueError("duplicate measurement indices")
        for mid, tr in self.measurements:
            if len(tr) != self.length:
                raise ValueError(
                    f"trace {mid.name!r} has length {len(tr)}, expected {self.length}"
                )
        if self.measurements:
            levels = np.stack([tr.values for _, tr in self.measurements])
        else:
            levels = np.zeros((0, self.length), dtype=np.uint8)
        levels.setflags(write=False)
        object.__setattr__(self, "_levels", levels)

    @classmethod
    def from_traces(
        cls,
        traces: Sequence[tuple[str, BinTrace | Sequence[int]]],
        *,
        groups: Optional[Sequence[Optional[str]]] = None,
        timescale: Optional[str] = None,
        length: Optional[int] = None,
    ) -> "TraceSet":
        items = []
        for i, (name, tr) in enumerate(traces):
            if not isinstance(tr, BinTrace):
                tr = BinTrace(tr)
            group = groups[i] if groups is not None else None
            items.append((MeasurementId(i, name, group), tr))
        if length is None:
            if not items:
                raise ValueError("length is required for an empty trace set")
            length = len(items[0][1])
        return cls(tuple(items), length, timescale)

    def __len__(self) -> int:
        return len(self.measurements)

    @property
    def ids(self) -> list[MeasurementId]:
        return [m for m, _ in self.measurements]

    @property
    def names(self) -> list[str]:
        return [m.name for m, _ in self.measurements]

    @property
    def levels(self) -> np.ndarray:
        """``(M, T)`` read-only uint8 matrix of Level samples."""
        return self._levels

    def trace(self, name: str) -> BinTrace:
        for mid, tr in self.measurements:
            if mid.name == name:
                return tr
        raise KeyError(name)

    def merged(self, other: "TraceSet") -> "TraceSet":
        if other.length != self.length:
            raise ValueError("cannot merge trace sets of different length")
        pairs = [(m.name, tr) for m, tr in self.measurements]
        pairs += [(m.name, tr) for m, tr in other.measurements]
        groups = [m.group for m, _ in self.measurements]
        groups += [m.group for m, _ in other.measurements]
        return TraceSet.from_traces(
            pairs, groups=groups, timescale=self.timescale, length=self.length
        )
