"""Value change dump (IEEE 1364 VCD) reader and densifier.

Honoured: ``$timescale``, ``$scope``/``$upscope``, ``$var``,
``$enddefinitions``, ``$comment``, ``$date``, ``$version`` and
``$dumpvars``/``$dumpoff``/``$dumpon``/``$dumpall`` blocks (whose
contents are applied as ordinary changes).
"""

from __future__ import annotations

import fnmatch
import logging
import re
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Optional, Sequence, Union

import numpy as np

from ..trace import BinTrace, MeasurementId, TraceSet

log = logging.getLogger(__name__)

_SKIP_BLOCKS = {"$comment", "$date", "$version"}
_DUMP_BLOCKS = {"$dumpvars", "$dumpoff", "$dumpon", "$dumpall"}
_TIMESCALE_RE = re.compile(r"^(1|10|100)\s*(s|ms|us|ns|ps|fs)$")
_SCALAR = set("01xzXZ")


class VcdParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class VcdVar(NamedTuple):
    code: str
    width: int
    name: str
    type: str = "wire"


class VcdChange(NamedTuple):
    time: int
    code: str
    value: str


@dataclass
class VcdDocument:
    timescale: tuple[int, str] = (1, "s")
    scopes: list[tuple[str, ...]] = field(default_factory=list)
    vars: list[VcdVar] = field(default_factory=list)
    changes: list[VcdChange] = field(default_factory=list)
    end_time: int = 0  # last timestamp in the body, with or without changes

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.vars]

    @property
    def last_time(self) -> int:
        return max(self.end_time, self.changes[-1].time if self.changes else 0)

    def var(self, name: str) -> VcdVar:
        for v in self.vars:
            if v.name == name:
                return v
        raise KeyError(name)


def _tokens(text: str) -> Iterator[tuple[int, str]]:
    for lineno, line in enumerate(text.splitlines(), start=1):
        for tok in line.split():
            yield lineno, tok


def _block(tokens: Iterator[tuple[int, str]], keyword: str, line: int) -> list[str]:
    body = []
    for _, tok in tokens:
        if tok == "$end":
            return body
        body.append(tok)
    raise VcdParseError(f"truncated file: {keyword} block opened here is never closed", line)


def parse_vcd(data: Union[str, bytes]) -> VcdDocument:
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    doc = VcdDocument()
    tokens = _tokens(data)
    scope: list[str] = []
    codes: dict[str, int] = {}

    # header
    for line, tok in tokens:
        if tok == "$enddefinitions":
            _block(tokens, tok, line)
            break
        if tok in _SKIP_BLOCKS:
            _block(tokens, tok, line)
        elif tok == "$timescale":
            body = "".join(_block(tokens, tok, line))
            m = _TIMESCALE_RE.match(body)
            if not m:
                raise VcdParseError(f"malformed $timescale {body!r}", line)
            doc.timescale = (int(m.group(1)), m.group(2))
        elif tok == "$scope":
            body = _block(tokens, tok, line)
            if len(body) != 2:
                raise VcdParseError(f"malformed $scope, expected type and name: {body}", line)
            scope.append(body[1])
            doc.scopes.append(tuple(scope))
        elif tok == "$upscope":
            _block(tokens, tok, line)
            if not scope:
                raise VcdParseError("$upscope without matching $scope", line)
            scope.pop()
        elif tok == "$var":
            body = _block(tokens, tok, line)
            if len(body) not in (4, 5):
                raise VcdParseError(f"malformed $var, expected 'type width code name': {body}", line)
            vtype, width, code, ref = body[:4]
            if not width.isdigit() or int(width) < 1:
                raise VcdParseError(f"malformed $var width {width!r}", line)
            name = ".".join(scope + [ref])
            codes.setdefault(code, int(width))
            doc.vars.append(VcdVar(code, int(width), name, vtype))
        else:
            raise VcdParseError(f"unexpected token {tok!r} in header", line)
    else:
        raise VcdParseError("truncated file: no $enddefinitions")

    # body
    now = 0
    seen_time = False
    for line, tok in tokens:
        head = tok[0]
        if head == "#":
            try:
                t = int(tok[1:])
            except ValueError:
                raise VcdParseError(f"malformed timestamp {tok!r}", line) from None
            if t < now:
                raise VcdParseError(f"timestamp #{t} goes backwards (after #{now})", line)
            now, seen_time = t, True
            doc.end_time = t
        elif head == "$":
            if tok in _DUMP_BLOCKS or tok == "$end":
                continue
            if tok in _SKIP_BLOCKS:
                _block(tokens, tok, line)
                continue
            raise VcdParseError(f"unexpected directive {tok!r} in value changes", line)
        elif head in _SCALAR:
            code = tok[1:]
            if not code:
                raise VcdParseError(f"scalar change {tok!r} has no identifier", line)
            _check_code(codes, code, now, line)
            doc.changes.append(VcdChange(now, code, head.lower()))
        elif head in "bBrR":
            value = tok[1:]
            nxt = next(tokens, None)
            if nxt is None:
                raise VcdParseError(
                    f"truncated file: vector change {tok!r} lacks an identifier; "
                    f"last good timestamp #{now}",
                    line,
                )
            code = nxt[1]
            _check_code(codes, code, now, nxt[0])
            if head in "bB":
                if not value or any(c not in _SCALAR for c in value):
                    raise VcdParseError(f"malformed vector value {tok!r}", line)
                doc.changes.append(VcdChange(now, code, value.lower()))
            else:
                try:
                    float(value)
                except ValueError:
                    raise VcdParseError(f"malformed real value {tok!r}", line) from None
                doc.changes.append(VcdChange(now, code, "r" + value))
        else:
            raise VcdParseError(
                f"unrecognised token {tok!r}" + (f" after #{now}" if seen_time else ""), line
            )
    return doc


def _check_code(codes: dict[str, int], code: str, now: int, line: int) -> None:
    if code not in codes:
        raise VcdParseError(f"unknown identifier code {code!r} at #{now}", line)


# -- densify --------------------------------------------------------------


def _bits(value: str, width: int) -> str:
    """MSB-first bit string left-extended to *width* per VCD rules."""
    if len(value) >= width:
        return value[-width:]
    fill = value[0] if value[0] in "xz" else "0"
    return fill * (width - len(value)) + value


def _binarize(value: str, width: int, bit: Optional[int]) -> int:
    if value.startswith("r"):
        return int(float(value[1:]) != 0.0)
    bits = _bits(value, width)
    if bit is None:
        return int("1" in bits)
    return int(bits[width - 1 - bit] == "1")


def parse_rule(rule: str) -> tuple[str, Optional[int]]:
    """``nonzero``, ``split`` or ``bit(k)`` (also ``bit:k``)."""
    rule = rule.strip()
    if rule in ("nonzero", "split"):
        return rule, None
    m = re.fullmatch(r"bit(?:\((\d+)\)|:(\d+))", rule)
    if m:
        return "bit", int(m.group(1) or m.group(2))
    raise ValueError(f"unknown binarization rule {rule!r} (nonzero, split or bit(k))")


def select_vars(doc: VcdDocument, selection: Sequence[str] = ()) -> list[VcdVar]:
    """Vars whose full or leaf name matches any glob in *selection* (all if empty)."""
    if not selection:
        return list(doc.vars)
    out = []
    for v in doc.vars:
        leaf = v.name.rsplit(".", 1)[-1]
        if any(fnmatch.fnmatchcase(v.name, p) or fnmatch.fnmatchcase(leaf, p) for p in selection):
            out.append(v)
    if not out:
        raise ValueError(
            f"selection {list(selection)} matches no signal; available: {', '.join(doc.names)}"
        )
    return out


def densify(
    doc: VcdDocument,
    selection: Sequence[str] = (),
    binarization: str = "nonzero",
    quantum: int = 1,
    T: Optional[int] = None,
) -> TraceSet:
    """Sample selected signals once per cycle of *quantum* time units.

    A cycle ``c`` holds the last change at or before time ``c * quantum``;
    ``x``/``z`` bits read as 0.
    """
    if quantum < 1:
        raise ValueError("quantum must be >= 1")
    rule, bit = parse_rule(binarization)
    chosen = select_vars(doc, selection)
    if T is None:
        T = doc.last_time // quantum + 1
    if T < 1:
        raise ValueError("T must be >= 1")

    by_code: dict[str, list[VcdChange]] = {}
    for ch in doc.changes:
        by_code.setdefault(ch.code, []).append(ch)

    names, traces = [], []
    for var in chosen:
        changes = by_code.get(var.code, [])
        if not changes:
            log.warning("signal %s is never assigned; reading as 0", var.name)
        if rule == "split" and var.width > 1:
            lanes = [(f"{var.name}[{k}]", k) for k in range(var.width)]
        elif rule == "bit":
            if bit >= var.width:
                raise ValueError(f"bit({bit}) out of range for {var.name} (width {var.width})")
            lanes = [(var.name, bit)]
        else:
            lanes = [(var.name, None)]
        for lane_name, k in lanes:
            values = np.zeros(T, dtype=np.uint8)
            marks = np.full(T, -1, dtype=np.int64)
            held = []
            for ch in changes:
                c = -(-ch.time // quantum)
                if c >= T:
                    break
                marks[c] = len(held)
                held.append(_binarize(ch.value, var.width, k))
            if held:
                idx = np.maximum.accumulate(marks)
                lut = np.array(held, dtype=np.uint8)
                values = np.where(idx >= 0, lut[np.maximum(idx, 0)], 0).astype(np.uint8)
            names.append(lane_name)
            traces.append(values)

    ts = f"{doc.timescale[0] * quantum}{doc.timescale[1]}"
    items = tuple(
        (MeasurementId(i, n, n.rsplit(".", 1)[0] if "." in n else None), BinTrace(v))
        for i, (n, v) in enumerate(zip(names, traces))
    )
    return TraceSet(items, T, ts)


def _code(i: int) -> str:
    chars = [chr(c) for c in range(33, 127)]
    out = ""
    while True:
        i, r = divmod(i, len(chars))
        out = chars[r] + out
        if i == 0:
            return out
        i -= 1


def write_vcd(traces: TraceSet, timescale: str = "1ns", scope: str = "top") -> str:
    """Emit *traces* as a VCD with one change record per transition."""
    lines = ["$timescale " + timescale + " $end", f"$scope module {scope} $end"]
    codes = []
    for i, name in enumerate(traces.names):
        code = _code(i)
        codes.append(code)
        ref = re.sub(r"\s+", "_", name)
        lines.append(f"$var wire 1 {code} {ref} $end")
    lines += ["$upscope $end", "$enddefinitions $end"]
    levels = traces.levels
    if len(traces) == 0:
        return "\n".join(lines) + "\n"
    lines.append("#0")
    lines.append("$dumpvars")
    for i, code in enumerate(codes):
        lines.append(f"{levels[i, 0]}{code}")
    lines.append("$end")
    diff = np.flatnonzero((levels[:, 1:] != levels[:, :-1]).any(axis=0)) + 1
    for t in diff:
        lines.append(f"#{t}")
        for i in np.flatnonzero(levels[:, t] != levels[:, t - 1]):
            lines.append(f"{levels[i, t]}{codes[i]}")
    lines.append(f"#{traces.length - 1}")
    return "\n".join(lines) + "\n"
