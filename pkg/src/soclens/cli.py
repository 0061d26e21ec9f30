"""``soclens``: traces in, behaviour-graph frames and JSON out.

Exit status: 0 success, 1 configuration error, 2 input parse error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from . import synth
from .colorspace import DEFAULT_GAMMA
from .graph import DEFAULT_DELTA_MAX, DEFAULT_WINDOW_LENGTH, sweep_to_json, window_sweep
from .ingest import EventLogError, VcdParseError, densify, functions_to_traces, parse_eventlog, parse_vcd
from .ingest.vcd import parse_rule
from .measures import DEFAULT_ALPHA
from .render import Style, render_sweep
from .trace import ALL_KINDS, ImpliedKind, TraceSet

log = logging.getLogger("soclens")

FORMATS = ("vcd", "events", "fixture")
EMITS = ("svg", "graph-json", "summary")
FIXTURES = ("probsys", "tinn")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


class InputParseError(ValueError):
    pass


@dataclass
class RunConfig:
    # (section, key) of every field in the TOML file
    input: Optional[str] = None
    format: str = "fixture"
    select: list[str] = field(default_factory=list)
    binarize: str = "nonzero"
    quantum: int = 1
    cycles: Optional[int] = None
    seed: int = 0
    window_length: int = DEFAULT_WINDOW_LENGTH
    stride: Optional[int] = None
    alpha: float = DEFAULT_ALPHA
    delta_max: int = DEFAULT_DELTA_MAX
    eps_dep: float = 0.0
    eps_cov: float = 0.0
    kinds: list[str] = field(default_factory=lambda: [k.label for k in ALL_KINDS])
    include_self: bool = False
    gamma: float = DEFAULT_GAMMA
    out: str = "soclens-out"
    emit: list[str] = field(default_factory=lambda: ["svg", "graph-json"])

    def effective_stride(self) -> int:
        return self.stride if self.stride is not None else max(1, self.window_length // 2)

    def kind_set(self) -> list[ImpliedKind]:
        return sorted({ImpliedKind.parse(k) for k in self.kinds})

    def validate(self) -> None:
        if not self.input:
            raise ConfigError("input.path", "an input path (or fixture name) is required")
        if self.format not in FORMATS:
            raise ConfigError("input.format", f"must be one of {', '.join(FORMATS)}, got {self.format!r}")
        try:
            parse_rule(self.binarize)
        except ValueError as exc:
            raise ConfigError("input.binarize", str(exc)) from None
        if self.quantum < 1:
            raise ConfigError("input.quantum", "must be >= 1")
        if self.cycles is not None and self.cycles < 1:
            raise ConfigError("input.cycles", "must be >= 1")
        if self.window_length < 3:
            raise ConfigError("window.length", f"must be >= 3, got {self.window_length}")
        if self.effective_stride() < 1:
            raise ConfigError("window.stride", "must be >= 1")
        if not self.alpha >= 0:
            raise ConfigError("window.alpha", "must be >= 0")
        if self.delta_max < 0:
            raise ConfigError("graph.delta_max", "must be >= 0")
        if not self.eps_dep >= 0:
            raise ConfigError("graph.eps_dep", "must be >= 0")
        if not self.eps_cov >= 0:
            raise ConfigError("graph.eps_cov", "must be >= 0")
        if not self.kinds:
            raise ConfigError("graph.kinds", "must name at least one implied kind")
        try:
            self.kind_set()
        except ValueError as exc:
            raise ConfigError("graph.kinds", str(exc)) from None
        if not self.gamma > 0:
            raise ConfigError("render.gamma", "must be > 0")
        bad = [e for e in self.emit if e not in EMITS]
        if bad:
            raise ConfigError("output.emit", f"unknown artifact(s) {bad}; choose from {', '.join(EMITS)}")


# field name -> (TOML section, key)
TOML_KEYS = {
    "input": ("input", "path"),
    "format": ("input", "format"),
    "select": ("input", "select"),
    "binarize": ("input", "binarize"),
    "quantum": ("input", "quantum"),
    "cycles": ("input", "cycles"),
    "seed": ("input", "seed"),
    "window_length": ("window", "length"),
    "stride": ("window", "stride"),
    "alpha": ("window", "alpha"),
    "delta_max": ("graph", "delta_max"),
    "eps_dep": ("graph", "eps_dep"),
    "eps_cov": ("graph", "eps_cov"),
    "kinds": ("graph", "kinds"),
    "include_self": ("graph", "include_self"),
    "gamma": ("render", "gamma"),
    "out": ("output", "out"),
    "emit": ("output", "emit"),
}
_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, value: Any) -> Any:
    dotted = ".".join(TOML_KEYS[name])
    kind = _TYPES[name]
    try:
        if kind in ("int", "Optional[int]"):
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError
            return int(value)
        if kind == "float":
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if kind == "bool":
            if not isinstance(value, bool):
                raise ValueError
            return value
        if kind == "list[str]":
            if isinstance(value, str):
                value = [v for v in (s.strip() for s in value.split(",")) if v]
            if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                raise ValueError
            return list(value)
        if not isinstance(value, str):
            raise ValueError
        return value
    except (TypeError, ValueError):
        raise ConfigError(dotted, f"invalid value {value!r}") from None


def config_from_toml(doc: dict[str, Any]) -> dict[str, Any]:
    known = {v: k for k, v in TOML_KEYS.items()}
    values = {}
    for section, table in doc.items():
        if not isinstance(table, dict):
            raise ConfigError(section, "expected a table")
        for key, value in table.items():
            if (section, key) not in known:
                raise ConfigError(f"{section}.{key}", "unknown setting")
            name = known[(section, key)]
            values[name] = _coerce(name, value)
    return values


def config_to_toml(cfg: RunConfig) -> str:
    doc: dict[str, dict[str, Any]] = {}
    for name, (section, key) in TOML_KEYS.items():
        value = getattr(cfg, name)
        if value is None:
            continue
        doc.setdefault(section, {})[key] = value
    return tomli_w.dumps(doc)


# -- inputs ----------------------------------------------------------------


def _reply(channel: dict[str, Any]) -> Optional[tuple[str, int]]:
    # reply_to = "AR" with latency = 5, or reply_to = ["AR", 5]
    ref = channel.get("reply_to")
    if ref is None:
        return None
    if isinstance(ref, str):
        return ref, int(channel.get("latency", 1))
    name, lat = ref
    return str(name), int(lat)


def _fixture_from_table(table: dict[str, Any], cfg: RunConfig) -> TraceSet:
    kind = table.get("kind", "probsys")
    T = cfg.cycles or table.get("cycles", 16384 if kind == "probsys" else 8192)
    seed = table.get("seed", cfg.seed)
    if kind == "probsys":
        if "channels" in table:
            channels = [
                synth.ChannelModel(
                    c["name"],
                    c.get("probability", 0.0),
                    _reply(c),
                    c.get("seed"),
                    c.get("group"),
                )
                for c in table["channels"]
            ]
        else:
            channels = synth.axi_channels(
                table.get("p_write", 0.05),
                table.get("p_read", 0.05),
                table.get("read_latency", 5),
                table.get("write_latency", 3),
            )
        return synth.gen_probsys(channels, T, seed, table.get("stall_probability", 0.25))
    if kind == "tinn":
        if "functions" in table:
            schedule = [
                synth.FunctionSchedule(
                    f["source"],
                    f["name"],
                    tuple(synth.Phase(**p) for p in f.get("phases", [])),
                    f.get("depth", 0),
                )
                for f in table["functions"]
            ]
        else:
            schedule = synth.tinn_schedule(T, table.get("period", 64))
        return functions_to_traces(synth.gen_tinn_like(schedule, T), T)
    raise ConfigError("fixture.kind", f"unknown fixture {kind!r} (expected {' or '.join(FIXTURES)})")


def load_traces(cfg: RunConfig) -> TraceSet:
    if cfg.format == "fixture":
        if cfg.input in FIXTURES:
            return _fixture_from_table({"kind": cfg.input}, cfg)
        text = Path(cfg.input).read_text(encoding="utf-8")
        try:
            doc = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise InputParseError(f"{cfg.input}: {exc}") from None
        table = doc.get("fixture")
        if not isinstance(table, dict):
            raise InputParseError(f"{cfg.input}: missing [fixture] table")
        try:
            return _fixture_from_table(table, cfg)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise InputParseError(f"{cfg.input}: bad fixture definition: {exc}") from None

    data = Path(cfg.input).read_bytes()
    try:
        if cfg.format == "vcd":
            doc = parse_vcd(data)
        else:
            events = parse_eventlog(data)
    except (VcdParseError, EventLogError, UnicodeDecodeError) as exc:
        raise InputParseError(f"{cfg.input}: {exc}") from None
    try:
        if cfg.format == "vcd":
            return densify(doc, cfg.select, cfg.binarize, cfg.quantum, cfg.cycles)
        traces = functions_to_traces(events, cfg.cycles, cfg.quantum)
    except EventLogError as exc:
        raise InputParseError(f"{cfg.input}: {exc}") from None
    except ValueError as exc:
        raise ConfigError("input.select" if "selection" in str(exc) else "input.cycles", str(exc)) from None
    if cfg.select:
        from fnmatch import fnmatchcase

        keep = [(m.name, tr) for m, tr in traces.measurements if any(fnmatchcase(m.name, p) for p in cfg.select)]
        if not keep:
            raise ConfigError("input.select", f"matches no function; available: {', '.join(traces.names)}")
        traces = TraceSet.from_traces(keep, groups=[n.split(".")[0] for n, _ in keep], length=traces.length)
    return traces


# -- run ---------------------------------------------------------------------


def run(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    cfg.validate()
    traces = load_traces(cfg)
    if cfg.window_length > traces.length:
        raise ConfigError(
            "window.length", f"window length {cfg.window_length} exceeds trace length {traces.length}"
        )
    graphs = window_sweep(
        traces,
        cfg.window_length,
        cfg.effective_stride(),
        cfg.alpha,
        cfg.delta_max,
        cfg.eps_dep,
        cfg.eps_cov,
        cfg.kind_set(),
        cfg.include_self,
    )
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if "graph-json" in cfg.emit:
        params = {
            "cycles": traces.length,
            "window_length": cfg.window_length,
            "stride": cfg.effective_stride(),
            "alpha": cfg.alpha,
            "delta_max": cfg.delta_max,
            "eps_dep": cfg.eps_dep,
            "eps_cov": cfg.eps_cov,
            "kinds": [k.label for k in cfg.kind_set()],
            "include_self": cfg.include_self,
        }
        (out / "graph.json").write_text(sweep_to_json(graphs, params), encoding="utf-8")
    if "svg" in cfg.emit:
        render_sweep(graphs, out, Style(gamma=cfg.gamma, delta_max=max(cfg.delta_max, 1)))
    if "summary" in cfg.emit:
        from .plotting import write_summary

        write_summary(graphs, out, gamma=cfg.gamma)
    for k, g in enumerate(graphs):
        print(f"frame {k} [{g.window.u}, {g.window.v}): {len(g.nodes)} nodes, {len(g.edges)} edges", file=stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="soclens", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="TOML run configuration; flags override it")
    p.add_argument("--input", help="trace file, or fixture name (probsys, tinn) / fixture TOML")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--select", help="comma-separated signal globs")
    p.add_argument("--binarize", help="nonzero | split | bit(k)")
    p.add_argument("--quantum", type=int, help="time units per cycle")
    p.add_argument("--cycles", type=int, help="trace length in cycles (fixtures, event logs)")
    p.add_argument("--seed", type=int)
    p.add_argument("--window-length", dest="window_length", type=int)
    p.add_argument("--stride", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--delta-max", dest="delta_max", type=int)
    p.add_argument("--eps-dep", dest="eps_dep", type=float)
    p.add_argument("--eps-cov", dest="eps_cov", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--kinds", help="comma-separated subset of Level,Reflect,Rise,Fall")
    p.add_argument("--include-self", dest="include_self", action="store_true", default=None)
    p.add_argument("--out", help="output directory")
    p.add_argument("--emit", help="comma-separated: svg, graph-json, summary")
    p.add_argument("--dump-config", action="store_true", help="print the effective config as TOML and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values: dict[str, Any] = {}
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError("--config", f"cannot read {args.config}: {exc.strerror}") from None
        try:
            values.update(config_from_toml(tomllib.loads(text)))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError("--config", f"{args.config}: {exc}") from None
    for name in TOML_KEYS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = _coerce(name, flag)
    return RunConfig(**values)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = resolve_config(args)
        if args.dump_config:
            sys.stdout.write(config_to_toml(cfg))
            return 0
        return run(cfg)
    except ConfigError as exc:
        print(f"soclens: config error: {exc}", file=sys.stderr)
        return 1
    except InputParseError as exc:
        print(f"soclens: parse error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"soclens: I/O error: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
