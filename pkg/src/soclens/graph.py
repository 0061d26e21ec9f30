"""Per-window behaviour graphs: node statistics plus significant links."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from .measures import DEFAULT_ALPHA, WindowSpec, window_matrices, window_weights
from .trace import ALL_KINDS, ImpliedKind, MeasurementId, TraceSet, implied_block

SCHEMA = "soclens.graph/1"
DEFAULT_DELTA_MAX = 16
DEFAULT_WINDOW_LENGTH = 512


@dataclass(frozen=True)
class NodeStats:
    id: MeasurementId
    ex_window: dict[ImpliedKind, float]
    ex_global: dict[ImpliedKind, float]


@dataclass(frozen=True)
class Edge:
    src: tuple[MeasurementId, ImpliedKind]
    dst: tuple[MeasurementId, ImpliedKind]
    delta: int
    dep: float
    cov: float
    cond_ex: Optional[float]

    def key(self) -> tuple[str, str, str, str, int]:
        return (
            self.src[0].name,
            self.src[1].label,
            self.dst[0].name,
            self.dst[1].label,
            self.delta,
        )


@dataclass(frozen=True)
class BehaviourGraph:
    window: WindowSpec
    nodes: tuple[NodeStats, ...]
    edges: tuple[Edge, ...]

    def edge_between(
        self, a: str, ka: ImpliedKind, b: str, kb: ImpliedKind
    ) -> Optional[Edge]:
        """The stored edge linking ``(a, ka)`` and ``(b, kb)`` in either direction."""
        want = {(a, ka), (b, kb)}
        for e in self.edges:
            if {(e.src[0].name, e.src[1]), (e.dst[0].name, e.dst[1])} == want:
                return e
        return None


def _check_window(traces: TraceSet, window: WindowSpec) -> None:
    if window.u < 0 or window.v > traces.length:
        raise ValueError(
            f"window [{window.u}, {window.v}) lies outside trace [0, {traces.length})"
        )


def _global_expectations(traces: TraceSet) -> np.ndarray:
    """``(M, 4)`` rectangular whole-trace expectations for every kind."""
    block = implied_block(traces.levels, 0, traces.length, ALL_KINDS)
    sums = block.sum(axis=1, dtype=np.int64).astype(np.float64)
    return (sums / traces.length).reshape(len(traces), len(ALL_KINDS))


def _node_stats(
    traces: TraceSet, window: WindowSpec, global_ex: np.ndarray
) -> tuple[NodeStats, ...]:
    block = implied_block(traces.levels, window.u, window.v, ALL_KINDS)
    ex = (block.astype(np.float64) @ window.weights) / window.weight_sum
    ex = ex.reshape(len(traces), len(ALL_KINDS))
    out = []
    for i, mid in enumerate(traces.ids):
        out.append(
            NodeStats(
                mid,
                {k: float(ex[i, k]) for k in ALL_KINDS},
                {k: float(global_ex[i, k]) for k in ALL_KINDS},
            )
        )
    return tuple(out)


def node_stats(traces: TraceSet, window: WindowSpec) -> list[NodeStats]:
    """Windowed and whole-trace expectations of every implied kind per measurement."""
    _check_window(traces, window)
    if len(traces) == 0:
        return []
    return list(_node_stats(traces, window, _global_expectations(traces)))


def _relation_order(delta_max: int) -> list[int]:
    # ties resolve towards small |delta|, forward orientation first
    order = [0]
    for d in range(1, delta_max + 1):
        order += [d, -d]
    return order


def _edges(
    traces: TraceSet,
    window: WindowSpec,
    delta_max: int,
    eps_dep: float,
    eps_cov: float,
    kinds: Sequence[ImpliedKind],
    include_self: bool,
) -> tuple[Edge, ...]:
    m, nk = len(traces), len(kinds)
    if m == 0 or (m == 1 and not include_self):
        return ()
    mats = window_matrices(traces.levels, window, range(0, delta_max + 1), kinds)
    r = m * nk
    meas = np.repeat(np.arange(m), nk)
    rows, cols = np.triu_indices(r, k=1)
    if not include_self:
        keep = meas[rows] != meas[cols]
        rows, cols = rows[keep], cols[keep]
    if rows.size == 0:
        return ()

    sig = (mats.dep > eps_dep) & (mats.cov > eps_cov)
    score = np.where(sig, mats.dep * mats.cov, -1.0)
    # relation delta >= 0: row leads col; < 0: col leads row by |delta|
    order = _relation_order(delta_max)
    cand = np.stack(
        [score[d, rows, cols] if d >= 0 else score[-d, cols, rows] for d in order]
    )
    best = np.argmax(cand, axis=0)
    found = cand[best, np.arange(rows.size)] >= 0

    ids = traces.ids
    edges = []
    for p in np.flatnonzero(found):
        rel = order[best[p]]
        i, j = (int(rows[p]), int(cols[p])) if rel >= 0 else (int(cols[p]), int(rows[p]))
        d = abs(rel)
        edges.append(
            Edge(
                (ids[i // nk], kinds[i % nk]),
                (ids[j // nk], kinds[j % nk]),
                d,
                float(mats.dep[d, i, j]),
                float(mats.cov[d, i, j]),
                mats.cond_ex(d, i, j),
            )
        )
    edges.sort(key=lambda e: (e.src[0].index, e.src[1], e.dst[0].index, e.dst[1]))
    return tuple(edges)


def _normalise_kinds(kinds) -> tuple[ImpliedKind, ...]:
    ks = tuple(sorted(set(kinds)))
    if not ks:
        raise ValueError("kinds must be non-empty")
    return ks


def build_graph(
    traces: TraceSet,
    window: WindowSpec,
    delta_max: int = DEFAULT_DELTA_MAX,
    eps_dep: float = 0.0,
    eps_cov: float = 0.0,
    kinds: Sequence[ImpliedKind] = ALL_KINDS,
    include_self: bool = False,
    *,
    _global_ex: Optional[np.ndarray] = None,
) -> BehaviourGraph:
    """Significant links between every measurement pair for shifts in ``[-D, D]``.

    Only the strongest shift (largest ``dep * cov``) is kept per pair of
    implied measurements, stored in the orientation where the source leads
    (``delta >= 0``).
    """
    if delta_max < 0:
        raise ValueError(f"delta_max must be >= 0, got {delta_max}")
    if eps_dep < 0 or eps_cov < 0:
        raise ValueError("thresholds must be >= 0")
    kinds = _normalise_kinds(kinds)
    _check_window(traces, window)
    if len(traces) == 0:
        return BehaviourGraph(window, (), ())
    if _global_ex is None:
        _global_ex = _global_expectations(traces)
    nodes = _node_stats(traces, window, _global_ex)
    edges = _edges(traces, window, delta_max, eps_dep, eps_cov, kinds, include_self)
    return BehaviourGraph(window, nodes, edges)


def window_starts(total: int, length: int, stride: int) -> list[int]:
    if length < 3:
        raise ValueError(f"window length must be >= 3, got {length}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if length > total:
        raise ValueError(f"window length {length} exceeds trace length {total}")
    return list(range(0, total - length + 1, stride))


def worker_count() -> int:
    cap = os.environ.get("SOCLENS_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"SOCLENS_THREADS must be an integer, got {cap!r}") from None
    return n


def window_sweep(
    traces: TraceSet,
    length: int = DEFAULT_WINDOW_LENGTH,
    stride: Optional[int] = None,
    alpha: float = DEFAULT_ALPHA,
    delta_max: int = DEFAULT_DELTA_MAX,
    eps_dep: float = 0.0,
    eps_cov: float = 0.0,
    kinds: Sequence[ImpliedKind] = ALL_KINDS,
    include_self: bool = False,
    workers: Optional[int] = None,
) -> list[BehaviourGraph]:
    """One graph per window ``[k*stride, k*stride + length)`` fully inside the trace."""
    if stride is None:
        stride = max(1, length // 2)
    starts = window_starts(traces.length, length, stride)
    kinds = _normalise_kinds(kinds)
    global_ex = _global_expectations(traces) if len(traces) else None
    base = window_weights(0, length, alpha)

    def one(u: int) -> BehaviourGraph:
        win = WindowSpec(u, u + length, base.alpha, base.weights, base.weight_sum)
        return build_graph(
            traces, win, delta_max, eps_dep, eps_cov, kinds, include_self,
            _global_ex=global_ex,
        )

    workers = workers or worker_count()
    if workers <= 1 or len(starts) <= 1:
        return [one(u) for u in starts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, starts))


# -- JSON ---------------------------------------------------------------


def _endpoint(end: tuple[MeasurementId, ImpliedKind]) -> dict[str, Any]:
    return {"index": end[0].index, "name": end[0].name, "kind": end[1].label}


def graph_to_dict(graph: BehaviourGraph, k: int = 0) -> dict[str, Any]:
    return {
        "frame": k,
        "window": {"u": graph.window.u, "v": graph.window.v, "alpha": graph.window.alpha},
        "nodes": [
            {
                "index": n.id.index,
                "name": n.id.name,
                "group": n.id.group,
                "ex_window": {kind.label: n.ex_window[kind] for kind in ALL_KINDS},
                "ex_global": {kind.label: n.ex_global[kind] for kind in ALL_KINDS},
            }
            for n in graph.nodes
        ],
        "edges": [
            {
                "src": _endpoint(e.src),
                "dst": _endpoint(e.dst),
                "delta": e.delta,
                "dep": e.dep,
                "cov": e.cov,
                "cond_ex": e.cond_ex,
            }
            for e in graph.edges
        ],
    }


def sweep_to_json(graphs: Sequence[BehaviourGraph], params: Optional[dict] = None) -> str:
    doc = {
        "schema": SCHEMA,
        "params": params or {},
        "frames": [graph_to_dict(g, k) for k, g in enumerate(graphs)],
    }
    return json.dumps(doc, indent=1, sort_keys=False, allow_nan=False) + "\n"


def graphs_from_json(text: str) -> list[BehaviourGraph]:
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"unsupported graph schema {doc.get('schema')!r}")
    graphs = []
    for frame in doc["frames"]:
        w = frame["window"]
        win = window_weights(w["u"], w["v"], w["alpha"])
        ids = {
            n["index"]: MeasurementId(n["index"], n["name"], n.get("group"))
            for n in frame["nodes"]
        }
        nodes = tuple(
            NodeStats(
                ids[n["index"]],
                {ImpliedKind.parse(k): v for k, v in n["ex_window"].items()},
                {ImpliedKind.parse(k): v for k, v in n["ex_global"].items()},
            )
            for n in frame["nodes"]
        )
        edges = tuple(
            Edge(
                (ids[e["src"]["index"]], ImpliedKind.parse(e["src"]["kind"])),
                (ids[e["dst"]["index"]], ImpliedKind.parse(e["dst"]["kind"])),
                e["delta"],
                e["dep"],
                e["cov"],
                e["cond_ex"],
            )
            for e in frame["edges"]
        )
        graphs.append(BehaviourGraph(win, nodes, edges))
    return graphs
