"""Behaviour graphs mined from binary SoC traces."""

from .colorspace import Rgb8, map2d
from .graph import BehaviourGraph, Edge, NodeStats, build_graph, node_stats, window_sweep
from .measures import (
    PairMetrics,
    WindowSpec,
    cond_expectation,
    cov,
    dep,
    expectation,
    pair_metrics,
    significant,
    window_weights,
)
from .render import render_frame, render_sweep
from .trace import BinTrace, ImpliedKind, MeasurementId, TraceSet, implied, shifted_sample

__version__ = "0.1.0"

__all__ = [
    "BehaviourGraph",
    "BinTrace",
    "Edge",
    "ImpliedKind",
    "MeasurementId",
    "NodeStats",
    "PairMetrics",
    "Rgb8",
    "TraceSet",
    "WindowSpec",
    "build_graph",
    "cond_expectation",
    "cov",
    "dep",
    "expectation",
    "implied",
    "map2d",
    "node_stats",
    "pair_metrics",
    "render_frame",
    "render_sweep",
    "shifted_sample",
    "significant",
    "window_sweep",
    "window_weights",
]
