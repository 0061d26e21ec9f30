"""Windowed expectation, dependency and covariance of binary traces.

All statistics are weighted averages under a power-of-sine window over a
half-open cycle range ``[u, v)``. Second operands may be shifted by a
signed number of cycles; samples outside the record read as 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .trace import BinTrace, ImpliedKind, implied_block

DEFAULT_ALPHA = 2.0


@dataclass(frozen=True, eq=False)
class WindowSpec:
    u: int
    v: int
    alpha: float
    weights: np.ndarray
    weight_sum: float

    @property
    def length(self) -> int:
        return self.v - self.u

    def __eq__(self, other) -> bool:
        if not isinstance(other, WindowSpec):
            return NotImplemented
        return (self.u, self.v, self.alpha) == (other.u, other.v, other.alpha)

    def __hash__(self) -> int:
        return hash((self.u, self.v, self.alpha))

    def __repr__(self) -> str:
        return f"WindowSpec(u={self.u}, v={self.v}, alpha={self.alpha})"


def window_weights(u: int, v: int, alpha: float = DEFAULT_ALPHA) -> WindowSpec:
    """Power-of-sine weights ``sin(k*pi/(v-u-1))**alpha`` for ``k`` in ``[0, v-u)``.

    ``alpha == 0`` gives the rectangular window (all ones, endpoints included).
    The second half mirrors the first so the weights are exactly symmetric.
    """
    n = v - u
    if n < 3:
        raise ValueError(f"window too small: v - u = {n} (need >= 3)")
    if not alpha >= 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    k = np.arange((n + 1) // 2, dtype=np.float64)
    half = np.sin(k * math.pi / (n - 1)) ** alpha
    w = np.concatenate([half, half[: n // 2][::-1]])
    w.setflags(write=False)
    return WindowSpec(int(u), int(v), float(alpha), w, float(w.sum()))


def _shifted_slice(values: np.ndarray, lo: int, hi: int) -> np.ndarray:
    """``values[lo:hi]`` with zeros wherever the index falls outside the array."""
    out = np.zeros(hi - lo, dtype=np.float64)
    a, b = max(lo, 0), min(hi, values.size)
    if a < b:
        out[a - lo : b - lo] = values[a:b]
    return out


def expectation(trace: BinTrace, window: WindowSpec, delta: int = 0) -> float:
    f = _shifted_slice(trace.values, window.u + delta, window.v + delta)
    return float(np.dot(window.weights, f)) / window.weight_sum


def cond_expectation(ex_xy: float, ex_y: float) -> Optional[float]:
    """``E[x|y] = E[x*y] / E[y]``; ``None`` when ``E[y] == 0``."""
    if ex_y == 0:
        return None
    return ex_xy / ex_y


def dep(ex_x: float, ex_y: float, ex_xy: float) -> float:
    """Thresholded dependency ``max(0, 1 - E[x]E[y]/E[xy])``; 0 when ``E[xy] == 0``."""
    if ex_xy <= 0:
        return 0.0
    return max(0.0, 1.0 - (ex_x * ex_y) / ex_xy)


def cov(ex_x: float, ex_y: float, ex_xy: float) -> float:
    """Thresholded covariance scaled onto ``[0, 1]``: ``max(0, 4(E[xy] - E[x]E[y]))``."""
    return max(0.0, 4.0 * (ex_xy - ex_x * ex_y))


@dataclass(frozen=True)
class PairMetrics:
    ex_x: float
    ex_y: float
    ex_xy: float
    dep: float
    cov: float
    cond_ex: Optional[float]


def pair_metrics(
    x: BinTrace, y: BinTrace, window: WindowSpec, delta: int = 0
) -> PairMetrics:
    """Metrics of ``x`` against ``y`` shifted by *delta* (``y(t + delta)``)."""
    w, s = window.weights, window.weight_sum
    xs = _shifted_slice(x.values, window.u, window.v)
    ys = _shifted_slice(y.values, window.u + delta, window.v + delta)
    ex_x = float(np.dot(w, xs)) / s
    ex_y = float(np.dot(w, ys)) / s
    ex_xy = float(np.dot(w, xs * ys)) / s
    return PairMetrics(
        ex_x,
        ex_y,
        ex_xy,
        dep(ex_x, ex_y, ex_xy),
        cov(ex_x, ex_y, ex_xy),
        cond_expectation(ex_xy, ex_y),
    )


def significant(m: PairMetrics, eps_dep: float = 0.0, eps_cov: float = 0.0) -> bool:
    if eps_dep < 0 or eps_cov < 0:
        raise ValueError("thresholds must be >= 0")
    return m.dep > eps_dep and m.cov > eps_cov


@dataclass(frozen=True)
class WindowMatrices:
    """All-rows x all-rows metrics for one window and a range of shifts.

    Rows are implied traces ordered measurement-major, kind-minor. Index
    ``[d, i, j]`` holds row ``i`` against row ``j`` shifted by ``deltas[d]``.
    """

    deltas: np.ndarray
    ex_x: np.ndarray  # (R,)
    ex_y: np.ndarray  # (D, R)
    ex_xy: np.ndarray  # (D, R, R)
    dep: np.ndarray  # (D, R, R)
    cov: np.ndarray  # (D, R, R)

    def cond_ex(self, d: int, i: int, j: int) -> Optional[float]:
        return cond_expectation(float(self.ex_xy[d, i, j]), float(self.ex_y[d, j]))


def window_matrices(
    levels: np.ndarray,
    window: WindowSpec,
    deltas: Sequence[int],
    kinds: Sequence[ImpliedKind],
) -> WindowMatrices:
    """Vectorised :func:`pair_metrics` over every row pair and shift."""
    deltas = np.asarray(sorted(deltas), dtype=np.int64)
    lo_d = int(deltas.min()) if deltas.size else 0
    hi_d = int(deltas.max()) if deltas.size else 0
    u, v = window.u, window.v
    n = v - u
    w, s = window.weights, window.weight_sum

    x = implied_block(levels, u, v, kinds).astype(np.float64)
    y = implied_block(levels, u + lo_d, v + hi_d, kinds).astype(np.float64)
    xw = x * w
    ex_x = xw.sum(axis=1) / s

    nd, r = deltas.size, x.shape[0]
    ex_y = np.empty((nd, r))
    ex_xy = np.empty((nd, r, r))
    for d, delta in enumerate(deltas):
        yd = y[:, delta - lo_d : delta - lo_d + n]
        if delta == 0:
            # same rows both sides: pin the exact symmetry BLAS blocking may break
            prod = (xw @ yd.T) / s
            ex_y[d] = ex_x
            ex_xy[d] = np.triu(prod) + np.triu(prod, 1).T
            continue
        ex_y[d] = (yd @ w) / s
        ex_xy[d] = (xw @ yd.T) / s

    prod = ex_x[None, :, None] * ex_y[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = 1.0 - prod / ex_xy
    dep_m = np.where(ex_xy > 0, np.maximum(phi, 0.0), 0.0)
    cov_m = np.maximum(4.0 * (ex_xy - prod), 0.0)
    return WindowMatrices(deltas, ex_x, ex_y, ex_xy, dep_m, cov_m)
