"""Map a point of the unit square to an 8-bit RGB colour.

Distance from the origin fades white towards black; the angle about the
diagonal tints the colour (green below it, blue above it, grey on it).
"""

from __future__ import annotations

import math
from typing import NamedTuple

import mpmath

DEFAULT_GAMMA = 1.0


class Rgb8(NamedTuple):
    red: int
    green: int
    blue: int

    def hex(self) -> str:
        return f"#{self.red:02x}{self.green:02x}{self.blue:02x}"


def map2d(a: float, b: float, gamma: float = DEFAULT_GAMMA) -> Rgb8:
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise ValueError(f"map2d inputs must lie in [0, 1], got ({a}, {b})")
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    # clamp: corner radius can round a hair above sqrt(2)
    theta = max(0.0, 1.0 - math.hypot(a, b) / math.sqrt(2.0)) ** gamma
    # angle above the diagonal, arctan(b/a) - pi/4, written so that swapping
    # a and b negates it exactly; a=0 gives +pi/4 (arctan(b/a) -> pi/2)
    tilt = math.atan2(b - a, b + a)
    channels = [255 * theta ** e for e in (1.0, max(0.0, -tilt) + 1, max(0.0, tilt) + 1)]
    if any(abs(c - round(c)) < _NEAR for c in channels):
        channels = _exact_channels(a, b, gamma)
    return Rgb8(*(math.floor(c) for c in channels))


# float error in 255*theta**e stays far below this; within it, floor() needs more digits
_NEAR = 1e-6


def _exact_channels(a: float, b: float, gamma: float) -> list:
    with mpmath.workdps(50):
        a, b = mpmath.mpf(a), mpmath.mpf(b)
        base = max(mpmath.mpf(0), 1 - mpmath.sqrt(a * a + b * b) / mpmath.sqrt(2))
        theta = base ** mpmath.mpf(gamma)
        tilt = mpmath.atan2(b - a, b + a)
        exps = (mpmath.mpf(1), max(0, -tilt) + 1, max(0, tilt) + 1)
        return [mpmath.floor(255 * theta**e) for e in exps]
