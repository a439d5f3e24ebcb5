"""Deterministic float formatting for every text output."""

import math


def fmt(x) -> str:
    """Shortest round-trip decimal for ``x``; integral values drop the ``.0``.

    ``-0.0`` prints as ``0`` so golden files do not depend on signed-zero noise.
    """
    x = float(x)
    if x == 0.0:
        return "0"
    if not math.isfinite(x):
        raise ValueError(f"refusing to format non-finite value {x!r}")
    s = repr(x)
    if s.endswith(".0"):
        s = s[:-2]
    return s
