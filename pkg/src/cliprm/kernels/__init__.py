"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``CLIPRM_NUMBA`` is not set to ``0``. The flag is read once, at import.
"""
from __future__ import annotations

import os

from cliprm.kernels import _numpy as numpy_impl

numba_impl = None
if os.environ.get("CLIPRM_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off"):
    try:
        from cliprm.kernels import _numba as numba_impl
    except ImportError:  # pragma: no cover - numba is a declared dependency
        numba_impl = None

BACKEND = "numba" if numba_impl is not None else "numpy"
_impl = numba_impl if numba_impl is not None else numpy_impl

N_STATS = numpy_impl.N_STATS
STAT_NAMES = (
    "bias",
    "mean_r",
    "mean_g",
    "mean_b",
    "warm_mass",
    "warm_height",
    "warm_x",
    "warm_elongation",
    "warm_skew",
    "dark_mass",
    "dark_height",
    "dark_x",
)

fill_polygon = _impl.fill_polygon
fill_disc = _impl.fill_disc
fill_under_curve = _impl.fill_under_curve
blit_sprite = _impl.blit_sprite
image_stats = _impl.image_stats
resize_bilinear = _impl.resize_bilinear
regularized_rewards = _impl.regularized_rewards

__all__ = [
    "BACKEND",
    "N_STATS",
    "STAT_NAMES",
    "blit_sprite",
    "fill_disc",
    "fill_polygon",
    "fill_under_curve",
    "image_stats",
    "numba_impl",
    "numpy_impl",
    "regularized_rewards",
    "resize_bilinear",
]
