"""Hot numerical kernels with compiled and pure backends.

The compiled Cython extension (``_fast``) is preferred; the vectorized numpy
implementation (``pure``) is the fallback when the extension was not built.
Set ``SIMGAP_PURE_PYTHON=1`` to force the fallback. ``BACKEND`` names the
backend in use.
"""

from __future__ import annotations

import os

from . import pure as _pure

if os.environ.get("SIMGAP_PURE_PYTHON"):
    _impl = _pure
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pure

BACKEND: str = _impl.NAME

mean_point_distance = _impl.mean_point_distance
mean_quat_angle = _impl.mean_quat_angle
mean_pose_distance = _impl.mean_pose_distance
forward_difference = _impl.forward_difference
row_norms = _impl.row_norms
abs_row_sums = _impl.abs_row_sums
row_sums = _impl.row_sums
moving_mask = _impl.moving_mask

__all__ = [
    "BACKEND",
    "mean_point_distance",
    "mean_quat_angle",
    "mean_pose_distance",
    "forward_difference",
    "row_norms",
    "abs_row_sums",
    "row_sums",
    "moving_mask",
]
