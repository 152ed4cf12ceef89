"""Vectorized numpy fallback for the hot evaluation kernels.

Same contracts as the compiled backend in ``_fast.pyx``; selected at import
time by ``simgap._kernels`` when the extension is unavailable. All inputs are
C-contiguous float64 arrays prepared by the callers.
"""

from __future__ import annotations

import numpy as np

NAME = "pure"


def mean_point_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Mean over samples of the pointwise Euclidean distance, (n,3) inputs."""
    return float(np.mean(np.sqrt(np.sum((a - b) ** 2, axis=1))))


def _relative_quat_parts(qa: np.ndarray, qb: np.ndarray):
    """w and vector-part norm of conj(qa) ⊗ qb, per row.

    Terms are grouped into antisymmetric pairs so identical rows cancel to an
    exact zero vector part.
    """
    aw, ax, ay, az = qa[:, 0], qa[:, 1], qa[:, 2], qa[:, 3]
    bw, bx, by, bz = qb[:, 0], qb[:, 1], qb[:, 2], qb[:, 3]
    w = aw * bw + ax * bx + ay * by + az * bz
    x = (aw * bx - ax * bw) + (az * by - ay * bz)
    y = (aw * by - ay * bw) + (ax * bz - az * bx)
    z = (aw * bz - az * bw) + (ay * bx - ax * by)
    return w, np.sqrt(x * x + y * y + z * z)


def mean_quat_angle(qa: np.ndarray, qb: np.ndarray) -> float:
    """Mean over samples of arccos(|qa . qb|), each term in [0, pi/2].

    Uses atan2 on the relative quaternion (|qa . qb| is its w component),
    which is exact for identical rows where arccos alone loses precision.
    """
    w, vec_norm = _relative_quat_parts(qa, qb)
    return float(np.mean(np.arctan2(vec_norm, np.abs(w))))


def _batch_relative_angles(qa: np.ndarray, qb: np.ndarray) -> np.ndarray:
    """Rotation angles |log(Ra^T Rb)| per row, via rotation matrices."""
    Ra = _quats_to_matrices(qa)
    Rb = _quats_to_matrices(qb)
    rel = np.einsum("nji,njk->nik", Ra, Rb)
    skew = 0.5 * np.stack(
        [
            rel[:, 2, 1] - rel[:, 1, 2],
            rel[:, 0, 2] - rel[:, 2, 0],
            rel[:, 1, 0] - rel[:, 0, 1],
        ],
        axis=1,
    )
    sin_angle = np.sqrt(np.sum(skew * skew, axis=1))
    cos_angle = 0.5 * (np.trace(rel, axis1=1, axis2=2) - 1.0)
    return np.arctan2(sin_angle, cos_angle)


def _quats_to_matrices(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    out = np.empty((q.shape[0], 3, 3))
    out[:, 0, 0] = 1.0 - 2.0 * (y * y + z * z)
    out[:, 0, 1] = 2.0 * (x * y - w * z)
    out[:, 0, 2] = 2.0 * (x * z + w * y)
    out[:, 1, 0] = 2.0 * (x * y + w * z)
    out[:, 1, 1] = 1.0 - 2.0 * (x * x + z * z)
    out[:, 1, 2] = 2.0 * (y * z - w * x)
    out[:, 2, 0] = 2.0 * (x * z - w * y)
    out[:, 2, 1] = 2.0 * (y * z + w * x)
    out[:, 2, 2] = 1.0 - 2.0 * (x * x + y * y)
    return out


def mean_pose_distance(
    pa: np.ndarray, qa: np.ndarray, pb: np.ndarray, qb: np.ndarray, weight: float
) -> float:
    """Mean over samples of sqrt(angle^2 + weight * ||pb - pa||^2).

    angle is the magnitude of the rotation-matrix logarithm of the relative
    rotation, evaluated batch-wise from the skew and trace parts (stable
    through 180 degrees, where the skew part vanishes and atan2 returns pi).
    """
    angles = _batch_relative_angles(qa, qb)
    sq_dist = np.sum((pb - pa) ** 2, axis=1)
    return float(np.mean(np.sqrt(angles * angles + weight * sq_dist)))


def forward_difference(x: np.ndarray, dt: float) -> np.ndarray:
    """Forward difference along axis 0 with the last row repeated, (n,k)->(n,k)."""
    out = np.empty_like(x)
    out[:-1] = (x[1:] - x[:-1]) / dt
    out[-1] = out[-2]
    return out


def row_norms(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(x * x, axis=1))


def abs_row_sums(x: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(x), axis=1)


def row_sums(x: np.ndarray) -> np.ndarray:
    return np.sum(x, axis=1)


def moving_mask(speed: np.ndarray, eps: float, min_run: int) -> np.ndarray:
    """Boolean mask of samples belonging to runs of >= min_run values >= eps."""
    n = speed.shape[0]
    out = np.zeros(n, dtype=bool)
    above = speed >= eps
    k = 0
    while k < n:
        if above[k]:
            start = k
            while k < n and above[k]:
                k += 1
            if k - start >= min_run:
                out[start:k] = True
        else:
            k += 1
    return out
