"""Rotation and quaternion utilities.

Quaternions are stored as (w, x, y, z) with the Hamilton product convention;
rotation matrices act on column vectors. Most helpers accept plain sequences
and return float64 numpy arrays.
"""

from __future__ import annotations

import math

import numpy as np

# Skip renormalization when the norm is already unit to print precision, so
# that writing and re-reading a recording does not perturb its quaternions.
UNIT_NORM_SKIP_TOL = 1e-8


def quat_normalize(q, skip_tol: float = 1e-12) -> np.ndarray:
    """Return q scaled to unit norm. Norms within skip_tol of 1 are kept bit-exact."""
    q = np.asarray(q, dtype=float)
    norm = math.sqrt(float(np.dot(q, q)))
    if norm == 0.0 or not math.isfinite(norm):
        raise ValueError("cannot normalize a zero or non-finite quaternion")
    if abs(norm - 1.0) <= skip_tol:
        return q.copy()
    return q / norm


def quat_conjugate(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_multiply(a, b) -> np.ndarray:
    """Hamilton product a ⊗ b."""
    aw, ax, ay, az = np.asarray(a, dtype=float)
    bw, bx, by, bz = np.asarray(b, dtype=float)
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_rotate(q, v) -> np.ndarray:
    """Rotate 3-vector v by unit quaternion q."""
    w, x, y, z = np.asarray(q, dtype=float)
    vx, vy, vz = np.asarray(v, dtype=float)
    # q * (0, v) * conj(q), expanded
    tx = 2.0 * (y * vz - z * vy)
    ty = 2.0 * (z * vx - x * vz)
    tz = 2.0 * (x * vy - y * vx)
    return np.array(
        [
            vx + w * tx + (y * tz - z * ty),
            vy + w * ty + (z * tx - x * tz),
            vz + w * tz + (x * ty - y * tx),
        ]
    )


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    norm = math.sqrt(float(np.dot(axis, axis)))
    if norm == 0.0:
        raise ValueError("rotation axis must be nonzero")
    half = 0.5 * float(angle)
    s = math.sin(half) / norm
    return np.array([math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s])


def quat_to_matrix(q) -> np.ndarray:
    w, x, y, z = np.asarray(q, dtype=float)
    xx, yy, zz = x * x, y * y, z * z
    wx, wy, wz = w * x, w * y, w * z
    xy, xz, yz = x * y, x * z, y * z
    return np.array(
        [
            [1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)],
            [2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)],
            [2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)],
        ]
    )


def quat_angle(qa, qb) -> float:
    """Angle in [0, pi] of the relative rotation between two unit quaternions.

    Computed as 2*atan2(||vec||, |w|) of the relative quaternion, which is
    exact for identical inputs and stable through 180 degrees.
    """
    rel = quat_multiply(quat_conjugate(qa), qb)
    vec_norm = math.sqrt(float(rel[1] ** 2 + rel[2] ** 2 + rel[3] ** 2))
    return 2.0 * math.atan2(vec_norm, abs(float(rel[0])))


def rotation_log(R) -> np.ndarray:
    """Rotation-vector logarithm of a rotation matrix.

    Returns axis*angle with angle in [0, pi]. The angle comes from
    atan2(sin, cos) built from the skew and trace parts; at angles near pi
    (where the skew part vanishes) the axis is recovered from the symmetric
    part of R, taking square roots of the diagonal and fixing signs from the
    off-diagonal sums.
    """
    R = np.asarray(R, dtype=float)
    skew = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    sin_angle = math.sqrt(float(np.dot(skew, skew)))
    cos_angle = 0.5 * (float(np.trace(R)) - 1.0)
    angle = math.atan2(sin_angle, cos_angle)
    if angle < 1e-12:
        return np.zeros(3)
    if sin_angle > 1e-6:
        return skew * (angle / sin_angle)
    # Near pi: R ~ 2*a*a^T - I, so the diagonal gives |axis| components.
    diag = np.clip((np.diag(R) + 1.0) * 0.5, 0.0, None)
    axis = np.sqrt(diag)
    i = int(np.argmax(axis))
    if axis[i] == 0.0:
        raise ValueError("degenerate rotation matrix")
    for j in range(3):
        if j != i:
            axis[j] = math.copysign(axis[j], R[i, j] + R[j, i])
    axis /= math.sqrt(float(np.dot(axis, axis)))
    # Keep the sign consistent with the (possibly tiny) skew part.
    if sin_angle > 0.0 and float(np.dot(axis, skew)) < 0.0:
        axis = -axis
    return axis * angle


def wrap_angle(x: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    wrapped = math.fmod(x + math.pi, 2.0 * math.pi)
    if wrapped < 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


# Pitch magnitudes within 1e-6 rad of pi/2 collapse roll into yaw.
GIMBAL_LOCK_COS = math.cos(1e-6)


def quat_to_euler_xyz(q) -> tuple[float, float, float]:
    """Intrinsic X-Y-Z Euler angles (roll, pitch, yaw) of a unit quaternion.

    Decomposes R = Rx(roll) @ Ry(pitch) @ Rz(yaw). At gimbal lock
    (|pitch| ~ pi/2) the x/z split is ambiguous; all of it is assigned to yaw.
    """
    R = quat_to_matrix(quat_normalize(q, skip_tol=UNIT_NORM_SKIP_TOL))
    sp = float(R[0, 2])
    if abs(sp) >= GIMBAL_LOCK_COS:
        pitch = math.copysign(0.5 * math.pi, sp)
        roll = 0.0
        yaw = math.atan2(float(R[1, 0]), float(R[1, 1]))
    else:
        pitch = math.asin(max(-1.0, min(1.0, sp)))
        roll = math.atan2(-float(R[1, 2]), float(R[2, 2]))
        yaw = math.atan2(-float(R[0, 1]), float(R[0, 0]))
    return wrap_angle(roll), wrap_angle(pitch), wrap_angle(yaw)


def euler_xyz_to_quat(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Quaternion for intrinsic X-Y-Z Euler angles."""
    qx = np.array([math.cos(0.5 * roll), math.sin(0.5 * roll), 0.0, 0.0])
    qy = np.array([math.cos(0.5 * pitch), 0.0, math.sin(0.5 * pitch), 0.0])
    qz = np.array([math.cos(0.5 * yaw), 0.0, 0.0, math.sin(0.5 * yaw)])
    return quat_multiply(quat_multiply(qx, qy), qz)
