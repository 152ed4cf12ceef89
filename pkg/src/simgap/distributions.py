"""Final-pose distributions: multivariate normal fits and Mahalanobis distances.

The resting pose of a manipulable object is not averaged across repeats;
instead the dataset's 20 final poses define normal distributions (Cartesian
position and intrinsic X-Y-Z Euler rotation) and the simulated final pose is
scored by its Mahalanobis distance to each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError, ValidationError
from .geometry import quat_to_euler_xyz
from .trajectory import RepeatSet

# Smallest eigenvalue floor; near-deterministic repeats otherwise produce a
# singular covariance.
LAMBDA_FLOOR = 1e-9
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class EulerTriple:
    """Intrinsic X-Y-Z Euler angles, each wrapped to [-pi, pi)."""

    roll: float
    pitch: float
    yaw: float

    def __post_init__(self):
        for name, value in (("roll", self.roll), ("pitch", self.pitch), ("yaw", self.yaw)):
            if not -math.pi <= value < math.pi:
                raise ValueError(f"{name} {value} outside [-pi, pi)")

    def as_array(self) -> np.ndarray:
        return np.array([self.roll, self.pitch, self.yaw])


@dataclass(frozen=True, eq=False)
class GaussianFit:
    """Sample mean and (regularized) unbiased covariance of k-vectors."""

    mean: np.ndarray
    covariance: np.ndarray
    regularization: float = 0.0

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float)
        cov = np.array(self.covariance, dtype=float)
        k = mean.shape[0]
        if cov.shape != (k, k):
            raise ValueError(f"covariance shape {cov.shape} does not match mean length {k}")
        if float(np.max(np.abs(cov - cov.T), initial=0.0)) > SYMMETRY_TOL:
            raise ValueError("covariance is not symmetric")
        if float(np.min(np.linalg.eigvalsh(cov))) <= 0.0:
            raise ValueError("covariance is not positive definite; regularize first")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def fit_multivariate_normal(samples: Sequence[Sequence[float]] | np.ndarray) -> GaussianFit:
    """Fit mean and unbiased covariance (divisor n-1) to row-vector samples.

    If the smallest eigenvalue falls below the floor, lambda * I is added with
    lambda = max(LAMBDA_FLOOR, 1e-9 * trace / k) and recorded on the fit.
    """
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2:
        raise DegenerateInputError("need at least 2 samples of equal dimension")
    n, k = data.shape
    mean = np.mean(data, axis=0)
    centered = data - mean
    cov = centered.T @ centered / (n - 1)
    cov = 0.5 * (cov + cov.T)
    lam = 0.0
    if float(np.min(np.linalg.eigvalsh(cov))) < LAMBDA_FLOOR:
        lam = max(LAMBDA_FLOOR, 1e-9 * float(np.trace(cov)) / k)
        cov = cov + lam * np.eye(k)
    return GaussianFit(mean=mean, covariance=cov, regularization=lam)


def mahalanobis(fit: GaussianFit, x: Sequence[float] | np.ndarray) -> float:
    """sqrt((x-mean)^T Sigma^-1 (x-mean)) via a Cholesky solve, no explicit inverse."""
    x = np.asarray(x, dtype=float)
    if x.shape != fit.mean.shape:
        raise ValueError(f"query shape {x.shape} does not match fit dimension {fit.dim}")
    diff = x - fit.mean
    chol = np.linalg.cholesky(fit.covariance)
    y = np.linalg.solve(chol, diff)
    return float(np.sqrt(np.dot(y, y)))


def quaternion_to_euler(q) -> EulerTriple:
    """Intrinsic X-Y-Z Euler angles of a unit quaternion.

    At gimbal lock (|pitch| within ~1e-6 of pi/2) all rotation about the
    lock axis goes to yaw and roll is set to 0.
    """
    roll, pitch, yaw = quat_to_euler_xyz(q)
    return EulerTriple(roll, pitch, yaw)


def circular_mean(angles: np.ndarray) -> float:
    """Mean direction of angles in radians (atan2 of averaged sin/cos)."""
    s = float(np.mean(np.sin(angles)))
    c = float(np.mean(np.cos(angles)))
    if s == 0.0 and c == 0.0:
        raise DegenerateInputError("circular mean undefined for perfectly spread angles")
    return math.atan2(s, c)


def unwrap_to_reference(angles: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Map each angle into the branch within pi of the per-axis reference.

    A linear Gaussian on circular data is only sensible once all samples live
    on one branch; repeats of a single task are concentrated enough for that.
    """
    angles = np.asarray(angles, dtype=float)
    delta = (angles - reference + math.pi) % (2.0 * math.pi) - math.pi
    return reference + delta


def _final_positions(repeat_set: RepeatSet) -> np.ndarray:
    series = [rec.object_series for rec in repeat_set.repeats]
    if any(s is None for s in series):
        raise ValidationError(f"task {repeat_set.task_id} has no tracked object")
    return np.stack([s.positions[-1] for s in series])


def _final_eulers(repeat_set: RepeatSet) -> np.ndarray:
    series = [rec.object_series for rec in repeat_set.repeats]
    if any(s is None for s in series):
        raise ValidationError(f"task {repeat_set.task_id} has no tracked object")
    return np.stack([quaternion_to_euler(s.orientations[-1]).as_array() for s in series])


@dataclass(frozen=True, eq=False)
class FinalPoseComparison:
    """Distances of the simulated final object pose from the dataset distributions."""

    translation_fit: GaussianFit
    rotation_fit: GaussianFit
    translation_distance: float
    rotation_distance: float
    per_repeat_translation: np.ndarray
    per_repeat_rotation: np.ndarray


def final_pose_distances(dataset: RepeatSet, sim: RepeatSet) -> FinalPoseComparison:
    """Fit dataset final-pose distributions and evaluate the simulation.

    Translation uses the raw final positions. Rotation uses Euler triples
    mapped into the branch within pi of the dataset's per-axis circular mean,
    so samples straddling +-pi fit a single concentrated cluster. Distances
    are evaluated at the simulation mean final pose (mean of the per-repeat
    finals in the same space as the fit); per-repeat distances are kept for
    the appendix.
    """
    d_pos = _final_positions(dataset)
    d_euler = _final_eulers(dataset)
    reference = np.array([circular_mean(d_euler[:, j]) for j in range(3)])
    d_euler = unwrap_to_reference(d_euler, reference)

    translation_fit = fit_multivariate_normal(d_pos)
    rotation_fit = fit_multivariate_normal(d_euler)

    s_pos = _final_positions(sim)
    s_euler = unwrap_to_reference(_final_eulers(sim), reference)
    per_repeat_translation = np.array([mahalanobis(translation_fit, p) for p in s_pos])
    per_repeat_rotation = np.array([mahalanobis(rotation_fit, e) for e in s_euler])

    return FinalPoseComparison(
        translation_fit=translation_fit,
        rotation_fit=rotation_fit,
        translation_distance=mahalanobis(translation_fit, np.mean(s_pos, axis=0)),
        rotation_distance=mahalanobis(rotation_fit, np.mean(s_euler, axis=0)),
        per_repeat_translation=per_repeat_translation,
        per_repeat_rotation=per_repeat_rotation,
    )
