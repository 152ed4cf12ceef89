"""Per-task comparison metrics and their assembly into a metric set.

All error metrics compare the per-source mean trajectories sample by sample
and divide by the shared number of points, so the two recordings must be
aligned first. Arm-only tasks produce the 15 arm metrics; tasks with a
manipulable object add 8 more for a total of 23. Signed errors keep their
sign here; report aggregation takes magnitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels as kernels
from .distributions import final_pose_distances
from .errors import AlignmentError, DegenerateInputError
from .trajectory import (
    JointTorqueSeries,
    PoseSeries,
    RepeatSet,
    TaskRecording,
    WrenchSeries,
    align_pair,
    derive_velocity,
)

ARM_METRIC_NAMES = (
    "euclidean_error",
    "rotation_error",
    "pose_error",
    "velocity_max",
    "velocity_error",
    "accel_max",
    "decel_max",
    "accel_error",
    "torque_min",
    "torque_max",
    "torque_error",
    "force_max",
    "force_error",
    "moment_max",
    "moment_error",
)
OBJECT_METRIC_NAMES = (
    "obj_velocity_max",
    "obj_velocity_avg",
    "obj_accel_max",
    "obj_decel_max",
    "obj_accel_avg",
    "moving_time",
    "obj_translation_distance",
    "obj_rotation_distance",
)


@dataclass(frozen=True)
class PoseMetricConfig:
    """Length-scale weight balancing translation against rotation in the
    combined pose distance."""

    r: float = 37.0

    def __post_init__(self):
        if not self.r > 0.0:
            raise ValueError("r must be positive")


@dataclass(frozen=True)
class StaticnessConfig:
    """What counts as 'moving': speed >= eps_static sustained for window samples.

    Defaults sit at motion-capture noise scale; the benchmark leaves the
    notion of static unquantified, so both knobs are configurable.
    """

    eps_static: float = 0.005
    window: int = 3

    def __post_init__(self):
        if self.eps_static <= 0.0 or self.window < 1:
            raise ValueError("eps_static must be > 0 and window >= 1")


@dataclass(frozen=True)
class MovingWindow:
    """Inclusive sample-index range of detected motion; start is None when none."""

    start: int | None
    stop: int | None

    @property
    def empty(self) -> bool:
        return self.start is None


class MovingTimeResult(NamedTuple):
    moving_time: float
    window: MovingWindow


class VelocityStats(NamedTuple):
    velocity_max: float
    velocity_error: float


class ObjectVelocityStats(NamedTuple):
    obj_velocity_max: float
    obj_velocity_avg: float


class AccelerationStats(NamedTuple):
    accel_max: float
    decel_max: float
    accel_error: float
    obj_accel_max: float | None = None
    obj_decel_max: float | None = None
    obj_accel_avg: float | None = None


class TorqueStats(NamedTuple):
    torque_min: float
    torque_max: float
    torque_error: float


class WrenchStats(NamedTuple):
    force_max: float
    force_error: float
    moment_max: float
    moment_error: float


@dataclass(frozen=True)
class MetricSet:
    """The 15- or 23-entry metric vector for one task comparison."""

    task_id: int
    euclidean_error: float
    rotation_error: float
    pose_error: float
    velocity_max: float
    velocity_error: float
    accel_max: float
    decel_max: float
    accel_error: float
    torque_min: float
    torque_max: float
    torque_error: float
    force_max: float
    force_error: float
    moment_max: float
    moment_error: float
    obj_velocity_max: float | None = None
    obj_velocity_avg: float | None = None
    obj_accel_max: float | None = None
    obj_decel_max: float | None = None
    obj_accel_avg: float | None = None
    moving_time: float | None = None
    obj_translation_distance: float | None = None
    obj_rotation_distance: float | None = None

    def __post_init__(self):
        arm = [getattr(self, name) for name in ARM_METRIC_NAMES]
        if not all(math.isfinite(v) for v in arm):
            raise ValueError("arm metrics must be finite")
        obj = [getattr(self, name) for name in OBJECT_METRIC_NAMES]
        present = [v is not None for v in obj]
        if any(present) and not all(present):
            raise ValueError("object metrics must be all present or all absent")
        if all(present) and not all(math.isfinite(v) for v in obj):
            raise ValueError("object metrics must be finite")
        if self.torque_max < self.torque_min:
            raise ValueError("torque_max must be >= torque_min")

    @property
    def has_object(self) -> bool:
        return self.obj_velocity_max is not None

    def entries(self) -> dict[str, float]:
        """Populated metrics in canonical order (15 arm-only, 23 with object)."""
        names = ARM_METRIC_NAMES + (OBJECT_METRIC_NAMES if self.has_object else ())
        return {name: getattr(self, name) for name in names}


@dataclass(frozen=True)
class TaskEvaluation:
    """MetricSet plus the extra per-task values kept for the appendix."""

    metrics: MetricSet
    extras: dict

    def __post_init__(self):
        object.__setattr__(self, "extras", dict(self.extras))


def _check_aligned(a, b, min_len: int = 1) -> int:
    if len(a) != len(b):
        raise AlignmentError(f"series are not aligned: {len(a)} vs {len(b)} samples")
    if len(a) < min_len:
        raise DegenerateInputError(f"need at least {min_len} samples")
    return len(a)


def _c(arr: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(arr, dtype=float)


def euclidean_error(d: PoseSeries, s: PoseSeries) -> float:
    """Mean pointwise Euclidean distance between positions [m]."""
    _check_aligned(d, s)
    return float(kernels.mean_point_distance(_c(d.positions), _c(s.positions)))


def rotation_error(d: PoseSeries, s: PoseSeries) -> float:
    """Mean arccos(|q_d . q_s|) [rad]; each term lies in [0, pi/2]."""
    _check_aligned(d, s)
    return float(kernels.mean_quat_angle(_c(d.orientations), _c(s.orientations)))


def pose_error(d: PoseSeries, s: PoseSeries, cfg: PoseMetricConfig = PoseMetricConfig()) -> float:
    """Mean combined rigid-body distance sqrt(angle^2 + r*||b_s - b_d||^2).

    angle is the magnitude of the rotation-vector logarithm of the relative
    rotation between the two orientations at each sample.
    """
    _check_aligned(d, s)
    return float(
        kernels.mean_pose_distance(
            _c(d.positions), _c(d.orientations), _c(s.positions), _c(s.orientations), cfg.r
        )
    )


def _speed(series: PoseSeries) -> np.ndarray:
    return np.asarray(kernels.row_norms(_c(derive_velocity(series))))


def _speed_derivative(speed: np.ndarray, dt: float) -> np.ndarray:
    out = np.asarray(kernels.forward_difference(_c(speed[:, np.newaxis]), dt))
    return out[:, 0]


def velocity_stats_arm(d: PoseSeries, s: PoseSeries) -> VelocityStats:
    """Simulation peak speed and the signed mean speed error (dataset - simulation)."""
    _check_aligned(d, s, min_len=2)
    speed_d = _speed(d)
    speed_s = _speed(s)
    return VelocityStats(
        velocity_max=float(np.max(speed_s)),
        velocity_error=float(np.mean(speed_d - speed_s)),
    )


def moving_time(obj: PoseSeries, cfg: StaticnessConfig = StaticnessConfig()) -> MovingTimeResult:
    """Duration from the first moving sample to the last [s].

    A sample is moving when its speed stays >= eps_static for at least
    ``window`` consecutive samples, which suppresses isolated noise spikes.
    Returns 0 and an empty window when nothing qualifies.
    """
    speed = _speed(obj)
    mask = np.asarray(kernels.moving_mask(_c(speed), cfg.eps_static, cfg.window))
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return MovingTimeResult(0.0, MovingWindow(None, None))
    start, stop = int(idx[0]), int(idx[-1])
    duration = float(obj.t[stop] - obj.t[start])
    return MovingTimeResult(duration, MovingWindow(start, stop))


def velocity_stats_object(obj: PoseSeries, window: MovingWindow) -> ObjectVelocityStats:
    """Peak speed over all samples and mean speed over the moving window.

    Both are 0 when the object never moves.
    """
    if window.empty:
        return ObjectVelocityStats(0.0, 0.0)
    speed = _speed(obj)
    return ObjectVelocityStats(
        obj_velocity_max=float(np.max(speed)),
        obj_velocity_avg=float(np.mean(speed[window.start : window.stop + 1])),
    )


def acceleration_stats(
    d: PoseSeries,
    s: PoseSeries,
    obj: PoseSeries | None = None,
    window: MovingWindow | None = None,
) -> AccelerationStats:
    """Extremes and signed error of d(speed)/dt for the arm, plus object analogues.

    decel_max is |min d(speed)/dt|. The object average uses |d(speed)/dt| over
    the moving window; all object values are 0 when the object never moves.
    """
    _check_aligned(d, s, min_len=2)
    accel_d = _speed_derivative(_speed(d), d.dt)
    accel_s = _speed_derivative(_speed(s), s.dt)
    stats = AccelerationStats(
        accel_max=float(np.max(accel_s)),
        decel_max=abs(float(np.min(accel_s))),
        accel_error=float(np.mean(accel_d - accel_s)),
    )
    if obj is None:
        return stats
    if window is None:
        window = moving_time(obj).window
    obj_max, obj_decel, obj_avg = _object_accel_stats(obj, window)
    return stats._replace(obj_accel_max=obj_max, obj_decel_max=obj_decel, obj_accel_avg=obj_avg)


def _object_accel_stats(obj: PoseSeries, window: MovingWindow) -> tuple[float, float, float]:
    if window.empty:
        return 0.0, 0.0, 0.0
    accel = _speed_derivative(_speed(obj), obj.dt)
    return (
        float(np.max(accel)),
        abs(float(np.min(accel))),
        float(np.mean(np.abs(accel[window.start : window.stop + 1]))),
    )


def torque_stats(d: JointTorqueSeries, s: JointTorqueSeries) -> TorqueStats:
    """Extremes of the simulation's summed |torque| and the signed mean error.

    The per-sample aggregate is the sum of absolute torques across all 6
    joints; the error is mean(aggregate_dataset - aggregate_simulation).
    """
    _check_aligned(d, s)
    agg_d = np.asarray(kernels.abs_row_sums(_c(d.torques)))
    agg_s = np.asarray(kernels.abs_row_sums(_c(s.torques)))
    return TorqueStats(
        torque_min=float(np.min(agg_s)),
        torque_max=float(np.max(agg_s)),
        torque_error=float(np.mean(agg_d - agg_s)),
    )


def wrench_stats(d: WrenchSeries, s: WrenchSeries) -> WrenchStats:
    """Peak component sums of the simulation wrench and signed mean errors.

    Uses plain component sums (Fx+Fy+Fz, Mx+My+Mz), not norms; the error is
    mean(sum_dataset - sum_simulation) per sample.
    """
    _check_aligned(d, s)
    force_d = np.asarray(kernels.row_sums(_c(d.forces)))
    force_s = np.asarray(kernels.row_sums(_c(s.forces)))
    moment_d = np.asarray(kernels.row_sums(_c(d.moments)))
    moment_s = np.asarray(kernels.row_sums(_c(s.moments)))
    return WrenchStats(
        force_max=float(np.max(force_s)),
        force_error=float(np.mean(force_d - force_s)),
        moment_max=float(np.max(moment_s)),
        moment_error=float(np.mean(moment_d - moment_s)),
    )


def _dataset_side_extras(
    d_ee: PoseSeries,
    d_torques: JointTorqueSeries,
    d_wrench: WrenchSeries,
    dt: float,
) -> dict:
    speed = np.asarray(kernels.row_norms(_c(derive_velocity(d_ee))))
    accel = _speed_derivative(speed, dt)
    agg = np.asarray(kernels.abs_row_sums(_c(d_torques.torques)))
    return {
        "velocity_max_dataset": float(np.max(speed)),
        "accel_max_dataset": float(np.max(accel)),
        "decel_max_dataset": abs(float(np.min(accel))),
        "torque_min_dataset": float(np.min(agg)),
        "torque_max_dataset": float(np.max(agg)),
        "force_max_dataset": float(np.max(np.asarray(kernels.row_sums(_c(d_wrench.forces))))),
        "moment_max_dataset": float(np.max(np.asarray(kernels.row_sums(_c(d_wrench.moments))))),
    }


def evaluate_task(
    dataset: RepeatSet,
    sim: RepeatSet,
    pose_cfg: PoseMetricConfig = PoseMetricConfig(),
    static_cfg: StaticnessConfig = StaticnessConfig(),
) -> TaskEvaluation:
    """Full comparison of one task: MetricSet plus appendix extras.

    Arm metrics compare the per-source mean trajectories; object kinematics
    are computed on the simulation mean object trajectory, with the dataset
    analogues kept in the extras; final-pose distribution distances come from
    the per-repeat finals.
    """
    if dataset.task_id != sim.task_id:
        raise AlignmentError(
            f"task mismatch: dataset task {dataset.task_id} vs simulation task {sim.task_id}"
        )
    d_mean, s_mean = align_pair(dataset.mean, sim.mean)
    d_ee, s_ee = d_mean.end_effector, s_mean.end_effector
    dt = 1.0 / d_mean.rate_hz

    vel = velocity_stats_arm(d_ee, s_ee)
    d_obj = d_mean.object_series
    s_obj = s_mean.object_series

    values: dict[str, float | None] = {
        "euclidean_error": euclidean_error(d_ee, s_ee),
        "rotation_error": rotation_error(d_ee, s_ee),
        "pose_error": pose_error(d_ee, s_ee, pose_cfg),
        "velocity_max": vel.velocity_max,
        "velocity_error": vel.velocity_error,
    }
    extras = _dataset_side_extras(d_ee, d_mean.joint_torques, d_mean.wrench, dt)
    extras["n_points"] = d_mean.n_samples

    if (d_obj is None) != (s_obj is None):
        raise AlignmentError("object tracked in only one of dataset and simulation")

    window = None
    if s_obj is not None:
        mt = moving_time(s_obj, static_cfg)
        window = mt.window
        obj_vel = velocity_stats_object(s_obj, window)
        comparison = final_pose_distances(dataset, sim)
        d_mt = moving_time(d_obj, static_cfg)
        d_obj_vel = velocity_stats_object(d_obj, d_mt.window)
        d_obj_accel = _object_accel_stats(d_obj, d_mt.window)
        values.update(
            {
                "obj_velocity_max": obj_vel.obj_velocity_max,
                "obj_velocity_avg": obj_vel.obj_velocity_avg,
                "moving_time": mt.moving_time,
                "obj_translation_distance": comparison.translation_distance,
                "obj_rotation_distance": comparison.rotation_distance,
            }
        )
        extras.update(
            {
                "moving_window_sim": None if window.empty else [window.start, window.stop],
                "moving_time_dataset": d_mt.moving_time,
                "moving_window_dataset": None
                if d_mt.window.empty
                else [d_mt.window.start, d_mt.window.stop],
                "obj_velocity_max_dataset": d_obj_vel.obj_velocity_max,
                "obj_velocity_avg_dataset": d_obj_vel.obj_velocity_avg,
                "obj_accel_max_dataset": d_obj_accel[0],
                "obj_decel_max_dataset": d_obj_accel[1],
                "obj_accel_avg_dataset": d_obj_accel[2],
                "translation_regularization": comparison.translation_fit.regularization,
                "rotation_regularization": comparison.rotation_fit.regularization,
                "per_repeat_translation_distance": [
                    float(v) for v in comparison.per_repeat_translation
                ],
                "per_repeat_rotation_distance": [
                    float(v) for v in comparison.per_repeat_rotation
                ],
            }
        )

    acc = acceleration_stats(d_ee, s_ee, obj=s_obj, window=window)
    values.update(
        {
            "accel_max": acc.accel_max,
            "decel_max": acc.decel_max,
            "accel_error": acc.accel_error,
        }
    )
    if s_obj is not None:
        values.update(
            {
                "obj_accel_max": acc.obj_accel_max,
                "obj_decel_max": acc.obj_decel_max,
                "obj_accel_avg": acc.obj_accel_avg,
            }
        )

    tq = torque_stats(d_mean.joint_torques, s_mean.joint_torques)
    wr = wrench_stats(d_mean.wrench, s_mean.wrench)
    values.update(tq._asdict())
    values.update(wr._asdict())

    metrics = MetricSet(task_id=dataset.task_id, **values)
    return TaskEvaluation(metrics=metrics, extras=extras)


def compute_metric_set(
    dataset: RepeatSet,
    sim: RepeatSet,
    pose_cfg: PoseMetricConfig = PoseMetricConfig(),
    static_cfg: StaticnessConfig = StaticnessConfig(),
) -> MetricSet:
    """The 15- or 23-entry metric vector for one task comparison."""
    return evaluate_task(dataset, sim, pose_cfg, static_cfg).metrics
