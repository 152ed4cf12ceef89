import math

import numpy as np
import pytest

import oracles
from conftest import static_recording
from simgap import distributions
from simgap.distributions import (
    EulerTriple,
    GaussianFit,
    final_pose_distances,
    fit_multivariate_normal,
    mahalanobis,
    quaternion_to_euler,
)
from simgap.errors import DegenerateInputError, ValidationError
from simgap.geometry import euler_xyz_to_quat, quat_angle, quat_from_axis_angle
from simgap.trajectory import PoseSeries, RepeatSet, TaskRecording, replace_metadata


class TestFit:
    def test_identical_samples_fully_regularized(self):
        samples = np.tile([0.3, -0.2, 1.0], (20, 1))
        fit = fit_multivariate_normal(samples)
        np.testing.assert_allclose(fit.mean, [0.3, -0.2, 1.0])
        assert fit.regularization > 0.0
        np.testing.assert_allclose(
            fit.covariance, fit.regularization * np.eye(3), atol=1e-30
        )

    def test_hand_computable_2d_case(self):
        samples = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
        fit = fit_multivariate_normal(samples)
        np.testing.assert_allclose(fit.mean, [0.0, 0.0])
        np.testing.assert_allclose(fit.covariance, np.diag([2.0 / 3.0, 2.0 / 3.0]), atol=1e-15)
        assert fit.regularization == 0.0

    def test_matches_textbook_covariance_loop(self, rng):
        samples = rng.normal(size=(20, 3))
        fit = fit_multivariate_normal(samples)
        mean, cov = oracles.covariance(samples.tolist())
        np.testing.assert_allclose(fit.mean, mean, atol=1e-10)
        np.testing.assert_allclose(fit.covariance, cov, atol=1e-10)

    def test_translation_invariance_of_covariance(self, rng):
        samples = rng.normal(size=(20, 3))
        shifted = fit_multivariate_normal(samples + [5.0, -3.0, 0.5])
        original = fit_multivariate_normal(samples)
        np.testing.assert_allclose(shifted.covariance, original.covariance, atol=1e-12)

    def test_too_few_samples(self):
        with pytest.raises(DegenerateInputError):
            fit_multivariate_normal([[1.0, 2.0]])

    def test_regularization_never_silent(self, rng):
        healthy = fit_multivariate_normal(rng.normal(size=(20, 3)))
        assert healthy.regularization == 0.0
        degenerate = fit_multivariate_normal(np.zeros((5, 3)))
        assert degenerate.regularization > 0.0

    def test_fit_invariants_enforced(self):
        with pytest.raises(ValueError, match="symmetric"):
            GaussianFit(np.zeros(2), np.array([[1.0, 0.5], [0.2, 1.0]]))
        with pytest.raises(ValueError, match="positive definite"):
            GaussianFit(np.zeros(2), np.array([[1.0, 0.0], [0.0, 0.0]]))


class TestMahalanobis:
    def test_zero_at_mean(self, rng):
        fit = fit_multivariate_normal(rng.normal(size=(20, 3)))
        assert mahalanobis(fit, fit.mean) == 0.0

    def test_unit_step_identity_covariance(self):
        fit = GaussianFit(np.zeros(3), np.eye(3))
        for axis in range(3):
            x = np.zeros(3)
            x[axis] = 1.0
            assert mahalanobis(fit, x) == pytest.approx(1.0, abs=1e-12)

    def test_matches_explicit_inverse_oracle(self, rng):
        for _ in range(100):
            fit = fit_multivariate_normal(rng.normal(size=(20, 3)))
            x = rng.normal(size=3)
            expected = oracles.mahalanobis_explicit_inverse(
                fit.mean.tolist(), fit.covariance.tolist(), x.tolist()
            )
            assert mahalanobis(fit, x) == pytest.approx(expected, abs=1e-8)

    def test_affine_invariance(self, rng):
        for _ in range(10):
            samples = rng.normal(size=(20, 3))
            x = rng.normal(size=3)
            A = rng.normal(size=(3, 3)) + 3.0 * np.eye(3)
            b = rng.normal(size=3)
            direct = mahalanobis(fit_multivariate_normal(samples), x)
            mapped = mahalanobis(fit_multivariate_normal(samples @ A.T + b), A @ x + b)
            assert mapped == pytest.approx(direct, abs=1e-8)

    def test_dimension_mismatch(self, rng):
        fit = fit_multivariate_normal(rng.normal(size=(20, 3)))
        with pytest.raises(ValueError, match="dimension"):
            mahalanobis(fit, np.zeros(2))


class TestEuler:
    def test_identity(self):
        triple = quaternion_to_euler([1.0, 0.0, 0.0, 0.0])
        assert (triple.roll, triple.pitch, triple.yaw) == (0.0, 0.0, 0.0)

    def test_quarter_yaw(self):
        triple = quaternion_to_euler(quat_from_axis_angle([0, 0, 1], math.pi / 2))
        assert triple.yaw == pytest.approx(math.pi / 2, abs=1e-12)
        assert triple.roll == 0.0 and triple.pitch == 0.0

    def test_round_trip_as_rotation(self, rng):
        from conftest import random_unit_quats

        for q in random_unit_quats(rng, 100):
            triple = quaternion_to_euler(q)
            back = euler_xyz_to_quat(triple.roll, triple.pitch, triple.yaw)
            assert quat_angle(q, back) < 1e-9

    def test_range_invariant(self):
        with pytest.raises(ValueError):
            EulerTriple(roll=math.pi, pitch=0.0, yaw=0.0)


def object_repeat_set(final_positions, final_yaws, task_id=3):
    """Repeats whose object comes to rest at the given positions and yaw angles."""
    repeats = []
    for idx, (pos, yaw) in enumerate(zip(final_positions, final_yaws), start=1):
        base = static_recording(n=10, task_id=task_id, repeat_id=idx, with_object=True)
        t = base.t
        n = len(t)
        quat = quat_from_axis_angle([0, 0, 1], yaw)
        obj = PoseSeries(
            t, np.tile(np.asarray(pos, dtype=float), (n, 1)), np.tile(quat, (n, 1))
        )
        bodies = dict(base.bodies)
        bodies["object"] = obj
        repeats.append(
            TaskRecording(
                metadata=base.metadata,
                bodies=bodies,
                wrench=base.wrench,
                joint_torques=base.joint_torques,
                fingers=base.fingers,
            )
        )
    return RepeatSet.from_repeats(task_id, repeats)


class TestFinalPoseDistances:
    def test_self_comparison_is_zero(self, rng):
        positions = rng.normal(scale=0.05, size=(6, 3)) + [0.4, 0.1, 0.0]
        yaws = rng.normal(scale=0.05, size=6)
        repeat_set = object_repeat_set(positions, yaws)
        result = final_pose_distances(repeat_set, repeat_set)
        assert result.translation_distance == 0.0
        assert result.rotation_distance == 0.0

    def test_missing_object_rejected(self, rng):
        arm_only = RepeatSet.from_repeats(
            1,
            [
                replace_metadata(static_recording(n=10, repeat_id=r), task_id=1)
                for r in (1, 2)
            ],
        )
        with_object = object_repeat_set(np.zeros((2, 3)), np.zeros(2), task_id=1)
        with pytest.raises(ValidationError, match="object"):
            final_pose_distances(arm_only, with_object)

    def test_yaw_straddling_pi_fits_near_pi(self, rng):
        # samples at +-179 degrees must average to ~pi, not ~0
        yaws = np.deg2rad(np.array([179.0, -179.0, 179.5, -179.5, 178.5, -178.5]))
        positions = np.tile([0.3, 0.0, 0.0], (6, 1)) + rng.normal(scale=1e-3, size=(6, 3))
        repeat_set = object_repeat_set(positions, yaws)
        result = final_pose_distances(repeat_set, repeat_set)
        fitted_yaw = result.rotation_fit.mean[2]
        expected = oracles.circular_mean(yaws.tolist())
        assert abs(abs(fitted_yaw) - math.pi) < 0.05
        assert math.isclose(
            math.sin(fitted_yaw), math.sin(expected), abs_tol=1e-6
        ) and math.isclose(math.cos(fitted_yaw), math.cos(expected), abs_tol=1e-6)
        assert result.rotation_distance == 0.0

    def test_adding_two_pi_to_a_sample_changes_nothing(self, rng):
        yaws = rng.normal(scale=0.01, size=(6,)) + 0.3
        positions = rng.normal(scale=0.01, size=(6, 3))
        baseline = final_pose_distances(
            object_repeat_set(positions, yaws), object_repeat_set(positions, yaws + 0.02)
        )
        shifted_yaws = yaws.copy()
        shifted_yaws[2] += 2.0 * math.pi
        shifted = final_pose_distances(
            object_repeat_set(positions, shifted_yaws),
            object_repeat_set(positions, yaws + 0.02),
        )
        assert shifted.rotation_distance == pytest.approx(
            baseline.rotation_distance, abs=1e-9
        )
        np.testing.assert_allclose(
            shifted.rotation_fit.covariance, baseline.rotation_fit.covariance, atol=1e-9
        )

    def test_distance_grows_along_principal_axis(self, rng):
        positions = rng.normal(scale=0.02, size=(8, 3))
        yaws = rng.normal(scale=0.02, size=8)
        dataset = object_repeat_set(positions, yaws)
        fit = final_pose_distances(dataset, dataset).translation_fit
        eigvals, eigvecs = np.linalg.eigh(fit.covariance)
        direction = eigvecs[:, -1]
        last = 0.0
        for step in (0.01, 0.02, 0.05, 0.1):
            d = mahalanobis(fit, fit.mean + step * direction)
            assert d > last
            last = d

    def test_per_repeat_distances_shape(self, rng):
        positions = rng.normal(scale=0.02, size=(5, 3))
        yaws = rng.normal(scale=0.02, size=5)
        dataset = object_repeat_set(positions, yaws)
        sim = object_repeat_set(positions + 0.01, yaws + 0.01)
        result = final_pose_distances(dataset, sim)
        assert result.per_repeat_translation.shape == (5,)
        assert result.per_repeat_rotation.shape == (5,)
        assert np.all(result.per_repeat_translation >= 0.0)
