import numpy as np
import pytest

from conftest import make_recording, static_recording
from simgap.errors import AlignmentError, DegenerateInputError, LengthMismatchWarning
from simgap.trajectory import (
    Metadata,
    PoseSeries,
    RepeatSet,
    TaskRecording,
    align_pair,
    derive_acceleration,
    derive_velocity,
    mean_trajectory,
)


class TestInvariants:
    def test_pose_series_rejects_bad_quaternions(self):
        t = np.arange(3) / 10.0
        quats = np.tile([1.0, 0.0, 0.0, 0.0], (3, 1))
        quats[1] = [0.9, 0.0, 0.0, 0.0]
        with pytest.raises(ValueError, match="norm"):
            PoseSeries(t, np.zeros((3, 3)), quats)

    def test_pose_series_rejects_non_uniform_grid(self):
        t = np.array([0.0, 0.1, 0.35])
        quats = np.tile([1.0, 0.0, 0.0, 0.0], (3, 1))
        with pytest.raises(AlignmentError):
            PoseSeries(t, np.zeros((3, 3)), quats)

    def test_pose_series_rejects_non_finite(self):
        t = np.arange(3) / 10.0
        quats = np.tile([1.0, 0.0, 0.0, 0.0], (3, 1))
        positions = np.zeros((3, 3))
        positions[2, 1] = np.nan
        with pytest.raises(ValueError, match="finite"):
            PoseSeries(t, positions, quats)

    def test_metadata_ranges(self):
        with pytest.raises(ValueError):
            Metadata(task_id=11, repeat_id=1, timestamp="t", source="dataset")
        with pytest.raises(ValueError):
            Metadata(task_id=1, repeat_id=0, timestamp="t", source="dataset")
        with pytest.raises(ValueError):
            Metadata(task_id=1, repeat_id=1, timestamp="t", source="reality")

    def test_recording_requires_shared_grid(self, rng):
        rec = make_recording(rng, n=10)
        other_t = np.arange(10) / 10.0 + 0.05
        bad_fingers = type(rec.fingers)(other_t, np.asarray(rec.fingers.positions))
        with pytest.raises(AlignmentError):
            TaskRecording(
                metadata=rec.metadata,
                bodies=rec.bodies,
                wrench=rec.wrench,
                joint_torques=rec.joint_torques,
                fingers=bad_fingers,
            )

    def test_recording_needs_two_samples(self, rng):
        with pytest.raises(ValueError):
            make_recording(rng, n=1)

    def test_series_are_readonly(self, rng):
        rec = make_recording(rng, n=5)
        with pytest.raises(ValueError):
            rec.end_effector.positions[0, 0] = 1.0

    def test_repeat_set_checks_task_ids(self, rng):
        r1 = make_recording(rng, task_id=1)
        r2 = make_recording(rng, task_id=2)
        with pytest.raises(ValueError, match="task_id"):
            RepeatSet.from_repeats(1, [r1, r2])
        with pytest.raises(DegenerateInputError):
            RepeatSet.from_repeats(1, [])


class TestAlignPair:
    def test_identity_case(self, rng):
        a = make_recording(rng, n=100)
        b = make_recording(rng, n=100)
        out_a, out_b = align_pair(a, b)
        assert out_a.n_samples == out_b.n_samples == 100
        assert out_a == a

    def test_min_rule_below_threshold(self, rng):
        import warnings

        a = make_recording(rng, n=100)
        b = make_recording(rng, n=97)
        with warnings.catch_warnings():
            warnings.simplefilter("error", LengthMismatchWarning)
            out_a, out_b = align_pair(a, b)  # 3% < 5%: must not warn
        assert out_a.n_samples == out_b.n_samples == 97

    def test_large_gap_warns(self, rng):
        a = make_recording(rng, n=100)
        b = make_recording(rng, n=80)
        with pytest.warns(LengthMismatchWarning):
            out_a, out_b = align_pair(a, b)
        assert out_a.n_samples == out_b.n_samples == 80

    def test_commutative_lengths(self, rng):
        a = make_recording(rng, n=64)
        b = make_recording(rng, n=50)
        with pytest.warns(LengthMismatchWarning):
            ab = align_pair(a, b)
            ba = align_pair(b, a)
        assert {ab[0].n_samples, ab[1].n_samples} == {50}
        assert {ba[0].n_samples, ba[1].n_samples} == {50}

    def test_rate_mismatch(self, rng):
        a = make_recording(rng, n=20, rate=10.0)
        b = make_recording(rng, n=20, rate=20.0)
        with pytest.raises(AlignmentError, match="rate"):
            align_pair(a, b)


class TestMeanTrajectory:
    def test_single_repeat_identity(self, rng):
        rec = make_recording(rng, n=30, with_object=True)
        assert mean_trajectory([rec]) == rec

    def test_arithmetic_mean_of_offset_pair(self, rng):
        a = static_recording(n=10)
        t = a.t
        quats = np.asarray(a.end_effector.orientations)
        shifted_bodies = {
            "ee": PoseSeries(t, np.asarray(a.end_effector.positions) + [0.2, 0.0, 0.0], quats)
        }
        b = TaskRecording(
            metadata=a.metadata,
            bodies=shifted_bodies,
            wrench=a.wrench,
            joint_torques=a.joint_torques,
            fingers=a.fingers,
        )
        mean = mean_trajectory([a, b])
        np.testing.assert_allclose(
            mean.end_effector.positions[:, 0], np.full(10, 0.1), atol=1e-15
        )

    def test_quaternion_sign_flip_invariance(self, rng):
        rec = make_recording(rng, n=12)
        flipped_bodies = {
            "ee": PoseSeries(
                rec.t,
                np.asarray(rec.end_effector.positions),
                -np.asarray(rec.end_effector.orientations),
            )
        }
        flipped = TaskRecording(
            metadata=rec.metadata,
            bodies=flipped_bodies,
            wrench=rec.wrench,
            joint_torques=rec.joint_torques,
            fingers=rec.fingers,
        )
        mean = mean_trajectory([rec, flipped])
        # q and -q describe the same rotation; sign alignment must prevent cancellation
        dots = np.sum(
            np.asarray(mean.end_effector.orientations)
            * np.asarray(rec.end_effector.orientations),
            axis=1,
        )
        np.testing.assert_allclose(np.abs(dots), 1.0, atol=1e-12)

    def test_empty_list_raises(self):
        with pytest.raises(DegenerateInputError):
            mean_trajectory([])


class TestDifferencing:
    def _series(self, positions, rate=10.0):
        n = len(positions)
        t = np.arange(n) / rate
        return PoseSeries(t, positions, np.tile([1.0, 0.0, 0.0, 0.0], (n, 1)))

    def test_static_gives_zero(self):
        series = self._series(np.zeros((20, 3)))
        v = derive_velocity(series)
        assert v.shape == (20, 3)
        np.testing.assert_array_equal(v, 0.0)

    def test_linear_ramp(self):
        t = np.arange(30) / 10.0
        positions = np.zeros((30, 3))
        positions[:, 0] = t
        v = derive_velocity(self._series(positions))
        np.testing.assert_allclose(v[:, 0], 1.0, atol=1e-12)
        a = derive_acceleration(self._series(positions))
        np.testing.assert_allclose(a, 0.0, atol=1e-12)

    def test_quadratic_forward_difference_bias(self):
        # p = 0.5 t^2 gives v_k = t_k + dt/2 under forward differencing
        t = np.arange(40) / 10.0
        positions = np.zeros((40, 3))
        positions[:, 0] = 0.5 * t**2
        v = derive_velocity(self._series(positions))
        np.testing.assert_allclose(v[:-1, 0], t[:-1] + 0.05, atol=1e-12)
        assert v[-1, 0] == v[-2, 0]
        a = derive_acceleration(self._series(positions))
        np.testing.assert_allclose(a[:-2, 0], 1.0, atol=1e-10)

    def test_cubic_against_analytic_second_derivative(self, rng):
        # second forward difference of a cubic equals p''(t+dt) exactly,
        # so the error against p''(t) is bounded by |6 a| dt
        coeffs = rng.normal(size=(3, 4))  # per-axis cubic coefficients
        dt = 0.1
        t = np.arange(50) * dt
        positions = np.stack(
            [c[0] * t**3 + c[1] * t**2 + c[2] * t + c[3] for c in coeffs], axis=1
        )
        accel = derive_acceleration(self._series(positions))
        analytic = np.stack([6 * c[0] * t + 2 * c[1] for c in coeffs], axis=1)
        bound = 6.0 * np.abs(coeffs[:, 0]) * dt + 1e-9
        err = np.abs(accel[:-2] - analytic[:-2])
        assert np.all(err <= bound)

    def test_length_preserved(self, rng):
        rec = make_recording(rng, n=33)
        assert len(derive_velocity(rec.end_effector)) == 33
        assert len(derive_acceleration(rec.end_effector)) == 33

    def test_translation_invariance(self, rng):
        rec = make_recording(rng, n=25)
        series = rec.end_effector
        shifted = PoseSeries(
            series.t,
            np.asarray(series.positions) + [1.5, -2.0, 0.25],
            np.asarray(series.orientations),
        )
        np.testing.assert_allclose(
            derive_velocity(shifted), derive_velocity(series), atol=1e-12
        )
