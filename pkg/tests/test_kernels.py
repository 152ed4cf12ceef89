"""Both kernel backends against the straight-loop oracles and each other."""

import numpy as np
import pytest

import oracles
from conftest import random_unit_quats
from simgap._kernels import pure

BACKENDS = [pure]
try:
    from simgap._kernels import _fast

    BACKENDS.append(_fast)
except ImportError:
    pass


def backend_ids():
    return [b.NAME for b in BACKENDS]


@pytest.fixture(params=BACKENDS, ids=backend_ids())
def backend(request):
    return request.param


def _pair(rng, n=50):
    a = np.ascontiguousarray(rng.normal(size=(n, 3)))
    b = np.ascontiguousarray(rng.normal(size=(n, 3)))
    qa = np.ascontiguousarray(random_unit_quats(rng, n))
    qb = np.ascontiguousarray(random_unit_quats(rng, n))
    return a, qa, b, qb


def test_mean_point_distance_matches_oracle(backend, rng):
    for _ in range(20):
        a, _, b, _ = _pair(rng)
        expected = oracles.euclidean_error(a.tolist(), b.tolist())
        assert backend.mean_point_distance(a, b) == pytest.approx(expected, abs=1e-12)


def test_mean_quat_angle_matches_oracle(backend, rng):
    for _ in range(20):
        _, qa, _, qb = _pair(rng)
        expected = oracles.rotation_error(qa.tolist(), qb.tolist())
        assert backend.mean_quat_angle(qa, qb) == pytest.approx(expected, abs=1e-12)


def test_mean_pose_distance_matches_oracle(backend, rng):
    for _ in range(20):
        a, qa, b, qb = _pair(rng)
        expected = oracles.pose_error(a.tolist(), qa.tolist(), b.tolist(), qb.tolist(), 37.0)
        assert backend.mean_pose_distance(a, qa, b, qb, 37.0) == pytest.approx(
            expected, abs=1e-12
        )


def test_pose_distance_stable_at_half_turn(backend):
    # Relative rotation of exactly pi about z; the skew part vanishes there.
    qa = np.ascontiguousarray(np.tile([1.0, 0.0, 0.0, 0.0], (4, 1)))
    qb = np.ascontiguousarray(np.tile([0.0, 0.0, 0.0, 1.0], (4, 1)))
    p = np.ascontiguousarray(np.zeros((4, 3)))
    assert backend.mean_pose_distance(p, qa, p, qb, 37.0) == pytest.approx(np.pi, abs=1e-12)


def test_identical_inputs_give_exact_zero(backend, rng):
    a, qa, _, _ = _pair(rng)
    assert backend.mean_point_distance(a, a) == 0.0
    assert backend.mean_quat_angle(qa, qa) == 0.0
    assert backend.mean_pose_distance(a, qa, a, qa, 37.0) == 0.0


def test_forward_difference_matches_oracle(backend, rng):
    x = np.ascontiguousarray(rng.normal(size=(30, 4)))
    out = np.asarray(backend.forward_difference(x, 0.1))
    expected = np.array(oracles.forward_difference(x.tolist(), 0.1))
    assert out.shape == x.shape
    np.testing.assert_allclose(out, expected, atol=1e-12)


def test_row_reductions_match_numpy(backend, rng):
    x = np.ascontiguousarray(rng.normal(size=(40, 6)))
    np.testing.assert_allclose(backend.row_norms(x), np.linalg.norm(x, axis=1), atol=1e-12)
    np.testing.assert_allclose(backend.abs_row_sums(x), np.abs(x).sum(axis=1), atol=1e-12)
    np.testing.assert_allclose(backend.row_sums(x), x.sum(axis=1), atol=1e-12)


@pytest.mark.parametrize(
    "speed,eps,run,expected",
    [
        ([0, 0, 1, 1, 1, 0], 0.5, 3, [False, False, True, True, True, False]),
        ([0, 1, 1, 0, 1, 1, 1, 0], 0.5, 3, [False, False, False, False, True, True, True, False]),
        ([1, 1], 0.5, 3, [False, False]),
        ([2, 2, 2], 0.5, 1, [True, True, True]),
        ([0, 0], 0.5, 1, [False, False]),
    ],
)
def test_moving_mask_cases(backend, speed, eps, run, expected):
    out = np.asarray(backend.moving_mask(np.ascontiguousarray(speed, dtype=float), eps, run))
    assert out.tolist() == expected


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
def test_backends_agree(rng):
    fast = BACKENDS[1]
    for _ in range(10):
        a, qa, b, qb = _pair(rng, n=64)
        assert pure.mean_point_distance(a, b) == pytest.approx(
            fast.mean_point_distance(a, b), abs=1e-13
        )
        assert pure.mean_quat_angle(qa, qb) == pytest.approx(
            fast.mean_quat_angle(qa, qb), abs=1e-13
        )
        assert pure.mean_pose_distance(a, qa, b, qb, 37.0) == pytest.approx(
            fast.mean_pose_distance(a, qa, b, qb, 37.0), abs=1e-12
        )
        x = np.ascontiguousarray(rng.normal(size=(64, 6)))
        np.testing.assert_allclose(pure.abs_row_sums(x), fast.abs_row_sums(x), atol=1e-13)
