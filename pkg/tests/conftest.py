import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from simgap.trajectory import (
    FingerSeries,
    JointTorqueSeries,
    Metadata,
    PoseSeries,
    TaskRecording,
    WrenchSeries,
)


def random_unit_quats(rng: np.random.Generator, n: int) -> np.ndarray:
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def make_pose_series(rng: np.random.Generator, n: int = 50, rate: float = 10.0) -> PoseSeries:
    t = np.arange(n) / rate
    return PoseSeries(t, rng.normal(scale=0.3, size=(n, 3)), random_unit_quats(rng, n))


def make_recording(
    rng: np.random.Generator,
    n: int = 20,
    task_id: int = 1,
    repeat_id: int = 1,
    with_object: bool = False,
    rate: float = 10.0,
    source: str = "dataset",
) -> TaskRecording:
    t = np.arange(n) / rate
    bodies = {"ee": PoseSeries(t, rng.normal(size=(n, 3)), random_unit_quats(rng, n))}
    if with_object:
        bodies["object"] = PoseSeries(
            t, rng.normal(size=(n, 3)), random_unit_quats(rng, n)
        )
    return TaskRecording(
        metadata=Metadata(
            task_id=task_id,
            repeat_id=repeat_id,
            timestamp="2020-01-01T00:00:00",
            source=source,
            description="synthetic test recording",
            temperature=21.5,
            humidity=45.0,
        ),
        bodies=bodies,
        wrench=WrenchSeries(t, rng.normal(size=(n, 3)), rng.normal(size=(n, 3))),
        joint_torques=JointTorqueSeries(t, rng.normal(size=(n, 6))),
        fingers=FingerSeries(t, rng.uniform(0.0, 1.4, size=(n, 3))),
        rate_hz=rate,
    )


def static_recording(
    n: int = 20, task_id: int = 1, repeat_id: int = 1, with_object: bool = False
) -> TaskRecording:
    t = np.arange(n) / 10.0
    identity = np.tile([1.0, 0.0, 0.0, 0.0], (n, 1))
    bodies = {"ee": PoseSeries(t, np.zeros((n, 3)), identity)}
    if with_object:
        bodies["object"] = PoseSeries(t, np.full((n, 3), 0.5), identity)
    return TaskRecording(
        metadata=Metadata(
            task_id=task_id,
            repeat_id=repeat_id,
            timestamp="2020-01-01T00:00:00",
            source="dataset",
        ),
        bodies=bodies,
        wrench=WrenchSeries(t, np.zeros((n, 3)), np.zeros((n, 3))),
        joint_torques=JointTorqueSeries(t, np.zeros((n, 6))),
        fingers=FingerSeries(t, np.zeros((n, 3))),
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260811)
