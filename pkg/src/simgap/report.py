"""Subgroup aggregation, table rendering and the machine-readable appendix.

Tasks are grouped by theme: subgroup 1 holds the kinematics tasks (1-2),
subgroup 2 the non-prehensile manipulation tasks (3-10). The public result
for a subgroup is the mean of the error-metric magnitudes over its member
tasks, 8 entries (10 with the object distances). Everything else, signed
values included, goes to the appendix file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .errors import ValidationError
from .metrics import ARM_METRIC_NAMES, OBJECT_METRIC_NAMES, MetricSet, TaskEvaluation

SUBGROUPS: dict[int, tuple[int, ...]] = {1: (1, 2), 2: (3, 4, 5, 6, 7, 8, 9, 10)}
SUBGROUP_TITLES = {1: "Kinematics", 2: "Non-prehensile manipulation"}

# Public error vector: (column title, MetricSet field the magnitude is taken from)
ARM_ERROR_COLUMNS = (
    ("euclidean", "Euclidean", "euclidean_error"),
    ("rotation", "Rotation", "rotation_error"),
    ("pose", "Pose", "pose_error"),
    ("velocity", "Velocity", "velocity_error"),
    ("acceleration", "Acceleration", "accel_error"),
    ("torque", "Torque", "torque_error"),
    ("force", "Force", "force_error"),
    ("moment", "Moment", "moment_error"),
)
OBJECT_ERROR_COLUMNS = (
    ("object_translation", "Object Translation", "obj_translation_distance"),
    ("object_rotation", "Object Rotation", "obj_rotation_distance"),
)

APPENDIX_SCHEMA = "simgap-appendix-v1"
SCI_NOTATION_THRESHOLD = 1e6


def subgroup_of_task(task_id: int) -> int:
    for subgroup_id, members in SUBGROUPS.items():
        if task_id in members:
            return subgroup_id
    raise ValidationError(f"task {task_id} belongs to no subgroup")


def error_columns(subgroup_id: int):
    cols = ARM_ERROR_COLUMNS
    if subgroup_id == 2:
        cols = cols + OBJECT_ERROR_COLUMNS
    return cols


@dataclass(frozen=True)
class SubmissionInfo:
    """What a submitter must state alongside the raw files."""

    simulator: str = "unspecified"
    tuned_parameters: str = "none reported"
    running_time: str = "not reported"


@dataclass(frozen=True, eq=False)
class SubgroupReport:
    """Aggregated error vector plus everything retained for the appendix."""

    subgroup_id: int
    error_vector: dict[str, float]
    tasks: tuple[TaskEvaluation, ...]
    submission: SubmissionInfo

    def __post_init__(self):
        expected = tuple(key for key, _, _ in error_columns(self.subgroup_id))
        if tuple(self.error_vector) != expected:
            raise ValidationError(
                f"error vector keys must be {expected}, got {tuple(self.error_vector)}"
            )
        object.__setattr__(self, "error_vector", dict(self.error_vector))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SubgroupReport)
            and self.subgroup_id == other.subgroup_id
            and self.error_vector == other.error_vector
            and self.submission == other.submission
            and len(self.tasks) == len(other.tasks)
            and all(
                a.metrics == b.metrics and a.extras == b.extras
                for a, b in zip(self.tasks, other.tasks)
            )
        )


def _as_evaluation(item: MetricSet | TaskEvaluation) -> TaskEvaluation:
    if isinstance(item, TaskEvaluation):
        return item
    return TaskEvaluation(metrics=item, extras={})


def aggregate_subgroup(
    sets: Sequence[MetricSet | TaskEvaluation],
    info: SubmissionInfo = SubmissionInfo(),
) -> SubgroupReport:
    """Mean of metric magnitudes across the member tasks of one subgroup.

    The inputs must cover every task of exactly one subgroup, once each;
    signed per-task values stay available through the returned tasks.
    """
    evaluations = sorted((_as_evaluation(s) for s in sets), key=lambda e: e.metrics.task_id)
    if not evaluations:
        raise ValidationError("no metric sets supplied")
    task_ids = [e.metrics.task_id for e in evaluations]
    subgroup_id = subgroup_of_task(task_ids[0])
    members = SUBGROUPS[subgroup_id]
    outside = sorted(set(task_ids) - set(members))
    if outside:
        raise ValidationError(f"tasks {outside} are not in subgroup {subgroup_id}")
    missing = sorted(set(members) - set(task_ids))
    if missing:
        raise ValidationError(f"subgroup {subgroup_id} incomplete: missing tasks {missing}")
    if len(task_ids) != len(set(task_ids)):
        raise ValidationError("duplicate task ids supplied")

    vector: dict[str, float] = {}
    for key, _, source_field in error_columns(subgroup_id):
        values = []
        for ev in evaluations:
            value = getattr(ev.metrics, source_field)
            if value is None:
                raise ValidationError(
                    f"task {ev.metrics.task_id} lacks {source_field}, required for subgroup {subgroup_id}"
                )
            values.append(abs(value))
        vector[key] = sum(values) / len(values)
    return SubgroupReport(
        subgroup_id=subgroup_id,
        error_vector=vector,
        tasks=tuple(evaluations),
        submission=info,
    )


def format_value(value: float) -> str:
    """Fixed 4-decimal formatting, scientific above 1e6 (results-table style)."""
    if abs(value) > SCI_NOTATION_THRESHOLD:
        return f"{value:.4E}"
    return f"{value:.4f}"


def render_table(report: SubgroupReport) -> str:
    """Human-readable subgroup table; one comma-separated row of error values."""
    cols = error_columns(report.subgroup_id)
    lines = [
        f"Error Metrics for Subgroup {report.subgroup_id} ({SUBGROUP_TITLES[report.subgroup_id]})",
        f"Simulator used: {report.submission.simulator}",
        f"User definable parameters tuned: {report.submission.tuned_parameters}",
        f"Running time for the tasks with system specifications: {report.submission.running_time}",
        "",
        ", ".join(title for _, title, _ in cols),
        ", ".join(format_value(report.error_vector[key]) for key, _, _ in cols),
    ]
    return "\n".join(lines) + "\n"


def _metrics_to_json(metrics: MetricSet) -> dict:
    names = ARM_METRIC_NAMES + OBJECT_METRIC_NAMES
    out: dict = {"task_id": metrics.task_id}
    for name in names:
        value = getattr(metrics, name)
        if value is not None:
            out[name] = value
    return out


def _metrics_from_json(data: dict) -> MetricSet:
    return MetricSet(**data)


def export_appendix(reports: Sequence[SubgroupReport]) -> str:
    """All per-task metrics (signed) and extras as a stable JSON document."""
    doc = {
        "schema": APPENDIX_SCHEMA,
        "subgroups": [
            {
                "subgroup_id": r.subgroup_id,
                "submission": {
                    "simulator": r.submission.simulator,
                    "tuned_parameters": r.submission.tuned_parameters,
                    "running_time": r.submission.running_time,
                },
                "error_vector": r.error_vector,
                "tasks": [
                    {"metrics": _metrics_to_json(ev.metrics), "extras": ev.extras}
                    for ev in r.tasks
                ],
            }
            for r in reports
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def import_appendix(text: str) -> list[SubgroupReport]:
    doc = json.loads(text)
    if doc.get("schema") != APPENDIX_SCHEMA:
        raise ValidationError(f"unknown appendix schema {doc.get('schema')!r}")
    reports = []
    for entry in doc["subgroups"]:
        submission = SubmissionInfo(**entry["submission"])
        tasks = tuple(
            TaskEvaluation(metrics=_metrics_from_json(t["metrics"]), extras=t["extras"])
            for t in entry["tasks"]
        )
        reports.append(
            SubgroupReport(
                subgroup_id=entry["subgroup_id"],
                error_vector=entry["error_vector"],
                tasks=tasks,
                submission=submission,
            )
        )
    return reports


def report_filename(subgroup_id: int) -> str:
    return f"subgroup{subgroup_id}_report.txt"


def appendix_filename(subgroup_id: int) -> str:
    return f"subgroup{subgroup_id}_appendix"
