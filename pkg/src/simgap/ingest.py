"""CSV reading/writing, repeat-set discovery and submission validation.

Submission files are plain UTF-8 CSV with a '#'-prefixed metadata header so
they stay loadable by generic tools. Exact layout:

    # task: <int>
    # repeat: <int>
    # date: <ISO-8601>
    # temperature: <float|NA>
    # humidity: <float|NA>
    # source: <dataset|simulation>
    # description: <text>
    t,<body>_px,...,<body>_qz[,<obj>_px,...],ft_fx,...,ft_mz,tau1,...,tau6,f1,f2,f3
    <data rows>

Bodies appear end effector first, then the optional manipulable object, each
contributing px,py,pz,qw,qx,qy,qz columns. Units: s, m, unit quaternion, N,
N·m, N·m, rad. Numbers are written at 9 significant digits, which round-trips
such values bit-exactly. Repeats of task N live in one folder as
taskNN_01.csv .. taskNN_20.csv.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import Finding, FormatError, SimGapError, ValidationError
from .geometry import UNIT_NORM_SKIP_TOL
from .trajectory import (
    FingerSeries,
    JointTorqueSeries,
    Metadata,
    PoseSeries,
    RepeatSet,
    TaskRecording,
    WrenchSeries,
)

HEADER_KEYS = ("task", "repeat", "date", "temperature", "humidity", "source", "description")
POSE_SUFFIXES = ("px", "py", "pz", "qw", "qx", "qy", "qz")
WRENCH_COLUMNS = ("ft_fx", "ft_fy", "ft_fz", "ft_mx", "ft_my", "ft_mz")
TORQUE_COLUMNS = tuple(f"tau{j}" for j in range(1, 7))
FINGER_COLUMNS = ("f1", "f2", "f3")
REQUIRED_REPEATS = 20
QUAT_WARN_TOL = 1e-3
SIGNIFICANT_DIGITS = 9


def repeat_filename(task_id: int, repeat_id: int) -> str:
    return f"task{task_id:02d}_{repeat_id:02d}.csv"


def _fmt(value: float) -> str:
    return format(value, f".{SIGNIFICANT_DIGITS}g")


@dataclass(frozen=True)
class BundleManifest:
    """Discovery and validation result for one task folder."""

    directory: str
    task_id: int
    repeat_files: tuple[str, ...]
    findings: tuple[Finding, ...]

    @property
    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity == "error")

    @property
    def ok(self) -> bool:
        return not self.errors


def _read_lines(source: str | TextIO) -> list[str]:
    text = source if isinstance(source, str) else source.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def _parse_header(lines: list[str], location: str) -> Metadata:
    fields: dict[str, str] = {}
    for idx, key in enumerate(HEADER_KEYS):
        lineno = idx + 1
        prefix = f"# {key}:"
        if idx >= len(lines) or not lines[idx].startswith(prefix):
            raise FormatError(f"expected header {prefix!r}", line=lineno)
        fields[key] = lines[idx][len(prefix) :].strip()

    def _int(key: str) -> int:
        try:
            return int(fields[key])
        except ValueError:
            raise FormatError(
                f"header {key!r} is not an integer: {fields[key]!r}",
                line=HEADER_KEYS.index(key) + 1,
            ) from None

    def _optional(key: str) -> float | None:
        raw = fields[key]
        if raw == "NA":
            return None
        try:
            return float(raw)
        except ValueError:
            raise FormatError(
                f"header {key!r} must be a float or NA: {raw!r}",
                line=HEADER_KEYS.index(key) + 1,
            ) from None

    try:
        return Metadata(
            task_id=_int("task"),
            repeat_id=_int("repeat"),
            timestamp=fields["date"],
            temperature=_optional("temperature"),
            humidity=_optional("humidity"),
            source=fields["source"],
            description=fields["description"],
        )
    except ValueError as exc:
        raise FormatError(str(exc), line=len(HEADER_KEYS)) from None


def _parse_columns(header: str, lineno: int) -> list[str]:
    cols = [c.strip() for c in header.split(",")]
    if not cols or cols[0] != "t":
        raise FormatError("first column must be 't'", line=lineno)
    names: list[str] = []
    i = 1
    while i < len(cols) and cols[i].endswith("_px") and not cols[i].startswith("ft_"):
        name = cols[i][: -len("_px")]
        expected = [f"{name}_{sfx}" for sfx in POSE_SUFFIXES]
        if cols[i : i + 7] != expected:
            raise FormatError(
                f"body {name!r} must contribute columns {','.join(expected)}", line=lineno
            )
        names.append(name)
        i += 7
    if not 1 <= len(names) <= 2:
        raise FormatError(
            "expected pose columns for the end effector and at most one object", line=lineno
        )
    tail = WRENCH_COLUMNS + TORQUE_COLUMNS + FINGER_COLUMNS
    if tuple(cols[i:]) != tail:
        raise FormatError(
            f"columns after bodies must be {','.join(tail)}", line=lineno
        )
    return names


def parse_recording_csv(
    source: str | TextIO,
    *,
    location: str = "<stream>",
    findings: list[Finding] | None = None,
) -> TaskRecording:
    """Parse one recording. Appends warning findings to ``findings`` if given."""
    lines = _read_lines(source)
    meta = _parse_header(lines, location)
    col_line = len(HEADER_KEYS) + 1
    if col_line > len(lines):
        raise FormatError("missing column header", line=col_line)
    body_names = _parse_columns(lines[col_line - 1], col_line)
    n_cols = 1 + 7 * len(body_names) + len(WRENCH_COLUMNS) + len(TORQUE_COLUMNS) + len(FINGER_COLUMNS)

    rows: list[list[float]] = []
    for offset, raw in enumerate(lines[col_line:]):
        lineno = col_line + 1 + offset
        cells = raw.split(",")
        if len(cells) != n_cols:
            raise FormatError(
                f"expected {n_cols} columns, found {len(cells)}", line=lineno
            )
        try:
            row = [float(c) for c in cells]
        except ValueError:
            bad = next(c for c in cells if not _is_float(c))
            raise FormatError(f"non-numeric cell {bad.strip()!r}", line=lineno) from None
        if not all(math.isfinite(v) for v in row):
            raise FormatError("non-finite value", line=lineno)
        rows.append(row)
    if len(rows) < 2:
        raise FormatError("need at least 2 data rows", line=col_line + len(rows))

    data = np.array(rows, dtype=float)
    t = data[:, 0]
    steps = np.diff(t)
    if np.any(steps <= 0.0):
        first_bad = int(np.argmax(steps <= 0.0))
        raise FormatError("timestamps must be strictly increasing", line=col_line + 2 + first_bad)

    bodies: dict[str, PoseSeries] = {}
    worst_norm_dev = 0.0
    for b, name in enumerate(body_names):
        block = data[:, 1 + 7 * b : 8 + 7 * b]
        pos = block[:, :3]
        quat = block[:, 3:7].copy()
        norms = np.sqrt(np.sum(quat * quat, axis=1))
        if np.any(norms == 0.0):
            bad_row = int(np.argmax(norms == 0.0))
            raise FormatError(
                f"zero quaternion for body {name!r}", line=col_line + 1 + bad_row
            )
        worst_norm_dev = max(worst_norm_dev, float(np.max(np.abs(norms - 1.0))))
        # Renormalize only when needed so unit-to-print-precision values
        # survive a write/parse round trip bit-exactly.
        off = np.abs(norms - 1.0) > UNIT_NORM_SKIP_TOL
        if np.any(off):
            quat[off] /= norms[off, np.newaxis]
        bodies[name] = PoseSeries(t, pos, quat)
    if worst_norm_dev > QUAT_WARN_TOL and findings is not None:
        findings.append(
            Finding(
                "warning",
                location,
                f"quaternion norms deviate from 1 by up to {worst_norm_dev:.3e}; renormalized",
            )
        )

    i = 1 + 7 * len(body_names)
    wrench = WrenchSeries(t, data[:, i : i + 3], data[:, i + 3 : i + 6])
    torques = JointTorqueSeries(t, data[:, i + 6 : i + 12])
    fingers = FingerSeries(t, data[:, i + 12 : i + 15])

    dt = float(t[-1] - t[0]) / (len(t) - 1)
    rate = 1.0 / dt
    if abs(rate - round(rate)) < 1e-6:
        rate = float(round(rate))
    if findings is not None and abs(rate - 10.0) > 1e-3:
        findings.append(
            Finding("warning", location, f"sampling rate is {rate:g} Hz, expected 10 Hz")
        )
    return TaskRecording(
        metadata=meta,
        bodies=bodies,
        wrench=wrench,
        joint_torques=torques,
        fingers=fingers,
        rate_hz=rate,
    )


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def write_recording_csv(rec: TaskRecording) -> str:
    """Serialize a recording; parse(write(r)) is the identity for values
    representable at 9 significant digits."""
    meta = rec.metadata
    out = [
        f"# task: {meta.task_id}",
        f"# repeat: {meta.repeat_id}",
        f"# date: {meta.timestamp}",
        f"# temperature: {'NA' if meta.temperature is None else _fmt(meta.temperature)}",
        f"# humidity: {'NA' if meta.humidity is None else _fmt(meta.humidity)}",
        f"# source: {meta.source}",
        f"# description: {meta.description}",
    ]
    cols = ["t"]
    for name in rec.body_names:
        cols.extend(f"{name}_{sfx}" for sfx in POSE_SUFFIXES)
    cols.extend(WRENCH_COLUMNS + TORQUE_COLUMNS + FINGER_COLUMNS)
    out.append(",".join(cols))

    blocks = [rec.t[:, np.newaxis]]
    for name in rec.body_names:
        series = rec.bodies[name]
        blocks.extend([series.positions, series.orientations])
    blocks.extend(
        [rec.wrench.forces, rec.wrench.moments, rec.joint_torques.torques, rec.fingers.positions]
    )
    table = np.hstack(blocks)
    for row in table:
        out.append(",".join(_fmt(v) for v in row))
    return "\n".join(out) + "\n"


def write_recording_file(rec: TaskRecording, path: str | Path) -> None:
    Path(path).write_text(write_recording_csv(rec), encoding="utf-8")


def read_recording_file(
    path: str | Path, findings: list[Finding] | None = None
) -> TaskRecording:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_recording_csv(text, location=path.name, findings=findings)


def _discover(directory: Path, task_id: int) -> tuple[list[Path], list[str]]:
    expected = [directory / repeat_filename(task_id, r) for r in range(1, REQUIRED_REPEATS + 1)]
    missing = [p.name for p in expected if not p.is_file()]
    return expected, missing


def scan_bundle(directory: str | Path, task_id: int) -> BundleManifest:
    """Validate one task folder without raising; all problems become findings."""
    directory = Path(directory)
    findings: list[Finding] = []
    if not directory.is_dir():
        findings.append(Finding("error", str(directory), "directory does not exist"))
        return BundleManifest(str(directory), task_id, (), tuple(findings))
    expected, missing = _discover(directory, task_id)
    for name in missing:
        findings.append(Finding("error", name, "missing repeat file"))
    present = [p for p in expected if p.is_file()]
    for path in present:
        try:
            rec = read_recording_file(path, findings=findings)
        except (SimGapError, ValueError) as exc:
            findings.append(Finding("error", path.name, str(exc)))
            continue
        if rec.metadata.task_id != task_id:
            findings.append(
                Finding(
                    "error",
                    path.name,
                    f"header task id {rec.metadata.task_id} does not match bundle task {task_id}",
                )
            )
        expected_repeat = int(path.stem.split("_")[1])
        if rec.metadata.repeat_id != expected_repeat:
            findings.append(
                Finding(
                    "warning",
                    path.name,
                    f"header repeat id {rec.metadata.repeat_id} does not match filename",
                )
            )
    return BundleManifest(
        str(directory), task_id, tuple(p.name for p in expected), tuple(findings)
    )


def load_repeat_set(directory: str | Path, task_id: int) -> RepeatSet:
    """Load taskNN_01.csv .. taskNN_20.csv and compute the mean trajectory.

    Raises ValidationError (missing or mixed-task files) or FormatError
    (malformed content); warning findings are attached to the RepeatSet.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ValidationError(f"directory does not exist: {directory}")
    expected, missing = _discover(directory, task_id)
    if missing:
        raise ValidationError(f"missing repeat files: {', '.join(missing)}")
    findings: list[Finding] = []
    recordings = []
    for path in expected:
        try:
            recordings.append(read_recording_file(path, findings=findings))
        except (SimGapError, ValueError) as exc:
            raise FormatError(f"{path.name}: {exc}") from None
    mixed = sorted({r.metadata.task_id for r in recordings} - {task_id})
    if mixed:
        raise ValidationError(
            f"mixed task ids in bundle: found {mixed + [task_id]} while loading task {task_id}"
        )
    for path, rec in zip(expected, recordings):
        expected_repeat = int(path.stem.split("_")[1])
        if rec.metadata.repeat_id != expected_repeat:
            findings.append(
                Finding(
                    "warning",
                    path.name,
                    f"header repeat id {rec.metadata.repeat_id} does not match filename",
                )
            )
    lengths = [r.n_samples for r in recordings]
    if max(lengths) > min(lengths) and (max(lengths) - min(lengths)) / max(lengths) > 0.05:
        findings.append(
            Finding(
                "warning",
                str(directory),
                f"repeat lengths differ by more than 5% ({min(lengths)}..{max(lengths)} samples)",
            )
        )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # length gap already reported as a finding
        return RepeatSet.from_repeats(task_id, recordings, findings)


def write_repeat_set(repeat_set: RepeatSet, directory: str | Path) -> list[Path]:
    """Write every repeat under its canonical filename; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for rec in repeat_set.repeats:
        path = directory / repeat_filename(rec.metadata.task_id, rec.metadata.repeat_id)
        write_recording_file(rec, path)
        paths.append(path)
    return paths


def format_findings(findings: Iterable[Finding]) -> str:
    return "\n".join(str(f) for f in findings)


def bundle_findings(manifests: Sequence[BundleManifest]) -> list[Finding]:
    out: list[Finding] = []
    for m in manifests:
        out.extend(m.findings)
    return out
