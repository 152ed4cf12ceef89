"""Command-line entry point: validate, evaluate, generate, report.

Exit codes: 0 success, 1 validation failure, 2 usage error. The SIMGAP_LOG
environment variable sets the logging level (DEBUG, INFO, WARNING, ...).
An optional JSON config file can hold any evaluate/generate setting; flags
given on the command line override it.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import click
import numpy as np

from . import ingest, report as report_mod
from .errors import SimGapError, ValidationError
from .metrics import PoseMetricConfig, StaticnessConfig, TaskEvaluation, evaluate_task
from .report import (
    SUBGROUPS,
    SubmissionInfo,
    aggregate_subgroup,
    appendix_filename,
    import_appendix,
    render_table,
    report_filename,
)
from .simulator import (
    ChannelModels,
    MotionScript,
    NoiseConfig,
    Segment,
    generate_repeats,
    linear_object_motion,
    load_chain,
    simulate_task,
)
from .trajectory import Metadata

log = logging.getLogger("simgap")


@dataclass
class RunConfig:
    """Everything an evaluation run needs; assembled from config file and flags."""

    dataset_dir: Path
    sim_dir: Path
    out_dir: Path
    tasks: tuple[int, ...]
    pose: PoseMetricConfig = field(default_factory=PoseMetricConfig)
    staticness: StaticnessConfig = field(default_factory=StaticnessConfig)
    submission: SubmissionInfo = field(default_factory=SubmissionInfo)
    seed: int = 0

    def __post_init__(self):
        if not self.tasks:
            raise ValidationError("no tasks selected")
        if self.out_dir in (self.dataset_dir, self.sim_dir):
            raise ValidationError("output directory must differ from the input directories")


def _parse_tasks(tasks: str | None, subgroup: int | None) -> tuple[int, ...]:
    if (tasks is None) == (subgroup is None):
        raise click.UsageError("select tasks with exactly one of --tasks or --subgroup")
    if subgroup is not None:
        if subgroup not in SUBGROUPS:
            raise click.UsageError(f"unknown subgroup {subgroup}; choose from {sorted(SUBGROUPS)}")
        return SUBGROUPS[subgroup]
    try:
        parsed = tuple(sorted({int(part) for part in tasks.split(",") if part.strip()}))
    except ValueError:
        raise click.UsageError(f"--tasks must be comma-separated integers, got {tasks!r}") from None
    if not parsed:
        raise click.UsageError("--tasks selected nothing")
    return parsed


def _selection_subgroups(tasks: tuple[int, ...]) -> dict[int, tuple[int, ...]]:
    """Group the selection by subgroup, requiring each one to be complete."""
    grouped: dict[int, list[int]] = {}
    for task in tasks:
        grouped.setdefault(report_mod.subgroup_of_task(task), []).append(task)
    out = {}
    for subgroup_id, members in sorted(grouped.items()):
        missing = sorted(set(SUBGROUPS[subgroup_id]) - set(members))
        if missing:
            raise ValidationError(
                f"subgroup {subgroup_id} incomplete: missing tasks {missing}"
            )
        out[subgroup_id] = tuple(sorted(members))
    return out


def _load_json(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise click.UsageError(f"config {path} must hold a JSON object")
    return data


@click.group()
def main() -> None:
    """Benchmark tooling for paired simulation/dataset trajectory bundles."""
    logging.basicConfig(
        level=os.environ.get("SIMGAP_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.argument("directory", type=click.Path(file_okay=False))
@click.option("--tasks", help="Comma-separated task ids, e.g. 1,2")
@click.option("--subgroup", type=int, help="Validate every task of this subgroup")
def validate(directory: str, tasks: str | None, subgroup: int | None) -> None:
    """Check a folder of repeat bundles against the submission contract."""
    selected = _parse_tasks(tasks, subgroup)
    findings = []
    for task in selected:
        manifest = ingest.scan_bundle(directory, task)
        findings.extend(manifest.findings)
    for finding in findings:
        click.echo(str(finding))
    errors = [f for f in findings if f.severity == "error"]
    click.echo(
        f"checked tasks {','.join(str(t) for t in selected)}: "
        f"{len(errors)} error(s), {len(findings) - len(errors)} warning(s)"
    )
    sys.exit(1 if errors else 0)


def _evaluate_one(cfg: RunConfig, task: int) -> TaskEvaluation:
    log.info("evaluating task %d", task)
    dataset = ingest.load_repeat_set(cfg.dataset_dir, task)
    sim = ingest.load_repeat_set(cfg.sim_dir, task)
    for finding in dataset.findings + sim.findings:
        log.warning("%s", finding)
    return evaluate_task(dataset, sim, cfg.pose, cfg.staticness)


def run_evaluation(cfg: RunConfig) -> dict[int, Path]:
    """Evaluate all selected tasks and write per-subgroup report and appendix."""
    by_subgroup = _selection_subgroups(cfg.tasks)
    with ThreadPoolExecutor(max_workers=min(8, len(cfg.tasks))) as pool:
        evaluations = dict(
            zip(cfg.tasks, pool.map(lambda t: _evaluate_one(cfg, t), cfg.tasks))
        )
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    written: dict[int, Path] = {}
    for subgroup_id, members in by_subgroup.items():
        report = aggregate_subgroup([evaluations[t] for t in members], cfg.submission)
        table = render_table(report)
        (cfg.out_dir / report_filename(subgroup_id)).write_text(table, encoding="utf-8")
        appendix_path = cfg.out_dir / appendix_filename(subgroup_id)
        appendix_path.write_text(report_mod.export_appendix([report]), encoding="utf-8")
        written[subgroup_id] = appendix_path
        click.echo(table, nl=False)
    return written


@main.command()
@click.option("--dataset", type=click.Path(file_okay=False), help="Dataset bundle directory")
@click.option("--sim", type=click.Path(file_okay=False), help="Simulation bundle directory")
@click.option("--tasks", help="Comma-separated task ids, e.g. 1,2")
@click.option("--subgroup", type=int, help="Evaluate every task of this subgroup")
@click.option("--out", type=click.Path(file_okay=False), help="Output directory")
@click.option("--r", "r_weight", type=float, help="Pose metric length-scale weight")
@click.option("--static-eps", type=float, help="Speed threshold for 'moving' [m/s]")
@click.option("--static-window", type=int, help="Consecutive samples required to count as moving")
@click.option("--seed", type=int, help="Seed recorded in the run configuration")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON config file")
@click.option("--simulator-name", help="Submission info: simulator used")
@click.option("--tuned-parameters", help="Submission info: user definable parameters tuned")
@click.option("--running-time", help="Submission info: running time and system specs")
def evaluate(
    dataset,
    sim,
    tasks,
    subgroup,
    out,
    r_weight,
    static_eps,
    static_window,
    seed,
    config_path,
    simulator_name,
    tuned_parameters,
    running_time,
) -> None:
    """Compare a simulation bundle against the dataset bundle and write reports."""
    conf = _load_json(config_path)
    dataset = dataset or conf.get("dataset")
    sim = sim or conf.get("sim")
    out = out or conf.get("out")
    if not dataset or not sim or not out:
        raise click.UsageError("--dataset, --sim and --out are required (flag or config)")
    if tasks is None and subgroup is None:
        tasks = ",".join(str(t) for t in conf["tasks"]) if "tasks" in conf else None
        subgroup = conf.get("subgroup") if tasks is None else None
    submission_conf = conf.get("submission", {})
    info = SubmissionInfo(
        simulator=simulator_name or submission_conf.get("simulator", "unspecified"),
        tuned_parameters=tuned_parameters
        or submission_conf.get("tuned_parameters", "none reported"),
        running_time=running_time or submission_conf.get("running_time", "not reported"),
    )
    try:
        cfg = RunConfig(
            dataset_dir=Path(dataset),
            sim_dir=Path(sim),
            out_dir=Path(out),
            tasks=_parse_tasks(tasks, subgroup),
            pose=PoseMetricConfig(r=r_weight if r_weight is not None else conf.get("r", 37.0)),
            staticness=StaticnessConfig(
                eps_static=static_eps if static_eps is not None else conf.get("static_eps", 0.005),
                window=static_window if static_window is not None else conf.get("static_window", 3),
            ),
            submission=info,
            seed=seed if seed is not None else conf.get("seed", 0),
        )
        run_evaluation(cfg)
    except SimGapError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


def _script_from_config(conf: dict) -> MotionScript:
    segments = tuple(
        Segment(target=np.asarray(seg["target"], dtype=float), duration=float(seg["duration"]))
        for seg in conf.get("script", [])
    )
    return MotionScript(segments)


def _channels_from_config(conf: dict) -> ChannelModels:
    obj = conf.get("object")
    if obj is None:
        return ChannelModels()
    return ChannelModels(
        object_pose=linear_object_motion(
            start_position=obj["start_position"],
            start_orientation=obj["start_orientation"],
            velocity=obj.get("velocity", (0.0, 0.0, 0.0)),
            move_start=obj.get("move_start", 0.0),
            move_stop=obj.get("move_stop", 1.0),
        )
    )


def run_generation(chain_path: Path, conf: dict, out_dir: Path, seed: int) -> list[Path]:
    chain = load_chain(chain_path)
    script = _script_from_config(conf)
    metadata = Metadata(
        task_id=int(conf.get("task_id", 1)),
        repeat_id=1,
        timestamp=conf.get("date", "2020-01-01T00:00:00"),
        source=conf.get("source", "simulation"),
        description=conf.get("description", "synthetic kinematic run"),
    )
    q0 = np.asarray(conf.get("q0", [0.0] * 6), dtype=float)
    base = simulate_task(
        chain, script, channels=_channels_from_config(conf), q0=q0, metadata=metadata
    )
    noise_conf = conf.get("noise", {})
    noise = NoiseConfig(
        sigma_position=float(noise_conf.get("sigma_position", 0.0)),
        sigma_rotation=float(noise_conf.get("sigma_rotation", 0.0)),
    )
    repeats = generate_repeats(base, noise, n=int(conf.get("repeats", 20)), seed=seed)
    return ingest.write_repeat_set(repeats, out_dir)


@main.command()
@click.option("--chain", "chain_path", required=True, type=click.Path(dir_okay=False, exists=True))
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False, exists=True))
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--seed", type=int, default=None, help="Overrides the config seed")
def generate(chain_path, config_path, out, seed) -> None:
    """Produce a synthetic 20-repeat bundle from a chain file and a script config."""
    conf = _load_json(config_path)
    try:
        paths = run_generation(
            Path(chain_path),
            conf,
            Path(out),
            seed if seed is not None else int(conf.get("seed", 0)),
        )
    except (SimGapError, ValueError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(f"wrote {len(paths)} files to {out}")


@main.command("report")
@click.option("--appendix", "appendix_path", required=True, type=click.Path(dir_okay=False, exists=True))
@click.option("--out", type=click.Path(file_okay=False), help="Write tables here instead of stdout")
def report_cmd(appendix_path, out) -> None:
    """Re-render subgroup tables from a previously written appendix file."""
    try:
        reports = import_appendix(Path(appendix_path).read_text(encoding="utf-8"))
    except (SimGapError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    for report in reports:
        table = render_table(report)
        if out:
            out_dir = Path(out)
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / report_filename(report.subgroup_id)).write_text(table, encoding="utf-8")
        else:
            click.echo(table, nl=False)


if __name__ == "__main__":
    main()
