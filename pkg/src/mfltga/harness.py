"""Experiment harness: configs, single/multi-task runners, metrics, emission.

Modes
-----
``st`` solves every task in its own independent run (the single-task engine
is literally the multitask loop with one task).  ``mt`` solves all tasks in
one shared population.  Run r of a config uses seed = base_seed XOR r, so the
two modes can be compared on paired seeds.

Outputs
-------
``summary.csv`` with one row per (instance, mode, task), ``trace_<run>.csv``
convergence tables with per-task best costs and normalized objectives, and
``config.json`` with the resolved configuration and per-run seeds.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .engine import RunRecord, run_mfltga
from .errors import ConfigurationError
from .problems import cluspt, trap


@dataclass
class ExperimentConfig:
    problems: list
    mode: str = "mt"
    num_tasks: int = 2
    pop_size: int = 128
    max_evals: int = 1_000_000
    runs: int = 10
    seed: int = 42
    max_p: int = 10
    mutation_rate: float = 0.05
    rmp: float = 0.5  # accepted for config compatibility; the mating flow never reads it
    trace_every: int = 1
    out_path: Optional[str] = None

    def validate(self) -> "ExperimentConfig":
        if self.mode not in ("st", "mt"):
            raise ConfigurationError(f"mode must be 'st' or 'mt', got {self.mode!r}")
        if not self.problems:
            raise ConfigurationError("at least one problem descriptor is required")
        if self.num_tasks < 1:
            raise ConfigurationError("number of tasks must be >= 1")
        if len(self.problems) not in (1, self.num_tasks):
            raise ConfigurationError(
                "give one problem (replicated across tasks) or exactly one per task"
            )
        if self.pop_size < 2 or self.pop_size % 2 != 0:
            raise ConfigurationError("population size must be even and >= 2")
        if self.max_evals < 0:
            raise ConfigurationError("max_evals must be >= 0")
        if self.runs < 1:
            raise ConfigurationError("runs must be >= 1")
        if self.max_p < 0:
            raise ConfigurationError("max_p must be >= 0")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigurationError("mutation rate must lie in [0, 1]")
        if not 0.0 <= self.rmp <= 1.0:
            raise ConfigurationError("rmp must lie in [0, 1]")
        if self.trace_every < 1:
            raise ConfigurationError("trace_every must be >= 1")
        return self

    def run_seed(self, run_index: int) -> int:
        return self.seed ^ run_index

    def to_dict(self) -> dict:
        return {
            "problems": list(self.problems),
            "mode": self.mode,
            "num_tasks": self.num_tasks,
            "pop_size": self.pop_size,
            "max_evals": self.max_evals,
            "runs": self.runs,
            "seed": self.seed,
            "max_p": self.max_p,
            "mutation_rate": self.mutation_rate,
            "rmp": self.rmp,
            "trace_every": self.trace_every,
            "out_path": self.out_path,
        }


def parse_problem_descriptor(text: str):
    """Split a descriptor like 'dtf:k=3,m=5' or 'cluspt:path/to.file'."""
    kind, sep, rest = text.partition(":")
    if not sep or not rest:
        raise ConfigurationError(f"malformed problem descriptor {text!r}")
    kind = kind.strip().lower()
    if kind == "dtf":
        params = {}
        for part in rest.split(","):
            key, eq, value = part.partition("=")
            if not eq:
                raise ConfigurationError(f"malformed dtf parameter {part!r}")
            params[key.strip()] = value.strip()
        try:
            spec = trap.TrapSpec(int(params.pop("k")), int(params.pop("m")))
        except KeyError as missing:
            raise ConfigurationError(f"dtf descriptor needs k and m, missing {missing}")
        except ValueError:
            raise ConfigurationError(f"dtf parameters must be integers in {text!r}")
        if params:
            raise ConfigurationError(f"unknown dtf parameters {sorted(params)}")
        return "dtf", spec
    if kind == "cluspt":
        return "cluspt", rest.strip()
    raise ConfigurationError(f"unknown problem kind {kind!r}")


def resolve_tasks(config: ExperimentConfig):
    """Build the task list (ids 1..K) and per-task instance labels."""
    descriptors = list(config.problems)
    if len(descriptors) == 1 and config.num_tasks > 1:
        descriptors = descriptors * config.num_tasks
    parsed = [parse_problem_descriptor(d) for d in descriptors]
    kinds = {kind for kind, _ in parsed}
    if len(kinds) > 1:
        raise ConfigurationError(
            "tasks must share a gene alphabet; mixing dtf and cluspt is not supported"
        )
    tasks = []
    labels = []
    if kinds == {"dtf"}:
        for tid, ((_, spec), label) in enumerate(zip(parsed, descriptors), start=1):
            tasks.append(trap.make_task(spec, task_id=tid))
            labels.append(label)
    else:
        graphs = [cluspt.parse_file(payload) for _, payload in parsed]
        alphabet = max(max(g.n for g in graphs), 2)
        for tid, (g, label) in enumerate(zip(graphs, descriptors), start=1):
            tasks.append(cluspt.make_task(g, task_id=tid, alphabet_size=alphabet))
            labels.append(label)
    return tasks, labels


def run_st(config: ExperimentConfig):
    """Independent single-task runs: {task_id: [RunRecord per run]}."""
    config.validate()
    tasks, _ = resolve_tasks(config)
    records = {}
    for task in tasks:
        solo = dataclasses.replace(task, task_id=1)
        records[task.task_id] = [
            run_mfltga(
                [solo],
                pop_size=config.pop_size,
                max_evals=config.max_evals,
                seed=config.run_seed(r),
                max_p=config.max_p,
                mutation_rate=config.mutation_rate,
                trace_every=config.trace_every,
            )
            for r in range(config.runs)
        ]
    return records


def run_mt(config: ExperimentConfig):
    """Shared-population multitask runs: [RunRecord per run]."""
    config.validate()
    tasks, _ = resolve_tasks(config)
    return [
        run_mfltga(
            tasks,
            pop_size=config.pop_size,
            max_evals=config.max_evals,
            seed=config.run_seed(r),
            max_p=config.max_p,
            mutation_rate=config.mutation_rate,
            trace_every=config.trace_every,
        )
        for r in range(config.runs)
    ]


def performance_improvement(cost_a: float, cost_b: float) -> float:
    """Relative improvement of metric A over reference metric B, in percent."""
    if cost_b == 0:
        raise ConfigurationError("performance improvement undefined: reference is zero")
    return (cost_b - cost_a) / cost_b * 100.0


@dataclass
class SummaryRow:
    instance: str
    mode: str
    task: int
    runs: int
    num_opt: int
    mean_num_evals: Optional[float]
    bf: float
    avg: float


@dataclass
class SummaryTable:
    rows: list


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    labels: list
    st_records: Optional[dict] = None  # task_id -> [RunRecord]
    mt_records: Optional[list] = None


def _per_task_stats(instance, mode, task_id, per_run):
    """per_run: list of (best_cost, evals_to_success or None) for one task."""
    bests = [b for b, _ in per_run]
    successes = [e for _, e in per_run if e is not None]
    return SummaryRow(
        instance=instance,
        mode=mode,
        task=task_id,
        runs=len(per_run),
        num_opt=len(successes),
        mean_num_evals=(sum(successes) / len(successes)) if successes else None,
        bf=min(bests),
        avg=sum(bests) / len(bests),
    )


def summarize(result: ExperimentResult) -> SummaryTable:
    rows = []
    if result.st_records is not None:
        for task_id in sorted(result.st_records):
            records = result.st_records[task_id]
            per_run = [(rec.best_found[0], rec.evals_to_success[0]) for rec in records]
            rows.append(
                _per_task_stats(result.labels[task_id - 1], "st", task_id, per_run)
            )
    if result.mt_records is not None:
        num_tasks = len(result.mt_records[0].task_ids)
        for pos in range(num_tasks):
            per_run = [
                (rec.best_found[pos], rec.evals_to_success[pos])
                for rec in result.mt_records
            ]
            rows.append(
                _per_task_stats(result.labels[pos], "mt", pos + 1, per_run)
            )
    return SummaryTable(rows=rows)


def best_at(record: RunRecord, task_pos: int, generation: int) -> float:
    """Best-so-far cost of one task at a generation (trace carry-forward)."""
    value = record.trace[0].best[task_pos]
    for point in record.trace:
        if point.generation > generation:
            break
        value = point.best[task_pos]
    return value


def normalized_objective(
    record: RunRecord, task_pos: int, generation: int, bf_star: float
) -> float:
    """Best cost rescaled to [0, 1] between the run's initial best and bf_star."""
    init = record.trace[0].best[task_pos]
    value = best_at(record, task_pos, generation)
    span = init - bf_star
    if span <= 0:
        return 0.0
    return min(1.0, max(0.0, (value - bf_star) / span))


def averaged_normalized_objective(
    record: RunRecord, generation: int, bf_stars: Sequence[float]
) -> float:
    scores = [
        normalized_objective(record, pos, generation, bf_stars[pos])
        for pos in range(len(record.task_ids))
    ]
    return sum(scores) / len(scores)


def _bf_stars(result: ExperimentResult, num_tasks: int):
    """Best cost seen per task across every run and mode of the experiment."""
    stars = [math.inf] * num_tasks
    if result.st_records is not None:
        for task_id, records in result.st_records.items():
            for rec in records:
                stars[task_id - 1] = min(stars[task_id - 1], rec.best_found[0])
    if result.mt_records is not None:
        for rec in result.mt_records:
            for pos in range(num_tasks):
                stars[pos] = min(stars[pos], rec.best_found[pos])
    return stars


def _evals_at(record: RunRecord, generation: int) -> int:
    value = record.trace[0].evals
    for point in record.trace:
        if point.generation > generation:
            break
        value = point.evals
    return value


def mt_trace_rows(record: RunRecord, stars):
    """Per-generation rows [gen, evals, best..., f_norm..., f_norm_avg] of one run."""
    num_tasks = len(record.task_ids)
    rows = []
    for gen in range(record.generations + 1):
        bests = [best_at(record, pos, gen) for pos in range(num_tasks)]
        norms = [
            normalized_objective(record, pos, gen, stars[pos]) for pos in range(num_tasks)
        ]
        rows.append([gen, _evals_at(record, gen)] + bests + norms + [sum(norms) / len(norms)])
    return rows


def st_serial_trace_rows(records: Sequence[RunRecord], stars):
    """Serial single-task schedule merged onto one generation axis.

    The tasks' runs execute one after another (task 1 first), the way a
    single-task solver would work through the task list with the combined
    budget.  Before a task's leg starts its best cost is unknown (emitted as
    None) and its normalized objective sits at 1.0; after the leg ends its
    values stay frozen.
    """
    lengths = [rec.generations for rec in records]
    offsets = []
    acc = 0
    for length in lengths:
        offsets.append(acc)
        acc += length
    total = acc
    rows = []
    for gen in range(total + 1):
        bests = []
        norms = []
        evals = 0
        for pos, rec in enumerate(records):
            local = gen - offsets[pos]
            if local < 0:
                bests.append(None)
                norms.append(1.0)
            else:
                local = min(local, lengths[pos])
                bests.append(best_at(rec, 0, local))
                norms.append(normalized_objective(rec, 0, local, stars[pos]))
                evals += _evals_at(rec, local)
        rows.append([gen, evals] + bests + norms + [sum(norms) / len(norms)])
    return rows


def _trace_rows(result: ExperimentResult, run_index: int, num_tasks: int, stars):
    """Merged per-generation trace for one run index of the experiment's mode."""
    if result.mt_records is not None:
        return mt_trace_rows(result.mt_records[run_index], stars)
    records = [result.st_records[tid][run_index] for tid in sorted(result.st_records)]
    return st_serial_trace_rows(records, stars)


def write_summary_csv(table: SummaryTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["instance", "mode", "task", "runs", "num_opt", "mean_num_evals", "bf", "avg"]
        )
        for row in table.rows:
            writer.writerow(
                [
                    row.instance,
                    row.mode,
                    row.task,
                    row.runs,
                    row.num_opt,
                    "" if row.mean_num_evals is None else repr(row.mean_num_evals),
                    repr(row.bf),
                    repr(row.avg),
                ]
            )


def read_summary_csv(path) -> SummaryTable:
    rows = []
    with open(path, "r", newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        for entry in reader:
            rows.append(
                SummaryRow(
                    instance=entry["instance"],
                    mode=entry["mode"],
                    task=int(entry["task"]),
                    runs=int(entry["runs"]),
                    num_opt=int(entry["num_opt"]),
                    mean_num_evals=(
                        None if entry["mean_num_evals"] == "" else float(entry["mean_num_evals"])
                    ),
                    bf=float(entry["bf"]),
                    avg=float(entry["avg"]),
                )
            )
    return SummaryTable(rows=rows)


def write_outputs(result: ExperimentResult) -> None:
    """Emit summary.csv, trace_<run>.csv and config.json under out_path."""
    out = result.config.out_path
    if out is None:
        return
    os.makedirs(out, exist_ok=True)
    table = summarize(result)
    write_summary_csv(table, os.path.join(out, "summary.csv"))
    num_tasks = len(result.labels)
    stars = _bf_stars(result, num_tasks)
    header = (
        ["generation", "evals"]
        + [f"best_task{pos + 1}" for pos in range(num_tasks)]
        + [f"f{pos + 1}_norm" for pos in range(num_tasks)]
        + ["f_norm_avg"]
    )
    for run_index in range(result.config.runs):
        rows = _trace_rows(result, run_index, num_tasks, stars)
        with open(
            os.path.join(out, f"trace_{run_index}.csv"), "w", newline="", encoding="utf-8"
        ) as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            for row in rows:
                writer.writerow(
                    [row[0], row[1]]
                    + ["" if x is None else repr(x) for x in row[2 : 2 + num_tasks]]
                    + [repr(x) for x in row[2 + num_tasks :]]
                )
    payload = result.config.to_dict()
    payload["instances"] = list(result.labels)
    payload["run_seeds"] = [result.config.run_seed(r) for r in range(result.config.runs)]
    payload["seed_policy"] = "run r uses seed = base_seed XOR r"
    payload["notes"] = "rmp is accepted for compatibility but unused by the mating flow"
    with open(os.path.join(out, "config.json"), "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the configured mode over all runs and emit outputs if requested."""
    config.validate()
    _, labels = resolve_tasks(config)
    result = ExperimentResult(config=config, labels=labels)
    if config.mode == "st":
        result.st_records = run_st(config)
    else:
        result.mt_records = run_mt(config)
    write_outputs(result)
    return result
