"""Synthetic large, unbalanced job-shop instances.

Generation mirrors a real shop with 51 machines, 828 jobs and 6057 operations:

1. draw the number of jobs and machines uniformly from their ranges;
2. perturb the machine-type probabilities with multiplicative noise, then
   give every machine a type drawn from the noisy distribution;
3. for each job draw a template (common or unique), an operation count from
   the template's Gaussian (clamped to 1..20), and for each operation a
   machine (type by the noisy distribution, then uniform within the type) and
   a duration from the machine type's Gaussian, rounded and floored at 1.

The shipped defaults are calibrated only to the public aggregates (about 7.3
operations per job, sizes within 1..20, strongly uneven machine loads).
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from mcts_jssp.instance import Instance, Job, Operation, instance_stats, serialize_instance

MAX_OPS_PER_JOB = 20


@dataclass(frozen=True)
class MachineTypeSpec:
    type_id: str
    weight: float
    mean_duration: float
    std_duration: float


@dataclass(frozen=True)
class JobTemplateSpec:
    kind: str
    weight: float
    size_mean: float
    size_std: float


@dataclass(frozen=True)
class GeneratorConfig:
    job_range: tuple[int, int] = (600, 1000)
    machine_range: tuple[int, int] = (50, 70)
    machine_types: tuple[MachineTypeSpec, ...] = field(default_factory=tuple)
    job_templates: tuple[JobTemplateSpec, ...] = field(default_factory=tuple)
    noise: float = 0.2
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "job_range", tuple(self.job_range))
        object.__setattr__(self, "machine_range", tuple(self.machine_range))
        object.__setattr__(self, "machine_types", tuple(self.machine_types))
        object.__setattr__(self, "job_templates", tuple(self.job_templates))

    def validate(self) -> list[str]:
        problems = []
        for label, (lo, hi) in (("job_range", self.job_range), ("machine_range", self.machine_range)):
            if lo > hi:
                problems.append(f"{label} is empty: [{lo}, {hi}]")
            if lo < 1:
                problems.append(f"{label} must start at 1 or more")
        if self.noise < 0:
            problems.append("noise must be nonnegative")
        if not self.machine_types:
            problems.append("at least one machine type is required")
        if not self.job_templates:
            problems.append("at least one job template is required")
        for mt in self.machine_types:
            if mt.weight <= 0 or mt.mean_duration <= 0 or mt.std_duration < 0:
                problems.append(f"machine type {mt.type_id!r} has invalid parameters")
        for jt in self.job_templates:
            if jt.weight <= 0 or jt.size_std < 0:
                problems.append(f"job template {jt.kind!r} has invalid parameters")
        return problems

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> GeneratorConfig:
        doc = dict(doc)
        doc["machine_types"] = tuple(MachineTypeSpec(**mt) for mt in doc.get("machine_types", ()))
        doc["job_templates"] = tuple(JobTemplateSpec(**jt) for jt in doc.get("job_templates", ()))
        return cls(**doc)


def default_config() -> GeneratorConfig:
    """Defaults tuned so the mean job size is about 6057 / 828 = 7.3 operations."""
    return GeneratorConfig(
        machine_types=(
            MachineTypeSpec("light", 0.45, 8.0, 3.0),
            MachineTypeSpec("standard", 0.33, 25.0, 8.0),
            MachineTypeSpec("heavy", 0.16, 70.0, 20.0),
            MachineTypeSpec("bottleneck", 0.06, 180.0, 50.0),
        ),
        job_templates=(
            JobTemplateSpec("common", 0.75, 7.9, 3.0),
            JobTemplateSpec("unique", 0.25, 5.0, 4.5),
        ),
    )


def scaled_config(job_range=(60, 100), machine_range=(10, 14), base: GeneratorConfig | None = None) -> GeneratorConfig:
    return replace(base or default_config(), job_range=tuple(job_range), machine_range=tuple(machine_range))


def _pick(rng: random.Random, weights: list[float]) -> int:
    return rng.choices(range(len(weights)), weights=weights)[0]


def generate(cfg: GeneratorConfig, seed: int | None = None) -> Instance:
    problems = cfg.validate()
    if problems:
        raise ValueError("invalid generator config: " + "; ".join(problems))
    seed = cfg.seed if seed is None else seed
    rng = random.Random(seed)

    n_jobs = rng.randint(*cfg.job_range)
    n_machines = rng.randint(*cfg.machine_range)

    eps = cfg.noise
    probs = [mt.weight * (1.0 + rng.uniform(-eps, eps)) for mt in cfg.machine_types]
    total = sum(probs)
    probs = [p / total for p in probs]
    machine_type = [_pick(rng, probs) for _ in range(n_machines)]
    members: list[list[int]] = [[] for _ in cfg.machine_types]
    for machine, t in enumerate(machine_type):
        members[t].append(machine)
    # types that received no machine cannot host operations
    op_type_probs = [p if members[t] else 0.0 for t, p in enumerate(probs)]

    template_weights = [jt.weight for jt in cfg.job_templates]
    jobs = []
    for j in range(n_jobs):
        tpl = cfg.job_templates[_pick(rng, template_weights)]
        size = round(rng.gauss(tpl.size_mean, tpl.size_std))
        size = min(max(size, 1), MAX_OPS_PER_JOB)
        ops = []
        for k in range(size):
            t = _pick(rng, op_type_probs)
            machine = rng.choice(members[t])
            mt = cfg.machine_types[t]
            duration = max(1, round(rng.gauss(mt.mean_duration, mt.std_duration)))
            ops.append(Operation(j, k, machine, duration))
        jobs.append(Job(j, tuple(ops), 1))
    return Instance(tuple(jobs), n_machines, f"synth-{seed}")


def generate_suite(
    cfg: GeneratorConfig, n_instances: int, base_seed: int, out_dir: str | Path | None = None
) -> list[Instance]:
    """Generate ``n_instances`` instances with consecutive seeds, optionally writing them out."""
    if n_instances < 1:
        raise ValueError("n_instances must be positive")
    seeds = range(base_seed, base_seed + n_instances)
    instances = [generate(cfg, seed) for seed in seeds]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        entries = []
        for seed, inst in zip(seeds, instances):
            fname = f"{inst.name}.json"
            (out / fname).write_text(serialize_instance(inst) + "\n", encoding="utf-8")
            stats = instance_stats(inst)
            entries.append(
                {
                    "file": fname,
                    "seed": seed,
                    "jobs": stats.job_count,
                    "machines": stats.machine_count,
                    "operations": stats.op_count,
                    "ops_per_job_max": stats.ops_per_job_max,
                }
            )
        manifest = {"config": cfg.to_dict(), "base_seed": base_seed, "instances": entries}
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return instances
