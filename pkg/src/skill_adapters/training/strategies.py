"""Transfer strategies expressed as ordered phase plans.

A phase starts from the pretrained backbone or from the result of an
earlier phase, attaches new modules, trains under one trainable policy, and
then serves some tasks. Running a strategy means running its phases in
order.
"""

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from skill_adapters.adapters.attach import (
    attach_head,
    attach_vanilla,
    wrap_model_hierarchical,
)
from skill_adapters.config.config import RunConfig
from skill_adapters.encoder.model import RetrievalModel, clone_model
from skill_adapters.encoder.trainable import TrainablePolicy
from skill_adapters.errors import ConfigError
from skill_adapters.rng import SeedStreams
from skill_adapters.tasks.generator import TaskData
from skill_adapters.tasks.task_names import TaskName
from skill_adapters.training.strategy_names import Strategy
from skill_adapters.training.trainer import PhaseResult, PhaseSchedule, train_phase

logger = logging.getLogger(__name__)


class Attach(Enum):
    NONE = "none"
    HEAD = "head"
    VANILLA = "vanilla"
    HIERARCHICAL = "hierarchical"


@dataclass(frozen=True)
class Phase:
    name: str
    tasks: tuple[TaskName, ...]
    start: str | None
    attach: Attach
    policy: TrainablePolicy
    serves: tuple[TaskName, ...]


def plan_phases(strategy: Strategy, old: list[TaskName], new: TaskName) -> list[Phase]:
    every = (*old, new)
    match strategy:
        case Strategy.FE:
            return [
                Phase(f"head_{t.value}", (t,), None, Attach.HEAD, TrainablePolicy.HEAD_ONLY, (t,))
                for t in every
            ]
        case Strategy.FT:
            return [
                Phase(f"finetune_{t.value}", (t,), None, Attach.NONE, TrainablePolicy.ALL, (t,))
                for t in every
            ]
        case Strategy.MT_FT:
            return [
                Phase("multitask", tuple(old), None, Attach.NONE, TrainablePolicy.ALL, tuple(old)),
                Phase(
                    f"finetune_{new.value}",
                    (new,),
                    "multitask",
                    Attach.NONE,
                    TrainablePolicy.ALL,
                    (new,),
                ),
            ]
        case Strategy.ADA:
            return [
                Phase(
                    f"adapters_{t.value}",
                    (t,),
                    None,
                    Attach.VANILLA,
                    TrainablePolicy.ADAPTERS_ONLY,
                    (t,),
                )
                for t in every
            ]
        case Strategy.ADAHIT:
            return [
                Phase("base", tuple(old), None, Attach.VANILLA, TrainablePolicy.ADAPTERS_ONLY, ()),
                *(
                    Phase(
                        f"sub_{t.value}",
                        (t,),
                        "base",
                        Attach.HIERARCHICAL,
                        TrainablePolicy.SUB_ADAPTERS_ONLY,
                        (t,),
                    )
                    for t in every
                ),
            ]
        case Strategy.MT_ALL:
            return [
                Phase("multitask", tuple(old), None, Attach.NONE, TrainablePolicy.ALL, tuple(old)),
                Phase(
                    "multitask_all",
                    every,
                    "multitask",
                    Attach.NONE,
                    TrainablePolicy.ALL,
                    every,
                ),
            ]
    raise ConfigError(f"unknown strategy: {strategy}")


@dataclass
class StrategyRun:
    strategy: Strategy
    old_tasks: list[TaskName]
    new_task: TaskName
    models: dict[TaskName, RetrievalModel] = field(default_factory=dict)
    before: dict[TaskName, RetrievalModel] = field(default_factory=dict)
    after: dict[TaskName, RetrievalModel] = field(default_factory=dict)
    phase_models: dict[str, RetrievalModel] = field(default_factory=dict)
    phases: list[PhaseResult] = field(default_factory=list)

    @property
    def base_model(self) -> RetrievalModel | None:
        return self.phase_models.get("base")

    @property
    def has_forgetting_pair(self) -> bool:
        return bool(self.before)


def phase_schedule(run: RunConfig) -> PhaseSchedule:
    s = run.strategy
    return PhaseSchedule(
        epochs=s.epochs,
        batch_size=s.batch_size,
        lr_per_task={task.value: lr for task, lr in s.lr_per_task.items()},
        warmup_fraction=s.warmup_fraction,
    )


def execute_phase(
    phase: Phase,
    start: RetrievalModel,
    run: RunConfig,
    datasets: Mapping[TaskName, TaskData],
    seed_key: str,
    log_dir: Path | None = None,
) -> tuple[RetrievalModel, PhaseResult]:
    """Runs one phase on a copy of `start`; `start` itself is left untouched."""
    seeds = SeedStreams(run.strategy_seed)
    model = clone_model(start, name=f"{seed_key}/{phase.name}")
    init_rng = seeds.generator("init", seed_key, phase.name)
    match phase.attach:
        case Attach.HEAD:
            attach_head(model)
        case Attach.VANILLA:
            attach_vanilla(model, run.adapter, init_rng)
        case Attach.HIERARCHICAL:
            task_id = phase.tasks[0].value if len(phase.tasks) == 1 else None
            wrap_model_hierarchical(model, run.adapter, init_rng, task_id)
    result = train_phase(
        model,
        {t.value: datasets[t].train for t in phase.tasks},
        phase.policy,
        phase_schedule(run),
        seeds.generator("sampling", seed_key, phase.name),
        name=phase.name,
        log_path=None if log_dir is None else log_dir / f"{phase.name}.tsv",
    )
    return model, result


def _new_task_phase(phases: list[Phase], new: TaskName) -> int:
    return max(i for i, phase in enumerate(phases) if new in phase.tasks)


def run_strategy(
    run: RunConfig,
    backbone: RetrievalModel,
    datasets: Mapping[TaskName, TaskData],
    log_dir: Path | None = None,
) -> StrategyRun:
    """Executes the strategy's phases and collects the model serving each task.

    Also records the models compared by forgetting analysis. Strategies
    that share weights across tasks compare the new-task phase's start and
    result; strategies that isolate tasks compare each old task's serving
    model before the new-task phase with the one serving it at the end.
    """
    cfg = run.strategy
    strategy = cfg.strategy
    phases = plan_phases(strategy, cfg.old_tasks, cfg.new_task)
    out = StrategyRun(strategy=strategy, old_tasks=list(cfg.old_tasks), new_task=cfg.new_task)
    new_index = _new_task_phase(phases, cfg.new_task)

    for index, phase in enumerate(phases):
        start = backbone if phase.start is None else out.phase_models[phase.start]
        if index == new_index:
            if strategy.shares_backbone:
                for task in cfg.old_tasks:
                    out.before[task] = start
            elif strategy.isolates_tasks:
                for task in cfg.old_tasks:
                    out.before[task] = clone_model(out.models[task])
        model, result = execute_phase(phase, start, run, datasets, strategy.value, log_dir)
        out.phase_models[phase.name] = model
        out.phases.append(result)
        for task in phase.serves:
            out.models[task] = model
        if index == new_index and strategy.shares_backbone:
            for task in cfg.old_tasks:
                out.after[task] = model

    if strategy.isolates_tasks:
        for task in cfg.old_tasks:
            out.after[task] = out.models[task]
    logger.info(f"Strategy {strategy.value} finished {len(phases)} phases")
    return out
