"""Shared state of one CLI invocation: config, output layout, data and models."""

import logging
from pathlib import Path

import numpy as np
from filelock import FileLock

from skill_adapters.adapters.attach import (
    attach_head,
    attach_vanilla,
    wrap_model_hierarchical,
)
from skill_adapters.cli.checkpoint import CheckpointScope, load_checkpoint, save_checkpoint
from skill_adapters.cli.layout import (
    ForgettingEntry,
    ModelRef,
    OutputLayout,
    PhaseEntry,
    RunManifest,
    TaskEntry,
)
from skill_adapters.config.config import RunConfig, config_digest
from skill_adapters.encoder.model import RetrievalModel, clone_model
from skill_adapters.encoder.pretrain import init_backbone, pretrain_backbone
from skill_adapters.evalsuite.metrics import EvalItem, build_eval_items
from skill_adapters.tasks.generator import TaskData, generate_tasks
from skill_adapters.tasks.task_names import TaskName
from skill_adapters.training.strategies import Attach, Phase, StrategyRun, plan_phases
from skill_adapters.training.strategy_names import Strategy

logger = logging.getLogger(__name__)

_SCOPES = {
    Attach.NONE: CheckpointScope.FULL,
    Attach.HEAD: CheckpointScope.FULL,
    Attach.VANILLA: CheckpointScope.ADAPTERS_ONLY,
    Attach.HIERARCHICAL: CheckpointScope.SUB_ADAPTERS_ONLY,
}
BASE_CHECKPOINT = "base.ckpt"


def _freeze(model: RetrievalModel) -> RetrievalModel:
    for p in model.parameters():
        p.set_trainable(False)
    return model


def serving_phase(phases: list[Phase], task: TaskName) -> Phase:
    return [phase for phase in phases if task in phase.serves][-1]


class Lab:
    def __init__(self, run: RunConfig, root: Path | None = None) -> None:
        self.run = run
        self.layout = OutputLayout(root if root is not None else run.output_dir)
        self._datasets: dict[TaskName, TaskData] | None = None
        self._items: dict[TaskName, list[EvalItem]] = {}
        self._backbone: RetrievalModel | None = None

    @property
    def tasks(self) -> list[TaskName]:
        return self.run.strategy.all_tasks

    def datasets(self) -> dict[TaskName, TaskData]:
        if self._datasets is None:
            self._datasets = generate_tasks(self.run.data, self.tasks, self.run.seed)
        return self._datasets

    def eval_items(self, task: TaskName) -> list[EvalItem]:
        if task not in self._items:
            self._items[task] = build_eval_items(
                self.datasets()[task], self.run.eval, self.run.eval_seed
            )
        return self._items[task]

    def all_eval_items(self) -> dict[TaskName, list[EvalItem]]:
        return {task: self.eval_items(task) for task in self.tasks}

    def backbone(self, force: bool = False) -> RetrievalModel:
        """The pretrained backbone, pretraining it once per output directory."""
        if self._backbone is not None and not force:
            return self._backbone
        self.layout.checkpoints_dir.mkdir(parents=True, exist_ok=True)
        with FileLock(self.layout.backbone_lock):
            if force or not self.layout.backbone.exists():
                logger.info("Pretraining backbone")
                model, _ = pretrain_backbone(self.run)
                save_checkpoint(model, CheckpointScope.FULL, self.layout.backbone)
            model = init_backbone(self.run)
            load_checkpoint(model, self.layout.backbone)
        self._backbone = _freeze(model)
        return self._backbone

    def _save_model(
        self, strategy: Strategy, model: RetrievalModel, attach: Attach, relative: str
    ) -> ModelRef:
        scope = _SCOPES[attach]
        save_checkpoint(model, scope, self.layout.run_dir(strategy) / relative)
        return ModelRef(
            attach=attach.value,
            checkpoint=relative,
            scope=scope.name.lower(),
            base_checkpoint=BASE_CHECKPOINT if attach is Attach.HIERARCHICAL else None,
        )

    def save_run(self, result: StrategyRun) -> RunManifest:
        strategy = result.strategy
        phases = plan_phases(strategy, result.old_tasks, result.new_task)
        if result.base_model is not None:
            save_checkpoint(
                result.base_model,
                CheckpointScope.ADAPTERS_ONLY,
                self.layout.run_dir(strategy) / BASE_CHECKPOINT,
            )
        refs: dict[int, ModelRef] = {}
        entries = []
        for task in [*result.old_tasks, result.new_task]:
            model = result.models[task]
            ref = self._save_model(
                strategy, model, serving_phase(phases, task).attach, f"{task.value}.ckpt"
            )
            refs.setdefault(id(model), ref)
            entries.append(TaskEntry(task=task.value, model=ref))

        forgetting = []
        for task in result.old_tasks if result.has_forgetting_pair else []:
            before = result.before[task]
            attach = (
                serving_phase(phases, task).attach if strategy.isolates_tasks else Attach.NONE
            )
            before_ref = self._save_model(strategy, before, attach, f"before/{task.value}.ckpt")
            after_ref = refs[id(result.after[task])]
            forgetting.append(ForgettingEntry(task=task.value, before=before_ref, after=after_ref))

        manifest = RunManifest(
            strategy=strategy.value,
            seed=self.run.strategy_seed,
            config_digest=config_digest(self.run.encoder).hex(),
            old_tasks=[t.value for t in result.old_tasks],
            new_task=result.new_task.value,
            tasks=entries,
            forgetting=forgetting,
            phases=[
                PhaseEntry(
                    name=p.name,
                    tasks=p.tasks,
                    policy=p.policy.value,
                    theta_delta=p.theta_delta,
                    steps=p.total_steps,
                )
                for p in result.phases
            ],
        )
        path = self.layout.manifest(strategy)
        path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.info(f"Wrote run manifest {path}")
        return manifest

    def load_manifest(self, strategy: Strategy) -> RunManifest:
        path = self.layout.manifest(strategy)
        if not path.exists():
            raise FileNotFoundError(
                f"no run for {strategy.value} under {self.layout.root}; "
                f"run `skill-adapters run --strategy {strategy.value}` first"
            )
        return RunManifest.model_validate_json(path.read_text(encoding="utf-8"))

    def restore(self, strategy: Strategy, ref: ModelRef) -> RetrievalModel:
        """Rebuilds a saved model on top of the pretrained backbone."""
        run_dir = self.layout.run_dir(strategy)
        model = clone_model(self.backbone(), name=f"{strategy.value}/{ref.checkpoint}")
        attach = Attach(ref.attach)
        # Structure only; every adapter weight is overwritten by the load.
        structure_rng = np.random.default_rng(0)
        if attach is Attach.HEAD:
            attach_head(model)
        if attach in (Attach.VANILLA, Attach.HIERARCHICAL):
            attach_vanilla(model, self.run.adapter, structure_rng)
        if attach is Attach.HIERARCHICAL:
            if ref.base_checkpoint is None:
                raise FileNotFoundError(f"{ref.checkpoint} has no base checkpoint")
            load_checkpoint(model, run_dir / ref.base_checkpoint)
            wrap_model_hierarchical(model, self.run.adapter, structure_rng)
        load_checkpoint(model, run_dir / ref.checkpoint)
        return _freeze(model)

    def restore_run(self, strategy: Strategy) -> StrategyRun:
        manifest = self.load_manifest(strategy)
        result = StrategyRun(
            strategy=strategy,
            old_tasks=[TaskName(t) for t in manifest.old_tasks],
            new_task=TaskName(manifest.new_task),
        )
        for entry in manifest.tasks:
            result.models[TaskName(entry.task)] = self.restore(strategy, entry.model)
        for entry in manifest.forgetting:
            task = TaskName(entry.task)
            result.before[task] = self.restore(strategy, entry.before)
            result.after[task] = self.restore(strategy, entry.after)
        return result
