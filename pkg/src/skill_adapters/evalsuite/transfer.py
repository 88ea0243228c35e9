"""How the data used to train base adapters affects transfer to a target task."""

import logging
from collections.abc import Mapping, Sequence

from pydantic import BaseModel

from skill_adapters.config.config import RunConfig
from skill_adapters.encoder.model import RetrievalModel
from skill_adapters.encoder.trainable import TrainablePolicy
from skill_adapters.errors import ConfigError
from skill_adapters.evalsuite.metrics import EvalItem, evaluate_model
from skill_adapters.tasks.generator import TaskData
from skill_adapters.tasks.task_names import TaskName
from skill_adapters.training.strategies import Attach, Phase, execute_phase, plan_phases
from skill_adapters.training.strategy_names import Strategy

logger = logging.getLogger(__name__)

MT_SOURCE = "MT"


class TransferRow(BaseModel):
    source: str
    target: str
    zero_shot: float
    fine_tuned: float | None = None


class TransferTable(BaseModel):
    rows: list[TransferRow]


class BaseAdapterStudy:
    """Trains (and caches) base adapters per source and evaluates them on targets.

    A single-task source trains exactly like that task's Ada phase and the
    MT source exactly like the hierarchical strategy's base phase, so a
    study row matches the corresponding strategy run for the same seed.
    """

    def __init__(
        self,
        run: RunConfig,
        backbone: RetrievalModel,
        datasets: Mapping[TaskName, TaskData],
        items: Mapping[TaskName, Sequence[EvalItem]],
    ) -> None:
        self.run = run
        self.backbone = backbone
        self.datasets = datasets
        self.items = items
        self._bases: dict[str, RetrievalModel] = {}

    def sources(self) -> list[str]:
        return [MT_SOURCE, *(t.value for t in self.run.strategy.old_tasks)]

    def _seed_key(self, source: str) -> str:
        return Strategy.ADAHIT.value if source == MT_SOURCE else Strategy.ADA.value

    def _base_phase(self, source: str) -> Phase:
        cfg = self.run.strategy
        if source == MT_SOURCE:
            return plan_phases(Strategy.ADAHIT, cfg.old_tasks, cfg.new_task)[0]
        try:
            task = TaskName(source)
        except ValueError as e:
            raise ConfigError(f"unknown base-adapter source: {source}") from e
        return Phase(
            f"adapters_{task.value}",
            (task,),
            None,
            Attach.VANILLA,
            TrainablePolicy.ADAPTERS_ONLY,
            (task,),
        )

    def base_model(self, source: str) -> RetrievalModel:
        if source not in self._bases:
            logger.info(f"Training base adapters on {source}")
            model, _ = execute_phase(
                self._base_phase(source),
                self.backbone,
                self.run,
                self.datasets,
                self._seed_key(source),
            )
            self._bases[source] = model
        return self._bases[source]

    def zero_shot(self, source: str, target: TaskName) -> float:
        return evaluate_model(self.base_model(source), self.items[target], self.run.eval)

    def fine_tuned(self, source: str, target: TaskName) -> float:
        """Frozen base from `source`, task-specific sub-adapters trained on `target`."""
        phase = Phase(
            f"sub_{target.value}",
            (target,),
            "base",
            Attach.HIERARCHICAL,
            TrainablePolicy.SUB_ADAPTERS_ONLY,
            (target,),
        )
        model, _ = execute_phase(
            phase, self.base_model(source), self.run, self.datasets, self._seed_key(source)
        )
        return evaluate_model(model, self.items[target], self.run.eval)

    def table(self, target: TaskName, fine_tune: bool = True) -> TransferTable:
        rows = [
            TransferRow(
                source=source,
                target=target.value,
                zero_shot=self.zero_shot(source, target),
                fine_tuned=self.fine_tuned(source, target) if fine_tune else None,
            )
            for source in self.sources()
        ]
        return TransferTable(rows=rows)


def zero_shot_transfer(study: BaseAdapterStudy, source: str, target: TaskName) -> float:
    return study.zero_shot(source, target)
