import logging
from collections.abc import Mapping, Sequence

from pydantic import BaseModel

from skill_adapters.config.config import EvalConfig
from skill_adapters.evalsuite.metrics import EvalItem, evaluate_model
from skill_adapters.tasks.task_names import TaskName
from skill_adapters.training.strategies import StrategyRun

logger = logging.getLogger(__name__)


class ForgettingRow(BaseModel):
    task: str
    before: float
    after: float
    delta: float


class ForgettingReport(BaseModel):
    strategy: str
    applicable: bool
    rows: list[ForgettingRow] = []


def forgetting_eval(
    run: StrategyRun,
    items: Mapping[TaskName, Sequence[EvalItem]],
    cfg: EvalConfig,
) -> ForgettingReport:
    """Old-task hits@1 before and after new-task training."""
    if not run.has_forgetting_pair:
        logger.info(f"Forgetting is not applicable to {run.strategy.value}")
        return ForgettingReport(strategy=run.strategy.value, applicable=False)
    rows = []
    for task in run.old_tasks:
        before = evaluate_model(run.before[task], items[task], cfg)
        after = evaluate_model(run.after[task], items[task], cfg)
        rows.append(
            ForgettingRow(task=task.value, before=before, after=after, delta=after - before)
        )
    return ForgettingReport(strategy=run.strategy.value, applicable=True, rows=rows)
