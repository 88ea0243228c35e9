import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from skill_adapters.encoder.forward import score_matrix
from skill_adapters.encoder.model import RetrievalModel
from skill_adapters.encoder.trainable import TrainablePolicy, set_trainable
from skill_adapters.tasks.generator import Example
from skill_adapters.tensorcore.tape import Tape, backward
from skill_adapters.training.loss import in_batch_loss
from skill_adapters.training.optimizer import AdaMaxState, adamax_step
from skill_adapters.training.sampler import Batch, ProportionalScheduler
from skill_adapters.training.schedule import phase_lr

logger = logging.getLogger(__name__)

LOG_COLUMNS = ("step", "task_id", "loss", "lr", "theta_delta")


@dataclass(frozen=True)
class PhaseSchedule:
    epochs: int
    batch_size: int
    lr_per_task: Mapping[str, float]
    warmup_fraction: float


@dataclass
class StepRecord:
    step: int
    task_id: str
    loss: float
    lr: float
    theta_delta: int

    def to_line(self) -> str:
        return f"{self.step}\t{self.task_id}\t{self.loss:.8g}\t{self.lr:.8g}\t{self.theta_delta}"


@dataclass
class PhaseResult:
    name: str
    tasks: list[str]
    policy: TrainablePolicy
    theta_delta: int
    total_steps: int
    records: list[StepRecord] = field(default_factory=list)
    epoch_losses: list[float] = field(default_factory=list)


def write_phase_log(path: Path, records: Sequence[StepRecord]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write("\t".join(LOG_COLUMNS) + "\n")
        for record in records:
            f.write(record.to_line() + "\n")


def train_step(
    model: RetrievalModel, batch: Batch, state: AdaMaxState, lr: float
) -> float:
    with Tape() as tape:
        loss = in_batch_loss(score_matrix(model, batch.contexts, batch.golds))
    backward(tape, loss)
    params = model.parameters()
    adamax_step(state, params, lr)
    for p in params:
        p.zero_grad()
    return loss.item()


def train_phase(
    model: RetrievalModel,
    datasets: Mapping[str, Sequence[Example]],
    policy: TrainablePolicy,
    schedule: PhaseSchedule,
    rng: np.random.Generator,
    name: str = "phase",
    log_path: Path | None = None,
) -> PhaseResult:
    """Minibatch AdaMax on the in-batch loss; updates `model` in place.

    Multi-task phases draw each batch from a single task, with tasks
    represented in proportion to their dataset sizes.
    """
    theta_delta = set_trainable(model, policy)
    scheduler = ProportionalScheduler(datasets, schedule.batch_size, rng)
    total_steps = schedule.epochs * len(scheduler)
    result = PhaseResult(
        name=name,
        tasks=list(datasets),
        policy=policy,
        theta_delta=theta_delta,
        total_steps=total_steps,
    )
    logger.info(
        f"Phase {name}: tasks={','.join(datasets)} policy={policy.value} "
        f"theta_delta={theta_delta} steps={total_steps}"
    )
    if total_steps == 0:
        if log_path is not None:
            write_phase_log(log_path, [])
        return result

    state = AdaMaxState()
    step = 0
    for epoch in range(schedule.epochs):
        losses = []
        for batch in scheduler.epoch():
            step += 1
            lr = phase_lr(
                step,
                total_steps,
                schedule.lr_per_task[batch.task_id],
                schedule.warmup_fraction,
            )
            loss = train_step(model, batch, state, lr)
            losses.append(loss)
            record = StepRecord(step, batch.task_id, loss, lr, theta_delta)
            result.records.append(record)
            logger.debug(record.to_line())
        result.epoch_losses.append(float(np.mean(losses)))
        logger.info(f"Phase {name} epoch {epoch + 1}: mean loss {result.epoch_losses[-1]:.4f}")

    if log_path is not None:
        write_phase_log(log_path, result.records)
    return result
