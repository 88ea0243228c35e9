"""Size-proportional multi-task batching.

Each batch comes from one task. Every epoch, each task's examples are
shuffled and cut into batches, and the pooled list of batch assignments is
shuffled, so a task's share of batches is proportional to its dataset size.
"""

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from skill_adapters.tasks.generator import Example

logger = logging.getLogger(__name__)

MIN_BATCH = 2


@dataclass(frozen=True)
class Batch:
    task_id: str
    examples: tuple[Example, ...]

    @property
    def contexts(self) -> list[tuple[int, ...]]:
        return [ex.context for ex in self.examples]

    @property
    def golds(self) -> list[tuple[int, ...]]:
        return [ex.gold for ex in self.examples]


def batches_per_epoch(sizes: Mapping[str, int], batch_size: int) -> int:
    total = 0
    for size in sizes.values():
        full, rest = divmod(size, batch_size)
        total += full + (1 if rest >= MIN_BATCH else 0)
    return total


class ProportionalScheduler:
    def __init__(
        self,
        datasets: Mapping[str, Sequence[Example]],
        batch_size: int,
        rng: np.random.Generator,
    ) -> None:
        self.datasets = datasets
        self.batch_size = batch_size
        self.rng = rng
        for task_id, examples in datasets.items():
            if len(examples) < MIN_BATCH:
                logger.warning(
                    f"Task {task_id} has {len(examples)} examples; it contributes no batches"
                )

    def __len__(self) -> int:
        sizes = {task_id: len(ex) for task_id, ex in self.datasets.items()}
        return batches_per_epoch(sizes, self.batch_size)

    def epoch(self) -> list[Batch]:
        assignments: list[Batch] = []
        for task_id, examples in self.datasets.items():
            order = self.rng.permutation(len(examples))
            for start in range(0, len(order), self.batch_size):
                chunk = order[start : start + self.batch_size]
                if len(chunk) < MIN_BATCH:
                    continue
                assignments.append(
                    Batch(task_id=task_id, examples=tuple(examples[int(i)] for i in chunk))
                )
        return [assignments[int(i)] for i in self.rng.permutation(len(assignments))]
