import logging
import zlib
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from skill_adapters.config.config import DataConfig
from skill_adapters.rng import SeedStreams
from skill_adapters.tasks.rules import TaskSpec, Tokens, apply_rule
from skill_adapters.tasks.task_names import TaskName
from skill_adapters.tasks.tokens import indicator_id
from skill_adapters.tensorcore.errors import ContractError

logger = logging.getLogger(__name__)

CORPUS_TASK_ID = "corpus"
_VALID_BUCKETS = 4


class Split(Enum):
    TRAIN = "train"
    VALID = "valid"


@dataclass(frozen=True)
class Example:
    task_id: str
    context: Tokens
    gold: Tokens
    distractors: tuple[Tokens, ...] = field(default=(), compare=False)


def context_key(context: Sequence[int]) -> int:
    return zlib.crc32(np.asarray(context, dtype=np.int32).tobytes())


def split_of(context: Sequence[int]) -> Split:
    """Split membership is a pure function of the context."""
    if context_key(context) % _VALID_BUCKETS == 0:
        return Split.VALID
    return Split.TRAIN


def _draw_context(spec: TaskSpec, rng: np.random.Generator) -> Tokens:
    if spec.rule is TaskName.BLENDED:
        skill = TaskName.old_tasks()[int(rng.integers(len(TaskName.old_tasks())))]
        content = rng.integers(0, spec.content_vocab, size=spec.context_len)
        return (indicator_id(spec.content_vocab, skill), *(int(t) for t in content))
    content = rng.integers(0, spec.content_vocab, size=spec.context_len)
    return tuple(int(t) for t in content)


def generate_split(
    spec: TaskSpec, n_examples: int, seed: int, split: Split = Split.TRAIN
) -> list[Example]:
    if n_examples <= 0:
        raise ContractError(f"n_examples must be positive, got {n_examples}")
    rng = SeedStreams(seed).generator("data", spec.task_id, split.value)
    examples: list[Example] = []
    seen: set[Tokens] = set()
    while len(examples) < n_examples:
        context = _draw_context(spec, rng)
        if context in seen or split_of(context) is not split:
            continue
        seen.add(context)
        examples.append(
            Example(task_id=spec.task_id, context=context, gold=apply_rule(spec, context))
        )
    return examples


def generate_corpus(data: DataConfig, n_examples: int, seed: int) -> list[Example]:
    """General-corpus pretraining pairs: the gold is the context itself."""
    if n_examples <= 0:
        raise ContractError(f"n_examples must be positive, got {n_examples}")
    rng = SeedStreams(seed).generator("data", CORPUS_TASK_ID)
    contexts = rng.integers(0, data.content_vocab, size=(n_examples, data.context_len))
    return [
        Example(task_id=CORPUS_TASK_ID, context=tuple(map(int, row)), gold=tuple(map(int, row)))
        for row in contexts
    ]


@dataclass
class TaskData:
    spec: TaskSpec
    train: list[Example]
    valid: list[Example]


def generate_tasks(
    data: DataConfig, tasks: Sequence[TaskName], seed: int
) -> dict[TaskName, TaskData]:
    datasets: dict[TaskName, TaskData] = {}
    for task in tasks:
        spec = TaskSpec.from_config(task, data, seed)
        datasets[task] = TaskData(
            spec=spec,
            train=generate_split(spec, data.n_train, seed, Split.TRAIN),
            valid=generate_split(spec, data.n_valid, seed, Split.VALID),
        )
        logger.info(
            f"Generated {task.value}: {data.n_train} train / {data.n_valid} valid"
        )
    return datasets
