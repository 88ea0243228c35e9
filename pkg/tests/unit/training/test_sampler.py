import logging

import numpy as np
import pytest

from skill_adapters.tasks.generator import Example
from skill_adapters.training.sampler import ProportionalScheduler, batches_per_epoch


def _examples(task_id: str, n: int) -> list[Example]:
    return [Example(task_id=task_id, context=(i,), gold=(i,)) for i in range(n)]


@pytest.fixture
def datasets() -> dict[str, list[Example]]:
    return {"a": _examples("a", 10), "b": _examples("b", 5)}


def test_batches_per_epoch_drops_singleton_tails():
    assert batches_per_epoch({"a": 10, "b": 5}, 4) == 4
    assert batches_per_epoch({"a": 1}, 4) == 0


def test_each_batch_comes_from_one_task(datasets):
    scheduler = ProportionalScheduler(datasets, 4, np.random.default_rng(0))
    batches = scheduler.epoch()
    assert len(batches) == len(scheduler) == 4
    for batch in batches:
        assert {ex.task_id for ex in batch.examples} == {batch.task_id}
        assert len(batch.examples) >= 2


def test_examples_appear_at_most_once_per_epoch(datasets):
    scheduler = ProportionalScheduler(datasets, 4, np.random.default_rng(1))
    seen = [(ex.task_id, ex.context) for batch in scheduler.epoch() for ex in batch.examples]
    assert len(seen) == len(set(seen)) == 14


def test_task_share_is_proportional_to_size():
    datasets = {"big": _examples("big", 40), "small": _examples("small", 8)}
    batches = ProportionalScheduler(datasets, 4, np.random.default_rng(2)).epoch()
    counts = {task: sum(b.task_id == task for b in batches) for task in datasets}
    assert counts == {"big": 10, "small": 2}


def test_same_generator_state_gives_the_same_epoch(datasets):
    first = ProportionalScheduler(datasets, 4, np.random.default_rng(3)).epoch()
    second = ProportionalScheduler(datasets, 4, np.random.default_rng(3)).epoch()
    assert first == second


def test_tiny_task_warns(caplog):
    with caplog.at_level(logging.WARNING):
        ProportionalScheduler({"lonely": _examples("lonely", 1)}, 4, np.random.default_rng(0))
    assert "lonely" in caplog.text
