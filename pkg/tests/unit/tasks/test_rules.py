import pytest

from skill_adapters.errors import VocabError
from skill_adapters.tasks.rules import (
    TaskSpec,
    apply_rule,
    other_rule_outputs,
    reverse_tail,
    rule_variants,
    shift_even,
    smallest_k,
)
from skill_adapters.tasks.task_names import TaskName
from skill_adapters.tasks.tokens import indicator_id, indicator_task, pad_id
from skill_adapters.tensorcore.errors import ContractError
from tests.mocks.config import tiny_data_config

CONTEXT = (5, 1, 4, 1, 0, 9)


def _spec(rule: TaskName) -> TaskSpec:
    return TaskSpec.from_config(rule, tiny_data_config)


@pytest.mark.parametrize(
    ("rule", "expected"),
    [
        (TaskName.SHIFT_EVEN, (8, 7, 3)),
        (TaskName.REVERSE_TAIL, (9, 0, 1)),
        (TaskName.SMALLEST_K, (1, 1, 0)),
    ],
)
def test_old_rules(rule, expected):
    assert apply_rule(_spec(rule), CONTEXT) == expected


def test_shift_wraps_around_the_vocabulary():
    assert shift_even((14, 0, 15), shift=3, vocab=16) == (1, 2)


def test_helpers_select_the_documented_tokens():
    assert reverse_tail((1, 2, 3, 4), 2) == (4, 3)
    assert smallest_k((3, 1, 2, 1), 2) == (1, 1)


@pytest.mark.parametrize("skill", TaskName.old_tasks())
def test_blended_dispatches_on_the_indicator(skill):
    spec = _spec(TaskName.BLENDED)
    context = (indicator_id(spec.content_vocab, skill), *CONTEXT)
    assert apply_rule(spec, context) == apply_rule(_spec(skill), CONTEXT)


def test_blended_without_indicator_is_rejected():
    spec = _spec(TaskName.BLENDED)
    with pytest.raises(ContractError):
        apply_rule(spec, (pad_id(spec.content_vocab), *CONTEXT))


def test_wrong_context_length_is_rejected():
    with pytest.raises(ContractError):
        apply_rule(_spec(TaskName.SHIFT_EVEN), CONTEXT[:-1])


def test_special_tokens_in_content_are_rejected():
    spec = _spec(TaskName.REVERSE_TAIL)
    with pytest.raises(VocabError):
        apply_rule(spec, (*CONTEXT[:-1], pad_id(spec.content_vocab)))


def test_indicator_ids_round_trip():
    for task in TaskName.old_tasks():
        assert indicator_task(16, indicator_id(16, task)) is task
    assert indicator_task(16, pad_id(16)) is None


def test_other_rules_exclude_the_gold_rule():
    spec = _spec(TaskName.SHIFT_EVEN)
    outputs = other_rule_outputs(spec, CONTEXT)
    assert outputs == [(9, 0, 1), (1, 1, 0)]


def test_variants_have_the_response_length():
    spec = _spec(TaskName.SMALLEST_K)
    variants = rule_variants(spec, CONTEXT)
    assert variants
    assert all(len(v) == spec.response_len for v in variants)
