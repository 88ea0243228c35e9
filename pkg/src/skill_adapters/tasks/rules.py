"""Skill rules mapping a context to its gold response.

All three old rules copy tokens out of the context and differ only in what
they select; the blended rule dispatches on a leading indicator token.
"""

from collections.abc import Sequence
from dataclasses import dataclass

from skill_adapters.config.config import DataConfig
from skill_adapters.errors import VocabError
from skill_adapters.tasks.task_names import TaskName
from skill_adapters.tasks.tokens import indicator_task
from skill_adapters.tensorcore.errors import ContractError

Tokens = tuple[int, ...]


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    rule: TaskName
    content_vocab: int = 64
    context_len: int = 16
    response_len: int = 8
    shift: int = 3
    tail_len: int = 8
    smallest_count: int = 8
    seed: int = 0

    @classmethod
    def from_config(cls, task: TaskName, data: DataConfig, seed: int = 0) -> "TaskSpec":
        return cls(
            task_id=task.value,
            rule=task,
            content_vocab=data.content_vocab,
            context_len=data.context_len,
            response_len=data.response_len,
            shift=data.shift,
            tail_len=data.tail_len,
            smallest_count=data.smallest_count,
            seed=seed,
        )

    @property
    def input_len(self) -> int:
        return self.context_len + (1 if self.rule is TaskName.BLENDED else 0)


def shift_even(context: Sequence[int], shift: int, vocab: int) -> Tokens:
    return tuple((t + shift) % vocab for t in context[0::2])


def reverse_tail(context: Sequence[int], tail_len: int) -> Tokens:
    return tuple(reversed(context[-tail_len:]))


def smallest_k(context: Sequence[int], count: int) -> Tokens:
    ranked = sorted(range(len(context)), key=lambda i: (context[i], i))[:count]
    return tuple(context[i] for i in sorted(ranked))


def split_blended(spec: TaskSpec, context: Sequence[int]) -> tuple[TaskName, Tokens]:
    """The skill selected by the indicator and the content that follows it."""
    skill = indicator_task(spec.content_vocab, context[0])
    if skill is None:
        raise ContractError(
            f"blended context must start with a skill indicator, got token {context[0]}"
        )
    return skill, tuple(context[1:])


def _check_content(spec: TaskSpec, content: Sequence[int]) -> None:
    for t in content:
        if not 0 <= t < spec.content_vocab:
            raise VocabError(
                f"context token {t} is outside the content vocabulary "
                f"[0, {spec.content_vocab})"
            )


def _apply_old_rule(spec: TaskSpec, rule: TaskName, content: Sequence[int]) -> Tokens:
    match rule:
        case TaskName.SHIFT_EVEN:
            return shift_even(content, spec.shift, spec.content_vocab)
        case TaskName.REVERSE_TAIL:
            return reverse_tail(content, spec.tail_len)
        case TaskName.SMALLEST_K:
            return smallest_k(content, spec.smallest_count)
    raise ContractError(f"{rule.value} is not an old-task rule")


def apply_rule(spec: TaskSpec, context: Sequence[int]) -> Tokens:
    if len(context) != spec.input_len:
        raise ContractError(
            f"{spec.task_id} expects a context of length {spec.input_len}, "
            f"got {len(context)}"
        )
    if spec.rule is TaskName.BLENDED:
        skill, content = split_blended(spec, context)
        _check_content(spec, content)
        return _apply_old_rule(spec, skill, content)
    _check_content(spec, context)
    return _apply_old_rule(spec, spec.rule, context)


def content_of(spec: TaskSpec, context: Sequence[int]) -> tuple[TaskName, Tokens]:
    if spec.rule is TaskName.BLENDED:
        return split_blended(spec, context)
    return spec.rule, tuple(context)


def other_rule_outputs(spec: TaskSpec, context: Sequence[int]) -> list[Tokens]:
    """Outputs of the old rules that do not produce this context's gold."""
    rule, content = content_of(spec, context)
    return [
        _apply_old_rule(spec, other, content)
        for other in TaskName.old_tasks()
        if other is not rule
    ]


def rule_variants(spec: TaskSpec, context: Sequence[int]) -> list[Tokens]:
    """Near-miss transformations of the content, used once other rules run out."""
    _, content = content_of(spec, context)
    m, vocab = spec.response_len, spec.content_vocab
    variants = [
        shift_even(content, spec.shift + 1, vocab),
        shift_even(content, spec.shift - 1, vocab),
        tuple((t + spec.shift) % vocab for t in content[1::2])[:m],
        tuple(reversed(content[:m])),
        tuple(content[-m:]),
        tuple(content[:m]),
    ]
    largest = sorted(range(len(content)), key=lambda i: (-content[i], i))[:m]
    variants.append(tuple(content[i] for i in sorted(largest)))
    variants.append(tuple(sorted(smallest_k(content, m))))
    return [v for v in variants if len(v) == m]
