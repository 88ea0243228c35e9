"""Line-oriented dataset files: ``task_id<TAB>context<TAB>gold``, tokens space-separated."""

import logging
from collections.abc import Iterable
from pathlib import Path

from skill_adapters.tasks.generator import Example
from skill_adapters.tensorcore.errors import ContractError

logger = logging.getLogger(__name__)


def _tokens(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split())


def format_example(ex: Example) -> str:
    context = " ".join(map(str, ex.context))
    gold = " ".join(map(str, ex.gold))
    return f"{ex.task_id}\t{context}\t{gold}"


def write_examples(path: Path, examples: Iterable[Example]) -> int:
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        for ex in examples:
            f.write(format_example(ex) + "\n")
            count += 1
    logger.info(f"Wrote {count} examples to {path}")
    return count


def read_examples(path: Path) -> list[Example]:
    examples = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ContractError(
                    f"{path}:{line_no}: expected 3 tab-separated fields, got {len(fields)}"
                )
            task_id, context, gold = fields
            examples.append(
                Example(task_id=task_id, context=_tokens(context), gold=_tokens(gold))
            )
    return examples
