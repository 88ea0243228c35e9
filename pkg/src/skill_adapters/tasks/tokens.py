"""Token id layout shared by the generator and the encoder.

Content tokens occupy ``[0, content_vocab)``. The special block that follows
holds the pad token and one skill indicator per old task; the rest is
reserved.
"""

from skill_adapters.tasks.task_names import TaskName

N_SPECIAL = 8


def pad_id(content_vocab: int) -> int:
    return content_vocab


def indicator_id(content_vocab: int, task: TaskName) -> int:
    return content_vocab + 1 + TaskName.old_tasks().index(task)


def indicator_task(content_vocab: int, token: int) -> TaskName | None:
    offset = token - content_vocab - 1
    old = TaskName.old_tasks()
    if 0 <= offset < len(old):
        return old[offset]
    return None


def full_vocab_size(content_vocab: int) -> int:
    return content_vocab + N_SPECIAL
