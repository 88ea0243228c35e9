from enum import Enum


class TaskName(Enum):
    """Synthetic skill tasks. The first three are the old tasks."""

    SHIFT_EVEN = "shift_even"
    REVERSE_TAIL = "reverse_tail"
    SMALLEST_K = "smallest_k"
    BLENDED = "blended"

    @classmethod
    def old_tasks(cls) -> list["TaskName"]:
        return [cls.SHIFT_EVEN, cls.REVERSE_TAIL, cls.SMALLEST_K]

    @classmethod
    def get_all_task_names(cls) -> set[str]:
        return {member.value for member in cls}
