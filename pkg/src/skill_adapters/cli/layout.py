from dataclasses import dataclass
from pathlib import Path

from pydantic import BaseModel

from skill_adapters.training.strategy_names import Strategy


@dataclass(frozen=True)
class OutputLayout:
    root: Path

    @property
    def data_dir(self) -> Path:
        return self.root / "data"

    @property
    def checkpoints_dir(self) -> Path:
        return self.root / "checkpoints"

    @property
    def backbone(self) -> Path:
        return self.checkpoints_dir / "backbone.ckpt"

    @property
    def backbone_lock(self) -> Path:
        return self.checkpoints_dir / "backbone.lock"

    @property
    def reports_dir(self) -> Path:
        return self.root / "reports"

    def dataset(self, task_id: str, split: str) -> Path:
        return self.data_dir / f"{task_id}.{split}.tsv"

    def run_dir(self, strategy: Strategy) -> Path:
        return self.root / "runs" / strategy.value

    def manifest(self, strategy: Strategy) -> Path:
        return self.run_dir(strategy) / "manifest.json"

    def logs_dir(self, strategy: Strategy) -> Path:
        return self.run_dir(strategy) / "logs"


class ModelRef(BaseModel):
    """Where a model's weights live and how to rebuild its structure."""

    attach: str
    checkpoint: str
    scope: str
    base_checkpoint: str | None = None


class TaskEntry(BaseModel):
    task: str
    model: ModelRef


class ForgettingEntry(BaseModel):
    task: str
    before: ModelRef
    after: ModelRef


class PhaseEntry(BaseModel):
    name: str
    tasks: list[str]
    policy: str
    theta_delta: int
    steps: int


class RunManifest(BaseModel):
    strategy: str
    seed: int
    config_digest: str
    old_tasks: list[str]
    new_task: str
    tasks: list[TaskEntry]
    forgetting: list[ForgettingEntry] = []
    phases: list[PhaseEntry] = []
