import hashlib
import json
import logging
from enum import Enum
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from skill_adapters.errors import ConfigError
from skill_adapters.tasks.task_names import TaskName
from skill_adapters.tasks.tokens import full_vocab_size
from skill_adapters.training.strategy_names import Strategy

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

_DEFAULT_LR = 1e-3


class Activation(Enum):
    RELU = "relu"
    GELU = "gelu"


class Pooling(Enum):
    SUM = "sum"
    MEAN = "mean"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class EncoderConfig(_Section):
    n_layers: int = Field(6, gt=0)
    d_model: int = Field(64, gt=0)
    n_heads: int = Field(4, gt=0)
    d_ffn: int = Field(128, gt=0)
    vocab_size: int = Field(72, gt=0)
    max_len: int = Field(24, gt=0)
    pooling: Pooling = Pooling.SUM
    train_layer_norm: bool = False
    init_std: float = Field(0.02, ge=0)
    ln_eps: float = Field(1e-5, gt=0)

    @model_validator(mode="after")
    def check_heads(self) -> "EncoderConfig":
        if self.d_model % self.n_heads != 0:
            raise ValueError(
                f"d_model ({self.d_model}) must be divisible by n_heads ({self.n_heads})"
            )
        return self

    @property
    def n_positions(self) -> int:
        """Number of adapter insertion points (two per block)."""
        return 2 * self.n_layers


class AdapterConfig(_Section):
    d_o: int = Field(64, gt=0)
    d_a: int = Field(16, gt=0)
    d_ts: int | None = Field(None, gt=0)
    activation: Activation = Activation.RELU
    use_bias: bool = True
    init_std: float = Field(0.01, ge=0)
    n_top_blocks: int | None = Field(None, gt=0)

    @model_validator(mode="after")
    def check_widths(self) -> "AdapterConfig":
        if not self.d_a < self.d_o:
            raise ValueError(f"d_a ({self.d_a}) must be smaller than d_o ({self.d_o})")
        if self.d_ts is not None and self.d_ts > self.d_a:
            raise ValueError(f"d_ts ({self.d_ts}) must not exceed d_a ({self.d_a})")
        return self

    @property
    def sub_bottleneck(self) -> int:
        """Bottleneck of the sub-adapter that runs at width d_o."""
        if self.d_ts is not None:
            return self.d_ts
        return max(1, self.d_a // 2)

    @property
    def mid_bottleneck(self) -> int:
        """Bottleneck of the sub-adapter that runs at width d_a."""
        if self.sub_bottleneck < self.d_a:
            return self.sub_bottleneck
        return max(1, self.d_a // 2)


class DataConfig(_Section):
    content_vocab: int = Field(64, gt=1)
    context_len: int = Field(16, gt=0)
    response_len: int = Field(8, gt=0)
    shift: int = 3
    tail_len: int = Field(8, gt=0)
    smallest_count: int = Field(8, gt=0)
    n_train: int = Field(2000, gt=0)
    n_valid: int = Field(2000, gt=0)

    @model_validator(mode="after")
    def check_lengths(self) -> "DataConfig":
        errors: list[str] = []
        if (self.context_len + 1) // 2 != self.response_len:
            errors.append(
                f"shift_even yields {(self.context_len + 1) // 2} tokens "
                f"but response_len is {self.response_len}"
            )
        if self.tail_len != self.response_len:
            errors.append(
                f"tail_len ({self.tail_len}) must equal response_len ({self.response_len})"
            )
        if self.smallest_count != self.response_len:
            errors.append(
                f"smallest_count ({self.smallest_count}) must equal "
                f"response_len ({self.response_len})"
            )
        if self.response_len > self.context_len:
            errors.append("response_len must not exceed context_len")
        if errors:
            raise ValueError("; ".join(errors))
        return self


class PretrainConfig(_Section):
    epochs: int = Field(2, ge=0)
    n_examples: int = Field(4000, gt=0)
    batch_size: int = Field(32, ge=2)
    lr: float = Field(1e-3, gt=0)
    warmup_fraction: float = Field(0.1, ge=0, le=1)


def _default_lrs() -> dict[TaskName, float]:
    return {task: _DEFAULT_LR for task in TaskName}


class StrategyConfig(_Section):
    strategy: Strategy = Strategy.ADA
    old_tasks: list[TaskName] = Field(default_factory=TaskName.old_tasks)
    new_task: TaskName = TaskName.BLENDED
    epochs: int = Field(8, ge=0)
    batch_size: int = Field(32, ge=2)
    lr_per_task: dict[TaskName, float] = Field(default_factory=_default_lrs)
    warmup_fraction: float = Field(0.1, ge=0, le=1)
    seed: int | None = Field(None, ge=0)

    @model_validator(mode="after")
    def check_tasks(self) -> "StrategyConfig":
        errors: list[str] = []
        if not self.old_tasks:
            errors.append("old_tasks must not be empty")
        if len(set(self.old_tasks)) != len(self.old_tasks):
            errors.append("old_tasks contains duplicates")
        if self.new_task in self.old_tasks:
            errors.append(f"new_task {self.new_task.value} is also an old task")
        for task in self.all_tasks:
            lr = self.lr_per_task.get(task)
            if lr is None:
                errors.append(f"no learning rate for task {task.value}")
            elif lr <= 0:
                errors.append(f"learning rate for {task.value} must be positive")
        if errors:
            raise ValueError("; ".join(errors))
        return self

    @property
    def all_tasks(self) -> list[TaskName]:
        return [*self.old_tasks, self.new_task]


class EvalConfig(_Section):
    K: int = Field(20, ge=2)
    n_eval: int = Field(2000, gt=0)
    seed: int | None = Field(None, ge=0)
    tie_policy: Literal["gold_loses"] = "gold_loses"
    workers: int = Field(1, ge=1)


class RunConfig(_Section):
    schema_version: int = SCHEMA_VERSION
    encoder: EncoderConfig = Field(default_factory=EncoderConfig)
    adapter: AdapterConfig = Field(default_factory=AdapterConfig)
    data: DataConfig = Field(default_factory=DataConfig)
    pretrain: PretrainConfig = Field(default_factory=PretrainConfig)
    strategy: StrategyConfig = Field(default_factory=StrategyConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    output_dir: Path = Path("runs")
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def check_sections(self) -> "RunConfig":
        errors: list[str] = []
        if self.schema_version != SCHEMA_VERSION:
            errors.append(
                f"schema_version {self.schema_version} is not supported "
                f"(expected {SCHEMA_VERSION})"
            )
        if self.adapter.d_o != self.encoder.d_model:
            errors.append(
                f"adapter.d_o ({self.adapter.d_o}) must equal "
                f"encoder.d_model ({self.encoder.d_model})"
            )
        if self.data.context_len + 1 > self.encoder.max_len:
            errors.append(
                f"blended contexts need {self.data.context_len + 1} positions "
                f"but encoder.max_len is {self.encoder.max_len}"
            )
        if self.encoder.vocab_size < full_vocab_size(self.data.content_vocab):
            errors.append(
                f"encoder.vocab_size ({self.encoder.vocab_size}) must cover "
                f"{full_vocab_size(self.data.content_vocab)} token ids"
            )
        if self.eval.n_eval > self.data.n_valid:
            errors.append(
                f"eval.n_eval ({self.eval.n_eval}) exceeds data.n_valid "
                f"({self.data.n_valid})"
            )
        if (
            self.adapter.n_top_blocks is not None
            and self.adapter.n_top_blocks > self.encoder.n_layers
        ):
            errors.append(
                f"adapter.n_top_blocks ({self.adapter.n_top_blocks}) exceeds "
                f"encoder.n_layers ({self.encoder.n_layers})"
            )
        if errors:
            raise ValueError("; ".join(errors))
        return self

    @property
    def strategy_seed(self) -> int:
        return self.seed if self.strategy.seed is None else self.strategy.seed

    @property
    def eval_seed(self) -> int:
        return self.seed if self.eval.seed is None else self.eval.seed

    def with_seed(self, seed: int) -> "RunConfig":
        return self.model_copy(
            update={
                "seed": seed,
                "strategy": self.strategy.model_copy(update={"seed": seed}),
                "eval": self.eval.model_copy(update={"seed": seed}),
            }
        )

    def with_strategy(self, strategy: Strategy) -> "RunConfig":
        return self.model_copy(
            update={"strategy": self.strategy.model_copy(update={"strategy": strategy})}
        )


def _format_validation_error(error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{location}: {item['msg']}")
    return "\n".join(lines)


def parse_config(raw: object) -> RunConfig:
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(
            "Errors found in run configuration:\n\n" + _format_validation_error(e)
        ) from e


def load_config(path: Path | None) -> RunConfig:
    """Reads a run configuration from JSON, or YAML for .yaml/.yml files.

    With no path the defaults are returned.
    """
    if path is None:
        return RunConfig()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        if path.suffix in (".yaml", ".yml"):
            raw = yaml.safe_load(text)
        else:
            raw = json.loads(text)
    except (yaml.YAMLError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot parse config {path}: {e}") from e
    if raw is None:
        raw = {}
    config = parse_config(raw)
    logger.info(f"Loaded run config from {path}")
    return config


def config_digest(encoder: EncoderConfig) -> bytes:
    canonical = json.dumps(encoder.model_dump(mode="json"), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).digest()
