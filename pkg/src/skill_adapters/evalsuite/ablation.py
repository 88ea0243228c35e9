import logging
from collections.abc import Sequence
from enum import Enum

from pydantic import BaseModel

from skill_adapters.adapters.attach import block_positions, remove_adapter
from skill_adapters.config.config import EvalConfig
from skill_adapters.encoder.model import RetrievalModel
from skill_adapters.evalsuite.metrics import EvalItem, evaluate_model

logger = logging.getLogger(__name__)


class AblationProtocol(Enum):
    COUNT_FROM_BOTTOM = "count_from_bottom"
    SINGLE_POSITION = "single_position"


class AblationRow(BaseModel):
    setting: str
    removed_blocks: list[int]
    hits_at_1: float


class AblationTable(BaseModel):
    protocol: str
    task: str
    rows: list[AblationRow]


def ablation_settings(n_layers: int, protocol: AblationProtocol) -> list[tuple[str, list[int]]]:
    if protocol is AblationProtocol.COUNT_FROM_BOTTOM:
        return [(f"removed_{n}", list(range(n))) for n in range(n_layers + 1)]
    return [("none", [])] + [(f"block_{b}", [b]) for b in range(n_layers)]


def ablate(
    model: RetrievalModel,
    items: Sequence[EvalItem],
    cfg: EvalConfig,
    protocol: AblationProtocol,
    task: str = "",
) -> AblationTable:
    """Removes adapter pairs block by block and re-evaluates.

    count_from_bottom removes the lowest 0..L blocks cumulatively;
    single_position removes one block's pair at a time.
    """
    rows = []
    for setting, blocks in ablation_settings(len(model.blocks), protocol):
        pruned = remove_adapter(model, block_positions(blocks)) if blocks else model
        score = evaluate_model(pruned, items, cfg)
        rows.append(AblationRow(setting=setting, removed_blocks=blocks, hits_at_1=score))
        logger.info(f"Ablation {protocol.value} {setting}: {score:.4f}")
    return AblationTable(protocol=protocol.value, task=task, rows=rows)
