"""Placing adapters into a model's sub-block slots.

Block ``b`` owns position ``2b`` (after self-attention) and ``2b + 1``
(after the feed-forward layer).
"""

import logging
from collections.abc import Iterable

import numpy as np

from skill_adapters.adapters.modules import (
    HierAdapter,
    init_adapter,
    wrap_hierarchical,
)
from skill_adapters.config.config import AdapterConfig
from skill_adapters.encoder.model import (
    RetrievalModel,
    SlotKind,
    TransformerBlock,
    clone_model,
    init_head,
)
from skill_adapters.errors import AdapterPositionError
from skill_adapters.tensorcore.errors import ContractError

logger = logging.getLogger(__name__)


def position_slot(model: RetrievalModel, position: int) -> tuple[TransformerBlock, SlotKind]:
    if not 0 <= position < model.n_positions():
        raise AdapterPositionError(
            f"adapter position {position} is outside [0, {model.n_positions()})"
        )
    kind = SlotKind.ATTN if position % 2 == 0 else SlotKind.FFN
    return model.blocks[position // 2], kind


def block_positions(blocks: Iterable[int]) -> set[int]:
    return {p for b in blocks for p in (2 * b, 2 * b + 1)}


def adapter_blocks(n_layers: int, cfg: AdapterConfig) -> list[int]:
    """Indices of the blocks that receive adapters (the top ones when limited)."""
    if cfg.n_top_blocks is None:
        return list(range(n_layers))
    return list(range(n_layers - cfg.n_top_blocks, n_layers))


def attach_vanilla(
    model: RetrievalModel, cfg: AdapterConfig, rng: np.random.Generator
) -> int:
    """Fills the selected slots with fresh identity adapters; returns how many."""
    count = 0
    for index in adapter_blocks(len(model.blocks), cfg):
        block = model.blocks[index]
        for kind in SlotKind:
            block.set_slot(kind, init_adapter(cfg, rng, block.slot_prefix(kind)))
            count += 1
    logger.debug(f"Attached {count} adapters to {model.name}")
    return count


def attach_head(model: RetrievalModel) -> None:
    model.head = init_head(model.config.d_model)


def wrap_model_hierarchical(
    model: RetrievalModel,
    cfg: AdapterConfig,
    rng: np.random.Generator,
    task_id: str | None = None,
) -> int:
    """Turns every vanilla adapter into the base of a hierarchical adapter."""
    count = 0
    for block in model.blocks:
        for kind in SlotKind:
            slot = block.get_slot(kind)
            if slot is None:
                continue
            if isinstance(slot, HierAdapter):
                raise ContractError(
                    f"{block.slot_prefix(kind)} is already hierarchical"
                )
            block.set_slot(
                kind,
                wrap_hierarchical(slot, cfg, rng, block.slot_prefix(kind), task_id),
            )
            count += 1
    return count


def remove_adapter(model: RetrievalModel, positions: Iterable[int]) -> RetrievalModel:
    """Copy of `model` with the adapter call at each position replaced by the identity.

    Empty slots stay empty.
    """
    positions = set(positions)
    for position in positions:
        position_slot(model, position)
    pruned = clone_model(model)
    for position in sorted(positions):
        block, kind = position_slot(pruned, position)
        block.set_slot(kind, None)
    return pruned


def filled_positions(model: RetrievalModel) -> list[int]:
    filled = []
    for position in range(model.n_positions()):
        block, kind = position_slot(model, position)
        if block.get_slot(kind) is not None:
            filled.append(position)
    return filled
