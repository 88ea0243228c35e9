from enum import Enum

from skill_adapters.encoder.model import RetrievalModel
from skill_adapters.tensorcore.tensor import Parameter


class TrainablePolicy(Enum):
    ALL = "all"
    NONE = "none"
    ADAPTERS_ONLY = "adapters_only"
    SUB_ADAPTERS_ONLY = "sub_adapters_only"
    HEAD_ONLY = "head_only"
    ADAPTERS_AND_HEADS = "adapters_and_heads"


def _selected(model: RetrievalModel, policy: TrainablePolicy) -> list[Parameter]:
    layer_norms = []
    if model.config.train_layer_norm:
        layer_norms = [p for b in model.blocks for p in b.layer_norm_parameters()]
    match policy:
        case TrainablePolicy.ALL:
            return model.parameters()
        case TrainablePolicy.NONE:
            return []
        case TrainablePolicy.ADAPTERS_ONLY:
            return [*model.adapter_parameters(), *layer_norms]
        case TrainablePolicy.SUB_ADAPTERS_ONLY:
            return [*model.sub_adapter_parameters(), *layer_norms]
        case TrainablePolicy.HEAD_ONLY:
            return model.head_parameters()
        case TrainablePolicy.ADAPTERS_AND_HEADS:
            return [
                *model.adapter_parameters(),
                *model.head_parameters(),
                *layer_norms,
            ]


def set_trainable(model: RetrievalModel, policy: TrainablePolicy) -> int:
    """Sets every trainable flag from `policy`; returns the trainable count."""
    chosen = {id(p) for p in _selected(model, policy)}
    for p in model.parameters():
        p.set_trainable(id(p) in chosen)
    return model.trainable_count()
