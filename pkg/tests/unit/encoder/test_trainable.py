import numpy as np
import pytest

from skill_adapters.adapters.attach import attach_head, attach_vanilla, wrap_model_hierarchical
from skill_adapters.adapters.modules import count_adapter_params, count_sub_adapter_params
from skill_adapters.encoder.trainable import TrainablePolicy, set_trainable
from skill_adapters.evalsuite.accounting import (
    backbone_param_count,
    head_param_count,
    layer_norm_param_count,
)
from tests.mocks.config import tiny_adapter_config, tiny_encoder_config
from tests.mocks.models import tiny_backbone


@pytest.fixture
def hier_model():
    rng = np.random.default_rng(0)
    model = tiny_backbone()
    attach_vanilla(model, tiny_adapter_config, rng)
    wrap_model_hierarchical(model, tiny_adapter_config, rng)
    attach_head(model)
    return model


@pytest.mark.parametrize(
    ("policy", "expected"),
    [
        (TrainablePolicy.ALL, None),
        (TrainablePolicy.NONE, 0),
        (TrainablePolicy.ADAPTERS_ONLY, "adapters"),
        (TrainablePolicy.SUB_ADAPTERS_ONLY, "sub"),
        (TrainablePolicy.HEAD_ONLY, "head"),
    ],
)
def test_policy_counts(hier_model, policy, expected):
    counts = {
        "adapters": count_adapter_params(tiny_adapter_config, 4, hierarchical=True),
        "sub": count_sub_adapter_params(tiny_adapter_config, 4),
        "head": head_param_count(tiny_encoder_config),
    }
    trainable = set_trainable(hier_model, policy)
    if expected is None:
        assert trainable == hier_model.parameter_count()
    elif isinstance(expected, str):
        assert trainable == counts[expected]
    else:
        assert trainable == expected


def test_backbone_is_frozen_under_adapter_policies(hier_model):
    set_trainable(hier_model, TrainablePolicy.ADAPTERS_AND_HEADS)
    assert not any(p.trainable for p in hier_model.backbone_parameters())
    assert all(p.trainable for p in hier_model.head_parameters())


def test_sub_adapter_policy_freezes_the_base(hier_model):
    set_trainable(hier_model, TrainablePolicy.SUB_ADAPTERS_ONLY)
    for adapter in hier_model.adapters():
        assert not any(p.trainable for p in adapter.base_parameters())
        assert all(p.trainable for p in adapter.sub_parameters())


def test_layer_norms_join_adapter_training_when_enabled():
    cfg = tiny_encoder_config.model_copy(update={"train_layer_norm": True})
    model = tiny_backbone(config=cfg)
    attach_vanilla(model, tiny_adapter_config, np.random.default_rng(0))
    trainable = set_trainable(model, TrainablePolicy.ADAPTERS_ONLY)
    assert trainable == count_adapter_params(tiny_adapter_config, 4) + layer_norm_param_count(cfg)


def test_backbone_count_matches_enumeration():
    model = tiny_backbone()
    assert sum(p.size for p in model.backbone_parameters()) == backbone_param_count(
        tiny_encoder_config
    )
