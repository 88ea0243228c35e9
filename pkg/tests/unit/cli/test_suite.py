import pytest

from skill_adapters.cli.lab import Lab
from skill_adapters.cli.suite import base_adapter_study, embedding_models, transfer_table
from skill_adapters.encoder.model import same_weights
from skill_adapters.evalsuite.transfer import MT_SOURCE
from tests.mocks.config import tiny_run_config


@pytest.fixture(scope="module")
def lab(tmp_path_factory):
    return Lab(tiny_run_config, tmp_path_factory.mktemp("suite"))


@pytest.fixture(scope="module")
def study(lab):
    return base_adapter_study(lab)


def test_embedding_models_without_a_study(lab):
    assert list(embedding_models(lab, {})) == ["backbone"]


def test_embedding_models_include_every_base_adapter(lab, study):
    models = embedding_models(lab, {}, study)
    old = [t.value for t in tiny_run_config.strategy.old_tasks]
    assert list(models) == ["backbone", f"base:{MT_SOURCE}", *(f"base:{t}" for t in old)]
    assert same_weights(models[f"base:{MT_SOURCE}"], study.base_model(MT_SOURCE))


def test_transfer_table_reuses_a_given_study(lab, study):
    target = tiny_run_config.strategy.new_task
    table = transfer_table(lab, target, fine_tune=False, study=study)
    assert [row.source for row in table.rows] == study.sources()
