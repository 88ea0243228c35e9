import json

import pytest

from skill_adapters.cli.lab import BASE_CHECKPOINT, Lab
from skill_adapters.encoder.model import same_weights
from skill_adapters.evalsuite.metrics import evaluate_model
from skill_adapters.tasks.task_names import TaskName
from skill_adapters.training.strategies import run_strategy
from skill_adapters.training.strategy_names import Strategy
from tests.mocks.config import tiny_run_config


@pytest.fixture(scope="module")
def lab(tmp_path_factory):
    return Lab(tiny_run_config, tmp_path_factory.mktemp("lab"))


def _saved(lab: Lab, strategy: Strategy):
    cfg = lab.run.with_strategy(strategy)
    result = run_strategy(cfg, lab.backbone(), lab.datasets())
    manifest = Lab(cfg, lab.layout.root).save_run(result)
    return result, manifest


class TestBackbone:
    def test_pretrains_once(self, lab):
        model = lab.backbone()
        assert lab.layout.backbone.exists()
        assert lab.backbone() is model
        assert model.trainable_count() == 0

    def test_second_lab_loads_the_checkpoint(self, lab):
        stamp = lab.layout.backbone.stat().st_mtime_ns
        other = Lab(tiny_run_config, lab.layout.root).backbone()
        assert lab.layout.backbone.stat().st_mtime_ns == stamp
        assert same_weights(other, lab.backbone())


class TestSaveRestore:
    @pytest.mark.parametrize("strategy", [Strategy.ADA, Strategy.ADAHIT, Strategy.MT_FT, Strategy.FE])
    def test_restored_models_match(self, lab, strategy):
        result, _ = _saved(lab, strategy)
        restored = lab.restore_run(strategy)
        assert restored.old_tasks == result.old_tasks
        for task in lab.tasks:
            assert same_weights(restored.models[task], result.models[task])
            assert evaluate_model(
                restored.models[task], lab.eval_items(task), lab.run.eval
            ) == evaluate_model(result.models[task], lab.eval_items(task), lab.run.eval)

    def test_hierarchical_run_stores_base_once(self, lab):
        _, manifest = _saved(lab, Strategy.ADAHIT)
        run_dir = lab.layout.run_dir(Strategy.ADAHIT)
        assert (run_dir / BASE_CHECKPOINT).exists()
        assert {entry.model.scope for entry in manifest.tasks} == {"sub_adapters_only"}
        assert all(entry.model.base_checkpoint == BASE_CHECKPOINT for entry in manifest.tasks)

    def test_adapter_runs_keep_no_backbone_copy(self, lab):
        _, manifest = _saved(lab, Strategy.ADA)
        assert {entry.model.scope for entry in manifest.tasks} == {"adapters_only"}
        full = lab.layout.backbone.stat().st_size
        for entry in manifest.tasks:
            path = lab.layout.run_dir(Strategy.ADA) / entry.model.checkpoint
            assert path.stat().st_size < full

    def test_forgetting_pairs_survive(self, lab):
        result, manifest = _saved(lab, Strategy.MT_FT)
        assert [entry.task for entry in manifest.forgetting] == [
            t.value for t in TaskName.old_tasks()
        ]
        restored = lab.restore_run(Strategy.MT_FT)
        for task in result.old_tasks:
            assert same_weights(restored.before[task], result.before[task])
            assert same_weights(restored.after[task], result.after[task])

    def test_manifest_is_json(self, lab):
        _saved(lab, Strategy.FT)
        payload = json.loads(lab.layout.manifest(Strategy.FT).read_text())
        assert payload["strategy"] == "FT"
        assert payload["new_task"] == "blended"
        assert len(payload["phases"]) == 4

    def test_missing_run(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="MT_ALL"):
            Lab(tiny_run_config, tmp_path).load_manifest(Strategy.MT_ALL)
