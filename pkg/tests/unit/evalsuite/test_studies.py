"""Forgetting, ablation and base-adapter transfer on a tiny setup."""

import pytest

from skill_adapters.encoder.model import same_weights
from skill_adapters.errors import ConfigError
from skill_adapters.evalsuite.ablation import AblationProtocol, ablate, ablation_settings
from skill_adapters.evalsuite.forgetting import forgetting_eval
from skill_adapters.evalsuite.metrics import build_eval_items, evaluate_model
from skill_adapters.evalsuite.transfer import MT_SOURCE, BaseAdapterStudy, zero_shot_transfer
from skill_adapters.tasks.generator import generate_tasks
from skill_adapters.tasks.task_names import TaskName
from skill_adapters.training.strategies import run_strategy
from skill_adapters.training.strategy_names import Strategy
from tests.mocks.config import tiny_run_config
from tests.mocks.models import tiny_backbone

TASKS = [*TaskName.old_tasks(), TaskName.BLENDED]


@pytest.fixture(scope="module")
def datasets():
    return generate_tasks(tiny_run_config.data, TASKS, tiny_run_config.seed)


@pytest.fixture(scope="module")
def items(datasets):
    return {t: build_eval_items(datasets[t], tiny_run_config.eval, 0) for t in TASKS}


@pytest.fixture(scope="module")
def backbone():
    return tiny_backbone(seed=6)


@pytest.fixture(scope="module")
def runs(backbone, datasets):
    return {
        s: run_strategy(tiny_run_config.with_strategy(s), backbone, datasets)
        for s in (Strategy.FE, Strategy.ADA, Strategy.ADAHIT, Strategy.MT_FT)
    }


class TestForgetting:
    @pytest.mark.parametrize("strategy", [Strategy.ADA, Strategy.ADAHIT])
    def test_isolating_strategies_forget_nothing(self, runs, items, strategy):
        report = forgetting_eval(runs[strategy], items, tiny_run_config.eval)
        assert report.applicable
        assert [row.task for row in report.rows] == [t.value for t in TaskName.old_tasks()]
        assert all(row.delta == 0.0 and row.before == row.after for row in report.rows)

    def test_feature_extraction_is_not_applicable(self, runs, items):
        report = forgetting_eval(runs[Strategy.FE], items, tiny_run_config.eval)
        assert not report.applicable
        assert report.rows == []

    def test_deltas_are_after_minus_before(self, runs, items):
        report = forgetting_eval(runs[Strategy.MT_FT], items, tiny_run_config.eval)
        for row in report.rows:
            assert row.delta == pytest.approx(row.after - row.before)


class TestAblation:
    @pytest.mark.parametrize("protocol", list(AblationProtocol))
    def test_settings_cover_every_block(self, protocol):
        settings = ablation_settings(3, protocol)
        assert len(settings) == 4
        assert settings[0][1] == []

    def test_cumulative_settings(self):
        settings = ablation_settings(2, AblationProtocol.COUNT_FROM_BOTTOM)
        assert settings == [("removed_0", []), ("removed_1", [0]), ("removed_2", [0, 1])]

    @pytest.mark.parametrize("strategy", [Strategy.ADA, Strategy.ADAHIT])
    def test_curve_end_points(self, runs, items, backbone, strategy):
        model = runs[strategy].models[TaskName.BLENDED]
        task_items = items[TaskName.BLENDED]
        table = ablate(
            model,
            task_items,
            tiny_run_config.eval,
            AblationProtocol.COUNT_FROM_BOTTOM,
            task="blended",
        )
        cfg = tiny_run_config.eval
        assert table.rows[0].hits_at_1 == evaluate_model(model, task_items, cfg)
        assert table.rows[-1].hits_at_1 == evaluate_model(backbone, task_items, cfg)
        assert table.rows[-1].removed_blocks == [0, 1]

    def test_single_position_rows(self, runs, items):
        model = runs[Strategy.ADA].models[TaskName.SHIFT_EVEN]
        table = ablate(
            model, items[TaskName.SHIFT_EVEN], tiny_run_config.eval, AblationProtocol.SINGLE_POSITION
        )
        assert [row.setting for row in table.rows] == ["none", "block_0", "block_1"]
        assert table.rows[0].hits_at_1 == evaluate_model(
            model, items[TaskName.SHIFT_EVEN], tiny_run_config.eval
        )


class TestBaseAdapterStudy:
    @pytest.fixture(scope="class")
    def study(self, backbone, datasets, items):
        return BaseAdapterStudy(tiny_run_config, backbone, datasets, items)

    def test_sources(self, study):
        assert study.sources() == [MT_SOURCE, "shift_even", "reverse_tail", "smallest_k"]

    def test_multitask_base_matches_the_hierarchical_run(self, study, runs):
        assert same_weights(study.base_model(MT_SOURCE), runs[Strategy.ADAHIT].base_model)

    def test_single_task_base_matches_its_adapter_run(self, study, runs, items):
        model = runs[Strategy.ADA].models[TaskName.REVERSE_TAIL]
        assert same_weights(study.base_model("reverse_tail"), model)
        assert study.zero_shot("reverse_tail", TaskName.REVERSE_TAIL) == evaluate_model(
            model, items[TaskName.REVERSE_TAIL], tiny_run_config.eval
        )

    def test_fine_tuning_matches_the_hierarchical_new_task_model(self, study, runs, items):
        expected = evaluate_model(
            runs[Strategy.ADAHIT].models[TaskName.BLENDED],
            items[TaskName.BLENDED],
            tiny_run_config.eval,
        )
        assert study.fine_tuned(MT_SOURCE, TaskName.BLENDED) == expected

    def test_table_without_fine_tuning(self, study):
        table = study.table(TaskName.BLENDED, fine_tune=False)
        assert [row.source for row in table.rows] == study.sources()
        assert all(row.fine_tuned is None for row in table.rows)
        assert all(0.0 <= row.zero_shot <= 1.0 for row in table.rows)

    def test_zero_shot_transfer_uses_the_cached_base(self, study):
        score = zero_shot_transfer(study, MT_SOURCE, TaskName.BLENDED)
        assert score == study.zero_shot(MT_SOURCE, TaskName.BLENDED)

    def test_unknown_source(self, study):
        with pytest.raises(ConfigError):
            study.base_model("no_such_task")
