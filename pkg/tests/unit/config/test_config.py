import json

import pytest
import yaml

from skill_adapters.config.config import (
    AdapterConfig,
    DataConfig,
    EncoderConfig,
    RunConfig,
    config_digest,
    load_config,
    parse_config,
)
from skill_adapters.errors import ConfigError
from skill_adapters.tasks.task_names import TaskName
from skill_adapters.training.strategy_names import Strategy
from tests.mocks.config import tiny_run_config, tiny_run_payload


class TestDefaults:
    def test_desk_configuration(self):
        run = RunConfig()
        assert (run.encoder.n_layers, run.encoder.d_model, run.encoder.d_ffn) == (6, 64, 128)
        assert (run.adapter.d_o, run.adapter.d_a) == (64, 16)
        assert run.eval.K == 20
        assert run.strategy.old_tasks == TaskName.old_tasks()
        assert run.strategy.new_task is TaskName.BLENDED

    def test_sub_adapter_widths(self):
        assert AdapterConfig().sub_bottleneck == 8
        assert AdapterConfig().mid_bottleneck == 8
        assert AdapterConfig(d_ts=4).sub_bottleneck == 4
        assert AdapterConfig(d_ts=16).mid_bottleneck == 8


class TestParseConfig:
    def test_round_trip_payload(self):
        assert parse_config(tiny_run_payload()) == tiny_run_config

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="encoder.depth"):
            parse_config({"encoder": {"depth": 3}})

    def test_adapter_width_must_match_the_encoder(self):
        with pytest.raises(ConfigError, match="adapter.d_o"):
            parse_config({"adapter": {"d_o": 32, "d_a": 8}})

    def test_cross_section_errors_are_collected(self):
        payload = tiny_run_payload()
        payload["eval"]["n_eval"] = 1000
        payload["encoder"]["max_len"] = 6
        with pytest.raises(ConfigError) as exc_info:
            parse_config(payload)
        message = str(exc_info.value)
        assert "eval.n_eval" in message
        assert "encoder.max_len" in message

    @pytest.mark.parametrize(
        "section",
        [
            {"encoder": {"d_model": 10, "n_heads": 4}},
            {"adapter": {"d_a": 64}},
            {"data": {"response_len": 5}},
            {"strategy": {"new_task": "shift_even"}},
            {"strategy": {"old_tasks": []}},
            {"eval": {"K": 1}},
            {"schema_version": 2},
            {"strategy": {"strategy": "LoRA"}},
        ],
    )
    def test_invalid_sections(self, section):
        with pytest.raises(ConfigError):
            parse_config(section)

    def test_missing_learning_rate(self):
        with pytest.raises(ConfigError, match="no learning rate"):
            parse_config({"strategy": {"lr_per_task": {"shift_even": 0.001}}})


class TestLoadConfig:
    def test_no_path_gives_defaults(self):
        assert load_config(None) == RunConfig()

    def test_yaml(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text(yaml.safe_dump(tiny_run_payload()))
        assert load_config(path) == tiny_run_config

    def test_json(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps(tiny_run_payload()))
        assert load_config(path) == tiny_run_config

    def test_empty_yaml_gives_defaults(self, tmp_path):
        path = tmp_path / "run.yml"
        path.write_text("")
        assert load_config(path) == RunConfig()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "absent.yaml")

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="cannot parse"):
            load_config(path)


class TestOverrides:
    def test_with_seed_reaches_every_stream(self):
        run = tiny_run_config.with_seed(7)
        assert (run.seed, run.strategy_seed, run.eval_seed) == (7, 7, 7)

    def test_section_seeds_win(self):
        run = parse_config({"seed": 1, "strategy": {"seed": 5}})
        assert run.strategy_seed == 5
        assert run.eval_seed == 1

    def test_with_strategy(self):
        run = tiny_run_config.with_strategy(Strategy.ADAHIT)
        assert run.strategy.strategy is Strategy.ADAHIT
        assert run.strategy.epochs == tiny_run_config.strategy.epochs


class TestConfigDigest:
    def test_stable(self):
        assert config_digest(EncoderConfig()) == config_digest(EncoderConfig())
        assert len(config_digest(EncoderConfig())) == 32

    def test_sensitive_to_shape(self):
        assert config_digest(EncoderConfig()) != config_digest(EncoderConfig(d_ffn=256))


def test_data_lengths_must_agree():
    with pytest.raises(ValueError, match="tail_len"):
        DataConfig(tail_len=4)
