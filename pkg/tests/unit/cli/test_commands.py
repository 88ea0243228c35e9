import argparse

import pytest

from skill_adapters.cli.command_names import CommandName
from skill_adapters.cli.commands import create_command_definitions
from skill_adapters.cli.help.help import get_help
from skill_adapters.cli.register import register_commands
from skill_adapters.main import build_parser


def test_every_command_has_a_definition():
    names = {definition.name for definition in create_command_definitions()}
    assert names == set(CommandName)


@pytest.mark.parametrize("name", sorted(CommandName.get_all_command_names()))
def test_help_files_exist(name):
    text = get_help(name)
    assert text.strip()


def test_summary_is_first_help_line():
    for definition in create_command_definitions():
        assert definition.get_summary() == definition.description.strip().splitlines()[0]


def test_register_commands_excludes():
    parser = argparse.ArgumentParser()
    subparsers = parser.add_subparsers(dest="command_name")
    register_commands(
        subparsers, create_command_definitions(), exclude_commands=[CommandName.REPRO]
    )
    assert set(subparsers.choices) == CommandName.get_all_command_names() - {"repro"}


class TestParser:
    def test_run_requires_known_strategy(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["run", "--strategy", "LoRA"])

    def test_repeatable_strategy(self):
        args = build_parser().parse_args(
            ["eval", "--strategy", "Ada", "--strategy", "AdaHIT"]
        )
        assert args.strategy == ["Ada", "AdaHIT"]
        assert args.command.name is CommandName.EVAL

    def test_global_options_precede_the_command(self, tmp_path):
        args = build_parser().parse_args(
            ["--seed", "3", "--output-dir", str(tmp_path), "pretrain", "--force"]
        )
        assert args.seed == 3
        assert args.output_dir == tmp_path
        assert args.force is True

    def test_repro_defaults(self):
        args = build_parser().parse_args(["repro"])
        assert args.seeds == 5
