import argparse
from collections.abc import Sequence

from skill_adapters.cli.command_names import CommandName
from skill_adapters.cli.definitions import CommandDefinition


def register_commands(
    subparsers: argparse._SubParsersAction,
    command_definitions: list[CommandDefinition],
    exclude_commands: Sequence[CommandName] = (),
) -> None:
    for definition in command_definitions:
        if definition.name in exclude_commands:
            continue
        parser = subparsers.add_parser(
            definition.name.value,
            help=definition.get_summary(),
            description=definition.description,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        if definition.add_arguments is not None:
            definition.add_arguments(parser)
        parser.set_defaults(command=definition)
