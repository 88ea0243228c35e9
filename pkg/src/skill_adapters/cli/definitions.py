from argparse import ArgumentParser, Namespace
from collections.abc import Callable
from dataclasses import dataclass

from skill_adapters.cli.command_names import CommandName
from skill_adapters.cli.lab import Lab


@dataclass
class CommandDefinition:
    fn: Callable[[Lab, Namespace], int]
    name: CommandName
    description: str
    summary: str | None = None
    add_arguments: Callable[[ArgumentParser], None] | None = None

    def get_summary(self) -> str:
        if self.summary is not None:
            return self.summary
        return self.description.strip().splitlines()[0]
