from enum import Enum


class CommandName(Enum):
    """Subcommands of the skill-adapters CLI."""

    GEN_DATA = "gen-data"
    PRETRAIN = "pretrain"
    RUN = "run"
    EVAL = "eval"
    ABLATE = "ablate"
    ACCOUNT = "account"
    FORGETTING = "forgetting"
    ZEROSHOT = "zeroshot"
    EMBED = "embed"
    REPRO = "repro"

    @classmethod
    def get_all_command_names(cls) -> set[str]:
        return {member.value for member in cls}
