from enum import Enum


class Strategy(Enum):
    """Transfer strategies a run can execute."""

    FE = "FE"
    FT = "FT"
    MT_FT = "MT_FT"
    ADA = "Ada"
    ADAHIT = "AdaHIT"
    MT_ALL = "MT_ALL"

    @property
    def isolates_tasks(self) -> bool:
        # Each task keeps its own small module on a frozen backbone.
        return self in (Strategy.ADA, Strategy.ADAHIT)

    @property
    def shares_backbone(self) -> bool:
        return self in (Strategy.FT, Strategy.MT_FT, Strategy.MT_ALL)

    @classmethod
    def get_all_strategy_names(cls) -> set[str]:
        return {member.value for member in cls}
