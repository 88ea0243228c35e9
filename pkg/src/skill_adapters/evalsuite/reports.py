"""Report documents: aligned text tables for reading, JSON for machines."""

import logging
from collections.abc import Sequence
from pathlib import Path

import pandas as pd
from pydantic import BaseModel

from skill_adapters.evalsuite.ablation import AblationTable
from skill_adapters.evalsuite.accounting import AccountingReport
from skill_adapters.evalsuite.forgetting import ForgettingReport
from skill_adapters.evalsuite.transfer import TransferTable

logger = logging.getLogger(__name__)

STRATEGY_TABLE = "strategies"
TRANSFER_TABLE = "base_adapter_transfer"
ABLATION_TABLE = "ablation"
FORGETTING_TABLE = "forgetting"
ACCOUNTING_TABLE = "accounting"


class StrategyRow(BaseModel):
    strategy: str
    scores: dict[str, float]
    average: float
    theta_multiple: float
    theta_delta_pct: float


class StrategyTable(BaseModel):
    tasks: list[str]
    rows: list[StrategyRow]


def strategy_frame(table: StrategyTable) -> pd.DataFrame:
    records = []
    for row in table.rows:
        record: dict[str, object] = {"strategy": row.strategy}
        record.update({task: row.scores.get(task) for task in table.tasks})
        record["avg"] = row.average
        record["Theta"] = f"+{row.theta_multiple:.2f}x"
        record["theta_delta"] = f"{row.theta_delta_pct:.2f}%"
        records.append(record)
    return pd.DataFrame.from_records(records)


def accounting_frame(report: AccountingReport) -> pd.DataFrame:
    return pd.DataFrame.from_records(
        [
            {
                "strategy": row.strategy,
                "phase": row.phase or "",
                "Theta": row.theta_total,
                "Theta_x": f"+{row.theta_multiple:.2f}x",
                "theta_delta": row.theta_delta,
                "theta_delta_pct": f"{row.theta_delta_pct:.2f}%",
            }
            for row in report.rows
        ]
    )


def forgetting_frame(reports: Sequence[ForgettingReport]) -> pd.DataFrame:
    records = []
    for report in reports:
        if not report.applicable:
            records.append({"strategy": report.strategy, "task": "n/a"})
            continue
        for row in report.rows:
            records.append(
                {
                    "strategy": report.strategy,
                    "task": row.task,
                    "before": row.before,
                    "after": row.after,
                    "delta": row.delta,
                }
            )
    return pd.DataFrame.from_records(records)


def ablation_frame(tables: Sequence[AblationTable]) -> pd.DataFrame:
    return pd.DataFrame.from_records(
        [
            {
                "protocol": table.protocol,
                "task": table.task,
                "setting": row.setting,
                "removed_blocks": " ".join(map(str, row.removed_blocks)) or "-",
                "hits@1": row.hits_at_1,
            }
            for table in tables
            for row in table.rows
        ]
    )


def transfer_frame(table: TransferTable) -> pd.DataFrame:
    return pd.DataFrame.from_records([row.model_dump() for row in table.rows])


def render(frame: pd.DataFrame) -> str:
    if frame.empty:
        return "(empty)\n"
    return frame.to_string(index=False, float_format=lambda v: f"{v:.4f}", na_rep="-") + "\n"


def write_report(
    reports_dir: Path,
    name: str,
    document: BaseModel | Sequence[BaseModel],
    frame: pd.DataFrame,
) -> Path:
    reports_dir.mkdir(parents=True, exist_ok=True)
    if isinstance(document, BaseModel):
        payload = document.model_dump_json(indent=2)
    else:
        payload = "[" + ",".join(d.model_dump_json() for d in document) + "]"
    (reports_dir / f"{name}.json").write_text(payload + "\n", encoding="utf-8")
    text_path = reports_dir / f"{name}.txt"
    text_path.write_text(render(frame), encoding="utf-8")
    logger.info(f"Wrote report {text_path}")
    return text_path


def median_frame(frames: Sequence[pd.DataFrame], keys: Sequence[str]) -> pd.DataFrame:
    """Per-key median of every numeric column across seeds."""
    stacked = pd.concat(frames, ignore_index=True)
    numeric = [
        c
        for c in stacked.columns
        if c not in keys and pd.api.types.is_numeric_dtype(stacked[c])
    ]
    return stacked.groupby(list(keys), sort=False)[numeric].median().reset_index()
