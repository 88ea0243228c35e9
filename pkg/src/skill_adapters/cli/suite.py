"""Builds every report table for one configuration and seed."""

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import pandas as pd

from skill_adapters.cli.lab import Lab
from skill_adapters.encoder.model import RetrievalModel
from skill_adapters.evalsuite.ablation import AblationProtocol, AblationTable, ablate
from skill_adapters.evalsuite.accounting import AccountingReport, parameter_accounting
from skill_adapters.evalsuite.embeddings import dump_embeddings
from skill_adapters.evalsuite.forgetting import ForgettingReport, forgetting_eval
from skill_adapters.evalsuite.metrics import evaluate_model
from skill_adapters.evalsuite.reports import (
    ABLATION_TABLE,
    ACCOUNTING_TABLE,
    FORGETTING_TABLE,
    STRATEGY_TABLE,
    TRANSFER_TABLE,
    StrategyRow,
    StrategyTable,
    ablation_frame,
    accounting_frame,
    forgetting_frame,
    strategy_frame,
    transfer_frame,
    write_report,
)
from skill_adapters.evalsuite.transfer import BaseAdapterStudy, TransferTable
from skill_adapters.tasks.task_names import TaskName
from skill_adapters.training.strategies import StrategyRun, run_strategy
from skill_adapters.training.strategy_names import Strategy

logger = logging.getLogger(__name__)

EMBEDDINGS_FILE = "embeddings.tsv"
ADAPTER_STRATEGIES = (Strategy.ADA, Strategy.ADAHIT)


def accounting(lab: Lab) -> AccountingReport:
    s = lab.run.strategy
    return parameter_accounting(lab.run.encoder, lab.run.adapter, len(s.old_tasks), 1)


def strategy_table(lab: Lab, runs: Mapping[Strategy, StrategyRun]) -> StrategyTable:
    report = accounting(lab)
    rows = []
    for strategy, run in runs.items():
        scores = {
            task.value: evaluate_model(run.models[task], lab.eval_items(task), lab.run.eval)
            for task in lab.tasks
        }
        budget = report.row(strategy, "sub" if strategy is Strategy.ADAHIT else None)
        rows.append(
            StrategyRow(
                strategy=strategy.value,
                scores=scores,
                average=sum(scores.values()) / len(scores),
                theta_multiple=budget.theta_multiple,
                theta_delta_pct=budget.theta_delta_pct,
            )
        )
    return StrategyTable(tasks=[t.value for t in lab.tasks], rows=rows)


def forgetting_reports(
    lab: Lab, runs: Mapping[Strategy, StrategyRun]
) -> list[ForgettingReport]:
    items = {task: lab.eval_items(task) for task in lab.run.strategy.old_tasks}
    return [forgetting_eval(run, items, lab.run.eval) for run in runs.values()]


def ablation_tables(
    lab: Lab,
    models: Mapping[str, RetrievalModel],
    task: TaskName,
    protocols: Sequence[AblationProtocol] = tuple(AblationProtocol),
) -> list[AblationTable]:
    tables = []
    for label, model in models.items():
        for protocol in protocols:
            table = ablate(model, lab.eval_items(task), lab.run.eval, protocol, task.value)
            tables.append(table.model_copy(update={"task": f"{label}:{task.value}"}))
    return tables


def base_adapter_study(lab: Lab) -> BaseAdapterStudy:
    return BaseAdapterStudy(lab.run, lab.backbone(), lab.datasets(), lab.all_eval_items())


def transfer_table(
    lab: Lab,
    target: TaskName,
    fine_tune: bool = True,
    study: BaseAdapterStudy | None = None,
) -> TransferTable:
    study = study if study is not None else base_adapter_study(lab)
    return study.table(target, fine_tune=fine_tune)


def embedding_models(
    lab: Lab,
    runs: Mapping[Strategy, StrategyRun],
    study: BaseAdapterStudy | None = None,
) -> dict[str, RetrievalModel]:
    """Backbone, each strategy's new-task model and, with a study, its base adapters."""
    new_task = lab.run.strategy.new_task
    models = {"backbone": lab.backbone()}
    for strategy, run in runs.items():
        models[strategy.value] = run.models[new_task]
    if study is not None:
        for source in study.sources():
            models[f"base:{source}"] = study.base_model(source)
    return models


def write_embeddings(lab: Lab, models: Mapping[str, RetrievalModel], n_per_task: int) -> None:
    examples = {task.value: lab.datasets()[task].valid for task in lab.tasks}
    dump_embeddings(models, examples, n_per_task, lab.layout.reports_dir / EMBEDDINGS_FILE)


@dataclass
class SuiteResult:
    frames: dict[str, pd.DataFrame] = field(default_factory=dict)


def run_suite(lab: Lab, embed_per_task: int = 100) -> SuiteResult:
    """Pretrains, runs every strategy and writes all reports for one seed."""
    reports = lab.layout.reports_dir
    result = SuiteResult()
    lab.backbone()
    runs: dict[Strategy, StrategyRun] = {}
    for strategy in Strategy:
        cfg = lab.run.with_strategy(strategy)
        runs[strategy] = run_strategy(
            cfg, lab.backbone(), lab.datasets(), lab.layout.logs_dir(strategy)
        )
        Lab(cfg, lab.layout.root).save_run(runs[strategy])

    strategies = strategy_table(lab, runs)
    result.frames[STRATEGY_TABLE] = strategy_frame(strategies)
    write_report(reports, STRATEGY_TABLE, strategies, result.frames[STRATEGY_TABLE])

    new_task = lab.run.strategy.new_task
    study = base_adapter_study(lab)
    transfer = transfer_table(lab, new_task, study=study)
    result.frames[TRANSFER_TABLE] = transfer_frame(transfer)
    write_report(reports, TRANSFER_TABLE, transfer, result.frames[TRANSFER_TABLE])

    ablations = ablation_tables(
        lab, {s.value: runs[s].models[new_task] for s in ADAPTER_STRATEGIES}, new_task
    )
    result.frames[ABLATION_TABLE] = ablation_frame(ablations)
    write_report(reports, ABLATION_TABLE, ablations, result.frames[ABLATION_TABLE])

    forgetting = forgetting_reports(lab, runs)
    result.frames[FORGETTING_TABLE] = forgetting_frame(forgetting)
    write_report(reports, FORGETTING_TABLE, forgetting, result.frames[FORGETTING_TABLE])

    budget = accounting(lab)
    result.frames[ACCOUNTING_TABLE] = accounting_frame(budget)
    write_report(reports, ACCOUNTING_TABLE, budget, result.frames[ACCOUNTING_TABLE])

    write_embeddings(lab, embedding_models(lab, runs, study), embed_per_task)
    logger.info(f"Suite finished for seed {lab.run.seed}")
    return result
