import logging
from argparse import ArgumentParser, Namespace

from skill_adapters.cli.command_names import CommandName
from skill_adapters.cli.definitions import CommandDefinition
from skill_adapters.cli.help.help import get_help
from skill_adapters.cli.lab import Lab
from skill_adapters.cli.repro import repro
from skill_adapters.cli.suite import (
    ADAPTER_STRATEGIES,
    ablation_tables,
    accounting,
    base_adapter_study,
    embedding_models,
    forgetting_reports,
    strategy_table,
    transfer_table,
    write_embeddings,
)
from skill_adapters.evalsuite.ablation import AblationProtocol
from skill_adapters.evalsuite.reports import (
    ABLATION_TABLE,
    ACCOUNTING_TABLE,
    FORGETTING_TABLE,
    STRATEGY_TABLE,
    TRANSFER_TABLE,
    ablation_frame,
    accounting_frame,
    forgetting_frame,
    render,
    strategy_frame,
    transfer_frame,
    write_report,
)
from skill_adapters.tasks.generator import Split
from skill_adapters.tasks.io import write_examples
from skill_adapters.tasks.task_names import TaskName
from skill_adapters.training.strategies import StrategyRun, run_strategy
from skill_adapters.training.strategy_names import Strategy

logger = logging.getLogger(__name__)


def _strategy_arg(parser: ArgumentParser, *, many: bool) -> None:
    choices = sorted(Strategy.get_all_strategy_names())
    if many:
        parser.add_argument(
            "--strategy",
            action="append",
            choices=choices,
            help="strategy to include (repeatable; default: every saved run)",
        )
    else:
        parser.add_argument("--strategy", choices=choices, help="strategy to run")


def _saved_runs(lab: Lab, names: list[str] | None) -> dict[Strategy, StrategyRun]:
    if names:
        strategies = [Strategy(name) for name in names]
    else:
        strategies = [s for s in Strategy if lab.layout.manifest(s).exists()]
        if not strategies:
            raise FileNotFoundError(f"no saved runs under {lab.layout.root}")
    return {s: lab.restore_run(s) for s in strategies}


def gen_data(lab: Lab, args: Namespace) -> int:
    for task, data in lab.datasets().items():
        write_examples(lab.layout.dataset(task.value, Split.TRAIN.value), data.train)
        write_examples(lab.layout.dataset(task.value, Split.VALID.value), data.valid)
    print(f"wrote {2 * len(lab.tasks)} dataset files to {lab.layout.data_dir}")
    return 0


def pretrain(lab: Lab, args: Namespace) -> int:
    model = lab.backbone(force=args.force)
    print(f"backbone: {model.parameter_count()} parameters at {lab.layout.backbone}")
    return 0


def run(lab: Lab, args: Namespace) -> int:
    strategy = Strategy(args.strategy) if args.strategy else lab.run.strategy.strategy
    cfg = lab.run.with_strategy(strategy)
    result = run_strategy(
        cfg, lab.backbone(), lab.datasets(), lab.layout.logs_dir(strategy)
    )
    manifest = Lab(cfg, lab.layout.root).save_run(result)
    for phase in manifest.phases:
        print(
            f"{strategy.value} {phase.name}: tasks={','.join(phase.tasks)} "
            f"theta_delta={phase.theta_delta} steps={phase.steps}"
        )
    return 0


def evaluate(lab: Lab, args: Namespace) -> int:
    table = strategy_table(lab, _saved_runs(lab, args.strategy))
    frame = strategy_frame(table)
    write_report(lab.layout.reports_dir, STRATEGY_TABLE, table, frame)
    print(render(frame), end="")
    return 0


def ablate(lab: Lab, args: Namespace) -> int:
    strategy = Strategy(args.strategy) if args.strategy else Strategy.ADAHIT
    if strategy not in ADAPTER_STRATEGIES:
        raise ValueError(f"ablation needs an adapter strategy, got {strategy.value}")
    task = TaskName(args.task) if args.task else lab.run.strategy.new_task
    protocols = (
        [AblationProtocol(args.protocol)] if args.protocol else list(AblationProtocol)
    )
    saved = lab.restore_run(strategy)
    tables = ablation_tables(lab, {strategy.value: saved.models[task]}, task, protocols)
    frame = ablation_frame(tables)
    write_report(lab.layout.reports_dir, ABLATION_TABLE, tables, frame)
    print(render(frame), end="")
    return 0


def account(lab: Lab, args: Namespace) -> int:
    report = accounting(lab)
    frame = accounting_frame(report)
    write_report(lab.layout.reports_dir, ACCOUNTING_TABLE, report, frame)
    print(f"backbone parameters: {report.backbone_params}")
    print(render(frame), end="")
    return 0


def forgetting(lab: Lab, args: Namespace) -> int:
    reports = forgetting_reports(lab, _saved_runs(lab, args.strategy))
    frame = forgetting_frame(reports)
    write_report(lab.layout.reports_dir, FORGETTING_TABLE, reports, frame)
    print(render(frame), end="")
    return 0


def zeroshot(lab: Lab, args: Namespace) -> int:
    target = TaskName(args.target) if args.target else lab.run.strategy.new_task
    table = transfer_table(lab, target, fine_tune=not args.no_fine_tune)
    frame = transfer_frame(table)
    write_report(lab.layout.reports_dir, TRANSFER_TABLE, table, frame)
    print(render(frame), end="")
    return 0


def embed(lab: Lab, args: Namespace) -> int:
    runs = _saved_runs(lab, args.strategy) if args.strategy or _any_saved(lab) else {}
    study = base_adapter_study(lab) if args.base_adapters else None
    write_embeddings(lab, embedding_models(lab, runs, study), args.n)
    return 0


def _any_saved(lab: Lab) -> bool:
    return any(lab.layout.manifest(s).exists() for s in Strategy)


def reproduce(lab: Lab, args: Namespace) -> int:
    summary = repro(
        lab.run, lab.layout.root, args.seeds, args.workers, args.debug_numerics
    )
    for check in summary.checks:
        print(f"{check.name}: {'ok' if check.passed else 'FAILED'} {check.medians}")
    return 0


def _add_pretrain_args(parser: ArgumentParser) -> None:
    parser.add_argument("--force", action="store_true", help="pretrain even if a checkpoint exists")


def _add_ablate_args(parser: ArgumentParser) -> None:
    _strategy_arg(parser, many=False)
    parser.add_argument("--task", choices=sorted(TaskName.get_all_task_names()))
    parser.add_argument("--protocol", choices=[p.value for p in AblationProtocol])


def _add_zeroshot_args(parser: ArgumentParser) -> None:
    parser.add_argument("--target", choices=sorted(TaskName.get_all_task_names()))
    parser.add_argument(
        "--no-fine-tune", action="store_true", help="skip the sub-adapter fine-tuning column"
    )


def _add_embed_args(parser: ArgumentParser) -> None:
    _strategy_arg(parser, many=True)
    parser.add_argument("--n", type=int, default=100, help="examples per task")
    parser.add_argument(
        "--base-adapters",
        action="store_true",
        help="also dump the base adapters trained on each source",
    )


def _add_repro_args(parser: ArgumentParser) -> None:
    parser.add_argument("--seeds", type=int, default=5, help="number of seeds")
    parser.add_argument("--workers", type=int, default=None, help="parallel seed processes")


def create_command_definitions() -> list[CommandDefinition]:
    return [
        CommandDefinition(gen_data, CommandName.GEN_DATA, get_help("gen-data")),
        CommandDefinition(
            pretrain, CommandName.PRETRAIN, get_help("pretrain"), add_arguments=_add_pretrain_args
        ),
        CommandDefinition(
            run,
            CommandName.RUN,
            get_help("run"),
            add_arguments=lambda p: _strategy_arg(p, many=False),
        ),
        CommandDefinition(
            evaluate,
            CommandName.EVAL,
            get_help("eval"),
            add_arguments=lambda p: _strategy_arg(p, many=True),
        ),
        CommandDefinition(
            ablate, CommandName.ABLATE, get_help("ablate"), add_arguments=_add_ablate_args
        ),
        CommandDefinition(account, CommandName.ACCOUNT, get_help("account")),
        CommandDefinition(
            forgetting,
            CommandName.FORGETTING,
            get_help("forgetting"),
            add_arguments=lambda p: _strategy_arg(p, many=True),
        ),
        CommandDefinition(
            zeroshot, CommandName.ZEROSHOT, get_help("zeroshot"), add_arguments=_add_zeroshot_args
        ),
        CommandDefinition(
            embed, CommandName.EMBED, get_help("embed"), add_arguments=_add_embed_args
        ),
        CommandDefinition(
            reproduce, CommandName.REPRO, get_help("repro"), add_arguments=_add_repro_args
        ),
    ]
