"""Multi-seed reproduction: per-seed suites plus median summaries and ordering checks."""

import logging
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import pandas as pd
from pydantic import BaseModel

from skill_adapters.cli.lab import Lab
from skill_adapters.cli.suite import run_suite
from skill_adapters.config.config import RunConfig, parse_config
from skill_adapters.evalsuite.reports import (
    ABLATION_TABLE,
    ACCOUNTING_TABLE,
    FORGETTING_TABLE,
    STRATEGY_TABLE,
    TRANSFER_TABLE,
    median_frame,
    render,
)
from skill_adapters.evalsuite.transfer import MT_SOURCE
from skill_adapters.tensorcore.tensor import set_debug_numerics
from skill_adapters.training.strategy_names import Strategy

logger = logging.getLogger(__name__)

_MEDIAN_KEYS = {
    STRATEGY_TABLE: ["strategy"],
    TRANSFER_TABLE: ["source", "target"],
    ABLATION_TABLE: ["protocol", "task", "setting"],
    FORGETTING_TABLE: ["strategy", "task"],
}


class OrderingCheck(BaseModel):
    name: str
    passed: bool
    medians: dict[str, float]


class ReproSummary(BaseModel):
    seeds: list[int]
    checks: list[OrderingCheck]


def seed_dir(root: Path, seed: int) -> Path:
    return root / f"seed_{seed}"


def _suite_for_seed(
    payload: dict, root: str, seed: int, debug_numerics: bool
) -> dict[str, pd.DataFrame]:
    set_debug_numerics(debug_numerics)
    run = parse_config(payload).with_seed(seed)
    lab = Lab(run, seed_dir(Path(root), seed))
    return run_suite(lab).frames


def _per_seed(frames: Sequence[pd.DataFrame], seeds: Sequence[int]) -> pd.DataFrame:
    return pd.concat(
        [frame.assign(seed=seed) for frame, seed in zip(frames, seeds, strict=True)],
        ignore_index=True,
    )


def mt_base_check(per_seed: pd.DataFrame) -> tuple[OrderingCheck, pd.DataFrame]:
    """MT-trained base adapters give the best zero-shot score on the target."""
    table = per_seed.pivot(index="seed", columns="source", values="zero_shot")
    medians = table.median().to_dict()
    singles = [v for k, v in medians.items() if k != MT_SOURCE]
    passed = all(medians[MT_SOURCE] > v for v in singles)
    return OrderingCheck(name="mt_base_best_zero_shot", passed=passed, medians=medians), table


def hierarchical_check(
    per_seed: pd.DataFrame, new_task: str
) -> tuple[OrderingCheck, pd.DataFrame]:
    """Hierarchical adapters score at least as well as plain adapters on the new task."""
    chosen = per_seed[per_seed["strategy"].isin([Strategy.ADA.value, Strategy.ADAHIT.value])]
    table = chosen.pivot(index="seed", columns="strategy", values=new_task)
    medians = table.median().to_dict()
    passed = medians[Strategy.ADAHIT.value] >= medians[Strategy.ADA.value]
    return OrderingCheck(name="adahit_not_below_ada", passed=passed, medians=medians), table


def forgetting_check(per_seed: pd.DataFrame) -> tuple[OrderingCheck, pd.DataFrame]:
    """Fine-tuning a multi-task model on the new task lowers at least two old tasks."""
    chosen = per_seed[per_seed["strategy"] == Strategy.MT_FT.value]
    table = chosen.pivot(index="seed", columns="task", values="delta")
    medians = table.median().to_dict()
    passed = sum(v < 0 for v in medians.values()) >= 2
    return OrderingCheck(name="mt_ft_forgets_old_tasks", passed=passed, medians=medians), table


def repro(
    run: RunConfig,
    root: Path,
    n_seeds: int,
    workers: int,
    debug_numerics: bool = False,
) -> ReproSummary:
    seeds = [run.seed + i for i in range(n_seeds)]
    payload = run.model_dump(mode="json")
    logger.info(f"Reproducing over seeds {seeds} with {workers} worker(s)")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_suite_for_seed, payload, str(root), seed, debug_numerics)
                for seed in seeds
            ]
            results = [f.result() for f in futures]
    else:
        results = [_suite_for_seed(payload, str(root), seed, debug_numerics) for seed in seeds]

    reports = root / "reports"
    reports.mkdir(parents=True, exist_ok=True)
    per_seed = {
        name: _per_seed([r[name] for r in results], seeds) for name in _MEDIAN_KEYS
    }
    for name, keys in _MEDIAN_KEYS.items():
        frame = median_frame([r[name] for r in results], keys)
        (reports / f"median_{name}.txt").write_text(render(frame), encoding="utf-8")
    (reports / f"{ACCOUNTING_TABLE}.txt").write_text(
        render(results[0][ACCOUNTING_TABLE]), encoding="utf-8"
    )

    checks = []
    for check, table in (
        mt_base_check(per_seed[TRANSFER_TABLE]),
        hierarchical_check(per_seed[STRATEGY_TABLE], run.strategy.new_task.value),
        forgetting_check(per_seed[FORGETTING_TABLE]),
    ):
        checks.append(check)
        if not check.passed:
            logger.warning(f"Ordering check {check.name} failed: {check.medians}")
            (reports / f"{check.name}_per_seed.txt").write_text(
                render(table.reset_index()), encoding="utf-8"
            )
    summary = ReproSummary(seeds=seeds, checks=checks)
    (reports / "orderings.json").write_text(
        summary.model_dump_json(indent=2) + "\n", encoding="utf-8"
    )
    (reports / "orderings.txt").write_text(
        render(pd.DataFrame.from_records([{"check": c.name, "passed": c.passed} for c in checks])),
        encoding="utf-8",
    )
    return summary
