import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from skill_adapters.config.config import EvalConfig
from skill_adapters.encoder.forward import encode_batch
from skill_adapters.encoder.model import RetrievalModel
from skill_adapters.tasks.candidates import CandidateSet, build_candidates
from skill_adapters.tasks.generator import TaskData
from skill_adapters.tasks.rules import Tokens

logger = logging.getLogger(__name__)


class Scorer(Protocol):
    def score_candidates(self, context: Tokens, candidates: Sequence[Tokens]) -> np.ndarray: ...


class ModelScorer:
    """Scores with a trained model; the model is only read."""

    def __init__(self, model: RetrievalModel) -> None:
        self.model = model

    def score_candidates(self, context: Tokens, candidates: Sequence[Tokens]) -> np.ndarray:
        u = encode_batch(self.model, [context]).data[0]
        v = encode_batch(self.model, candidates).data
        return v @ u


@dataclass(frozen=True)
class EvalItem:
    context: Tokens
    candidates: CandidateSet


def build_eval_items(task: TaskData, cfg: EvalConfig, seed: int) -> list[EvalItem]:
    """The first n_eval validation examples with their K candidates."""
    pool = task.valid
    return [
        EvalItem(ex.context, build_candidates(task.spec, ex, cfg.K, pool, seed))
        for ex in pool[: cfg.n_eval]
    ]


def gold_wins(scores: np.ndarray, gold_index: int) -> bool:
    """True iff the gold scores strictly above every other candidate."""
    others = np.delete(scores, gold_index)
    return bool(scores[gold_index] > others.max())


def _count_hits(scorer: Scorer, items: Sequence[EvalItem]) -> int:
    return sum(
        gold_wins(
            scorer.score_candidates(item.context, item.candidates.candidates),
            item.candidates.gold_index,
        )
        for item in items
    )


def hits_at_1(scorer: Scorer, items: Sequence[EvalItem], workers: int = 1) -> float:
    if not items:
        return 0.0
    if workers <= 1:
        hits = _count_hits(scorer, items)
    else:
        size = -(-len(items) // workers)
        chunks = [items[i : i + size] for i in range(0, len(items), size)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(lambda chunk: _count_hits(scorer, chunk), chunks))
    return hits / len(items)


def evaluate_model(
    model: RetrievalModel, items: Sequence[EvalItem], cfg: EvalConfig
) -> float:
    return hits_at_1(ModelScorer(model), items, cfg.workers)
