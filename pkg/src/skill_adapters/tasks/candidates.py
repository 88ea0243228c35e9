from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from skill_adapters.errors import PoolError
from skill_adapters.rng import SeedStreams
from skill_adapters.tasks.generator import Example, context_key
from skill_adapters.tasks.rules import TaskSpec, Tokens, other_rule_outputs, rule_variants
from skill_adapters.tensorcore.errors import ContractError

_MAX_CORRUPTION_TRIES = 1000


@dataclass(frozen=True)
class CandidateSet:
    candidates: tuple[Tokens, ...]
    gold_index: int

    @property
    def gold(self) -> Tokens:
        return self.candidates[self.gold_index]


def quotas(K: int) -> tuple[int, int, int]:
    """(hard negatives, pool golds, corrupted golds) for K candidates."""
    hard = (K - 1) // 3
    pool = (K - 1) // 3
    return hard, pool, K - 1 - hard - pool


def _corrupt(gold: Tokens, vocab: int, rng: np.random.Generator) -> Tokens:
    tokens = list(gold)
    n_sub = min(2, len(tokens))
    for position in rng.choice(len(tokens), size=n_sub, replace=False):
        replacement = int(rng.integers(0, vocab - 1))
        if replacement >= tokens[position]:
            replacement += 1
        tokens[position] = replacement
    return tuple(tokens)


def build_candidates(
    spec: TaskSpec,
    ex: Example,
    K: int,
    pool: Sequence[Example],
    seed: int,
) -> CandidateSet:
    """Gold plus K-1 distinct distractors, gold placed at a random position."""
    if K < 2:
        raise ContractError(f"K must be at least 2, got {K}")
    n_hard, n_pool, n_corrupt = quotas(K)
    rng = SeedStreams(seed).generator("candidates", spec.task_id, context_key(ex.context))
    taken: set[Tokens] = {ex.gold}
    distractors: list[Tokens] = []

    def take(candidate: Tokens) -> bool:
        if candidate in taken:
            return False
        taken.add(candidate)
        distractors.append(candidate)
        return True

    hard = 0
    for candidate in [*other_rule_outputs(spec, ex.context), *rule_variants(spec, ex.context)]:
        if hard == n_hard:
            break
        hard += take(candidate)
    n_corrupt += n_hard - hard

    pooled = 0
    for index in rng.permutation(len(pool)):
        if pooled == n_pool:
            break
        pooled += take(pool[int(index)].gold)
    if pooled < n_pool:
        raise PoolError(
            f"pool of {len(pool)} examples yields only {pooled} distinct golds, "
            f"{n_pool} needed"
        )

    corrupted = 0
    for _ in range(_MAX_CORRUPTION_TRIES):
        if corrupted == n_corrupt:
            break
        corrupted += take(_corrupt(ex.gold, spec.content_vocab, rng))
    if corrupted < n_corrupt:
        raise PoolError(f"could not build {n_corrupt} distinct corrupted golds")

    gold_index = int(rng.integers(K))
    candidates = [*distractors[:gold_index], ex.gold, *distractors[gold_index:]]
    return CandidateSet(candidates=tuple(candidates), gold_index=gold_index)
