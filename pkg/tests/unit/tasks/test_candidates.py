import pytest

from skill_adapters.errors import PoolError
from skill_adapters.tasks.candidates import build_candidates, quotas
from skill_adapters.tasks.generator import Split, generate_split
from skill_adapters.tasks.rules import TaskSpec, other_rule_outputs
from skill_adapters.tasks.task_names import TaskName
from skill_adapters.tensorcore.errors import ContractError
from tests.mocks.config import tiny_data_config


@pytest.fixture(params=list(TaskName), ids=lambda t: t.value)
def spec(request) -> TaskSpec:
    return TaskSpec.from_config(request.param, tiny_data_config)


@pytest.fixture
def pool(spec):
    return generate_split(spec, 40, seed=0, split=Split.VALID)


@pytest.mark.parametrize(("K", "expected"), [(2, (0, 0, 1)), (5, (1, 1, 2)), (20, (6, 6, 7))])
def test_quotas(K, expected):
    assert quotas(K) == expected
    assert sum(quotas(K)) == K - 1


@pytest.mark.parametrize("K", [2, 5, 10])
def test_candidates_are_distinct_and_contain_the_gold(spec, pool, K):
    for ex in pool[:10]:
        cands = build_candidates(spec, ex, K, pool, seed=0)
        assert len(cands.candidates) == K
        assert len(set(cands.candidates)) == K
        assert cands.gold == ex.gold
        assert all(len(c) == spec.response_len for c in cands.candidates)


def test_hard_negatives_come_first_from_other_rules(spec, pool):
    ex = pool[0]
    cands = build_candidates(spec, ex, 20, pool, seed=0)
    other = [o for o in other_rule_outputs(spec, ex.context) if o != ex.gold]
    assert set(other) <= set(cands.candidates)


def test_candidates_are_deterministic(spec, pool):
    ex = pool[3]
    assert build_candidates(spec, ex, 5, pool, 1) == build_candidates(spec, ex, 5, pool, 1)


def test_gold_position_varies(spec, pool):
    positions = {build_candidates(spec, ex, 5, pool, 0).gold_index for ex in pool}
    assert len(positions) > 1


def test_pool_without_other_golds(spec, pool):
    with pytest.raises(PoolError):
        build_candidates(spec, pool[0], 5, pool[:1], seed=0)


def test_single_candidate_is_rejected(spec, pool):
    with pytest.raises(ContractError):
        build_candidates(spec, pool[0], 1, pool, seed=0)
