import numpy as np
import pytest

from skill_adapters.encoder.forward import (
    block_forward,
    encode,
    encode_batch,
    prepare_batch,
    score,
    score_matrix,
)
from skill_adapters.config.config import Pooling
from skill_adapters.encoder.model import clone_model, init_head, same_weights
from skill_adapters.errors import VocabError
from skill_adapters.tensorcore.errors import ContractError, DimensionError
from skill_adapters.tensorcore.tensor import tensor
from tests.mocks.config import tiny_encoder_config
from tests.mocks.models import TINY_PAD, random_contexts, tiny_backbone


@pytest.fixture
def model():
    return tiny_backbone(seed=1)


class TestPrepareBatch:
    def test_pads_to_max_len(self, model):
        ids, mask = prepare_batch(model, [(1, 2, 3), (4, 5)])
        assert ids.shape == (2, tiny_encoder_config.max_len)
        assert mask.sum(axis=1).tolist() == [3, 2]
        assert (ids[1, 2:] == TINY_PAD).all()

    def test_empty_batch(self, model):
        with pytest.raises(ContractError):
            prepare_batch(model, [])

    def test_sequence_longer_than_max_len(self, model):
        with pytest.raises(ContractError):
            prepare_batch(model, [tuple(range(tiny_encoder_config.max_len + 1))])

    @pytest.mark.parametrize("token", [-1, tiny_encoder_config.vocab_size])
    def test_token_outside_vocabulary(self, model, token):
        with pytest.raises(VocabError):
            prepare_batch(model, [(1, token)])

    def test_all_padding_sequence(self, model):
        with pytest.raises(ContractError):
            prepare_batch(model, [(TINY_PAD, TINY_PAD)])


class TestEncode:
    def test_output_shapes(self, model):
        contexts = random_contexts(3)
        assert encode_batch(model, contexts).shape == (3, tiny_encoder_config.d_model)
        assert encode(model, contexts[0]).shape == (tiny_encoder_config.d_model,)
        assert score_matrix(model, contexts, contexts[:2]).shape == (3, 2)
        assert score(model, contexts[0], contexts[1]).shape == ()

    def test_explicit_padding_changes_nothing(self, model):
        seq = (3, 1, 4, 1, 5)
        padded = (*seq, TINY_PAD, TINY_PAD)
        assert np.array_equal(encode(model, seq).data, encode(model, padded).data)

    def test_padding_embedding_does_not_leak(self, model):
        contexts = random_contexts(2, length=4)
        before = encode_batch(model, contexts).data
        rows = model.tokens.data.copy()
        rows[TINY_PAD] = 100.0
        model.tokens.assign(rows)
        assert np.array_equal(encode_batch(model, contexts).data, before)

    def test_score_is_the_dot_product_of_encodings(self, model):
        a, b = random_contexts(2)
        expected = float(encode(model, a).data @ encode(model, b).data)
        assert score(model, a, b).item() == pytest.approx(expected, rel=1e-5)

    def test_score_matrix_agrees_with_pairwise_scores(self, model):
        contexts = random_contexts(3, seed=4)
        matrix = score_matrix(model, contexts, contexts).data
        assert matrix[1, 2] == pytest.approx(score(model, contexts[1], contexts[2]).item(), rel=1e-4)

    def test_identity_head_keeps_the_encoding(self, model):
        contexts = random_contexts(2)
        plain = encode_batch(model, contexts).data
        headed = encode_batch(model, contexts, task_head=init_head(tiny_encoder_config.d_model)).data
        assert np.allclose(plain, headed, atol=1e-6)

    def test_mean_pooling_divides_by_length(self):
        cfg = tiny_encoder_config.model_copy(update={"pooling": Pooling.MEAN})
        summed = tiny_backbone(seed=2)
        averaged = tiny_backbone(seed=2, config=cfg)
        seq = (1, 2, 3, 4)
        assert np.allclose(encode(averaged, seq).data, encode(summed, seq).data / 4, atol=1e-6)

    def test_permuting_tokens_changes_the_encoding(self, model):
        rng = np.random.default_rng(9)
        for seq in random_contexts(20, seed=6):
            order = rng.permutation(len(seq))
            permuted = tuple(seq[i] for i in order)
            if permuted == seq:
                continue
            assert not np.array_equal(encode(model, seq).data, encode(model, permuted).data)


class TestBlockForward:
    def test_single_sequence_matches_batch_of_one(self, model):
        rng = np.random.default_rng(0)
        h = rng.normal(size=(5, tiny_encoder_config.d_model)).astype(np.float32)
        mask = np.array([True, True, True, False, False])
        block = model.blocks[0]
        single = block_forward(block, tensor(h), mask).data
        batched = block_forward(block, tensor(h[None]), mask[None]).data[0]
        assert np.array_equal(single, batched)

    def test_mask_shape_mismatch(self, model):
        h = tensor(np.zeros((2, 5, tiny_encoder_config.d_model)))
        with pytest.raises(DimensionError):
            block_forward(model.blocks[0], h, np.ones((2, 4), dtype=bool))

    def test_zeroed_sublayers_reduce_to_two_layer_norms(self):
        block = clone_model(tiny_backbone(seed=3)).blocks[0]
        for p in [block.attn.W_v, block.attn.b_v, block.attn.b_o, *block.ffn.parameters()]:
            p.assign(np.zeros(p.shape, dtype=np.float32))
        h = np.random.default_rng(2).normal(size=(1, tiny_encoder_config.d_model))

        def layer_norm(x: np.ndarray) -> np.ndarray:
            centered = x - x.mean(axis=-1, keepdims=True)
            return centered / np.sqrt((centered**2).mean(axis=-1, keepdims=True) + 1e-5)

        out = block_forward(block, tensor(h), np.array([True])).data
        np.testing.assert_allclose(out, layer_norm(layer_norm(h)), atol=1e-5)


class TestModelCopies:
    def test_clone_is_independent(self, model):
        twin = clone_model(model, name="twin")
        assert same_weights(model, twin)
        assert twin.tokens.value.id != model.tokens.value.id
        rows = twin.tokens.data + 1
        twin.tokens.assign(rows)
        assert not same_weights(model, twin)

    def test_parameter_names_are_unique(self, model):
        names = [p.name for p in model.parameters()]
        assert len(names) == len(set(names))
