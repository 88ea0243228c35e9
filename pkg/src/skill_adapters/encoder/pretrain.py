import logging

from skill_adapters.config.config import RunConfig
from skill_adapters.encoder.model import RetrievalModel, init_model
from skill_adapters.encoder.trainable import TrainablePolicy
from skill_adapters.rng import SeedStreams
from skill_adapters.tasks.generator import CORPUS_TASK_ID, generate_corpus
from skill_adapters.tasks.tokens import pad_id
from skill_adapters.training.trainer import PhaseResult, PhaseSchedule, train_phase

logger = logging.getLogger(__name__)


def init_backbone(run: RunConfig) -> RetrievalModel:
    seeds = SeedStreams(run.seed)
    return init_model(
        run.encoder, pad_id(run.data.content_vocab), seeds.generator("init", "backbone")
    )


def pretrain_backbone(run: RunConfig) -> tuple[RetrievalModel, PhaseResult]:
    """Backbone trained on general-corpus identity retrieval, then frozen."""
    seeds = SeedStreams(run.seed)
    model = init_backbone(run)
    corpus = generate_corpus(run.data, run.pretrain.n_examples, run.seed)
    cfg = run.pretrain
    result = train_phase(
        model,
        {CORPUS_TASK_ID: corpus},
        TrainablePolicy.ALL,
        PhaseSchedule(
            epochs=cfg.epochs,
            batch_size=cfg.batch_size,
            lr_per_task={CORPUS_TASK_ID: cfg.lr},
            warmup_fraction=cfg.warmup_fraction,
        ),
        seeds.generator("sampling", "pretrain"),
        name="pretrain",
    )
    model.name = "backbone"
    for p in model.parameters():
        p.set_trainable(False)
    logger.info(f"Pretrained backbone with {model.parameter_count()} parameters")
    return model, result
