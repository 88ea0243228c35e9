import logging
from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np
import pandas as pd

from skill_adapters.encoder.forward import encode_batch
from skill_adapters.encoder.model import RetrievalModel
from skill_adapters.tasks.generator import Example

logger = logging.getLogger(__name__)


def pca_project(vectors: np.ndarray, n_components: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Projects rows onto the top principal components of their covariance.

    Components come from a symmetric eigendecomposition and are signed so
    that their largest-magnitude entry is positive. Returns the projected
    coordinates and the ``[d, n_components]`` component matrix.
    """
    x = np.asarray(vectors, dtype=np.float64)
    centered = x - x.mean(axis=0, keepdims=True)
    cov = centered.T @ centered / max(len(x) - 1, 1)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1][:n_components]
    components = eigenvectors[:, order]
    pivots = np.abs(components).argmax(axis=0)
    signs = np.sign(components[pivots, np.arange(components.shape[1])])
    signs[signs == 0] = 1
    components = components * signs
    return centered @ components, components


def dump_embeddings(
    models: Mapping[str, RetrievalModel],
    examples: Mapping[str, Sequence[Example]],
    n_per_task: int,
    path: Path,
) -> pd.DataFrame:
    """Writes ``model_id task_id x y raw...`` rows for the context encodings."""
    labels: list[tuple[str, str]] = []
    blocks: list[np.ndarray] = []
    for model_id, model in models.items():
        for task_id, task_examples in examples.items():
            chosen = task_examples[:n_per_task]
            if not chosen:
                continue
            blocks.append(encode_batch(model, [ex.context for ex in chosen]).data)
            labels.extend((model_id, task_id) for _ in chosen)
    vectors = np.concatenate(blocks, axis=0)
    coords, _ = pca_project(vectors)
    frame = pd.DataFrame(
        vectors, columns=[f"v{i}" for i in range(vectors.shape[1])]
    )
    frame.insert(0, "y", coords[:, 1])
    frame.insert(0, "x", coords[:, 0])
    frame.insert(0, "task_id", [task for _, task in labels])
    frame.insert(0, "model_id", [model for model, _ in labels])
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, sep="\t", index=False, float_format="%.9g")
    except OSError as e:
        raise OSError(f"cannot write embeddings to {path}: {e}") from e
    logger.info(f"Wrote {len(frame)} embeddings to {path}")
    return frame
