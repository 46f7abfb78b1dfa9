"""Mean-pooled transformer embeddings of bug-report text.

Each record's summary and description are joined with a single space,
tokenized, truncated to the model's 512-position limit (special tokens
count toward it), and run through the frozen encoder. The report vector is
the mean over all non-padding rows of the final hidden layer; the
sequence-boundary special tokens are rows of that matrix and are included.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

DEFAULT_CHECKPOINT = "distilbert-base-uncased"
MAX_TOKENS = 512


@dataclass(frozen=True)
class VectorSet:
    """Embedded reports: float32 vectors plus their uint8 labels."""

    dim: int
    vectors: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        labels = np.ascontiguousarray(self.labels, dtype=np.uint8)
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if vectors.ndim != 2 or vectors.shape[1] != self.dim:
            raise ValueError(f"vectors must be (rows, {self.dim})")
        if labels.shape != (vectors.shape[0],):
            raise ValueError("one label per row required")
        if not np.isfinite(vectors).all():
            raise ValueError("vectors must be finite")
        if labels.max(initial=0) > 1:
            raise ValueError("labels must be 0 or 1")
        vectors.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.vectors.shape[0]


@lru_cache(maxsize=2)
def _load(checkpoint: str):
    tokenizer = AutoTokenizer.from_pretrained(checkpoint)
    model = AutoModel.from_pretrained(checkpoint)
    model.eval()
    return tokenizer, model


def embed_reports(
    records, checkpoint: str = DEFAULT_CHECKPOINT, batch_size: int = 32
) -> VectorSet:
    """Embed records in order; a pure function of (records, checkpoint).

    Output width follows the checkpoint's hidden size (768 for the default).
    Vectors are batch-size independent up to float accumulation order.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to embed")
    if batch_size < 1:
        raise ValueError("batch_size must be positive")
    tokenizer, model = _load(checkpoint)
    texts = [f"{r.summary} {r.description}" for r in records]
    chunks = []
    with torch.no_grad():
        for start in range(0, len(texts), batch_size):
            encoded = tokenizer(
                texts[start : start + batch_size],
                padding=True,
                truncation=True,
                max_length=MAX_TOKENS,
                return_tensors="pt",
            )
            hidden = model(**encoded).last_hidden_state
            mask = encoded["attention_mask"].unsqueeze(-1).to(hidden.dtype)
            pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1)
            chunks.append(pooled.to(torch.float32).numpy())
    vectors = np.concatenate(chunks, axis=0)
    labels = np.array([r.label for r in records], dtype=np.uint8)
    return VectorSet(dim=vectors.shape[1], vectors=vectors, labels=labels)
