"""Contrastive image-text encoders: registry loading, batched embedding, preprocessing."""
from cliprm.encoders.core import (
    EncoderHandle,
    Embedding,
    FrameBatch,
    encode_images,
    encode_text,
    load_encoder,
    preprocess_frame,
)
from cliprm.encoders.registry import WEIGHTS_CACHE_ENV, load_registry, registry_entry

__all__ = [
    "WEIGHTS_CACHE_ENV",
    "EncoderHandle",
    "Embedding",
    "FrameBatch",
    "encode_images",
    "encode_text",
    "load_encoder",
    "load_registry",
    "preprocess_frame",
    "registry_entry",
]
