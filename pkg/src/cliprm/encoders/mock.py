"""Synthetic encoder that needs no weights.

Images map to a fixed linear embedding of twelve pixel statistics
(``cliprm.kernels.STAT_NAMES``): ``embedding = P @ stats`` where ``P`` is an
``embed_dim x 12`` matrix with orthonormal columns drawn from a seeded
Gaussian. Because the columns are orthonormal, dot products and norms in the
embedding space equal those of the statistics vectors.

Text maps through a configurable vocabulary of directions over those
statistics (``P @ weights``); any other prompt gets a fixed pseudo-random unit
vector seeded from its SHA-256 digest.
"""
from __future__ import annotations

import hashlib

import numpy as np

from cliprm import kernels
from cliprm.errors import ValidationError


def projection_matrix(embed_dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((embed_dim, kernels.N_STATS)))
    # fix column signs so the matrix does not depend on LAPACK conventions
    return q * np.sign(np.diag(r))[None, :]


def _direction_vector(weights) -> np.ndarray:
    if isinstance(weights, dict):
        w = np.zeros(kernels.N_STATS)
        for name, val in weights.items():
            if name not in kernels.STAT_NAMES:
                raise ValidationError(f"unknown mock statistic {name!r}; choose from {kernels.STAT_NAMES}")
            w[kernels.STAT_NAMES.index(name)] = float(val)
        return w
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (kernels.N_STATS,):
        raise ValidationError(f"mock direction must have {kernels.N_STATS} weights, got shape {w.shape}")
    return w


class MockBackend:
    def __init__(self, embed_dim=16, seed=0, directions=None, context_length=77):
        if embed_dim < kernels.N_STATS:
            raise ValidationError(f"mock embed_dim must be >= {kernels.N_STATS}, got {embed_dim}")
        self.embed_dim = int(embed_dim)
        self.seed = int(seed)
        self.context_length = int(context_length)
        self.projection = projection_matrix(self.embed_dim, self.seed)
        self.directions = {p: _direction_vector(v) for p, v in (directions or {}).items()}

    def token_count(self, prompt: str) -> int:
        # start and end tokens plus one per whitespace-separated word
        return len(prompt.split()) + 2

    def text(self, prompts) -> np.ndarray:
        out = np.empty((len(prompts), self.embed_dim))
        for i, p in enumerate(prompts):
            if p in self.directions:
                out[i] = self.projection @ self.directions[p]
            else:
                digest = hashlib.sha256(f"{self.seed}:{p}".encode()).digest()
                rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
                v = rng.standard_normal(self.embed_dim)
                out[i] = v / np.linalg.norm(v)
        return out

    def images(self, frames: np.ndarray, device: str) -> np.ndarray:
        stats = kernels.image_stats(frames)
        # elementwise product + reduction keeps each row independent of batch size (BLAS may not)
        return (stats[:, None, :] * self.projection[None, :, :]).sum(axis=2)
