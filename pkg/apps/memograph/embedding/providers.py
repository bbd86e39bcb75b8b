"""
Deterministic text embeddings behind a small provider contract.

The default ``hashing-v1`` scheme is a seeded signed feature hasher over lowercase
alphanumeric tokens. The ``external`` scheme is a declared extension point.
"""
import hashlib
import re
from abc import ABC, abstractmethod
from functools import lru_cache
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

from memograph import settings
from memograph.constants import EmbeddingScheme
from memograph.error_handler import UnsupportedScheme

TOKEN_PATTERN = re.compile(r"[^0-9a-zA-Z]+")
MAX_SEED = 2**64 - 1


class EmbeddingSpec(BaseModel):
    """
    Dimension, scheme and seed of an embedding space.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    dim: PositiveInt = settings.EMBEDDING_DIM
    scheme: EmbeddingScheme = EmbeddingScheme.HASHING_V1
    seed: Optional[int] = Field(default=settings.EMBEDDING_SEED, ge=0, le=MAX_SEED)

    @model_validator(mode="after")
    def check_seed(self) -> "EmbeddingSpec":
        if self.scheme == EmbeddingScheme.HASHING_V1 and self.seed is None:
            raise ValueError("scheme hashing-v1 requires a seed")
        return self


class EmbeddingProvider(ABC):
    """
    Pure text -> vector mapping: the same text always yields the same vector, with unit
    L2 norm for text that has tokens and the zero vector otherwise.
    """

    def __init__(self, spec: EmbeddingSpec) -> None:
        self.spec = spec

    @property
    def dim(self) -> int:
        return self.spec.dim

    @abstractmethod
    def embed(self, text: str) -> np.ndarray:
        pass


def tokenize(text: str) -> list[str]:
    return [token for token in TOKEN_PATTERN.split(text.lower()) if token]


def same_token_bag(first: str, second: str) -> bool:
    return sorted(tokenize(first)) == sorted(tokenize(second))


@lru_cache(maxsize=65536)
def _hash_token(seed: int, token: str, dim: int) -> tuple[int, float]:
    digest = hashlib.sha256(f"{seed}:{token}".encode("utf-8")).digest()
    bucket = int.from_bytes(digest[:8], "big") % dim
    sign = 1.0 if digest[8] & 1 == 0 else -1.0
    return bucket, sign


class HashingEmbeddingProvider(EmbeddingProvider):
    """
    Bag-of-tokens feature hashing: bucket from the first eight digest bytes, sign from the
    low bit of the ninth. Tokens whose signs cancel out fall back to a seeded random
    direction of the sorted token bag.
    """

    def embed(self, text: str) -> np.ndarray:
        tokens = tokenize(text)
        vector = np.zeros(self.dim)
        for token in tokens:
            bucket, sign = _hash_token(self.spec.seed, token, self.dim)
            vector[bucket] += sign
        norm = np.linalg.norm(vector)
        if norm == 0:
            if not tokens:
                return vector
            vector = self._fallback(tokens)
            norm = np.linalg.norm(vector)
        return vector / norm

    def _fallback(self, tokens: list[str]) -> np.ndarray:
        bag = " ".join(sorted(tokens))
        digest = hashlib.sha256(f"{self.spec.seed}|{bag}".encode("utf-8")).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
        return rng.standard_normal(self.dim)


@lru_cache(maxsize=32)
def get_provider(spec: EmbeddingSpec) -> EmbeddingProvider:
    """
    Provider for the given spec.
    :param spec: EmbeddingSpec
    :return: EmbeddingProvider
    """
    if spec.scheme == EmbeddingScheme.HASHING_V1:
        return HashingEmbeddingProvider(spec)
    raise UnsupportedScheme(spec.scheme.value)


def embed_text(spec: EmbeddingSpec, text: str) -> np.ndarray:
    """
    Embed ``text`` under ``spec``; empty or whitespace-only text maps to the zero vector.
    :param spec: EmbeddingSpec
    :param text: str
    :return: vector of length ``spec.dim``
    """
    return get_provider(spec).embed(text)
