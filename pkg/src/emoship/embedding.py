"""Word-embedding similarity store used to match VQA answers against tags.

Table format is GloVe-style text: one line per token, the token followed by
its decimal components, space-separated.  Tokens are lowercase; lookups
lowercase and strip punctuation before matching.
"""

from __future__ import annotations

import re
from typing import Dict, List, Optional

import numpy as np

from .errors import DataError

_TOKEN_RE = re.compile(r"[a-z0-9']+")


def tokenize(text: str) -> List[str]:
    """Lowercase whitespace/punctuation tokenization; nothing fancier."""
    return _TOKEN_RE.findall(text.lower())


class EmbeddingStore:
    """Immutable token -> vector map; all vectors share one dimensionality."""

    def __init__(self, vectors: Dict[str, np.ndarray]):
        if not vectors:
            raise DataError("embedding store must contain at least one token")
        dims = {v.shape[0] for v in vectors.values()}
        if len(dims) != 1:
            raise DataError(f"inconsistent embedding dimensions: {sorted(dims)}")
        self.dim = dims.pop()
        self._vectors = {
            token.lower(): np.asarray(vec, dtype=np.float64)
            for token, vec in vectors.items()
        }

    @classmethod
    def load(cls, path) -> "EmbeddingStore":
        vectors: Dict[str, np.ndarray] = {}
        with open(path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                parts = line.split()
                if not parts:
                    continue
                token = parts[0].lower()
                try:
                    vec = np.array([float(v) for v in parts[1:]], dtype=np.float64)
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: malformed embedding line") from exc
                if vec.size == 0:
                    raise DataError(f"{path}:{lineno}: token {token!r} has no components")
                vectors[token] = vec
        return cls(vectors)

    def get(self, token: str) -> Optional[np.ndarray]:
        return self._vectors.get(token.lower())

    def mean_vector(self, text: str) -> Optional[np.ndarray]:
        """Mean of in-vocabulary token vectors; None if nothing is in vocab."""
        hits = [self._vectors[t] for t in tokenize(text) if t in self._vectors]
        if not hits:
            return None
        return np.mean(hits, axis=0)


def _jaccard(a: str, b: str) -> float:
    sa, sb = set(tokenize(a)), set(tokenize(b))
    if not sa and not sb:
        return 1.0
    union = sa | sb
    if not union:
        return 0.0
    return len(sa & sb) / len(union)


def similarity(a: str, b: str, store: EmbeddingStore) -> float:
    """Cosine of mean in-vocab token vectors; Jaccard overlap fallback.

    The fallback (either side fully out of vocabulary) maps to [0,1], so the
    overall range is [-1, 1].
    """
    va = store.mean_vector(a)
    vb = store.mean_vector(b)
    if va is None or vb is None:
        return _jaccard(a, b)
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        return _jaccard(a, b)
    return float(np.dot(va, vb) / (na * nb))
