"""Array kernels shared by the single-trial functions and the batched policies."""
from __future__ import annotations

import numpy as np


def argmax_tiebreak(x: np.ndarray, u) -> np.ndarray:
    """Argmax over the last axis; ties resolved by the uniform(s) ``u``.

    Among ``c`` tied maxima the ``floor(u * c)``-th one (in index order) wins,
    which is uniform over the tied set when ``u`` is uniform on [0, 1).
    """
    x = np.asarray(x)
    u = np.asarray(u, dtype=float)
    ties = x == x.max(axis=-1, keepdims=True)
    count = ties.sum(axis=-1)
    rank = np.minimum(np.floor(u * count), count - 1).astype(np.int64)
    return (np.cumsum(ties, axis=-1) > rank[..., None]).argmax(axis=-1)

