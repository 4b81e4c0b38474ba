"""Fixed-length structural fingerprints of LONs and their correlation matrix.

Vertices start labelled with a coarse out-degree bucket; directed
Weisfeiler-Lehman rounds refine the labels from in- and out-neighbor
label multisets, and every label occurrence is feature-hashed into a
vector that is finally L2-normalized.  This is a deterministic stand-in
for a learned graph2vec embedding.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import UndefinedMetricError, ValidationError
from .lon import LocalOptimaNetwork
from .metrics import pcc


@dataclass(frozen=True)
class EmbeddingConfig:
    wl_iterations: int = 3
    dimension: int = 128
    hash_seed: int = 0

    def __post_init__(self) -> None:
        if self.wl_iterations < 1:
            raise ValidationError("wl_iterations must be >= 1")
        if self.dimension < 8:
            raise ValidationError("dimension must be >= 8")


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    source: str = ""


def bucket_out_degree(d: int) -> int:
    """Fuse out-degrees into attraction classes.

    1 stays 1, 2..10 become 2, and 10i+1..10(i+2) become i+2 for
    i in {1, 3, 5, 7, 9}.  0 keeps its own label and anything above 110
    clamps to 11.
    """
    if d < 0:
        raise ValidationError("out-degree cannot be negative")
    if d <= 1:
        return d
    if d <= 10:
        return 2
    if d > 110:
        return 11
    i = (d - 11) // 20 * 2 + 1
    return i + 2


def _digest(data: str, seed: int) -> bytes:
    return hashlib.blake2b(data.encode("utf-8"), digest_size=8, key=seed.to_bytes(8, "little", signed=True)).digest()


def wl_labels(lon: LocalOptimaNetwork, iterations: int, seed: int = 0) -> list[list[str]]:
    """Per-round vertex labels, round 0 first.

    A vertex without any neighbors keeps its label; it has no subtree to
    refine.
    """
    labels = [str(bucket_out_degree(lon.out_degree(i))) for i in range(lon.vn)]
    rounds = [labels]
    for _ in range(iterations):
        nxt = []
        for i in range(lon.vn):
            ins = sorted(labels[p] for p in lon.predecessors[i])
            outs = sorted(labels[s] for s in lon.successors[i])
            if not ins and not outs:
                nxt.append(labels[i])
                continue
            sig = f"{labels[i]}(in:{','.join(ins)};out:{','.join(outs)})"
            nxt.append(_digest(sig, seed).hex())
        labels = nxt
        rounds.append(labels)
    return rounds


def embed(lon: LocalOptimaNetwork, config: EmbeddingConfig = EmbeddingConfig(), source: str = "") -> EmbeddingVector:
    if lon.vn == 0:
        raise ValidationError("cannot embed an empty LON")
    counts = np.zeros(config.dimension, dtype=np.int64)
    for labels in wl_labels(lon, config.wl_iterations, config.hash_seed):
        for label in labels:
            slot = int.from_bytes(_digest(label, config.hash_seed), "little") % config.dimension
            counts[slot] += 1
    norm = math.sqrt(int(np.dot(counts, counts)))
    return EmbeddingVector(counts / norm, source)


def similarity_matrix(vectors: Sequence[EmbeddingVector | np.ndarray]) -> np.ndarray:
    arrays = [v.values if isinstance(v, EmbeddingVector) else np.asarray(v, dtype=float) for v in vectors]
    if len(arrays) < 2:
        raise ValidationError("similarity needs at least two vectors")
    if len({a.shape for a in arrays}) != 1:
        raise ValidationError("vectors must share one dimension")
    for idx, a in enumerate(arrays):
        if np.all(a == a[0]):
            raise UndefinedMetricError(f"vector {idx} is constant; correlation undefined")
    n = len(arrays)
    out = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = pcc(arrays[i], arrays[j])
    return out
