"""Embedding-similarity screening of auxiliary datasets against a target domain.

Embeddings arrive from files written by an external encoder exporter
(one `id<TAB>source<TAB>v1,v2,...,vD` record per line). Candidates are
scored by cosine similarity against the normalized centroid of the
target embeddings and retained by threshold or top-k rules.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import CurationError

log = logging.getLogger(__name__)

MODES = ("threshold", "top_k_per_source", "top_k_global")


@dataclass(frozen=True)
class Embedding:
    id: str
    source: str
    vector: np.ndarray

    def __post_init__(self):
        vec = np.ascontiguousarray(self.vector, dtype=np.float64)
        if vec.ndim != 1 or vec.size < 1:
            raise CurationError(f"embedding {self.id!r}: vector must be 1-D, non-empty")
        if not np.all(np.isfinite(vec)):
            raise CurationError(f"embedding {self.id!r}: non-finite values")
        if float(np.linalg.norm(vec)) == 0.0:
            raise CurationError(f"embedding {self.id!r}: zero-norm vector")
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)

    @property
    def dim(self) -> int:
        return self.vector.size


@dataclass(frozen=True)
class SimilarityRecord:
    id: str
    source: str
    score: float
    selected: bool = False


@dataclass(frozen=True)
class CurationConfig:
    """Selection rule: threshold(tau) or top-k (per source or global)."""

    mode: str
    tau: float = 0.0
    k: int = 0
    k_per_source: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        if self.mode not in MODES:
            raise CurationError(f"unknown selection mode {self.mode!r}")
        if self.mode == "threshold" and not -1.0 <= self.tau <= 1.0:
            raise CurationError(f"tau must lie in [-1, 1], got {self.tau}")
        if self.mode == "top_k_global" and self.k < 0:
            raise CurationError(f"k must be >= 0, got {self.k}")
        if self.mode == "top_k_per_source":
            for src, k in self.k_per_source:
                if k < 0:
                    raise CurationError(f"k for source {src!r} must be >= 0, got {k}")

    @classmethod
    def threshold(cls, tau: float) -> "CurationConfig":
        return cls(mode="threshold", tau=tau)

    @classmethod
    def top_k_global(cls, k: int) -> "CurationConfig":
        return cls(mode="top_k_global", k=k)

    @classmethod
    def top_k_per_source(cls, k_map: dict[str, int]) -> "CurationConfig":
        return cls(mode="top_k_per_source",
                   k_per_source=tuple(sorted(k_map.items())))


def load_embeddings(path: str | os.PathLike) -> list[Embedding]:
    """Parse an embedding file; enforces uniform dimension across records."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise CurationError(f"no such embedding file: {path}")
    out: list[Embedding] = []
    dim = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 3:
                raise CurationError(
                    f"{path}:{lineno}: expected id<TAB>source<TAB>floats, got {line!r}"
                )
            rec_id, source, values = parts[0], parts[1], parts[2]
            try:
                vec = np.array([float(v) for v in values.split(",")], dtype=np.float64)
            except ValueError as exc:
                raise CurationError(f"{path}:{lineno}: bad float in vector: {exc}")
            if not np.all(np.isfinite(vec)):
                raise CurationError(f"{path}:{lineno}: non-finite value for id {rec_id!r}")
            emb = Embedding(rec_id, source, vec)
            if dim is None:
                dim = emb.dim
            elif emb.dim != dim:
                raise CurationError(
                    f"{path}:{lineno}: id {rec_id!r} has dimension {emb.dim}, "
                    f"expected {dim}"
                )
            out.append(emb)
    return out


def save_embeddings(embeddings: list[Embedding], path: str | os.PathLike) -> None:
    """Write embeddings in the loadable format (repr floats round-trip exactly)."""
    with open(os.fspath(path), "w", encoding="utf-8", newline="\n") as fh:
        for emb in embeddings:
            values = ",".join(repr(float(v)) for v in emb.vector)
            fh.write(f"{emb.id}\t{emb.source}\t{values}\n")


def _unit(vec: np.ndarray) -> np.ndarray:
    return vec / np.linalg.norm(vec)


def target_centroid(targets: list[Embedding]) -> Embedding:
    """Normalize each target vector, average, and renormalize to unit length."""
    if not targets:
        raise CurationError("target set is empty")
    dim = targets[0].dim
    mean = np.zeros(dim, dtype=np.float64)
    for emb in targets:
        if emb.dim != dim:
            raise CurationError(
                f"target {emb.id!r} has dimension {emb.dim}, expected {dim}"
            )
        mean += _unit(emb.vector)
    mean /= len(targets)
    norm = float(np.linalg.norm(mean))
    if norm == 0.0:
        raise CurationError("target centroid has zero norm (antipodal target set)")
    return Embedding(id="__centroid__", source="__target__", vector=mean / norm)


def score_candidates(
    centroid: Embedding, candidates: list[Embedding]
) -> list[SimilarityRecord]:
    """Cosine similarity of each candidate against the centroid, input order kept."""
    u = _unit(centroid.vector)
    records = []
    for emb in candidates:
        if emb.dim != centroid.dim:
            raise CurationError(
                f"candidate {emb.id!r} has dimension {emb.dim}, "
                f"expected {centroid.dim}"
            )
        score = float(np.clip(np.dot(u, _unit(emb.vector)), -1.0, 1.0))
        records.append(SimilarityRecord(emb.id, emb.source, score))
    return records


def score_candidates_max(
    targets: list[Embedding], candidates: list[Embedding]
) -> list[SimilarityRecord]:
    """Alternative aggregation: best cosine against any single target."""
    if not targets:
        raise CurationError("target set is empty")
    units = np.stack([_unit(t.vector) for t in targets])
    records = []
    for emb in candidates:
        if emb.dim != targets[0].dim:
            raise CurationError(
                f"candidate {emb.id!r} has dimension {emb.dim}, "
                f"expected {targets[0].dim}"
            )
        score = float(np.clip(np.max(units @ _unit(emb.vector)), -1.0, 1.0))
        records.append(SimilarityRecord(emb.id, emb.source, score))
    return records


def select(
    records: list[SimilarityRecord], cfg: CurationConfig
) -> list[SimilarityRecord]:
    """Mark retained records per the config; deterministic order and tie rule.

    Ties break by ascending id. The result is sorted by
    (source, descending score, id). Asking for more per-source records
    than exist selects all of them and logs a warning rather than failing.
    """
    chosen: set[tuple[str, str]] = set()
    if cfg.mode == "threshold":
        chosen = {(r.source, r.id) for r in records if r.score >= cfg.tau}
    elif cfg.mode == "top_k_global":
        ranked = sorted(records, key=lambda r: (-r.score, r.id))
        if cfg.k > len(ranked):
            log.warning(
                "top_k_global k=%d exceeds %d candidates; selecting all",
                cfg.k, len(ranked),
            )
        chosen = {(r.source, r.id) for r in ranked[:cfg.k]}
    else:
        k_map = dict(cfg.k_per_source)
        by_source: dict[str, list[SimilarityRecord]] = {}
        for r in records:
            by_source.setdefault(r.source, []).append(r)
        for source, group in by_source.items():
            k = k_map.get(source, 0)
            ranked = sorted(group, key=lambda r: (-r.score, r.id))
            if k > len(ranked):
                log.warning(
                    "source %r: k=%d exceeds %d candidates; selecting all",
                    source, k, len(ranked),
                )
            chosen.update((r.source, r.id) for r in ranked[:k])
    marked = [replace(r, selected=(r.source, r.id) in chosen) for r in records]
    return sorted(marked, key=lambda r: (r.source, -r.score, r.id))


def selected_ids(records: list[SimilarityRecord]) -> set[tuple[str, str]]:
    return {(r.source, r.id) for r in records if r.selected}


def write_selection_report(
    records: list[SimilarityRecord],
    embeddings: list[Embedding],
    path: str | os.PathLike,
) -> None:
    """Embedding-format rows plus a trailing selected column (1/0)."""
    by_key = {(e.source, e.id): e for e in embeddings}
    with open(os.fspath(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# id\tsource\tvector\tselected\n")
        for rec in records:
            emb = by_key[(rec.source, rec.id)]
            values = ",".join(repr(float(v)) for v in emb.vector)
            fh.write(f"{rec.id}\t{rec.source}\t{values}\t{int(rec.selected)}\n")


def selection_summary(records: list[SimilarityRecord]) -> dict:
    """Per-source kept/total counts plus per-record scores."""
    per_source: dict[str, dict[str, int]] = {}
    for rec in records:
        entry = per_source.setdefault(rec.source, {"kept": 0, "total": 0})
        entry["total"] += 1
        entry["kept"] += int(rec.selected)
    return {
        "per_source": dict(sorted(per_source.items())),
        "total": {
            "kept": sum(v["kept"] for v in per_source.values()),
            "total": sum(v["total"] for v in per_source.values()),
        },
        "records": [
            {"id": r.id, "source": r.source, "score": r.score, "selected": r.selected}
            for r in records
        ],
    }


def write_selection_summary(records: list[SimilarityRecord], path: str | os.PathLike) -> None:
    with open(os.fspath(path), "w", encoding="utf-8") as fh:
        json.dump(selection_summary(records), fh, indent=2)
        fh.write("\n")
