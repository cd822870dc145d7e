"""On-disk formats: embedding files, the labeled-cluster store, and face label files.

Everything is line-oriented text (or JSON for the store) with floats written at
full round-trip precision, so reading back a file reproduces the in-memory
values bit for bit.
"""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Iterable, Sequence

from .geometry import Embedding
from .matching import LabeledCluster, LabeledClusterSet

EMBEDDING_HEADER_PREFIX = "#emb v1 dim="
STORE_VERSION = 1


class FormatError(ValueError):
    """A file failed to parse; the message names the offending line."""


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# embedding files


def write_embeddings(embeddings: Sequence[Embedding], path: str | Path) -> None:
    """Write a `#emb v1` file: header, then one tab-separated record per embedding."""
    embeddings = list(embeddings)
    if not embeddings:
        raise ValueError("refusing to write an empty embedding file")
    dim = embeddings[0].dim
    lines = [f"{EMBEDDING_HEADER_PREFIX}{dim}"]
    for e in embeddings:
        if e.dim != dim:
            raise ValueError(f"embedding {e.id!r} has dimension {e.dim}, file has {dim}")
        lines.append(
            "\t".join(
                [
                    e.id,
                    e.video_id or "",
                    "" if e.frame_index is None else str(e.frame_index),
                    e.true_label or "",
                    ",".join(_fmt_float(x) for x in e.vector),
                ]
            )
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def read_embeddings(path: str | Path) -> list[Embedding]:
    """Parse a `#emb v1` file; any malformed line raises FormatError naming it."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or not lines[0].startswith(EMBEDDING_HEADER_PREFIX):
        raise FormatError(f"{path}: missing '{EMBEDDING_HEADER_PREFIX}<n>' header")
    try:
        dim = int(lines[0][len(EMBEDDING_HEADER_PREFIX):])
    except ValueError:
        raise FormatError(f"{path}: bad dimension in header {lines[0]!r}") from None

    out: list[Embedding] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            raise FormatError(f"{path}:{lineno}: expected 5 tab-separated fields, got {len(fields)}")
        eid, video_id, frame, label, vec = fields
        try:
            vector = tuple(float(x) for x in vec.split(","))
        except ValueError:
            raise FormatError(f"{path}:{lineno}: unparsable vector") from None
        if len(vector) != dim:
            raise FormatError(
                f"{path}:{lineno}: vector has dimension {len(vector)}, file header says {dim}"
            )
        if eid in seen:
            raise FormatError(f"{path}:{lineno}: duplicate embedding id {eid!r}")
        seen.add(eid)
        try:
            out.append(
                Embedding(
                    id=eid,
                    vector=vector,
                    video_id=video_id or None,
                    frame_index=int(frame) if frame else None,
                    true_label=label or None,
                )
            )
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
    return out


# ---------------------------------------------------------------------------
# cluster store


def write_store(
    store: LabeledClusterSet,
    path: str | Path,
    metadata: dict | None = None,
) -> None:
    """Persist the labeled-cluster store as versioned JSON."""
    doc = {
        "format": "clustermatch-store",
        "version": STORE_VERSION,
        "dimension": store.dimension,
        "metadata": metadata or {},
        "entries": [
            {
                "label": e.label,
                "member_ids": list(e.member_ids),
                "centroid": list(e.centroid),
                "best_silhouette_id": e.best_silhouette_id,
                "best_silhouette_vector": list(e.best_silhouette_vector),
                "label_histogram": dict(sorted(e.label_histogram.items())),
            }
            for e in store.entries
        ],
    }
    _atomic_write(path, json.dumps(doc, indent=1) + "\n")


def read_store(path: str | Path) -> tuple[LabeledClusterSet, dict]:
    """Load a store file; returns the set and its creation metadata."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    if doc.get("format") != "clustermatch-store":
        raise FormatError(f"{path}: not a clustermatch store file")
    if doc.get("version") != STORE_VERSION:
        raise FormatError(f"{path}: unsupported store version {doc.get('version')!r}")
    entries = tuple(
        LabeledCluster(
            label=e["label"],
            member_ids=tuple(e["member_ids"]),
            centroid=tuple(float(x) for x in e["centroid"]),
            best_silhouette_id=e["best_silhouette_id"],
            best_silhouette_vector=tuple(float(x) for x in e["best_silhouette_vector"]),
            label_histogram={k: int(v) for k, v in e.get("label_histogram", {}).items()},
        )
        for e in doc["entries"]
    )
    return LabeledClusterSet(entries=entries, dimension=int(doc["dimension"])), doc.get("metadata", {})


# ---------------------------------------------------------------------------
# face label files (recognition output)


def write_face_labels(rows: Iterable[tuple[str, int | None, str]], path: str | Path) -> None:
    """Write `id<TAB>frame_index<TAB>label` rows."""
    lines = ["#labels v1"]
    for face_id, frame_index, label in rows:
        lines.append("\t".join([face_id, "" if frame_index is None else str(frame_index), label]))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_face_labels(path: str | Path) -> list[tuple[str, int | None, str]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "#labels v1":
        raise FormatError(f"{path}: missing '#labels v1' header")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise FormatError(f"{path}:{lineno}: expected 3 fields, got {len(fields)}")
        face_id, frame, label = fields
        out.append((face_id, int(frame) if frame else None, label))
    return out
