"""Corpus directories, manifests with train/test roles, and streaming access to their lines.

Directory convention under a corpus root:
    pdf/*.pdf, chars/*.jsonl, lines/*.jsonl   documents (doc_id = file stem)
    labels/*.jsonl                            gold labeled-lines, one file per document
    manifest.json                             the CorpusManifest
"""

import logging
import os
import random
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Tuple

from app.domain.exceptions import InsufficientDocuments, SchemaError, TableScoutError
from app.domain.model import CorpusManifest, DocumentEntry, LabeledLine, Line
from app.services.ingester import parse_pdf_file, read_richchar_jsonl
from app.services.labeler import read_labeled_lines
from app.services.layout import assemble_lines, read_lines_jsonl
from app.utils.configuration import LayoutConfig
from app.utils.process_json import dump_json_file, load_json_file

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
# most processed form first
SOURCE_DIRS = (("lines", ".jsonl"), ("chars", ".jsonl"), ("pdf", ".pdf"))
LABELS_DIR = "labels"

DocumentErrorCallback = Callable[[DocumentEntry, BaseException], None]


def discover_documents(root_dir: str) -> Dict[str, str]:
    """doc_id -> absolute path of every ingestible document, preferring lines over chars over pdf."""
    found: Dict[str, str] = {}
    for subdir, ext in SOURCE_DIRS:
        directory = os.path.join(root_dir, subdir)
        if not os.path.isdir(directory):
            continue
        for name in sorted(os.listdir(directory)):
            stem, file_ext = os.path.splitext(name)
            if file_ext.lower() != ext or stem in found:
                continue
            found[stem] = os.path.abspath(os.path.join(directory, name))
    return found


def split_count(n: int, split_ratio: float) -> int:
    """Train documents out of n: round(n * ratio) half up, kept within [1, n - 1]."""
    return min(max(int(n * split_ratio + 0.5), 1), n - 1)


def build_manifest(root_dir: str, split_ratio: float = 0.75, seed: int = 7, name: Optional[str] = None) -> CorpusManifest:
    """Seeded shuffle of the corpus documents, split into train and test roles.

    :raises InsufficientDocuments: fewer than two ingestible documents.
    """
    if not 0.0 < split_ratio < 1.0:
        raise ValueError(f"split ratio must lie in (0, 1), got {split_ratio}")
    documents = discover_documents(root_dir)
    if len(documents) < 2:
        raise InsufficientDocuments(f"{root_dir} holds {len(documents)} ingestible document(s); at least 2 are needed")
    order = sorted(documents)
    random.Random(seed).shuffle(order)
    n_train = split_count(len(order), split_ratio)
    train = set(order[:n_train])
    entries = [
        DocumentEntry(doc_id=doc_id, path=documents[doc_id], role="train" if doc_id in train else "test")
        for doc_id in sorted(documents)
    ]
    logger.info("Manifest for %s: %d train / %d test documents", root_dir, n_train, len(order) - n_train)
    return CorpusManifest(name=name or os.path.basename(os.path.abspath(root_dir)), documents=entries)


def save_manifest(manifest: CorpusManifest, root_dir: str) -> str:
    """Write <root>/manifest.json with paths relative to the corpus root."""
    root = os.path.abspath(root_dir)
    payload = {
        "name": manifest.name,
        "documents": [
            {"doc_id": d.doc_id, "path": os.path.relpath(os.path.abspath(d.path), root), "role": d.role}
            for d in manifest.documents
        ],
    }
    if manifest.line_counts is not None:
        payload["line_counts"] = manifest.line_counts
    path = os.path.join(root, MANIFEST_NAME)
    dump_json_file(payload, path)
    return path


def load_manifest(root_dir: str) -> CorpusManifest:
    """Read <root>/manifest.json, resolving document paths and checking that they exist."""
    root = os.path.abspath(root_dir)
    payload = load_json_file(os.path.join(root, MANIFEST_NAME))
    try:
        manifest = CorpusManifest.model_validate(payload)
    except ValueError as err:
        raise SchemaError(1, f"invalid manifest: {str(err).splitlines()[0]}") from err
    resolved = []
    for entry in manifest.documents:
        path = os.path.normpath(os.path.join(root, entry.path))
        if not os.path.exists(path):
            raise SchemaError(1, f"manifest document {entry.doc_id!r} not found at {path}")
        resolved.append(entry.model_copy(update={"path": path}))
    return manifest.model_copy(update={"documents": resolved})


def load_document_lines(path: str, layout_config: Optional[LayoutConfig] = None) -> List[Line]:
    """Lines of one document stored as lines JSONL, rich-character JSONL or PDF."""
    parent = os.path.basename(os.path.dirname(path))
    if path.lower().endswith(".pdf"):
        doc = parse_pdf_file(path)
    elif parent == "chars":
        with open(path, encoding="utf-8") as fh:
            doc = read_richchar_jsonl(fh)
    else:
        with open(path, encoding="utf-8") as fh:
            return list(read_lines_jsonl(fh))
    return [line for page in assemble_lines(doc, layout_config) for line in page]


def iter_documents(
    manifest: CorpusManifest,
    role: str,
    on_error: Optional[DocumentErrorCallback] = None,
    layout_config: Optional[LayoutConfig] = None,
) -> Iterator[Tuple[DocumentEntry, List[Line]]]:
    """Documents of one role in doc_id order; unreadable documents go to `on_error` and are skipped."""
    for entry in sorted(manifest.role(role), key=lambda d: d.doc_id):
        try:
            lines = load_document_lines(entry.path, layout_config)
        except (TableScoutError, ValueError, OSError) as err:
            logger.warning("Skipping %s (%s): %s", entry.doc_id, entry.path, err)
            if on_error is not None:
                on_error(entry, err)
            continue
        yield entry, lines


def stream_lines(
    manifest: CorpusManifest,
    role: str,
    on_error: Optional[DocumentErrorCallback] = None,
    layout_config: Optional[LayoutConfig] = None,
) -> Iterator[Line]:
    """Lines of every document of `role`, ordered by (doc_id, page, line_idx); one document in memory at a time."""
    for _, lines in iter_documents(manifest, role, on_error, layout_config):
        yield from sorted(lines, key=lambda ln: (ln.page, ln.line_idx))


def read_gold_labels(root_dir: str, doc_ids: Iterable[str]) -> Iterator[LabeledLine]:
    """Gold labeled lines of the given documents from <root>/labels/<doc_id>.jsonl."""
    for doc_id in sorted(set(doc_ids)):
        path = os.path.join(root_dir, LABELS_DIR, f"{doc_id}.jsonl")
        if not os.path.exists(path):
            logger.warning("No gold labels for %s", doc_id)
            continue
        with open(path, encoding="utf-8") as fh:
            yield from read_labeled_lines(fh)
