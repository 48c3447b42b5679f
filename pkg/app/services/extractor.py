"""Line features: Normalized Average Margin (NAM), POS Tag Distribution (PTD), Named Entity Percentage (NEP)."""

import logging
from typing import IO, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from app.domain.common import DEFAULT_MASK, FEATURE_MASKS, NE_NONE, NE_TAGS, POS_TAGS
from app.domain.exceptions import AnnotationLengthMismatch, SchemaError
from app.domain.model import FeatureRecord, FeatureVector, Label, Line, Source, TokenAnnotation
from app.services.layout import word_margins
from app.utils.process_entity import EntityRecognizer, tag_ne
from app.utils.process_json import iter_jsonl, require_fields, validate_record, write_jsonl
from app.utils.process_text import PosTagger, tag_pos

logger = logging.getLogger(__name__)

LineKey = Tuple[str, int, int]
Annotations = Dict[LineKey, List[TokenAnnotation]]

_EMPTY_PTD = (0.0, 0.0, 0.0, 0.0, 1.0)
_ZERO_NEP = (0.0, 0.0, 0.0, 0.0, 0.0)


# ---------- NAM ----------
def raw_margin(line: Line) -> float:
    """Mean inter-word margin of a line; 0 for single-word lines."""
    margins = word_margins(line)
    return sum(margins) / len(margins) if margins else 0.0


def page_max_margin(page_lines: Sequence[Line]) -> float:
    return max((raw_margin(ln) for ln in page_lines if len(ln.words) > 1), default=0.0)


def _normalize(raw: float, page_max: float) -> float:
    if page_max <= 0.0:
        return 0.0
    return min(1.0, raw / page_max)


def compute_nam(line: Line, page_lines: Sequence[Line]) -> float:
    """Raw margin of `line` divided by the largest raw margin among multi-word lines of its page."""
    return _normalize(raw_margin(line), page_max_margin(page_lines))


# ---------- PTD / NEP ----------
def pos_distribution(tags: Sequence[str]) -> Tuple[float, ...]:
    """Fraction of tokens per POS tag; an empty line is all OTHERS."""
    if not tags:
        return _EMPTY_PTD
    n = len(tags)
    return tuple(sum(1 for t in tags if t == tag) / n for tag in POS_TAGS)


def ne_percentage(tags: Sequence[str]) -> Tuple[float, ...]:
    """Fraction of tokens per entity class; NONE counts toward no class."""
    if not tags:
        return _ZERO_NEP
    n = len(tags)
    return tuple(sum(1 for t in tags if t == tag) / n for tag in NE_TAGS)


def _tags(
    line: Line,
    annotations: Optional[List[TokenAnnotation]],
    tagger: Optional[PosTagger],
    recognizer: Optional[EntityRecognizer],
) -> Tuple[List[str], List[str]]:
    tokens = line.tokens
    if annotations is not None:
        if len(annotations) != len(tokens):
            raise AnnotationLengthMismatch(len(tokens), len(annotations), key=line.key)
        return [a.pos for a in annotations], [a.ne for a in annotations]
    return tag_pos(tokens, tagger), tag_ne(tokens, recognizer)


def _vector(
    line: Line,
    nam: float,
    annotations: Optional[List[TokenAnnotation]],
    tagger: Optional[PosTagger],
    recognizer: Optional[EntityRecognizer],
) -> FeatureVector:
    pos, ne = _tags(line, annotations, tagger, recognizer)
    return FeatureVector(nam=nam, ptd=pos_distribution(pos), nep=ne_percentage(ne))


def featurize(
    line: Line,
    page_lines: Sequence[Line],
    annotations: Optional[List[TokenAnnotation]] = None,
    tagger: Optional[PosTagger] = None,
    recognizer: Optional[EntityRecognizer] = None,
) -> FeatureVector:
    """Map one line to its 11-dimensional feature vector.

    :param annotations: pre-computed tags, one per token, bypassing the built-in tagger and recognizer.
    :raises AnnotationLengthMismatch: annotations do not cover exactly the line's tokens.
    """
    return _vector(line, compute_nam(line, page_lines), annotations, tagger, recognizer)


def featurize_page(
    page_lines: Sequence[Line],
    annotations: Optional[Annotations] = None,
    tagger: Optional[PosTagger] = None,
    recognizer: Optional[EntityRecognizer] = None,
) -> List[FeatureVector]:
    """Featurize every line of a page, computing the page maximum margin once."""
    page_max = page_max_margin(page_lines)
    annotations = annotations or {}
    return [
        _vector(ln, _normalize(raw_margin(ln), page_max), annotations.get(ln.key), tagger, recognizer)
        for ln in page_lines
    ]


# ---------- feature records ----------
def to_feature_record(
    line: Line,
    vector: FeatureVector,
    mask: str = DEFAULT_MASK,
    label: Optional[Label] = None,
    source: Optional[Source] = None,
) -> FeatureRecord:
    """Restrict a vector to the families of `mask` (others become null) and attach the line key."""
    dims = FEATURE_MASKS[mask]
    return FeatureRecord(
        doc_id=line.doc_id,
        page=line.page,
        line_idx=line.line_idx,
        features=mask,
        nam=vector.nam,
        ptd=vector.ptd if 1 in dims else None,
        nep=vector.nep if len(POS_TAGS) + 1 in dims else None,
        label=label,
        source=source,
    )


def feature_record_to_json(record: FeatureRecord) -> Dict:
    payload = {
        "doc_id": record.doc_id,
        "page": record.page,
        "line_idx": record.line_idx,
        "features": record.features,
        "nam": record.nam,
        "ptd": list(record.ptd) if record.ptd is not None else None,
        "nep": list(record.nep) if record.nep is not None else None,
    }
    if record.label is not None:
        payload["label"] = record.label
    if record.source is not None:
        payload["source"] = record.source
    return payload


def read_feature_records(stream: IO[str]) -> Iterator[FeatureRecord]:
    for line_number, payload in iter_jsonl(stream):
        require_fields(payload, ("doc_id", "page", "line_idx", "nam"), line_number)
        yield validate_record(FeatureRecord, payload, line_number)


def write_feature_records(records: Iterable[FeatureRecord], stream: IO[str]) -> int:
    return write_jsonl((feature_record_to_json(r) for r in records), stream)


# ---------- pre-tagged annotations ----------
def read_annotations(stream: IO[str]) -> Annotations:
    """Read {"doc_id", "page", "line_idx", "pos": [...], "ne": [...], "tokens"?: [...]} records."""
    out: Annotations = {}
    for line_number, payload in iter_jsonl(stream):
        require_fields(payload, ("doc_id", "page", "line_idx", "pos", "ne"), line_number)
        pos, ne = payload["pos"], payload["ne"]
        if not isinstance(pos, list) or not isinstance(ne, list) or len(pos) != len(ne):
            raise SchemaError(line_number, "'pos' and 'ne' must be lists of equal length")
        tokens = payload.get("tokens") or [""] * len(pos)
        if len(tokens) != len(pos):
            raise SchemaError(line_number, "'tokens' must match the number of tags")
        key = (payload["doc_id"], payload["page"], payload["line_idx"])
        out[key] = [
            validate_record(TokenAnnotation, {"token": t, "pos": p, "ne": e if e is not None else NE_NONE}, line_number)
            for t, p, e in zip(tokens, pos, ne)
        ]
    return out
