"""Distant supervision: weak table / non-table labels from the context around table captions.

For every caption line ("Table 3: ...") the k lines above and the k lines below form two context groups. The
group with the larger mean NAM is taken as the table body (+1) and the other as surrounding prose (-1).
"""

import logging
from typing import IO, Any, Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from pydantic import BaseModel

from app.domain.common import CAPTION_NUMERAL_RE, CAPTION_WORDS, NEGATIVE, POSITIVE
from app.domain.exceptions import SchemaError, TableScoutError
from app.domain.model import LabeledLine, Line, WeaklyLabeledLine
from app.services.extractor import page_max_margin, raw_margin
from app.services.layout import group_pages, line_from_record, line_to_record
from app.utils.common import ordered_map
from app.utils.configuration import WeakLabelConfig
from app.utils.process_json import iter_jsonl, require_fields, write_jsonl

logger = logging.getLogger(__name__)

ErrorCallback = Callable[[Optional[str], BaseException], None]


class LabelingStats(BaseModel):
    """Counters accumulated over a weak-labeling run."""

    documents: int = 0
    documents_failed: int = 0
    captions_found: int = 0
    captions_used: int = 0
    captions_skipped: int = 0
    lines_emitted: int = 0
    positives: int = 0
    negatives: int = 0

    def merge(self, other: "LabelingStats") -> None:
        for name in type(self).model_fields:
            setattr(self, name, getattr(self, name) + getattr(other, name))


# ---------- captions and context ----------
def is_caption_line(line: Line, require_numeral: bool = True) -> bool:
    """Line-initial, case-sensitive "Table" / "Tab.", optionally followed by a numeral token."""
    tokens = line.tokens
    if tokens[0] not in CAPTION_WORDS:
        return False
    if not require_numeral:
        return True
    return len(tokens) > 1 and CAPTION_NUMERAL_RE.match(tokens[1]) is not None


def find_caption_lines(page_lines: Sequence[Line], require_numeral: bool = True) -> List[int]:
    """line_idx of every caption line on the page, ascending."""
    return sorted({ln.line_idx for ln in page_lines if is_caption_line(ln, require_numeral)})


def _position(page_lines: Sequence[Line], line_idx: int) -> int:
    for pos, ln in enumerate(page_lines):
        if ln.line_idx == line_idx:
            return pos
    raise ValueError(f"line_idx {line_idx} is not on this page")


def extract_context_groups(
    page_lines: Sequence[Line], caption_idx: int, config: Optional[WeakLabelConfig] = None
) -> Tuple[List[Line], List[Line]]:
    """Up to k lines directly above and below the caption, both in top-to-bottom order."""
    config = config or WeakLabelConfig()
    pos = _position(page_lines, caption_idx)
    up = list(page_lines[max(0, pos - config.k):pos])
    down = list(page_lines[pos + 1:pos + 1 + config.k])
    return up, down


def label_groups(
    up_group: Sequence[Line],
    down_group: Sequence[Line],
    page_context: Sequence[Line],
    config: Optional[WeakLabelConfig] = None,
    caption: Optional[Tuple[int, int]] = None,
) -> List[WeaklyLabeledLine]:
    """Label the group with the strictly larger mean NAM +1 and the other -1.

    Returns nothing when either group is smaller than min_group_size or the means tie.
    """
    config = config or WeakLabelConfig()
    if len(up_group) < config.min_group_size or len(down_group) < config.min_group_size:
        return []
    page_max = page_max_margin(page_context)
    if page_max <= 0.0:
        return []

    def mean_nam(group: Sequence[Line]) -> float:
        return sum(raw_margin(ln) / page_max for ln in group) / len(group)

    up_mean, down_mean = mean_nam(up_group), mean_nam(down_group)
    if up_mean == down_mean:
        return []
    up_label, down_label = (POSITIVE, NEGATIVE) if up_mean > down_mean else (NEGATIVE, POSITIVE)
    return [WeaklyLabeledLine(line=ln, label=up_label, caption=caption) for ln in up_group] + [
        WeaklyLabeledLine(line=ln, label=down_label, caption=caption) for ln in down_group
    ]


# ---------- documents and corpora ----------
def weak_label_document(
    doc_lines: Iterable[Line], config: Optional[WeakLabelConfig] = None
) -> Tuple[List[WeaklyLabeledLine], LabelingStats]:
    """Weak labels for one document, ordered by (page, caption, line)."""
    config = config or WeakLabelConfig()
    stats = LabelingStats(documents=1)
    out: List[WeaklyLabeledLine] = []
    for page_lines in group_pages(doc_lines):
        for caption_idx in find_caption_lines(page_lines, config.require_numeral):
            stats.captions_found += 1
            up, down = extract_context_groups(page_lines, caption_idx, config)
            labeled = label_groups(up, down, page_lines, config, caption=(page_lines[0].page, caption_idx))
            if not labeled:
                stats.captions_skipped += 1
                logger.debug("Skipping caption %s p%d l%d", page_lines[0].doc_id, page_lines[0].page, caption_idx)
                continue
            stats.captions_used += 1
            out.extend(labeled)
    stats.lines_emitted = len(out)
    stats.positives = sum(1 for r in out if r.label == POSITIVE)
    stats.negatives = len(out) - stats.positives
    return out, stats


def weak_label_corpus(
    docs: Iterable[Iterable[Line]],
    config: Optional[WeakLabelConfig] = None,
    jobs: int = 1,
    on_error: Optional[ErrorCallback] = None,
    stats: Optional[LabelingStats] = None,
) -> Iterator[WeaklyLabeledLine]:
    """Weak-label every document of a corpus, in corpus order regardless of `jobs`.

    A document that fails to load or label is reported to `on_error` (and the log) and skipped.
    """
    config = config or WeakLabelConfig()
    stats = stats if stats is not None else LabelingStats()

    def work(doc: Iterable[Line]) -> Tuple[Optional[List[WeaklyLabeledLine]], Any]:
        lines: List[Line] = []
        try:
            for ln in doc:
                lines.append(ln)
            return weak_label_document(lines, config)
        except (TableScoutError, ValueError, OSError) as err:
            return None, (lines[0].doc_id if lines else None, err)

    for labeled, extra in ordered_map(work, docs, jobs):
        if labeled is None:
            doc_id, err = extra
            stats.documents_failed += 1
            logger.warning("Weak labeling failed for %s: %s", doc_id or "<document>", err)
            if on_error is not None:
                on_error(doc_id, err)
            continue
        stats.merge(extra)
        yield from labeled


# ---------- labeled-lines JSONL ----------
def labeled_to_record(record: LabeledLine) -> Dict[str, Any]:
    payload = line_to_record(record.line)
    payload["label"] = record.label
    payload["source"] = record.source
    payload["caption"] = list(record.caption) if record.caption is not None else None
    return payload


def labeled_from_record(payload: Dict[str, Any], line_number: int) -> LabeledLine:
    require_fields(payload, ("label", "source"), line_number)
    line = line_from_record(payload, line_number)
    caption = payload.get("caption")
    if caption is not None and (not isinstance(caption, list) or len(caption) != 2):
        raise SchemaError(line_number, "'caption' must be [page, line_idx] or null")
    cls = WeaklyLabeledLine if payload["source"] == "weak" else LabeledLine
    try:
        return cls(
            line=line,
            label=payload["label"],
            source=payload["source"],
            caption=tuple(caption) if caption is not None else None,
        )
    except ValueError as err:
        raise SchemaError(line_number, str(err).splitlines()[0]) from err


def read_labeled_lines(stream: IO[str]) -> Iterator[LabeledLine]:
    for line_number, payload in iter_jsonl(stream):
        yield labeled_from_record(payload, line_number)


def write_labeled_lines(records: Iterable[LabeledLine], stream: IO[str]) -> int:
    return write_jsonl((labeled_to_record(r) for r in records), stream)
