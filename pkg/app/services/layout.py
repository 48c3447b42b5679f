"""Words and lines from rich characters, plus the lines JSONL format."""

import itertools
import logging
from collections import Counter
from typing import IO, Any, Dict, Iterable, Iterator, List, Optional, Tuple

from app.domain.exceptions import SchemaError
from app.domain.model import Line, PdfDocument, RichChar, Word
from app.utils.configuration import LayoutConfig
from app.utils.process_json import iter_jsonl, require_fields, validate_record, write_jsonl

logger = logging.getLogger(__name__)

LINE_FIELDS = ("doc_id", "page", "line_idx", "y", "font_size", "words")


def _mode(values: Iterable[float]) -> float:
    """Most frequent value; ties go to the larger one."""
    counts = Counter(values)
    return max(counts.items(), key=lambda kv: (kv[1], kv[0]))[0]


def _same_line(a: RichChar, b: RichChar, tolerance: float) -> bool:
    return abs(a.y - b.y) <= tolerance * max(a.font_size, b.font_size)


def _group_rows(chars: List[RichChar], tolerance: float) -> List[List[RichChar]]:
    """Cluster characters into visual rows, top to bottom.

    Two characters share a row when their baselines differ by at most `tolerance` x the larger of their font
    sizes; rows are the connected groups of that relation.
    """
    if not chars:
        return []
    reach = tolerance * max(ch.font_size for ch in chars)
    rows: List[List[RichChar]] = []
    lowest: List[float] = []
    for ch in sorted(chars, key=lambda c: -c.y):
        hits = [
            i
            for i, row in enumerate(rows)
            if lowest[i] - ch.y <= reach and any(_same_line(ch, m, tolerance) for m in row)
        ]
        if not hits:
            rows.append([ch])
            lowest.append(ch.y)
            continue
        # ch may bridge rows that were apart until now
        keep = hits[0]
        for i in reversed(hits[1:]):
            rows[keep].extend(rows.pop(i))
            lowest.pop(i)
        rows[keep].append(ch)
        lowest[keep] = ch.y
    return rows


def _advance(ch: RichChar, config: LayoutConfig) -> float:
    if ch.advance is not None:
        return ch.advance
    return config.glyph_width_ratio * ch.font_size * len(ch.codepoint)


def _split_words(row: List[RichChar], dominant: float, config: LayoutConfig) -> List[Word]:
    """Break a row into words on whitespace glyphs and on gaps wider than the word-gap threshold."""
    threshold = config.word_gap_ratio * dominant
    spans: List[List[Any]] = []
    open_span = False
    for ch in sorted(row, key=lambda c: c.x):
        if ch.codepoint.isspace():
            open_span = False
            continue
        right = ch.x + _advance(ch, config)
        if open_span and ch.x - spans[-1][2] <= threshold:
            spans[-1][0] += ch.codepoint
            spans[-1][2] = max(spans[-1][2], right)
        elif spans and ch.x <= spans[-1][1]:
            # overprinted at the previous word's origin
            spans[-1][0] += ch.codepoint
            spans[-1][2] = max(spans[-1][2], right)
            open_span = True
        else:
            spans.append([ch.codepoint, ch.x, right])
            open_span = True
    for prev, nxt in zip(spans, spans[1:]):
        if prev[2] > nxt[1]:
            prev[2] = nxt[1]
    return [Word(text=t, x0=a, x1=b) for t, a, b in spans]


def assemble_page(chars: List[RichChar], doc_id: str, page: int, config: Optional[LayoutConfig] = None) -> List[Line]:
    config = config or LayoutConfig()
    lines: List[Line] = []
    for row in _group_rows(chars, config.line_tolerance):
        visible = [ch for ch in row if not ch.codepoint.isspace()]
        if not visible:
            continue
        dominant = _mode(ch.font_size for ch in visible)
        words = _split_words(row, dominant, config)
        lines.append(
            Line(
                doc_id=doc_id,
                page=page,
                line_idx=len(lines),
                y=_mode(ch.y for ch in visible),
                font_size=dominant,
                words=words,
            )
        )
    return lines


def assemble_lines(doc: PdfDocument, config: Optional[LayoutConfig] = None) -> List[List[Line]]:
    """Group every page's characters into lines (top to bottom) of words (left to right).

    :returns: one list of lines per page, `line_idx` contiguous from 0 on each page.
    """
    config = config or LayoutConfig()
    pages = [assemble_page(page.chars, doc.doc_id, idx, config) for idx, page in enumerate(doc.pages)]
    logger.debug("Assembled %s into %d lines", doc.doc_id, sum(len(p) for p in pages))
    return pages


def word_margins(line: Line) -> List[float]:
    """Horizontal gaps between consecutive words, clamped at 0."""
    return [max(0.0, nxt.x0 - prev.x1) for prev, nxt in zip(line.words, line.words[1:])]


# ---------- grouping helpers ----------
def group_pages(lines: Iterable[Line]) -> Iterator[List[Line]]:
    """Group a line stream into consecutive (doc_id, page) runs."""
    for _, page in itertools.groupby(lines, key=lambda ln: (ln.doc_id, ln.page)):
        yield list(page)


def group_documents(lines: Iterable[Line]) -> Iterator[Tuple[str, List[Line]]]:
    """Group a line stream into consecutive documents."""
    for doc_id, doc_lines in itertools.groupby(lines, key=lambda ln: ln.doc_id):
        yield doc_id, list(doc_lines)


# ---------- lines JSONL ----------
def line_to_record(line: Line) -> Dict[str, Any]:
    return {
        "doc_id": line.doc_id,
        "page": line.page,
        "line_idx": line.line_idx,
        "y": line.y,
        "font_size": line.font_size,
        "words": [{"t": w.text, "x0": w.x0, "x1": w.x1} for w in line.words],
    }


def line_from_record(payload: Dict[str, Any], line_number: int) -> Line:
    require_fields(payload, LINE_FIELDS, line_number)
    words = payload["words"]
    if not isinstance(words, list):
        raise SchemaError(line_number, "'words' must be a list")
    for word in words:
        if not isinstance(word, dict):
            raise SchemaError(line_number, "each word must be an object")
        require_fields(word, ("t", "x0", "x1"), line_number)
    return validate_record(
        Line,
        {
            "doc_id": payload["doc_id"],
            "page": payload["page"],
            "line_idx": payload["line_idx"],
            "y": payload["y"],
            "font_size": payload["font_size"],
            "words": [{"text": w["t"], "x0": w["x0"], "x1": w["x1"]} for w in words],
        },
        line_number,
    )


def read_lines_jsonl(stream: IO[str]) -> Iterator[Line]:
    for line_number, payload in iter_jsonl(stream):
        yield line_from_record(payload, line_number)


def write_lines_jsonl(lines: Iterable[Line], stream: IO[str]) -> int:
    return write_jsonl((line_to_record(line) for line in lines), stream)
