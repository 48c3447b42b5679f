"""Unsupervised sparse-line baseline.

A line is sparse when it is narrow compared to the document's average line width, or when one of its gaps is
much wider than the document's average word gap. Sparse lines are table candidates; isolated candidates away
from any caption are dropped.
"""

import logging
from typing import Iterable, Iterator, List, Optional, Sequence

from app.domain.common import NEGATIVE, POSITIVE
from app.domain.model import DocumentStats, LabeledLine, Line
from app.services.labeler import is_caption_line
from app.services.layout import group_documents, group_pages, word_margins

logger = logging.getLogger(__name__)

WIDTH_RATIO = 2.0 / 3.0
GAP_RATIO = 2.0
MIN_RUN = 2


def compute_document_stats(doc_lines: Iterable[Line]) -> DocumentStats:
    """Average line width and average word gap over a whole document."""
    widths: List[float] = []
    gaps: List[float] = []
    for line in doc_lines:
        widths.append(line.width)
        gaps.extend(word_margins(line))
    return DocumentStats(
        avg_line_width=sum(widths) / len(widths) if widths else 0.0,
        avg_word_gap=sum(gaps) / len(gaps) if gaps else 0.0,
    )


def is_sparse_line(line: Line, stats: DocumentStats) -> bool:
    if line.width < WIDTH_RATIO * stats.avg_line_width:
        return True
    return any(gap > GAP_RATIO * stats.avg_word_gap for gap in word_margins(line))


def _demote_short_runs(page_lines: Sequence[Line], labels: List[int], min_run: int, require_numeral: bool) -> None:
    captions = [is_caption_line(ln, require_numeral) for ln in page_lines]
    i = 0
    while i < len(labels):
        if labels[i] != POSITIVE:
            i += 1
            continue
        j = i
        while j < len(labels) and labels[j] == POSITIVE:
            j += 1
        near_caption = (i > 0 and captions[i - 1]) or (j < len(labels) and captions[j])
        if j - i < min_run and not near_caption:
            labels[i:j] = [NEGATIVE] * (j - i)
        i = j


def heuristic_predict(doc_lines: Sequence[Line], min_run: int = MIN_RUN, require_numeral: bool = True) -> List[int]:
    """+1 / -1 per line of one document, in input order."""
    doc_lines = list(doc_lines)
    stats = compute_document_stats(doc_lines)
    out: List[int] = []
    for page_lines in group_pages(doc_lines):
        labels = [POSITIVE if is_sparse_line(ln, stats) else NEGATIVE for ln in page_lines]
        _demote_short_runs(page_lines, labels, min_run, require_numeral)
        out.extend(labels)
    return out


def heuristic_predict_corpus(
    lines: Iterable[Line], min_run: int = MIN_RUN, require_numeral: bool = True
) -> Iterator[LabeledLine]:
    """Baseline labels for a line stream, document by document."""
    for doc_id, doc_lines in group_documents(lines):
        labels = heuristic_predict(doc_lines, min_run, require_numeral)
        logger.debug("Baseline: %s has %d sparse lines of %d", doc_id, labels.count(POSITIVE), len(labels))
        for line, label in zip(doc_lines, labels):
            yield LabeledLine(line=line, label=label, source="baseline")
