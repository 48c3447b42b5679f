"""Synthetic line corpora with known table regions.

Each page holds a prose paragraph, a table caption, a table body and another paragraph; the caption sits above
or below its table depending on the document's template. Table rows are built from nouns, names, numbers and
years in aligned columns separated by `table_gap`; prose lines use verbs, adjectives, adverbs, function words
and nouns separated by `prose_gap`. Every line's role is written out as a gold label.
"""

import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.domain.common import NEGATIVE, POSITIVE
from app.domain.model import LabeledLine, Line, Word
from app.services.corpus import LABELS_DIR, build_manifest, save_manifest
from app.services.labeler import write_labeled_lines
from app.services.layout import write_lines_jsonl
from app.utils.process_text import bundled_data_dir, read_wordlist

logger = logging.getLogger(__name__)

PAGE_WIDTH = 612.0
PAGE_HEIGHT = 792.0
LEFT = 72.0
RIGHT = 540.0
TOP = 740.0
FONT_SIZE = 10.0
LINE_SPACING = 14.0
GLYPH_WIDTH_RATIO = 0.5
JITTER = 0.25


@dataclass(frozen=True)
class SynthOptions:
    docs: int = 10
    seed: int = 7
    table_gap: float = 8.0
    prose_gap: float = 2.0
    pages: int = 3
    prose_lines: Tuple[int, int] = (8, 10)
    table_rows: Tuple[int, int] = (8, 12)
    table_cols: Tuple[int, int] = (2, 5)
    split_ratio: float = 0.75

    def __post_init__(self) -> None:
        if self.docs < 2:
            raise ValueError(f"docs must be >= 2, got {self.docs}")
        if self.table_gap <= 0 or self.prose_gap <= 0:
            raise ValueError("table and prose gaps must be > 0")
        if self.pages < 1:
            raise ValueError(f"pages must be >= 1, got {self.pages}")


@dataclass(frozen=True)
class Vocabulary:
    nouns: List[str]
    verbs: List[str]
    adjectives: List[str]
    adverbs: List[str]
    function_words: List[str]
    names: List[str]

    @classmethod
    def bundled(cls) -> "Vocabulary":
        lexicon = bundled_data_dir("lexicon")
        gazetteers = bundled_data_dir("gazetteers")
        names = [
            n for f in ("person.txt", "location.txt", "organization.txt")
            for n in read_wordlist(gazetteers, f) if " " not in n
        ]
        return cls(
            nouns=read_wordlist(lexicon, "nouns.txt"),
            verbs=read_wordlist(lexicon, "verbs.txt"),
            adjectives=read_wordlist(lexicon, "adjectives.txt"),
            adverbs=read_wordlist(lexicon, "adverbs.txt"),
            function_words=read_wordlist(lexicon, "function_words.txt"),
            names=names,
        )


def _width(token: str) -> float:
    return GLYPH_WIDTH_RATIO * FONT_SIZE * len(token)


def _jitter(rng: np.random.Generator, value: float) -> float:
    return value * rng.uniform(1.0 - JITTER, 1.0 + JITTER)


def _pick(rng: np.random.Generator, words: Sequence[str]) -> str:
    return words[int(rng.integers(len(words)))]


def _prose_token(rng: np.random.Generator, vocab: Vocabulary) -> str:
    pools = (vocab.function_words, vocab.nouns, vocab.verbs, vocab.adjectives, vocab.adverbs)
    weights = (0.35, 0.25, 0.2, 0.12, 0.08)
    return _pick(rng, pools[int(rng.choice(len(pools), p=weights))])


def _table_token(rng: np.random.Generator, vocab: Vocabulary, column: int) -> str:
    if column == 0:
        return _pick(rng, vocab.names) if rng.random() < 0.4 else _pick(rng, vocab.nouns)
    kind = rng.random()
    if kind < 0.55:
        return f"{rng.uniform(0, 1):.4f}"
    if kind < 0.7:
        return f"{int(rng.integers(1, 100))}%"
    if kind < 0.85:
        return f"{int(rng.integers(1, 5000)):,}"
    return str(int(rng.integers(1990, 2021)))


def _flow(rng: np.random.Generator, tokens: Sequence[str], gap: float, limit: float) -> List[Word]:
    words: List[Word] = []
    x = LEFT
    for token in tokens:
        x1 = x + _width(token)
        if words and x1 > limit:
            break
        words.append(Word(text=token, x0=round(x, 2), x1=round(x1, 2)))
        x = x1 + _jitter(rng, gap)
    return words


def _paragraph(rng: np.random.Generator, vocab: Vocabulary, n_lines: int, gap: float) -> List[List[Word]]:
    rows = []
    for i in range(n_lines):
        last = i == n_lines - 1
        limit = LEFT + (RIGHT - LEFT) * (rng.uniform(0.2, 0.7) if last else 1.0)
        tokens = [_prose_token(rng, vocab) for _ in range(60)]
        rows.append(_flow(rng, tokens, gap, limit))
    return rows


def _caption(rng: np.random.Generator, vocab: Vocabulary, number: int, gap: float) -> List[Word]:
    tokens = ["Table", f"{number}:"] + [_prose_token(rng, vocab) for _ in range(int(rng.integers(3, 8)))]
    return _flow(rng, tokens, gap, RIGHT)


def _table(rng: np.random.Generator, vocab: Vocabulary, opts: SynthOptions) -> List[List[Word]]:
    n_rows = int(rng.integers(opts.table_rows[0], opts.table_rows[1] + 1))
    n_cols = int(rng.integers(opts.table_cols[0], opts.table_cols[1] + 1))
    cells = [[_table_token(rng, vocab, c) for c in range(n_cols)] for _ in range(n_rows)]
    col_width = [max(_width(row[c]) for row in cells) for c in range(n_cols)]
    col_x0 = [LEFT]
    for c in range(1, n_cols):
        col_x0.append(col_x0[-1] + col_width[c - 1] + _jitter(rng, opts.table_gap))
    return [
        [Word(text=tok, x0=round(col_x0[c], 2), x1=round(col_x0[c] + _width(tok), 2)) for c, tok in enumerate(row)]
        for row in cells
    ]


def generate_document(doc_id: str, rng: np.random.Generator, vocab: Vocabulary, opts: SynthOptions) -> Tuple[List[Line], List[int]]:
    """Lines of one document and their gold labels (+1 table body, -1 otherwise)."""
    caption_above = bool(rng.random() < 0.5)
    lines: List[Line] = []
    labels: List[int] = []
    for page in range(opts.pages):
        before = _paragraph(rng, vocab, int(rng.integers(opts.prose_lines[0], opts.prose_lines[1] + 1)), opts.prose_gap)
        after = _paragraph(rng, vocab, int(rng.integers(opts.prose_lines[0], opts.prose_lines[1] + 1)), opts.prose_gap)
        caption = _caption(rng, vocab, page + 1, opts.prose_gap)
        table = _table(rng, vocab, opts)
        blocks = [(before, NEGATIVE), ([caption], NEGATIVE), (table, POSITIVE), (after, NEGATIVE)]
        if not caption_above:
            blocks[1], blocks[2] = blocks[2], blocks[1]
        line_idx = 0
        for rows, label in blocks:
            for words in rows:
                lines.append(
                    Line(
                        doc_id=doc_id,
                        page=page,
                        line_idx=line_idx,
                        y=round(TOP - LINE_SPACING * line_idx, 2),
                        font_size=FONT_SIZE,
                        words=words,
                    )
                )
                labels.append(label)
                line_idx += 1
    return lines, labels


def generate_corpus(out_dir: str, opts: Optional[SynthOptions] = None, vocab: Optional[Vocabulary] = None) -> Dict[str, int]:
    """Write <out>/lines, <out>/labels and <out>/manifest.json; return summary counts."""
    opts = opts or SynthOptions()
    vocab = vocab or Vocabulary.bundled()
    os.makedirs(os.path.join(out_dir, "lines"), exist_ok=True)
    os.makedirs(os.path.join(out_dir, LABELS_DIR), exist_ok=True)
    width = len(str(opts.docs - 1))
    summary = {"documents": 0, "lines": 0, "captions": 0, "table_lines": 0}
    for i in range(opts.docs):
        doc_id = f"synth-{i:0{width}d}"
        rng = np.random.default_rng([opts.seed, i])
        lines, labels = generate_document(doc_id, rng, vocab, opts)
        with open(os.path.join(out_dir, "lines", f"{doc_id}.jsonl"), "w", encoding="utf-8") as fh:
            write_lines_jsonl(lines, fh)
        with open(os.path.join(out_dir, LABELS_DIR, f"{doc_id}.jsonl"), "w", encoding="utf-8") as fh:
            write_labeled_lines((LabeledLine(line=ln, label=lb, source="gold") for ln, lb in zip(lines, labels)), fh)
        summary["documents"] += 1
        summary["lines"] += len(lines)
        summary["captions"] += opts.pages
        summary["table_lines"] += labels.count(POSITIVE)
    save_manifest(build_manifest(out_dir, opts.split_ratio, opts.seed, name=os.path.basename(os.path.abspath(out_dir))), out_dir)
    logger.info("Generated %d synthetic documents (%d lines) in %s", summary["documents"], summary["lines"], out_dir)
    return summary
