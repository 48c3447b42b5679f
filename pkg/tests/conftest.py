"""Shared fixtures: hand-built PDF bytes, rich characters and lines."""

import os
import zlib
from typing import List, Optional, Sequence, Tuple

import pytest

from app.domain.model import Line, RichChar, Word

FONT_SIZE = 10.0
# glyph advance matching the layout estimate (0.5 x font size)
ADVANCE = 5.0


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace("(", "\\(").replace(")", "\\)")


def text_content(rows: Sequence[Tuple[float, float, str]], size: float = FONT_SIZE) -> bytes:
    """Content stream drawing each (x, y, text) row in Helvetica."""
    ops = ["BT", f"/F1 {size:g} Tf"]
    for x, y, text in rows:
        ops.append(f"1 0 0 1 {x:g} {y:g} Tm ({_escape(text)}) Tj")
    ops.append("ET")
    return "\n".join(ops).encode("latin-1")


def build_pdf(
    contents: Sequence[bytes],
    compress: bool = False,
    filter_name: Optional[str] = None,
    encrypt: bool = False,
) -> bytes:
    """A minimal PDF with one page per content stream and a correct cross-reference table.

    :param compress: FlateDecode the content streams.
    :param filter_name: write the streams ASCIIHex-encoded under this filter name instead.
    :param encrypt: add a standard security handler whose empty user password does not match.
    """
    objects: List[bytes] = [
        b"<< /Type /Catalog /Pages 2 0 R >>",
        b"",  # pages tree, filled below
        b"<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica /Encoding /WinAnsiEncoding >>",
    ]
    kids = []
    for content in contents:
        page_num = len(objects) + 1
        kids.append(f"{page_num} 0 R")
        objects.append(
            (
                f"<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] "
                f"/Resources << /Font << /F1 3 0 R >> >> /Contents {page_num + 1} 0 R >>"
            ).encode()
        )
        if filter_name:
            data, extra = content.hex().encode() + b">", f" /Filter /{filter_name}"
        elif compress:
            data, extra = zlib.compress(content), " /Filter /FlateDecode"
        else:
            data, extra = content, ""
        objects.append(f"<< /Length {len(data)}{extra} >>\nstream\n".encode() + data + b"\nendstream")
    objects[1] = f"<< /Type /Pages /Kids [{' '.join(kids)}] /Count {len(contents)} >>".encode()

    trailer_extra = ""
    if encrypt:
        objects.append(
            b"<< /Filter /Standard /V 1 /R 2 /P -4 "
            b"/O <" + b"11" * 32 + b"> /U <" + b"22" * 32 + b"> >>"
        )
        trailer_extra = f" /Encrypt {len(objects)} 0 R /ID [<{'ab' * 16}> <{'ab' * 16}>]"

    out = bytearray(b"%PDF-1.4\n")
    offsets = []
    for num, body in enumerate(objects, start=1):
        offsets.append(len(out))
        out += f"{num} 0 obj\n".encode() + body + b"\nendobj\n"
    xref = len(out)
    out += f"xref\n0 {len(objects) + 1}\n".encode()
    out += b"0000000000 65535 f \n"
    for off in offsets:
        out += f"{off:010d} 00000 n \n".encode()
    out += f"trailer\n<< /Size {len(objects) + 1} /Root 1 0 R{trailer_extra} >>\n".encode()
    out += f"startxref\n{xref}\n%%EOF\n".encode()
    return bytes(out)


def make_chars(text: str, x: float, y: float, page: int = 0, size: float = FONT_SIZE, advance: float = ADVANCE) -> List[RichChar]:
    """One RichChar per codepoint, spaced `advance` apart (spaces included)."""
    return [
        RichChar(codepoint=ch, page=page, x=x + i * advance, y=y, font_name="Helvetica", font_size=size)
        for i, ch in enumerate(text)
    ]


def make_line(
    tokens: Sequence[str],
    gap: float = 2.0,
    doc_id: str = "doc",
    page: int = 0,
    line_idx: int = 0,
    x: float = 72.0,
    char_width: float = ADVANCE,
    gaps: Optional[Sequence[float]] = None,
) -> Line:
    """A line whose words are separated by `gap` (or the per-gap list `gaps`)."""
    words = []
    for i, token in enumerate(tokens):
        x1 = x + char_width * len(token)
        words.append(Word(text=token, x0=x, x1=x1))
        if i < len(tokens) - 1:
            x = x1 + (gaps[i] if gaps is not None else gap)
    return Line(
        doc_id=doc_id,
        page=page,
        line_idx=line_idx,
        y=740.0 - 14.0 * line_idx,
        font_size=FONT_SIZE,
        words=words,
    )


def make_page(rows: Sequence[Tuple[Sequence[str], float]], doc_id: str = "doc", page: int = 0) -> List[Line]:
    """Lines from (tokens, gap) rows, numbered top to bottom."""
    return [make_line(tokens, gap, doc_id, page, idx) for idx, (tokens, gap) in enumerate(rows)]


PROSE = ["we", "show", "the", "new", "method", "often", "works"]
TABLE_ROW = ["model", "0.75", "0.80", "2010"]


def table_page(
    caption_pos: int,
    n_lines: int = 20,
    table_rows: Sequence[int] = (),
    table_gap: float = 8.0,
    prose_gap: float = 2.0,
    doc_id: str = "doc",
    page: int = 0,
) -> List[Line]:
    """A page with a caption at `caption_pos`, table rows at the given positions and prose elsewhere."""
    rows = []
    for idx in range(n_lines):
        if idx == caption_pos:
            rows.append((["Table", "1:", "results", "of", "the", "method"], prose_gap))
        elif idx in table_rows:
            rows.append((TABLE_ROW, table_gap))
        else:
            rows.append((PROSE, prose_gap))
    return make_page(rows, doc_id, page)


@pytest.fixture
def simple_pdf() -> bytes:
    return build_pdf([text_content([(72, 700, "Table 1: Results"), (72, 686, "alpha 0.5")])])


@pytest.fixture
def two_page_pdf() -> bytes:
    return build_pdf(
        [
            text_content([(72, 700, "first page")]),
            text_content([(72, 700, "second page"), (72, 686, "last")]),
        ],
        compress=True,
    )


@pytest.fixture
def caption_above_page() -> List[Line]:
    """Caption at line 5, table body on lines 6-13, prose elsewhere."""
    return table_page(caption_pos=5, n_lines=20, table_rows=range(6, 14))


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """No TABLESCOUT_* variable from the outer environment leaks into a test."""
    for name in list(os.environ):
        if name.startswith("TABLESCOUT"):
            monkeypatch.delenv(name)
