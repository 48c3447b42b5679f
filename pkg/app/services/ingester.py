"""PDF ingestion: rendered glyphs as RichChar streams, plus the rich-character JSONL interchange format.

Operator interpretation is delegated to pdfplumber (pdfminer.six underneath). This module only checks the
document against the supported subset and normalizes what pdfplumber reports into RichChar records in PDF user
space (bottom-left origin).
"""

import io
import logging
import os
from typing import IO, Any, Dict, List, Optional

import pdfplumber
from pdfminer.pdfdocument import PDFEncryptionError, PDFPasswordIncorrect
from pdfminer.pdftypes import PDFStream, resolve1
from pdfminer.psparser import PSException
from pdfplumber.utils.exceptions import MalformedPDFException, PdfminerException

from app.domain.exceptions import EncryptedPdf, MalformedPdf, SchemaError, TableScoutError, UnsupportedPdfFeature
from app.domain.model import Page, PdfDocument, RichChar
from app.utils.process_json import iter_jsonl, require_fields, validate_record, write_jsonl

logger = logging.getLogger(__name__)

PDF_HEADER = b"%PDF-"
HEADER_SEARCH_WINDOW = 1024
SUPPORTED_FILTERS = ("FlateDecode", "Fl")
# b and c of the text rendering matrix must vanish for horizontal text
ROTATION_TOLERANCE = 1e-9
DEFAULT_DOC_ID = "document"

CHAR_FIELDS = ("page", "char", "x", "y", "font", "size")


# ---------- PDF parsing ----------
def _structural_offset(data: bytes) -> int:
    """Byte offset reported for a structural failure: the last startxref section, else the header."""
    pos = data.rfind(b"startxref")
    if pos >= 0:
        return pos
    header = data.find(PDF_HEADER, 0, HEADER_SEARCH_WINDOW)
    return max(header, 0)


def _unwrap(err: BaseException) -> BaseException:
    """pdfplumber wraps pdfminer failures; return the innermost pdfminer exception."""
    while isinstance(err, (PdfminerException, MalformedPDFException)) and err.args and isinstance(err.args[0], BaseException):
        err = err.args[0]
    return err


def _filter_name(value: Any) -> str:
    return getattr(value, "name", None) or str(value)


def _check_content_filters(page_obj: Any, page_number: int) -> None:
    for ref in page_obj.contents or []:
        stream = resolve1(ref)
        if not isinstance(stream, PDFStream):
            continue
        for fltr, _params in stream.get_filters():
            name = _filter_name(fltr)
            if name not in SUPPORTED_FILTERS:
                logger.debug("Page %d content stream uses filter %s", page_number, name)
                raise UnsupportedPdfFeature(name)


def _advance(raw: Dict[str, Any]) -> Optional[float]:
    """Advance in user space; pdfminer sizes each char box from the font width table."""
    x0, x1 = raw.get("x0"), raw.get("x1")
    if x0 is None or x1 is None:
        return None
    advance = float(x1) - float(x0)
    return advance if advance >= 0.0 else None


def _to_rich_char(raw: Dict[str, Any], page_idx: int) -> Optional[RichChar]:
    matrix = raw.get("matrix")
    if matrix is not None:
        a, b, c, d, e, f = matrix
        if abs(b) > ROTATION_TOLERANCE or abs(c) > ROTATION_TOLERANCE or a <= 0 or d <= 0:
            raise UnsupportedPdfFeature("rotated text")
        x, y = float(e), float(f)
    else:
        x, y = float(raw["x0"]), float(raw["y0"])
    size = float(raw.get("size") or 0.0)
    if size <= 0.0:
        logger.debug("Skipping zero-size glyph %r on page %d", raw.get("text"), page_idx)
        return None
    return RichChar(
        codepoint=raw["text"],
        page=page_idx,
        x=x,
        y=y,
        font_name=str(raw.get("fontname", "")),
        font_size=size,
        advance=_advance(raw),
    )


def parse_pdf(data: bytes, doc_id: str = DEFAULT_DOC_ID) -> PdfDocument:
    """Parse PDF bytes into a PdfDocument with one RichChar per rendered glyph.

    :param data: the complete PDF file.
    :param doc_id: identifier stored on the document (the CLI uses the file stem).
    :raises MalformedPdf: the bytes are not a parseable PDF; carries a byte offset.
    :raises EncryptedPdf: the document declares an encryption dictionary.
    :raises UnsupportedPdfFeature: a content stream filter or text orientation outside the supported subset.
    """
    if data.find(PDF_HEADER, 0, HEADER_SEARCH_WINDOW) < 0:
        raise MalformedPdf("missing %PDF- header", offset=0)

    pages: List[Page] = []
    try:
        with pdfplumber.open(io.BytesIO(data)) as pdf:
            if getattr(pdf.doc, "encryption", None):
                raise EncryptedPdf()
            for page in pdf.pages:
                page_idx = page.page_number - 1
                _check_content_filters(page.page_obj, page_idx)
                chars = [rc for rc in (_to_rich_char(raw, page_idx) for raw in page.chars) if rc is not None]
                pages.append(Page(width=float(page.width), height=float(page.height), chars=chars))
    except TableScoutError:
        raise
    except (PdfminerException, MalformedPDFException, PSException, PDFEncryptionError, PDFPasswordIncorrect) as err:
        inner = _unwrap(err)
        if isinstance(inner, (PDFPasswordIncorrect, PDFEncryptionError)):
            raise EncryptedPdf() from err
        if isinstance(inner, TableScoutError):
            raise inner from err
        raise MalformedPdf(str(inner) or type(inner).__name__, offset=_structural_offset(data)) from err
    except (ValueError, KeyError, TypeError, IndexError, AttributeError) as err:
        # pdfminer surfaces some broken object graphs as plain Python errors
        raise MalformedPdf(f"{type(err).__name__}: {err}", offset=_structural_offset(data)) from err

    doc = PdfDocument(doc_id=doc_id, pages=pages)
    logger.debug("Parsed %s: %d pages, %d chars", doc_id, len(doc.pages), doc.num_chars)
    return doc


def parse_pdf_file(path: str, doc_id: Optional[str] = None) -> PdfDocument:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_pdf(data, doc_id=doc_id or os.path.splitext(os.path.basename(path))[0])


# ---------- rich-character JSONL ----------
def read_richchar_jsonl(stream: IO[str]) -> PdfDocument:
    """Rebuild a PdfDocument from the rich-character JSONL format.

    The first record is the header {"doc_id", "pages": [{"w", "h"}, ...]}; every later record is one glyph.
    """
    header: Optional[Dict[str, Any]] = None
    chars_by_page: List[List[RichChar]] = []
    for line_number, payload in iter_jsonl(stream):
        if header is None:
            if "char" in payload:
                # a glyph where the header belongs: report its own defects first
                require_fields(payload, CHAR_FIELDS, line_number)
                raise SchemaError(line_number, "missing document header before the first character record")
            require_fields(payload, ("doc_id", "pages"), line_number)
            if not isinstance(payload["pages"], list):
                raise SchemaError(line_number, "'pages' must be a list")
            for dims in payload["pages"]:
                if not isinstance(dims, dict):
                    raise SchemaError(line_number, "each page entry must be an object")
                require_fields(dims, ("w", "h"), line_number)
            header = payload
            chars_by_page = [[] for _ in payload["pages"]]
            continue

        require_fields(payload, CHAR_FIELDS, line_number)
        if "doc_id" in payload and payload["doc_id"] != header["doc_id"]:
            raise SchemaError(line_number, f"doc_id {payload['doc_id']!r} differs from header {header['doc_id']!r}")
        page = payload["page"]
        if not isinstance(page, int) or isinstance(page, bool) or not 0 <= page < len(chars_by_page):
            raise SchemaError(line_number, f"page {page!r} outside the {len(chars_by_page)} header pages")
        chars_by_page[page].append(
            validate_record(
                RichChar,
                {
                    "codepoint": payload["char"],
                    "page": page,
                    "x": payload["x"],
                    "y": payload["y"],
                    "font_name": payload["font"],
                    "font_size": payload["size"],
                    "advance": payload.get("adv"),
                },
                line_number,
            )
        )

    if header is None:
        raise SchemaError(1, "missing document header")

    try:
        pages = [
            Page(width=dims["w"], height=dims["h"], chars=chars)
            for dims, chars in zip(header["pages"], chars_by_page)
        ]
        return PdfDocument(doc_id=str(header["doc_id"]), pages=pages)
    except ValueError as err:
        raise SchemaError(1, f"invalid header: {err}") from err


def _char_record(ch: RichChar) -> Dict[str, Any]:
    record = {"page": ch.page, "char": ch.codepoint, "x": ch.x, "y": ch.y, "font": ch.font_name, "size": ch.font_size}
    if ch.advance is not None:
        record["adv"] = ch.advance
    return record


def write_richchar_jsonl(doc: PdfDocument, stream: IO[str]) -> None:
    """Write the header then every glyph, page by page in content order."""
    header = {"doc_id": doc.doc_id, "pages": [{"w": p.width, "h": p.height} for p in doc.pages]}
    records = (_char_record(ch) for page in doc.pages for ch in page.chars)
    write_jsonl([header], stream)
    write_jsonl(records, stream)


def load_document(path: str) -> PdfDocument:
    """Load a PDF or a rich-character JSONL file, chosen by extension."""
    if path.lower().endswith(".pdf"):
        return parse_pdf_file(path)
    with open(path, encoding="utf-8") as fh:
        return read_richchar_jsonl(fh)
