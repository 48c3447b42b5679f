import io

import pytest

from conftest import make_chars, make_line

from app.domain.exceptions import SchemaError
from app.domain.model import Page, PdfDocument, RichChar
from app.services.layout import (
    assemble_lines,
    assemble_page,
    group_documents,
    group_pages,
    read_lines_jsonl,
    word_margins,
    write_lines_jsonl,
)
from app.utils.configuration import LayoutConfig


class TestAssemblePage:
    def test_rows_top_to_bottom(self):
        chars = make_chars("low", 72, 600) + make_chars("high", 72, 700)
        lines = assemble_page(chars, "d", 0)
        assert [ln.tokens for ln in lines] == [["high"], ["low"]]
        assert [ln.line_idx for ln in lines] == [0, 1]
        assert lines[0].y > lines[1].y

    def test_whitespace_splits_words(self):
        lines = assemble_page(make_chars("ab cd", 72, 700), "d", 0)
        assert lines[0].tokens == ["ab", "cd"]
        assert lines[0].words[0].x0 == pytest.approx(72)

    def test_wide_gap_splits_words(self):
        # right edge of "ab" is 72 + 5 + 5 = 82; "cd" starts 4 units later (> 0.3 x 10)
        chars = make_chars("ab", 72, 700) + make_chars("cd", 86, 700)
        assert assemble_page(chars, "d", 0)[0].tokens == ["ab", "cd"]

    def test_narrow_gap_joins(self):
        chars = make_chars("ab", 72, 700) + make_chars("cd", 84, 700)
        assert assemble_page(chars, "d", 0)[0].tokens == ["abcd"]

    def test_baseline_tolerance(self):
        chars = make_chars("ab", 72, 700) + make_chars("cd", 100, 697)
        lines = assemble_page(chars, "d", 0)
        assert len(lines) == 1
        assert lines[0].tokens == ["ab", "cd"]

    def test_line_y_is_most_frequent_baseline(self):
        chars = make_chars("abc", 72, 700) + make_chars("x", 100, 698)
        assert assemble_page(chars, "d", 0)[0].y == 700

    def test_whitespace_only_row_yields_nothing(self):
        chars = make_chars("   ", 72, 650) + make_chars("ab", 72, 700)
        lines = assemble_page(chars, "d", 0)
        assert [ln.tokens for ln in lines] == [["ab"]]

    def test_words_do_not_overlap(self):
        chars = make_chars("abc def ghi", 72, 700, advance=3.0)
        words = assemble_page(chars, "d", 0)[0].words
        assert [w.text for w in words] == ["abc", "def", "ghi"]
        assert all(a.x1 <= b.x0 for a, b in zip(words, words[1:]))

    def test_custom_gap_ratio(self):
        chars = make_chars("ab", 72, 700) + make_chars("cd", 86, 700)
        lines = assemble_page(chars, "d", 0, LayoutConfig(word_gap_ratio=0.5))
        assert lines[0].tokens == ["abcd"]

    def test_empty_page(self):
        assert assemble_page([], "d", 0) == []

    def test_two_words_from_three_glyphs(self):
        chars = [
            RichChar(codepoint=c, page=0, x=x, y=700.0, font_name="F", font_size=12.0)
            for c, x in [("T", 100.0), ("o", 106.0), ("A", 130.0)]
        ]
        words = assemble_page(chars, "d", 0)[0].words
        assert [(w.text, w.x0, w.x1) for w in words] == [("To", 100.0, 112.0), ("A", 130.0, 136.0)]


class TestGlyphAdvance:
    @staticmethod
    def _glyph(c, x, advance=None):
        return RichChar(codepoint=c, page=0, x=x, y=700.0, font_name="F", font_size=12.0, advance=advance)

    def test_font_advance_keeps_wide_glyphs_together(self):
        # 'm' is 10 units wide; the 6-unit fallback would leave a 4-unit gap (> 0.3 x 12)
        chars = [self._glyph("m", 100.0, 10.0), self._glyph("o", 110.0, 6.7)]
        words = assemble_page(chars, "d", 0)[0].words
        assert [w.text for w in words] == ["mo"]
        assert words[0].x1 == pytest.approx(116.7)

    def test_fallback_without_advance(self):
        chars = [self._glyph("m", 100.0), self._glyph("o", 110.0)]
        assert assemble_page(chars, "d", 0)[0].tokens == ["m", "o"]

    def test_explicit_space_ends_a_word(self):
        # fallback extent of "il" reaches 107.2, past the next word's origin
        chars = [self._glyph("i", 100.0), self._glyph("l", 101.2), self._glyph(" ", 103.9), self._glyph("i", 106.9)]
        words = assemble_page(chars, "d", 0)[0].words
        assert [w.text for w in words] == ["il", "i"]
        assert words[0].x1 == pytest.approx(106.9)

    def test_overprinted_glyph_joins_the_word(self):
        chars = [self._glyph("a", 100.0, 6.0), self._glyph(" ", 100.0, 3.0), self._glyph("b", 100.0, 6.0)]
        assert assemble_page(chars, "d", 0)[0].tokens == ["ab"]


class TestLineGrouping:
    def test_chars_chain_into_one_line(self):
        # each neighbour is 3.5 apart (<= 0.4 x 10) although the ends are 7 apart
        chars = make_chars("a", 72, 700) + make_chars("b", 90, 696.5) + make_chars("c", 110, 693)
        lines = assemble_page(chars, "d", 0)
        assert [ln.tokens for ln in lines] == [["a", "b", "c"]]

    def test_threshold_uses_the_larger_font(self):
        small = make_chars("x", 72, 700, size=6.0)
        big = make_chars("Y", 90, 695.5, size=12.0)
        assert len(assemble_page(small + big, "d", 0)) == 1
        smaller = make_chars("Y", 90, 695.5, size=6.0)
        assert len(assemble_page(small + smaller, "d", 0)) == 2

    def test_single_spaced_lines_stay_apart(self):
        chars = make_chars("one", 72, 700) + make_chars("two", 72, 688) + make_chars("three", 72, 676)
        assert [ln.tokens for ln in assemble_page(chars, "d", 0)] == [["one"], ["two"], ["three"]]


class TestAssembleLines:
    def test_each_page_numbers_from_zero(self):
        chars0 = make_chars("one", 72, 700) + make_chars("two", 72, 680)
        chars1 = make_chars("three", 72, 700, page=1)
        doc = PdfDocument(doc_id="d", pages=[Page(width=612, height=792, chars=chars0), Page(width=612, height=792, chars=chars1)])
        pages = assemble_lines(doc)
        assert [[ln.line_idx for ln in p] for p in pages] == [[0, 1], [0]]
        assert pages[1][0].page == 1
        assert pages[1][0].doc_id == "d"


class TestHelpers:
    def test_word_margins(self):
        line = make_line(["a", "bb", "c"], gaps=[3.0, 7.0])
        assert word_margins(line) == pytest.approx([3.0, 7.0])

    def test_group_pages_and_documents(self):
        lines = [make_line(["x"], doc_id=d, page=p, line_idx=i) for d, p, i in [("a", 0, 0), ("a", 0, 1), ("a", 1, 0), ("b", 0, 0)]]
        assert [len(p) for p in group_pages(lines)] == [2, 1, 1]
        assert [(doc_id, len(ls)) for doc_id, ls in group_documents(lines)] == [("a", 3), ("b", 1)]


class TestLinesJsonl:
    def test_round_trip(self):
        lines = [make_line(["Table", "1:", "scores"], line_idx=0), make_line(["a", "0.25"], gap=9.5, line_idx=1)]
        buf = io.StringIO()
        assert write_lines_jsonl(lines, buf) == 2
        buf.seek(0)
        assert list(read_lines_jsonl(buf)) == lines

    def test_rewrite_is_byte_identical(self):
        lines = [make_line(["alpha", "beta"], gap=3.3, line_idx=0)]
        first = io.StringIO()
        write_lines_jsonl(lines, first)
        second = io.StringIO()
        write_lines_jsonl(read_lines_jsonl(io.StringIO(first.getvalue())), second)
        assert first.getvalue() == second.getvalue()

    def test_missing_words(self):
        text = '{"doc_id": "d", "page": 0, "line_idx": 0, "y": 700, "font_size": 10}\n'
        with pytest.raises(SchemaError) as info:
            list(read_lines_jsonl(io.StringIO(text)))
        assert info.value.line_number == 1
