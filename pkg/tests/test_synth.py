import json

import numpy as np
import pytest

from app.domain.common import NEGATIVE, POSITIVE
from app.services.corpus import load_manifest, read_gold_labels, stream_lines
from app.services.extractor import raw_margin
from app.services.labeler import weak_label_document
from app.services.layout import group_documents
from app.services.synth import SynthOptions, Vocabulary, generate_corpus, generate_document

OPTS = SynthOptions(docs=4, pages=2)


@pytest.fixture(scope="module")
def vocab():
    return Vocabulary.bundled()


def _files(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


class TestGenerateDocument:
    def test_layout(self, vocab):
        lines, labels = generate_document("d", np.random.default_rng([7, 0]), vocab, OPTS)
        assert len(lines) == len(labels)
        assert {ln.page for ln in lines} == {0, 1}
        for page in (0, 1):
            idx = [ln.line_idx for ln in lines if ln.page == page]
            assert idx == list(range(len(idx)))

    def test_one_caption_per_page(self, vocab):
        lines, labels = generate_document("d", np.random.default_rng([7, 1]), vocab, OPTS)
        captions = [(ln, lb) for ln, lb in zip(lines, labels) if ln.tokens[0] == "Table"]
        assert [ln.tokens[1] for ln, _ in captions] == ["1:", "2:"]
        assert all(lb == NEGATIVE for _, lb in captions)

    def test_table_rows_are_contiguous(self, vocab):
        lines, labels = generate_document("d", np.random.default_rng([7, 2]), vocab, OPTS)
        for page in (0, 1):
            rows = [ln.line_idx for ln, lb in zip(lines, labels) if ln.page == page and lb == POSITIVE]
            assert 8 <= len(rows) <= 12
            assert rows == list(range(rows[0], rows[0] + len(rows)))

    def test_table_margins_exceed_prose(self, vocab):
        lines, labels = generate_document("d", np.random.default_rng([7, 3]), vocab, OPTS)
        table = [raw_margin(ln) for ln, lb in zip(lines, labels) if lb == POSITIVE]
        prose = [raw_margin(ln) for ln, lb in zip(lines, labels) if lb == NEGATIVE and len(ln.words) > 1]
        assert min(table) > max(prose)

    def test_invalid_options(self):
        with pytest.raises(ValueError):
            SynthOptions(docs=1)
        with pytest.raises(ValueError):
            SynthOptions(table_gap=0.0)


class TestGenerateCorpus:
    def test_files_and_summary(self, tmp_path, vocab):
        summary = generate_corpus(str(tmp_path), OPTS, vocab)
        assert summary["documents"] == 4 and summary["captions"] == 8
        manifest = load_manifest(str(tmp_path))
        assert sorted(d.doc_id for d in manifest.documents) == ["synth-0", "synth-1", "synth-2", "synth-3"]
        assert len(manifest.role("train")) == 3
        gold = list(read_gold_labels(str(tmp_path), [d.doc_id for d in manifest.documents]))
        assert len(gold) == summary["lines"]
        assert sum(r.label == POSITIVE for r in gold) == summary["table_lines"]
        assert all(r.source == "gold" for r in gold)

    def test_same_seed_same_bytes(self, tmp_path, vocab):
        first, second = tmp_path / "a" / "corpus", tmp_path / "b" / "corpus"
        generate_corpus(str(first), OPTS, vocab)
        generate_corpus(str(second), OPTS, vocab)
        assert _files(first) == _files(second)

    def test_seed_changes_the_corpus(self, tmp_path, vocab):
        generate_corpus(str(tmp_path / "a"), OPTS, vocab)
        generate_corpus(str(tmp_path / "b"), SynthOptions(docs=4, pages=2, seed=8), vocab)
        assert _files(tmp_path / "a")["lines/synth-0.jsonl"] != _files(tmp_path / "b")["lines/synth-0.jsonl"]

    def test_manifest_is_relative(self, tmp_path, vocab):
        generate_corpus(str(tmp_path), OPTS, vocab)
        payload = json.loads((tmp_path / "manifest.json").read_text())
        assert all(d["path"].startswith("lines") for d in payload["documents"])

    def test_weak_labels_agree_with_gold(self, tmp_path, vocab):
        generate_corpus(str(tmp_path), SynthOptions(docs=6, pages=3), vocab)
        manifest = load_manifest(str(tmp_path))
        gold = {r.key: r.label for r in read_gold_labels(str(tmp_path), [d.doc_id for d in manifest.documents])}
        emitted = 0
        for role in ("train", "test"):
            for _, doc_lines in group_documents(stream_lines(manifest, role)):
                labeled, stats = weak_label_document(doc_lines)
                assert stats.captions_used == 3
                emitted += len(labeled)
                assert all(r.label == gold[r.key] for r in labeled)
        assert emitted == 6 * 3 * 16
