"""Command-line entry point: extract, weak-label, featurize, train, predict and evaluate table lines.

Exit codes: 0 success, 2 some documents failed (reported on stderr as JSON lines), 1 fatal or usage error.
"""

import argparse
import json
import logging
import os
import sys
from contextlib import contextmanager
from typing import IO, Any, Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from dataclass_wizard import errors as wizard_errors
from tqdm import tqdm

from app.domain.common import DEFAULT_MASK, FEATURE_MASKS, VOTERS
from app.domain.exceptions import AlignmentError, TableScoutError
from app.domain.model import EnsembleModel, FeatureConfig, FeatureRecord, FeatureVector, LabeledLine, Line, MetricsReport
from app.services import baseline, classifiers, corpus, evaluator, extractor, labeler, layout, synth
from app.services.ingester import load_document
from app.utils.common import configure_logging, error_record, get_config, ordered_map, with_overrides
from app.utils.configuration import AppConfig, LayoutConfig
from app.utils.process_entity import EntityRecognizer, get_entity_recognizer
from app.utils.process_json import iter_jsonl, validate_record
from app.utils.process_text import PosTagger, get_pos_tagger

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2

Key = Tuple[str, int, int]


class UsageError(Exception):
    """Invalid command-line arguments."""


class ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad arguments; 2 means partial success here, so raise instead."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise UsageError(message)


class ErrorReporter:
    """Collects per-document failures and writes each one to stderr as a JSON line."""

    def __init__(self, stream: Optional[IO[str]] = None):
        self.stream = stream
        self.failed: List[Dict[str, Any]] = []
        self.succeeded = 0

    @property
    def failed_ids(self) -> Set[str]:
        return {rec["doc_id"] for rec in self.failed if rec["doc_id"]}

    def report(self, doc_id: Optional[str], path: Optional[str], err: BaseException) -> None:
        record = error_record(doc_id, path, err)
        # documents read twice (pipeline) are reported once
        if record in self.failed:
            return
        self.failed.append(record)
        stream = self.stream or sys.stderr
        stream.write(json.dumps(record) + "\n")
        stream.flush()

    def exit_code(self) -> int:
        if not self.failed:
            return EXIT_OK
        return EXIT_PARTIAL if self.succeeded else EXIT_FATAL


class Tools:
    """Tagger and recognizer built once per command from the features config."""

    def __init__(self, config: AppConfig):
        self.tagger: PosTagger = get_pos_tagger(config.features.lexicon_dir or None)
        self.recognizer: EntityRecognizer = get_entity_recognizer(config.features.gazetteer_dir or None)


# ---------- file helpers ----------
@contextmanager
def open_output(path: str) -> Iterator[IO[str]]:
    """Text stream for `path`; "-" is stdout."""
    if path == "-":
        yield sys.stdout
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        yield fh


def expand_inputs(inputs: Sequence[str], extensions: Tuple[str, ...] = (".jsonl",)) -> List[str]:
    """Files named directly plus the matching files (sorted) of any named directory."""
    paths: List[str] = []
    for item in inputs:
        if os.path.isdir(item):
            paths.extend(
                os.path.join(item, name)
                for name in sorted(os.listdir(item))
                if os.path.splitext(name)[1].lower() in extensions
            )
        else:
            paths.append(item)
    return paths


def progress(items: Iterable[Any], desc: str, total: Optional[int] = None) -> Iterable[Any]:
    return tqdm(items, desc=desc, total=total, unit="doc", disable=None, file=sys.stderr)


def iter_line_documents(
    paths: Sequence[str], reporter: ErrorReporter, layout_config: Optional[LayoutConfig] = None
) -> Iterator[List[Line]]:
    """Documents of lines from lines-JSONL (or char-JSONL / PDF) files; unreadable files are reported."""
    for path in paths:
        try:
            lines = corpus.load_document_lines(path, layout_config)
        except (TableScoutError, ValueError, OSError) as err:
            reporter.report(os.path.splitext(os.path.basename(path))[0], path, err)
            continue
        for _, doc_lines in layout.group_documents(lines):
            yield doc_lines


def read_predictions(path: str) -> Iterator[Any]:
    """Labeled-lines records, or feature records carrying a label (predictions made from features)."""
    with open(path, encoding="utf-8") as fh:
        for line_number, payload in iter_jsonl(fh):
            if "words" in payload:
                yield labeler.labeled_from_record(payload, line_number)
            else:
                yield validate_record(FeatureRecord, payload, line_number)


def read_gold(path: str) -> List[LabeledLine]:
    with open(path, encoding="utf-8") as fh:
        return list(labeler.read_labeled_lines(fh))


# ---------- steps shared by the commands and the pipeline ----------
def run_extract(paths: Sequence[str], out: str, config: AppConfig, jobs: int, reporter: ErrorReporter) -> int:
    def work(path: str) -> Tuple[str, Any]:
        try:
            doc = load_document(path)
            return path, layout.assemble_lines(doc, config.layout)
        except (TableScoutError, ValueError, OSError) as err:
            return path, err

    written = 0
    with open_output(out) as fh:
        for path, result in progress(ordered_map(work, paths, jobs), "extract", len(paths)):
            if isinstance(result, BaseException):
                reporter.report(os.path.splitext(os.path.basename(path))[0], path, result)
                continue
            reporter.succeeded += 1
            written += layout.write_lines_jsonl((ln for page in result for ln in page), fh)
    logger.info("Extracted %d lines from %d documents", written, reporter.succeeded)
    return written


def run_weaklabel(
    docs: Iterable[List[Line]], out: str, config: AppConfig, jobs: int, reporter: ErrorReporter
) -> labeler.LabelingStats:
    stats = labeler.LabelingStats()

    def on_error(doc_id: Optional[str], err: BaseException) -> None:
        reporter.report(doc_id, None, err)

    with open_output(out) as fh:
        records = labeler.weak_label_corpus(progress(docs, "weaklabel"), config.weak_label, jobs, on_error, stats)
        labeler.write_labeled_lines(records, fh)
    reporter.succeeded += stats.documents
    if stats.captions_found == 0:
        logger.warning("No table captions found; the weak label file is empty")
    return stats


def _document_vectors(
    doc_lines: List[Line], tools: Tools, annotations: Optional[extractor.Annotations]
) -> List[Tuple[Line, FeatureVector]]:
    out: List[Tuple[Line, FeatureVector]] = []
    for page_lines in layout.group_pages(doc_lines):
        vectors = extractor.featurize_page(page_lines, annotations, tools.tagger, tools.recognizer)
        out.extend(zip(page_lines, vectors))
    return out


def iter_vectors(
    docs: Iterable[List[Line]],
    tools: Tools,
    annotations: Optional[extractor.Annotations],
    jobs: int,
    reporter: ErrorReporter,
) -> Iterator[Tuple[Line, FeatureVector]]:
    """(line, vector) for every line, document by document in input order."""

    def work(doc_lines: List[Line]) -> Tuple[List[Line], Any]:
        try:
            return doc_lines, _document_vectors(doc_lines, tools, annotations)
        except (TableScoutError, ValueError) as err:
            return doc_lines, err

    for doc_lines, result in ordered_map(work, docs, jobs):
        if isinstance(result, BaseException):
            reporter.report(doc_lines[0].doc_id, None, result)
            continue
        reporter.succeeded += 1
        yield from result


def run_featurize(
    docs: Iterable[List[Line]],
    out: str,
    mask: str,
    tools: Tools,
    jobs: int,
    reporter: ErrorReporter,
    labeled: Optional[List[LabeledLine]] = None,
    annotations: Optional[extractor.Annotations] = None,
) -> int:
    """Feature records for every line, or, given `labeled`, one record per labeled line in its order."""
    if labeled is None:
        with open_output(out) as fh:
            return extractor.write_feature_records(
                (extractor.to_feature_record(ln, vec, mask) for ln, vec in iter_vectors(docs, tools, annotations, jobs, reporter)),
                fh,
            )

    wanted_docs = {rec.line.doc_id for rec in labeled}
    wanted_keys = {rec.key for rec in labeled}
    docs = (doc for doc in docs if doc and doc[0].doc_id in wanted_docs)
    vectors: Dict[Key, FeatureVector] = {
        ln.key: vec for ln, vec in iter_vectors(docs, tools, annotations, jobs, reporter) if ln.key in wanted_keys
    }
    failed = reporter.failed_ids
    missing = [rec.key for rec in labeled if rec.key not in vectors and rec.line.doc_id not in failed]
    if missing:
        raise AlignmentError(f"{len(missing)} labeled lines are absent from the line input, first {missing[0]}")
    with open_output(out) as fh:
        return extractor.write_feature_records(
            (
                extractor.to_feature_record(rec.line, vectors[rec.key], mask, rec.label, rec.source)
                for rec in labeled
                if rec.key in vectors
            ),
            fh,
        )


def run_train(features_path: str, out: str, config: AppConfig, jobs: int) -> EnsembleModel:
    with open(features_path, encoding="utf-8") as fh:
        records = list(extractor.read_feature_records(fh))
    data = [(rec, rec.label) for rec in records if rec.label is not None]
    if len(data) < len(records):
        logger.warning("Ignoring %d feature records without a label", len(records) - len(data))
    model = classifiers.train_ensemble(
        data,
        FeatureConfig(mask=config.features.mask, step=config.features.step),
        config.logistic_regression,
        config.svm,
        config.naive_bayes,
        jobs,
    )
    classifiers.save_model(model, out)
    logger.info("Model written to %s", out)
    return model


def run_predict_lines(
    model: EnsembleModel,
    docs: Iterable[List[Line]],
    out: str,
    voter: str,
    tools: Tools,
    jobs: int,
    reporter: ErrorReporter,
    annotations: Optional[extractor.Annotations] = None,
) -> int:
    records = (
        LabeledLine(line=ln, label=classifiers.predict(model, vec, voter), source="predicted")
        for ln, vec in iter_vectors(progress(docs, "predict"), tools, annotations, jobs, reporter)
    )
    with open_output(out) as fh:
        return labeler.write_labeled_lines(records, fh)


def run_predict_features(model: EnsembleModel, features_path: str, out: str, voter: str) -> int:
    """Scores every record before `out` is opened; a record the model cannot score leaves no output file."""
    with open(features_path, encoding="utf-8") as fh:
        records = [
            rec.model_copy(update={"label": classifiers.predict(model, rec, voter), "source": "predicted"})
            for rec in extractor.read_feature_records(fh)
        ]
    with open_output(out) as out_fh:
        return extractor.write_feature_records(records, out_fh)


def run_baseline(docs: Iterable[List[Line]], out: str, config: AppConfig, min_run: int, reporter: ErrorReporter) -> int:
    def lines() -> Iterator[Line]:
        for doc_lines in progress(docs, "baseline"):
            reporter.succeeded += 1
            yield from doc_lines

    with open_output(out) as fh:
        return labeler.write_labeled_lines(
            baseline.heuristic_predict_corpus(lines(), min_run, config.weak_label.require_numeral), fh
        )


def run_evaluate(pred: Iterable[Any], gold: Iterable[LabeledLine], report_out: Optional[str], dataset_id: str, model_id: str) -> MetricsReport:
    report = evaluator.evaluate(pred, gold, dataset_id, model_id)
    if report_out:
        with open_output(report_out) as fh:
            evaluator.write_report(report, fh)
    return report


def _is_lines_file(path: str) -> bool:
    """True when the first record of a JSONL file is a line (has words) rather than a feature record."""
    with open(path, encoding="utf-8") as fh:
        for _, payload in iter_jsonl(fh):
            return "words" in payload
    return True


# ---------- commands ----------
def cmd_extract(args: argparse.Namespace, config: AppConfig, reporter: ErrorReporter) -> int:
    paths = expand_inputs(args.inputs, (".pdf", ".jsonl"))
    if not paths:
        raise UsageError("no input documents")
    run_extract(paths, args.out, config, args.jobs, reporter)
    return reporter.exit_code()


def cmd_weaklabel(args: argparse.Namespace, config: AppConfig, reporter: ErrorReporter) -> int:
    docs = iter_line_documents(expand_inputs(args.lines), reporter, config.layout)
    stats = run_weaklabel(docs, args.out, config, args.jobs, reporter)
    print(
        f"documents: {stats.documents}, captions found: {stats.captions_found}, used: {stats.captions_used}, "
        f"skipped: {stats.captions_skipped}, lines emitted: {stats.lines_emitted} "
        f"(+1: {stats.positives}, -1: {stats.negatives})",
        file=sys.stderr,
    )
    return reporter.exit_code()


def _read_annotations(path: Optional[str]) -> Optional[extractor.Annotations]:
    if not path:
        return None
    with open(path, encoding="utf-8") as fh:
        return extractor.read_annotations(fh)


def cmd_featurize(args: argparse.Namespace, config: AppConfig, reporter: ErrorReporter) -> int:
    labeled = read_gold(args.labels) if args.labels else None
    docs = iter_line_documents(expand_inputs(args.lines), reporter, config.layout)
    run_featurize(
        progress(docs, "featurize"),
        args.out,
        config.features.mask,
        Tools(config),
        args.jobs,
        reporter,
        labeled=labeled,
        annotations=_read_annotations(args.annotations),
    )
    return reporter.exit_code()


def cmd_train(args: argparse.Namespace, config: AppConfig, reporter: ErrorReporter) -> int:
    run_train(args.features_file, args.out, config, args.jobs)
    return EXIT_OK


def cmd_predict(args: argparse.Namespace, config: AppConfig, reporter: ErrorReporter) -> int:
    model = classifiers.load_model(args.model)
    paths = expand_inputs(args.inputs)
    if len(paths) == 1 and not _is_lines_file(paths[0]):
        run_predict_features(model, paths[0], args.out, args.voter)
        return EXIT_OK
    docs = iter_line_documents(paths, reporter, config.layout)
    run_predict_lines(model, docs, args.out, args.voter, Tools(config), args.jobs, reporter, _read_annotations(args.annotations))
    return reporter.exit_code()


def cmd_evaluate(args: argparse.Namespace, config: AppConfig, reporter: ErrorReporter) -> int:
    report = run_evaluate(read_predictions(args.pred), read_gold(args.gold), args.report, args.dataset, args.name)
    print(evaluator.format_report_table([report]))
    return EXIT_OK


def cmd_compare(args: argparse.Namespace, config: AppConfig, reporter: ErrorReporter) -> int:
    reports = []
    for path in args.reports:
        with open(path, encoding="utf-8") as fh:
            reports.append(evaluator.read_report(fh))
    print(evaluator.format_report_table(reports))
    return EXIT_OK


def cmd_baseline(args: argparse.Namespace, config: AppConfig, reporter: ErrorReporter) -> int:
    docs = iter_line_documents(expand_inputs(args.lines), reporter, config.layout)
    run_baseline(docs, args.out, config, args.min_run, reporter)
    return reporter.exit_code()


def cmd_synth(args: argparse.Namespace, config: AppConfig, reporter: ErrorReporter) -> int:
    opts = synth.SynthOptions(
        docs=args.docs,
        seed=args.seed if args.seed is not None else config.corpus.seed,
        table_gap=args.table_gap,
        prose_gap=args.prose_gap,
        pages=args.pages,
        split_ratio=config.corpus.split_ratio,
    )
    summary = synth.generate_corpus(args.out, opts)
    print(", ".join(f"{key}: {value}" for key, value in summary.items()))
    return EXIT_OK


def cmd_config(args: argparse.Namespace, config: AppConfig, reporter: ErrorReporter) -> int:
    print("\n".join(AppConfig.describe()))
    print()
    print("\n".join(name for name, _, _ in AppConfig.envvars()))
    return EXIT_OK


def _pipeline_inputs(
    args: argparse.Namespace, config: AppConfig, reporter: ErrorReporter
) -> Tuple[Any, Any, List[LabeledLine], str]:
    """(train docs factory, test docs factory, gold lines, dataset name) for either pipeline form."""
    if args.corpus:
        manifest_path = os.path.join(args.corpus, corpus.MANIFEST_NAME)
        if not os.path.exists(manifest_path):
            corpus.save_manifest(
                corpus.build_manifest(args.corpus, config.corpus.split_ratio, config.corpus.seed), args.corpus
            )
        manifest = corpus.load_manifest(args.corpus)

        def on_error(entry, err):
            reporter.report(entry.doc_id, entry.path, err)

        def docs(role: str) -> Iterator[List[Line]]:
            for _, lines in corpus.iter_documents(manifest, role, on_error, config.layout):
                yield lines

        test_ids = [d.doc_id for d in manifest.role("test")]
        gold = list(corpus.read_gold_labels(args.corpus, test_ids))
        return (lambda: docs("train")), (lambda: docs("test")), gold, manifest.name
    if not (args.train and args.test and args.gold):
        raise UsageError("pipeline needs --corpus, or all of --train, --test and --gold")
    train_paths, test_paths = expand_inputs(args.train), expand_inputs(args.test)
    gold = [rec for path in expand_inputs(args.gold) for rec in read_gold(path)]
    return (
        lambda: iter_line_documents(train_paths, reporter, config.layout),
        lambda: iter_line_documents(test_paths, reporter, config.layout),
        gold,
        os.path.basename(os.path.normpath(args.test[0])),
    )


def cmd_pipeline(args: argparse.Namespace, config: AppConfig, reporter: ErrorReporter) -> int:
    """weaklabel -> featurize -> train -> predict -> evaluate, plus the baseline, into a work directory."""
    train_docs, test_docs, gold, dataset = _pipeline_inputs(args, config, reporter)
    work = args.work
    os.makedirs(work, exist_ok=True)
    paths = {name: os.path.join(work, name) for name in (
        "weak.jsonl", "features.jsonl", "model.json", "predictions.jsonl", "report.json",
        "baseline.jsonl", "baseline_report.json",
    )}
    tools = Tools(config)

    stats = run_weaklabel(train_docs(), paths["weak.jsonl"], config, args.jobs, reporter)
    logger.info("Weak labels: %d lines from %d captions", stats.lines_emitted, stats.captions_used)
    labeled = read_gold(paths["weak.jsonl"])
    run_featurize(train_docs(), paths["features.jsonl"], config.features.mask, tools, args.jobs, reporter, labeled=labeled)
    model = run_train(paths["features.jsonl"], paths["model.json"], config, args.jobs)
    run_predict_lines(model, test_docs(), paths["predictions.jsonl"], args.voter, tools, args.jobs, reporter)
    run_baseline(test_docs(), paths["baseline.jsonl"], config, baseline.MIN_RUN, reporter)

    reports = [
        run_evaluate(read_predictions(paths["predictions.jsonl"]), gold, paths["report.json"], dataset,
                     f"tablescout ({args.voter}, {config.features.mask})"),
        run_evaluate(read_predictions(paths["baseline.jsonl"]), gold, paths["baseline_report.json"], dataset,
                     "heuristics"),
    ]
    print(evaluator.format_report_table(reports))
    return reporter.exit_code()


# ---------- argument parsing ----------
def _common_options() -> argparse.ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="Configuration file (JSON, TOML or YAML)")
    common.add_argument("--log-level", default=argparse.SUPPRESS, help="Logging level (default from config: INFO)")
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="Documents processed in parallel")
    return common


def _feature_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--features", choices=sorted(FEATURE_MASKS), help=f"Feature families (default {DEFAULT_MASK})")
    parser.add_argument("--annotations", help="Pre-tagged POS/NE annotations JSONL")


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = ArgumentParser(prog="tablescout", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common], help="PDF or char-JSONL documents to lines JSONL")
    p.add_argument("inputs", nargs="+", help="PDF / char-JSONL files or directories")
    p.add_argument("--out", required=True, help="Lines JSONL output ('-' for stdout)")
    p.set_defaults(handler=cmd_extract)

    p = sub.add_parser("weaklabel", parents=[common], help="Weak table labels around captions")
    p.add_argument("lines", nargs="+", help="Lines JSONL files or directories")
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, help="Context lines above and below a caption (default 8)")
    p.add_argument("--min-group", type=int, help="Minimum context group size (default 2)")
    p.add_argument("--no-require-numeral", action="store_true", help="Accept captions without a numeral")
    p.set_defaults(handler=cmd_weaklabel)

    p = sub.add_parser("featurize", parents=[common], help="Feature vectors for lines")
    p.add_argument("lines", nargs="+", help="Lines JSONL files or directories (page context)")
    p.add_argument("--labels", help="Labeled lines; only these are featurized, carrying their labels")
    p.add_argument("--out", required=True)
    _feature_options(p)
    p.set_defaults(handler=cmd_featurize)

    p = sub.add_parser("train", parents=[common], help="Train the LR / SVM / NB ensemble")
    p.add_argument("features_file", help="Labeled feature records JSONL")
    p.add_argument("--out", required=True, help="Model JSON")
    p.add_argument("--features", choices=sorted(FEATURE_MASKS), help=f"Feature families (default {DEFAULT_MASK})")
    p.add_argument("--step", type=float, help="Naive Bayes bin width (default 0.2)")
    p.add_argument("--lr-l2", type=float, help="LR L2 penalty (default 1e-3)")
    p.add_argument("--lr-max-iters", type=int, help="LR iterations (default 500)")
    p.add_argument("--lr-tol", type=float, help="LR gradient tolerance (default 1e-6)")
    p.add_argument("--svm-c", type=float, help="SVM soft-margin C (default 1)")
    p.add_argument("--svm-epochs", type=int, help="SVM passes (default 20)")
    p.add_argument("--nb-alpha", type=float, help="NB Laplace smoothing (default 1)")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="Label lines with a trained model")
    p.add_argument("model")
    p.add_argument("inputs", nargs="+", help="Lines JSONL files / directories, or one feature records file")
    p.add_argument("--out", required=True)
    p.add_argument("--voter", choices=VOTERS, default="ensemble")
    p.add_argument("--annotations", help="Pre-tagged POS/NE annotations JSONL")
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("evaluate", parents=[common], help="Metrics of predictions against gold labels")
    p.add_argument("pred")
    p.add_argument("gold")
    p.add_argument("--report", help="Write the metrics report JSON here")
    p.add_argument("--name", default="tablescout", help="Approach name in the table")
    p.add_argument("--dataset", default="", help="Dataset name in the report")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("compare", parents=[common], help="One comparison table from several report files")
    p.add_argument("reports", nargs="+")
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("baseline", parents=[common], help="Sparse-line heuristic predictions")
    p.add_argument("lines", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--min-run", type=int, default=baseline.MIN_RUN, help="Shortest kept run away from captions")
    p.set_defaults(handler=cmd_baseline)

    p = sub.add_parser("pipeline", parents=[common], help="weaklabel, featurize, train, predict and evaluate")
    p.add_argument("--corpus", help="Corpus root (manifest roles and gold labels)")
    p.add_argument("--train", nargs="+", help="Training lines JSONL files or directories")
    p.add_argument("--test", nargs="+", help="Test lines JSONL files or directories")
    p.add_argument("--gold", nargs="+", help="Gold labeled lines for the test documents")
    p.add_argument("--work", required=True, help="Directory for intermediate files and reports")
    p.add_argument("--voter", choices=VOTERS, default="ensemble")
    p.add_argument("--features", choices=sorted(FEATURE_MASKS), help=f"Feature families (default {DEFAULT_MASK})")
    p.add_argument("--k", type=int, help="Context lines above and below a caption (default 8)")
    p.set_defaults(handler=cmd_pipeline)

    p = sub.add_parser("synth", parents=[common], help="Generate a synthetic corpus with gold labels")
    p.add_argument("out", help="Corpus root to create")
    p.add_argument("--docs", type=int, default=10)
    p.add_argument("--seed", type=int, help="Generator and split seed (default from config: 7)")
    p.add_argument("--table-gap", type=float, default=8.0)
    p.add_argument("--prose-gap", type=float, default=2.0)
    p.add_argument("--pages", type=int, default=3)
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("config", parents=[common], help="Configuration keys, defaults and environment variables")
    p.set_defaults(handler=cmd_config)
    return parser


def resolve_config(args: argparse.Namespace) -> AppConfig:
    """File / environment configuration with the command-line flags applied on top."""
    config = get_config(getattr(args, "config", None))
    config = with_overrides(
        config,
        weak_label=with_overrides(
            config.weak_label,
            k=getattr(args, "k", None),
            min_group_size=getattr(args, "min_group", None),
            require_numeral=False if getattr(args, "no_require_numeral", False) else None,
        ),
        features=with_overrides(config.features, mask=getattr(args, "features", None), step=getattr(args, "step", None)),
        logistic_regression=with_overrides(
            config.logistic_regression,
            l2=getattr(args, "lr_l2", None),
            max_iters=getattr(args, "lr_max_iters", None),
            tol=getattr(args, "lr_tol", None),
        ),
        svm=with_overrides(config.svm, c=getattr(args, "svm_c", None), epochs=getattr(args, "svm_epochs", None)),
        naive_bayes=with_overrides(config.naive_bayes, alpha=getattr(args, "nb_alpha", None)),
        jobs=getattr(args, "jobs", None),
        log_level=getattr(args, "log_level", None),
    )
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = resolve_config(args)
        configure_logging(config.log_level)
    except UsageError as err:
        sys.stderr.write(f"tablescout: error: {err}\n")
        return EXIT_FATAL
    except (ValueError, wizard_errors.JSONWizardError) as err:
        sys.stderr.write(f"tablescout: configuration error: {err}\n")
        return EXIT_FATAL
    args.jobs = config.jobs

    reporter = ErrorReporter()
    try:
        return args.handler(args, config, reporter)
    except UsageError as err:
        sys.stderr.write(f"tablescout: error: {err}\n")
        return EXIT_FATAL
    except (TableScoutError, ValueError, OSError) as err:
        logger.error("%s failed: %s", args.command, err)
        sys.stderr.write(json.dumps(error_record(None, None, err)) + "\n")
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
