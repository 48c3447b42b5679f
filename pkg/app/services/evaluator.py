"""Accuracy, precision, recall and F1 of line predictions against gold labels, and comparison reports."""

import json
import logging
from fractions import Fraction
from typing import IO, Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from app.domain.common import NEGATIVE, POSITIVE
from app.domain.exceptions import AlignmentError, EmptyCounts, SchemaError
from app.domain.model import ConfusionCounts, FeatureRecord, LabeledLine, MetricsReport

logger = logging.getLogger(__name__)

NA = "n/a"
REPORT_COLUMNS = ["Approach", "Accuracy", "Precision", "Recall", "F1-measure"]


def align_labels(
    pred_lines: Iterable[Union[LabeledLine, FeatureRecord]], gold_lines: Iterable[LabeledLine]
) -> Tuple[List[int], List[int]]:
    """Pair every gold line with its prediction by (doc_id, page, line_idx).

    Predictions are labeled lines, or feature records carrying a label.

    :raises AlignmentError: a gold key is missing from, or duplicated in, the predictions.
    """
    predicted: Dict[Tuple[str, int, int], int] = {}
    for rec in pred_lines:
        if rec.key in predicted:
            raise AlignmentError(f"line {rec.key} predicted more than once")
        predicted[rec.key] = rec.label
    pred: List[int] = []
    gold: List[int] = []
    for rec in gold_lines:
        if rec.key not in predicted:
            raise AlignmentError(f"gold line {rec.key} has no prediction")
        pred.append(predicted[rec.key])
        gold.append(rec.label)
    return pred, gold


def count_confusion(pred: Sequence[int], gold: Sequence[int]) -> ConfusionCounts:
    if len(pred) != len(gold):
        raise AlignmentError(f"{len(pred)} predictions for {len(gold)} gold labels")
    tp = fp = fn = tn = 0
    for p, g in zip(pred, gold):
        if p not in (POSITIVE, NEGATIVE) or g not in (POSITIVE, NEGATIVE):
            raise ValueError(f"labels must be +1 or -1, got ({p}, {g})")
        if p == POSITIVE:
            if g == POSITIVE:
                tp += 1
            else:
                fp += 1
        elif g == POSITIVE:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def compute_metrics(counts: ConfusionCounts, dataset_id: str = "", model_id: str = "") -> MetricsReport:
    """Accuracy, precision, recall and F1; undefined values are None, never 0.

    Ratios are formed exactly and rounded once to float.
    """
    total = counts.total
    if total == 0:
        raise EmptyCounts()
    tp, fp, fn = counts.tp, counts.fp, counts.fn
    precision = Fraction(tp, tp + fp) if tp + fp else None
    recall = Fraction(tp, tp + fn) if tp + fn else None
    f1 = None
    if precision is not None and recall is not None and precision + recall > 0:
        f1 = Fraction(2 * tp, 2 * tp + fp + fn)
    return MetricsReport(
        dataset_id=dataset_id,
        model_id=model_id,
        counts=counts,
        accuracy=float(Fraction(counts.tp + counts.tn, total)),
        precision=float(precision) if precision is not None else None,
        recall=float(recall) if recall is not None else None,
        f1=float(f1) if f1 is not None else None,
    )


def evaluate(
    pred_lines: Iterable[Union[LabeledLine, FeatureRecord]],
    gold_lines: Iterable[LabeledLine],
    dataset_id: str = "",
    model_id: str = "",
) -> MetricsReport:
    pred, gold = align_labels(pred_lines, gold_lines)
    report = compute_metrics(count_confusion(pred, gold), dataset_id, model_id)
    logger.info("Evaluated %s on %s: accuracy %.4f over %d lines", model_id or "model", dataset_id or "dataset",
                report.accuracy, report.counts.total)
    return report


# ---------- report output ----------
def _fmt(value: Optional[float]) -> str:
    return NA if value is None else f"{value:.4f}"


def reports_to_frame(reports: Sequence[MetricsReport]) -> pd.DataFrame:
    return pd.DataFrame(
        [[r.model_id or "-", _fmt(r.accuracy), _fmt(r.precision), _fmt(r.recall), _fmt(r.f1)] for r in reports],
        columns=REPORT_COLUMNS,
    )


def format_report_table(reports: Sequence[MetricsReport]) -> str:
    """Comparison table with one row per approach, four decimals, "n/a" for undefined metrics."""
    return reports_to_frame(reports).to_string(index=False)


def report_to_json(report: MetricsReport) -> Dict[str, Any]:
    def value(v: Optional[float]) -> Any:
        return NA if v is None else v

    return {
        "dataset": report.dataset_id,
        "model": report.model_id,
        "counts": report.counts.model_dump(),
        "accuracy": report.accuracy,
        "precision": value(report.precision),
        "recall": value(report.recall),
        "f1": value(report.f1),
    }


def report_from_json(payload: Dict[str, Any]) -> MetricsReport:
    def value(v: Any) -> Optional[float]:
        return None if v == NA else v

    try:
        return MetricsReport(
            dataset_id=payload.get("dataset", ""),
            model_id=payload.get("model", ""),
            counts=payload["counts"],
            accuracy=payload["accuracy"],
            precision=value(payload.get("precision", NA)),
            recall=value(payload.get("recall", NA)),
            f1=value(payload.get("f1", NA)),
        )
    except (KeyError, ValueError) as err:
        raise SchemaError(1, f"invalid report: {err}") from err


def write_report(report: MetricsReport, stream: IO[str]) -> None:
    json.dump(report_to_json(report), stream, indent=2)
    stream.write("\n")


def read_report(stream: IO[str]) -> MetricsReport:
    try:
        payload = json.load(stream)
    except json.JSONDecodeError as err:
        raise SchemaError(err.lineno, f"invalid JSON: {err.msg}") from err
    if not isinstance(payload, dict):
        raise SchemaError(1, "report must be a JSON object")
    return report_from_json(payload)
