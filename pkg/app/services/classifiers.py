"""The three line classifiers (logistic regression, linear SVM, discretized Naive Bayes) and their majority vote.

Every trainer accepts `(x, label)` pairs where `x` is a FeatureVector, a FeatureRecord or a plain 11-value
sequence and `label` is +1 (table) or -1 (non-table). Only the feature dimensions named by `dims` are used.
"""

import dataclasses
import json
import logging
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from app.domain.common import BIN_EPSILON, FEATURE_NAMES, MODEL_FORMAT_VERSION, NEGATIVE, NUM_FEATURES, POSITIVE, VOTERS
from app.domain.exceptions import DegenerateData, FeatureMaskMismatch, ModelFormatError
from app.domain.model import (
    EnsembleModel,
    FeatureConfig,
    FeatureRecord,
    FeatureVector,
    LrModel,
    NbModel,
    SvmModel,
    TrainingMetadata,
)
from app.utils.configuration import LogisticRegressionConfig, NaiveBayesConfig, SvmConfig

logger = logging.getLogger(__name__)

Example = Union[FeatureVector, FeatureRecord, Sequence[float]]
Dataset = Sequence[Tuple[Example, int]]

ALL_DIMS: Tuple[int, ...] = tuple(range(NUM_FEATURES))
# Armijo sufficient-increase constant and step bounds of the LR line search
_ARMIJO_C = 1e-4
_MIN_STEP = 1e-12
_MAX_STEP = 1e6
# log-joint differences below this are rounding, not evidence
NB_TIE_TOLERANCE = 1e-12


# ---------- feature plumbing ----------
def _full_values(x: Example) -> Tuple[float, ...]:
    if isinstance(x, FeatureVector):
        return x.as_tuple()
    if isinstance(x, FeatureRecord):
        return x.values()
    values = tuple(float(v) for v in x)
    if len(values) != NUM_FEATURES:
        raise ValueError(f"expected {NUM_FEATURES} feature values, got {len(values)}")
    return values


def select(x: Example, dims: Sequence[int]) -> np.ndarray:
    """Values of the active dims; a FeatureRecord lacking a needed family raises FeatureMaskMismatch."""
    if isinstance(x, FeatureRecord):
        missing = sorted(set(dims) - set(x.available_dims()))
        if missing:
            names = ", ".join(FEATURE_NAMES[d] for d in missing)
            raise FeatureMaskMismatch(f"record {x.key} has features {x.features!r} but the model needs {names}")
    values = _full_values(x)
    return np.array([values[d] for d in dims], dtype=float)


def as_arrays(data: Dataset, dims: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """Stack a dataset into X (n x len(dims)) and y in {+1, -1}, rejecting empty or single-class data."""
    if not data:
        raise DegenerateData("no training examples")
    X = np.vstack([select(x, dims) for x, _ in data]) if dims else np.zeros((len(data), 0))
    y = np.array([int(label) for _, label in data], dtype=float)
    if not np.all((y == POSITIVE) | (y == NEGATIVE)):
        raise ValueError("labels must be +1 or -1")
    if np.all(y == POSITIVE) or np.all(y == NEGATIVE):
        raise DegenerateData(f"training data holds a single class ({int(y[0]):+d})")
    return X, y


def _sigmoid(s: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -s))


# ---------- logistic regression ----------
def lr_objective(theta: np.ndarray, theta0: float, X: np.ndarray, y: np.ndarray, l2: float) -> float:
    """Log-likelihood of labels y in {+1, -1} summed over all examples, minus l2/2 * ||theta||^2 (bias unpenalized)."""
    s = X @ theta + theta0
    y01 = (y == POSITIVE).astype(float)
    return float(np.sum(y01 * s - np.logaddexp(0.0, s)) - 0.5 * l2 * np.dot(theta, theta))


def lr_gradient(theta: np.ndarray, theta0: float, X: np.ndarray, y: np.ndarray, l2: float) -> Tuple[np.ndarray, float]:
    """Analytic gradient of `lr_objective` with respect to (theta, theta0)."""
    s = X @ theta + theta0
    residual = (y == POSITIVE).astype(float) - _sigmoid(s)
    return X.T @ residual - l2 * theta, float(np.sum(residual))


def lr_train(
    data: Dataset,
    hyper: Optional[LogisticRegressionConfig] = None,
    dims: Sequence[int] = ALL_DIMS,
    on_iteration: Optional[Callable[[int, float], None]] = None,
) -> LrModel:
    """Full-batch gradient ascent with backtracking from zero initialization.

    Stops after `max_iters` iterations or once the gradient max-norm drops below `tol`. `on_iteration` receives
    (iteration, objective) for the starting point (iteration 0) and after every accepted step.
    """
    hyper = hyper or LogisticRegressionConfig()
    X, y = as_arrays(data, dims)
    theta, theta0 = np.zeros(X.shape[1]), 0.0
    value = lr_objective(theta, theta0, X, y, hyper.l2)
    if on_iteration is not None:
        on_iteration(0, value)
    step = 1.0
    iteration = 0
    for iteration in range(1, hyper.max_iters + 1):
        g, g0 = lr_gradient(theta, theta0, X, y, hyper.l2)
        gnorm = max(float(np.max(np.abs(g))) if g.size else 0.0, abs(g0))
        if gnorm < hyper.tol:
            break
        sq = float(np.dot(g, g)) + g0 * g0
        step = min(step * 2.0, _MAX_STEP)
        while step >= _MIN_STEP:
            cand, cand0 = theta + step * g, theta0 + step * g0
            cand_value = lr_objective(cand, cand0, X, y, hyper.l2)
            if cand_value >= value + _ARMIJO_C * step * sq:
                break
            step *= 0.5
        else:
            logger.debug("LR line search stalled at iteration %d", iteration)
            break
        theta, theta0, value = cand, cand0, cand_value
        if on_iteration is not None:
            on_iteration(iteration, value)
    logger.debug("LR trained in %d iterations, objective %.6f", iteration, value)
    return LrModel(dims=list(dims), theta=theta.tolist(), theta0=theta0)


def lr_score(model: LrModel, x: Example) -> float:
    """theta . x + theta0 over the model's dims."""
    return float(np.dot(np.array(model.theta), select(x, model.dims)) + model.theta0)


def lr_prob(model: LrModel, x: Example) -> float:
    """Pr(y = +1 | x) = 1 / (1 + exp(-score))."""
    score = lr_score(model, x)
    if score >= 0:
        return 1.0 / (1.0 + math.exp(-score))
    z = math.exp(score)
    return z / (1.0 + z)


def lr_predict(model: LrModel, x: Example) -> int:
    return POSITIVE if lr_prob(model, x) > 0.5 else NEGATIVE


# ---------- linear SVM ----------
def svm_objective(model: SvmModel, data: Dataset, c: float = 1.0) -> float:
    """(1/2)||w||^2 + C * sum of hinge losses."""
    X, y = as_arrays(data, model.dims)
    w = np.array(model.w)
    hinge = np.maximum(0.0, 1.0 - y * (X @ w + model.b))
    return float(0.5 * np.dot(w, w) + c * np.sum(hinge))


def svm_train(data: Dataset, hyper: Optional[SvmConfig] = None, dims: Sequence[int] = ALL_DIMS) -> SvmModel:
    """Pegasos subgradient descent on (lambda/2)||w||^2 + (1/n) sum of hinge losses.

    lambda = 1 / (C n), step 1 / (lambda t), examples visited in input order for `epochs` passes, zero start.
    Only w is shrunk; b moves with the hinge subgradient alone. The returned model averages the iterates
    of the second half.
    """
    hyper = hyper or SvmConfig()
    X, y = as_arrays(data, dims)
    n = X.shape[0]
    lam = 1.0 / (hyper.c * n)
    total = hyper.epochs * n
    start_avg = total // 2
    w = np.zeros(X.shape[1])
    b = 0.0
    w_sum = np.zeros_like(w)
    b_sum = 0.0
    t = 0
    for _ in range(hyper.epochs):
        for i in range(n):
            t += 1
            eta = 1.0 / (lam * t)
            margin = y[i] * (np.dot(w, X[i]) + b)
            w *= 1.0 - eta * lam
            if margin < 1.0:
                w += (eta * y[i]) * X[i]
                b += eta * y[i]
            if t > start_avg:
                w_sum += w
                b_sum += b
    count = total - start_avg
    logger.debug("SVM trained: %d iterations, lambda %.3g", total, lam)
    return SvmModel(dims=list(dims), w=(w_sum / count).tolist(), b=float(b_sum / count))


def svm_decision(model: SvmModel, x: Example) -> float:
    return float(np.dot(np.array(model.w), select(x, model.dims)) + model.b)


def svm_predict(model: SvmModel, x: Example) -> int:
    """sign(w . x + b) with sign(0) = -1."""
    return POSITIVE if svm_decision(model, x) > 0.0 else NEGATIVE


# ---------- Naive Bayes ----------
class NbPrediction(NamedTuple):
    label: int
    positive: float
    negative: float

    @property
    def posterior(self) -> float:
        """Posterior of the predicted label."""
        return self.positive if self.label == POSITIVE else self.negative


def num_bins(step: float) -> int:
    return max(1, math.ceil(1.0 / step - BIN_EPSILON))


def discretize_value(v: float, step: float) -> int:
    """Bin floor(v / step) + 1, clamped into [1, num_bins(step)]."""
    return min(max(math.floor(v / step + BIN_EPSILON) + 1, 1), num_bins(step))


def nb_discretize(x: Example, step: float, dims: Sequence[int] = ALL_DIMS) -> List[int]:
    """Bins of the `dims` dimensions of x (all 11 by default)."""
    if not 0.0 < step <= 1.0:
        raise ValueError(f"step must lie in (0, 1], got {step}")
    return [discretize_value(float(v), step) for v in select(x, dims)]


def nb_train(
    data: Dataset,
    hyper: Optional[NaiveBayesConfig] = None,
    dims: Sequence[int] = ALL_DIMS,
    step: float = 0.2,
) -> NbModel:
    """Empirical class priors and Laplace-smoothed per-dimension bin tables."""
    hyper = hyper or NaiveBayesConfig()
    _, y = as_arrays(data, dims)
    bins_n = num_bins(step)
    B = np.array([nb_discretize(x, step, dims) for x, _ in data], dtype=int).reshape(len(data), len(dims))
    prior: Dict[int, float] = {}
    tables: List[Dict[int, List[float]]] = [{} for _ in dims]
    for cls in (POSITIVE, NEGATIVE):
        mask = y == cls
        n_cls = int(np.sum(mask))
        prior[cls] = n_cls / len(y)
        for j in range(len(dims)):
            counts = np.bincount(B[mask, j], minlength=bins_n + 1)[1:]
            tables[j][cls] = ((counts + hyper.alpha) / (n_cls + hyper.alpha * bins_n)).tolist()
    return NbModel(dims=list(dims), step=step, num_bins=bins_n, class_prior=prior, cond_tables=tables)


def nb_log_joint(model: NbModel, x: Example) -> Dict[int, float]:
    """log Pr(y) + sum_d log Pr(bin_d | y) for both classes."""
    bins = nb_discretize(x, model.step, model.dims)
    out = {}
    for cls in (POSITIVE, NEGATIVE):
        out[cls] = math.log(model.class_prior[cls]) + sum(
            math.log(table[cls][b - 1]) for table, b in zip(model.cond_tables, bins)
        )
    return out


def nb_predict(model: NbModel, x: Example) -> NbPrediction:
    """argmax of Pr(x|y)Pr(y), with normalized posteriors; a tie (log joints within NB_TIE_TOLERANCE) is -1."""
    joint = nb_log_joint(model, x)
    diff = joint[NEGATIVE] - joint[POSITIVE]
    if diff >= 0:
        z = math.exp(-diff)
        positive = z / (1.0 + z)
    else:
        positive = 1.0 / (1.0 + math.exp(diff))
    label = POSITIVE if joint[POSITIVE] - joint[NEGATIVE] > NB_TIE_TOLERANCE else NEGATIVE
    return NbPrediction(label=label, positive=positive, negative=1.0 - positive)


# ---------- ensemble ----------
def majority_vote(votes: Sequence[int]) -> int:
    """Label held by the majority of an odd number of +1/-1 votes."""
    return POSITIVE if sum(votes) > 0 else NEGATIVE


def member_votes(model: EnsembleModel, x: Example) -> Tuple[int, int, int]:
    return lr_predict(model.lr, x), svm_predict(model.svm, x), nb_predict(model.nb, x).label


def ensemble_predict(model: EnsembleModel, x: Example) -> int:
    return majority_vote(member_votes(model, x))


def predict(model: EnsembleModel, x: Example, voter: str = "ensemble") -> int:
    """Label from the ensemble or from a single member."""
    if voter == "ensemble":
        return ensemble_predict(model, x)
    if voter == "lr":
        return lr_predict(model.lr, x)
    if voter == "svm":
        return svm_predict(model.svm, x)
    if voter == "nb":
        return nb_predict(model.nb, x).label
    raise ValueError(f"unknown voter {voter!r}; expected one of {VOTERS}")


def _hyper_dict(cfg) -> Dict[str, float]:
    return {k: float(v) for k, v in dataclasses.asdict(cfg).items()}


def train_ensemble(
    data: Dataset,
    feature_config: Optional[FeatureConfig] = None,
    lr_hyper: Optional[LogisticRegressionConfig] = None,
    svm_hyper: Optional[SvmConfig] = None,
    nb_hyper: Optional[NaiveBayesConfig] = None,
    jobs: int = 1,
) -> EnsembleModel:
    """Train LR, SVM and NB on the dims of `feature_config` (concurrently when jobs > 1)."""
    feature_config = feature_config or FeatureConfig()
    lr_hyper = lr_hyper or LogisticRegressionConfig()
    svm_hyper = svm_hyper or SvmConfig()
    nb_hyper = nb_hyper or NaiveBayesConfig()
    dims = feature_config.dims
    _, y = as_arrays(data, dims)

    tasks = (
        lambda: lr_train(data, lr_hyper, dims),
        lambda: svm_train(data, svm_hyper, dims),
        lambda: nb_train(data, nb_hyper, dims, feature_config.step),
    )
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=min(jobs, 3)) as pool:
            lr, svm, nb = [f.result() for f in [pool.submit(task) for task in tasks]]
    else:
        lr, svm, nb = [task() for task in tasks]

    n_pos = int(np.sum(y == POSITIVE))
    logger.info("Trained ensemble on %d examples (%d positive) with features %s", len(y), n_pos, feature_config.mask)
    return EnsembleModel(
        version=MODEL_FORMAT_VERSION,
        feature_config=feature_config,
        lr=lr,
        svm=svm,
        nb=nb,
        training=TrainingMetadata(
            hyperparameters={
                "logisticRegression": _hyper_dict(lr_hyper),
                "svm": _hyper_dict(svm_hyper),
                "naiveBayes": _hyper_dict(nb_hyper),
            },
            n_examples=len(y),
            n_positive=n_pos,
            n_negative=len(y) - n_pos,
        ),
    )


# ---------- model file ----------
def model_to_json(model: EnsembleModel) -> str:
    return json.dumps(model.model_dump(mode="json"), indent=2, allow_nan=False) + "\n"


def save_model(model: EnsembleModel, path: str) -> None:
    """Write the model JSON atomically (temporary file in the target directory, then rename)."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".model-", suffix=".json", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(model_to_json(model))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def model_from_json(text: str) -> EnsembleModel:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as err:
        raise ModelFormatError(f"model file is not valid JSON: {err}") from err
    if not isinstance(payload, dict):
        raise ModelFormatError("model file must hold a JSON object")
    version = payload.get("version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {version!r}; expected {MODEL_FORMAT_VERSION}")
    try:
        return EnsembleModel.model_validate(payload)
    except ValueError as err:
        raise ModelFormatError(f"invalid model file: {err}") from err


def load_model(path: str) -> EnsembleModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_json(fh.read())
