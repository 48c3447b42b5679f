import itertools
import json
from fractions import Fraction

import numpy as np
import pytest

from app.domain.common import MODEL_FORMAT_VERSION, NEGATIVE, NUM_FEATURES, POSITIVE
from app.domain.exceptions import DegenerateData, FeatureMaskMismatch, ModelFormatError
from app.domain.model import FeatureConfig, FeatureRecord, FeatureVector, NbModel
from app.services.classifiers import (
    discretize_value,
    ensemble_predict,
    load_model,
    lr_gradient,
    lr_objective,
    lr_predict,
    lr_prob,
    lr_train,
    majority_vote,
    member_votes,
    model_from_json,
    model_to_json,
    nb_discretize,
    nb_predict,
    nb_train,
    num_bins,
    predict,
    save_model,
    svm_decision,
    svm_objective,
    svm_predict,
    svm_train,
    train_ensemble,
)
from app.utils.configuration import LogisticRegressionConfig, NaiveBayesConfig, SvmConfig


def _vector(rng, table: bool) -> FeatureVector:
    if table:
        nam = rng.uniform(0.6, 1.0)
        ptd = rng.dirichlet([1.0, 0.5, 0.5, 0.5, 8.0])
        number = rng.uniform(0.3, 0.7)
        nep = (0.0, 0.0, 0.0, number, rng.uniform(0.0, 1.0 - number))
    else:
        nam = rng.uniform(0.0, 0.35)
        ptd = rng.dirichlet([6.0, 4.0, 3.0, 2.0, 1.0])
        nep = (rng.uniform(0.0, 0.1), 0.0, 0.0, 0.0, 0.0)
    return FeatureVector(nam=nam, ptd=tuple(float(v) for v in ptd), nep=tuple(float(v) for v in nep))


def _dataset(seed: int, n: int = 200):
    rng = np.random.default_rng(seed)
    labels = [POSITIVE if i % 2 == 0 else NEGATIVE for i in range(n)]
    return [(_vector(rng, label == POSITIVE), label) for label in labels]


def _point(*leading: float):
    """An 11-value example whose first dims are `leading`, the rest zero."""
    return list(leading) + [0.0] * (NUM_FEATURES - len(leading))


def _accuracy(predictor, data) -> float:
    return sum(predictor(x) == y for x, y in data) / len(data)


class TestLogisticRegression:
    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(5)
        h = 1e-6
        for _ in range(20):
            X = rng.normal(size=(15, 4))
            y = rng.choice([POSITIVE, NEGATIVE], size=15).astype(float)
            theta, theta0, l2 = rng.normal(size=4), float(rng.normal()), 0.1
            g, g0 = lr_gradient(theta, theta0, X, y, l2)
            for j in range(4):
                e = np.zeros(4)
                e[j] = h
                numeric = (lr_objective(theta + e, theta0, X, y, l2) - lr_objective(theta - e, theta0, X, y, l2)) / (2 * h)
                assert abs(numeric - g[j]) <= 1e-6 * max(1.0, abs(g[j]))
            numeric0 = (lr_objective(theta, theta0 + h, X, y, l2) - lr_objective(theta, theta0 - h, X, y, l2)) / (2 * h)
            assert abs(numeric0 - g0) <= 1e-6 * max(1.0, abs(g0))

    def test_training_increases_the_objective(self):
        data = _dataset(1)
        model = lr_train(data)
        X = np.array([x.as_tuple() for x, _ in data])
        y = np.array([label for _, label in data], dtype=float)
        trained = lr_objective(np.array(model.theta), model.theta0, X, y, 1e-3)
        assert trained > lr_objective(np.zeros(NUM_FEATURES), 0.0, X, y, 1e-3)

    def test_objective_never_decreases(self):
        values = []
        lr_train(_dataset(7, n=120), on_iteration=lambda _, value: values.append(value))
        assert len(values) > 1
        assert all(later >= earlier for earlier, later in zip(values, values[1:]))

    def test_converges_to_a_stationary_point(self):
        xs = [-1.0, -1.0, -1.0, 0.0, 0.0, 1.0, 1.0, 1.0]
        labels = [NEGATIVE, NEGATIVE, POSITIVE, NEGATIVE, POSITIVE, POSITIVE, POSITIVE, NEGATIVE]
        l2 = 1e-3
        model = lr_train([(_point(x), y) for x, y in zip(xs, labels)], LogisticRegressionConfig(l2=l2), dims=(0,))
        X = np.array(xs).reshape(-1, 1)
        y01 = np.array([1.0 if y == POSITIVE else 0.0 for y in labels])
        residual = y01 - 1.0 / (1.0 + np.exp(-(X[:, 0] * model.theta[0] + model.theta0)))
        grad = X.T @ residual - l2 * np.array(model.theta)
        assert max(abs(float(grad[0])), abs(float(np.sum(residual)))) < 1e-5

    def test_symmetric_data_has_zero_bias(self):
        model = lr_train([(_point(1.0), POSITIVE), (_point(-1.0), NEGATIVE)], dims=(0,))
        assert model.theta[0] > 0.0
        assert abs(model.theta0) <= 1e-9

    def test_separates_held_out_lines(self):
        model = lr_train(_dataset(1))
        assert _accuracy(lambda x: lr_predict(model, x), _dataset(2)) >= 0.95

    def test_probability_at_zero_score_predicts_negative(self):
        model = lr_train([(_point(1.0), POSITIVE), (_point(0.0), NEGATIVE)], dims=(0,))
        zero = model.model_copy(update={"theta": [0.0], "theta0": 0.0})
        assert lr_prob(zero, _point(0.3)) == 0.5
        assert lr_predict(zero, _point(0.3)) == NEGATIVE

    def test_extreme_scores_do_not_overflow(self):
        model = lr_train([(_point(1.0), POSITIVE), (_point(0.0), NEGATIVE)], dims=(0,))
        big = model.model_copy(update={"theta": [1e4], "theta0": 0.0})
        assert lr_prob(big, _point(1.0)) == pytest.approx(1.0)
        assert lr_prob(big, _point(-1.0)) == pytest.approx(0.0)


class TestSvm:
    DATA = [(_point(2.0), POSITIVE), (_point(3.0), POSITIVE), (_point(0.0), NEGATIVE), (_point(-1.0), NEGATIVE)]

    def test_one_dimensional_boundary(self):
        model = svm_train(self.DATA, SvmConfig(c=1.0, epochs=1000), dims=(0,))
        boundary = -model.b / model.w[0]
        assert 0.5 < boundary < 1.5
        assert all(svm_predict(model, x) == y for x, y in self.DATA)

    def test_bias_is_not_shrunk(self):
        # lambda = 1/2: t=1 (eta 2) gives w=6, b=2; t=2 (eta 1) halves w only, then steps to w=2, b=1
        data = [(_point(3.0), POSITIVE), (_point(1.0), NEGATIVE)]
        model = svm_train(data, SvmConfig(c=1.0, epochs=1), dims=(0,))
        assert model.w == [2.0]
        assert model.b == 1.0

    def test_flipped_labels_mirror_the_model(self):
        model = svm_train(self.DATA, SvmConfig(epochs=50), dims=(0,))
        flipped = svm_train([(x, -y) for x, y in self.DATA], SvmConfig(epochs=50), dims=(0,))
        assert flipped.w == pytest.approx([-w for w in model.w])
        assert flipped.b == pytest.approx(-model.b)

    def test_zero_decision_is_negative(self):
        model = svm_train(self.DATA, dims=(0,))
        flat = model.model_copy(update={"w": [0.0], "b": 0.0})
        assert svm_decision(flat, _point(2.0)) == 0.0
        assert svm_predict(flat, _point(2.0)) == NEGATIVE

    def test_objective_below_the_zero_model(self):
        data = _dataset(3, n=60)
        model = svm_train(data)
        zero = model.model_copy(update={"w": [0.0] * NUM_FEATURES, "b": 0.0})
        assert svm_objective(model, data) < svm_objective(zero, data)

    def test_separates_held_out_lines(self):
        model = svm_train(_dataset(1))
        assert _accuracy(lambda x: svm_predict(model, x), _dataset(2)) >= 0.95


class TestNaiveBayes:
    @pytest.mark.parametrize(
        "value,step,expected",
        [(0.0, 0.2, 1), (0.19, 0.2, 1), (0.2, 0.2, 2), (0.6, 0.2, 4), (0.99, 0.2, 5), (1.0, 0.2, 5), (1.0, 0.3, 4)],
    )
    def test_discretize(self, value, step, expected):
        assert discretize_value(value, step) == expected

    def test_num_bins(self):
        assert num_bins(0.2) == 5
        assert num_bins(0.3) == 4
        assert num_bins(1.0) == 1

    def test_nb_discretize(self):
        assert nb_discretize(_point(0.1, 0.2, 1.0), 0.2, dims=(0, 1, 2)) == [1, 2, 5]
        assert nb_discretize(_point(0.5), 0.2) == [3] + [1] * (NUM_FEATURES - 1)

    @pytest.mark.parametrize("step", [0.0, -0.2, 1.5])
    def test_step_out_of_range(self, step):
        with pytest.raises(ValueError):
            nb_discretize(_point(0.5), step)
        with pytest.raises(ValueError):
            nb_train([(_point(0.9), POSITIVE), (_point(0.1), NEGATIVE)], dims=(0,), step=step)

    def test_matches_counting_over_every_small_dataset(self):
        # two dims with two bins each; every multiset of (cell, label) of size 2..6 holding both classes
        step = 0.5
        cells = list(itertools.product((0.25, 0.75), repeat=2))
        options = [(cell, label) for cell in cells for label in (POSITIVE, NEGATIVE)]
        checked = 0
        for n in range(2, 7):
            for sample in itertools.combinations_with_replacement(options, n):
                if len({label for _, label in sample}) < 2:
                    continue
                data = [(_point(*cell), label) for cell, label in sample]
                model = nb_train(data, NaiveBayesConfig(alpha=1.0), dims=(0, 1), step=step)
                for query in cells:
                    joint = {}
                    for cls in (POSITIVE, NEGATIVE):
                        members = [cell for cell, label in sample if label == cls]
                        p = Fraction(len(members), n)
                        for d in (0, 1):
                            hits = sum(cell[d] == query[d] for cell in members)
                            p *= Fraction(hits + 1, len(members) + 2)
                        joint[cls] = p
                    result = nb_predict(model, _point(*query))
                    exact = joint[POSITIVE] / (joint[POSITIVE] + joint[NEGATIVE])
                    assert abs(result.positive - float(exact)) <= 1e-12
                    assert result.label == (POSITIVE if joint[POSITIVE] > joint[NEGATIVE] else NEGATIVE)
                    checked += 1
        assert checked == 4 * (2994 - 2 * 205)

    def test_posterior_of_the_predicted_label(self):
        model = NbModel(
            dims=[0],
            step=1.0,
            num_bins=1,
            class_prior={POSITIVE: 0.75, NEGATIVE: 0.25},
            cond_tables=[{POSITIVE: [1.0], NEGATIVE: [1.0]}],
        )
        result = nb_predict(model, _point(0.4))
        assert result.label == POSITIVE
        assert result.posterior == pytest.approx(0.75)
        flipped = model.model_copy(update={"class_prior": {POSITIVE: 0.25, NEGATIVE: 0.75}})
        assert nb_predict(flipped, _point(0.4)).posterior == pytest.approx(0.75)

    def test_unseen_bin_gets_smoothed_mass(self):
        data = [(_point(0.9), POSITIVE), (_point(0.1), NEGATIVE)]
        model = nb_train(data, dims=(0,), step=0.2)
        assert model.cond_tables[0][POSITIVE] == pytest.approx([1 / 6, 1 / 6, 1 / 6, 1 / 6, 2 / 6])
        assert model.class_prior == {POSITIVE: 0.5, NEGATIVE: 0.5}

    def test_exact_tie_is_negative(self):
        data = [(_point(0.9), POSITIVE), (_point(0.9), NEGATIVE)]
        model = nb_train(data, dims=(0,), step=0.2)
        result = nb_predict(model, _point(0.9))
        assert result.label == NEGATIVE
        assert result.positive == pytest.approx(0.5)


class TestEnsemble:
    def test_majority_of_three(self):
        rng = np.random.default_rng(13)
        for votes in rng.choice([POSITIVE, NEGATIVE], size=(10_000, 3)):
            votes = [int(v) for v in votes]
            expected = POSITIVE if votes.count(POSITIVE) >= 2 else NEGATIVE
            assert majority_vote(votes) == expected

    def test_ensemble_is_majority_of_members(self):
        model = train_ensemble(_dataset(1))
        for x, _ in _dataset(4, n=50):
            assert ensemble_predict(model, x) == majority_vote(member_votes(model, x))

    def test_held_out_accuracy(self):
        model = train_ensemble(_dataset(1))
        assert _accuracy(lambda x: ensemble_predict(model, x), _dataset(2)) >= 0.95

    def test_training_is_deterministic(self):
        data = _dataset(6, n=80)
        assert train_ensemble(data, jobs=1) == train_ensemble(data, jobs=1)
        assert train_ensemble(data, jobs=1) == train_ensemble(data, jobs=3)

    def test_metadata(self):
        model = train_ensemble(_dataset(1, n=40), FeatureConfig(mask="nam+ptd", step=0.25), svm_hyper=SvmConfig(c=2.0))
        assert model.version == MODEL_FORMAT_VERSION
        assert model.lr.dims == model.svm.dims == model.nb.dims == [0, 1, 2, 3, 4, 5]
        assert model.nb.step == 0.25
        assert model.training.n_examples == 40
        assert model.training.n_positive == 20
        assert model.training.hyperparameters["svm"]["c"] == 2.0

    def test_voters(self):
        model = train_ensemble(_dataset(1, n=60))
        x = _dataset(2, n=2)[0][0]
        assert predict(model, x, "lr") == lr_predict(model.lr, x)
        assert predict(model, x, "svm") == svm_predict(model.svm, x)
        assert predict(model, x, "nb") == nb_predict(model.nb, x).label
        assert predict(model, x) == ensemble_predict(model, x)
        with pytest.raises(ValueError):
            predict(model, x, "forest")


class TestTrainingErrors:
    def test_single_class(self):
        data = [(x, POSITIVE) for x, _ in _dataset(1, n=10)]
        with pytest.raises(DegenerateData):
            train_ensemble(data)

    def test_empty(self):
        with pytest.raises(DegenerateData):
            lr_train([])

    def test_record_without_needed_family(self):
        model = train_ensemble(_dataset(1, n=40))
        record = FeatureRecord(doc_id="d", page=0, line_idx=0, features="nam", nam=0.5)
        with pytest.raises(FeatureMaskMismatch):
            ensemble_predict(model, record)

    def test_record_with_enough_families(self):
        model = train_ensemble(_dataset(1, n=40), FeatureConfig(mask="nam"))
        record = FeatureRecord(doc_id="d", page=0, line_idx=0, features="nam", nam=0.9)
        assert ensemble_predict(model, record) == POSITIVE


class TestModelFile:
    def test_save_and_load(self, tmp_path):
        model = train_ensemble(_dataset(1, n=40))
        path = tmp_path / "model.json"
        save_model(model, str(path))
        assert load_model(str(path)) == model
        assert [p.name for p in tmp_path.iterdir()] == ["model.json"]

    def test_serialization_is_stable(self):
        model = train_ensemble(_dataset(1, n=40))
        text = model_to_json(model)
        assert model_to_json(model_from_json(text)) == text

    def test_unknown_version(self):
        payload = json.loads(model_to_json(train_ensemble(_dataset(1, n=20))))
        payload["version"] = MODEL_FORMAT_VERSION + 1
        with pytest.raises(ModelFormatError):
            model_from_json(json.dumps(payload))

    def test_not_json(self):
        with pytest.raises(ModelFormatError):
            model_from_json("{model")

    def test_inconsistent_members(self):
        payload = json.loads(model_to_json(train_ensemble(_dataset(1, n=20))))
        payload["lr"]["dims"] = [0]
        payload["lr"]["theta"] = [1.0]
        with pytest.raises(ModelFormatError):
            model_from_json(json.dumps(payload))

    def test_nan_weights_rejected(self):
        payload = json.loads(model_to_json(train_ensemble(_dataset(1, n=20))))
        text = json.dumps(payload).replace(f'"theta0": {json.dumps(payload["lr"]["theta0"])}', '"theta0": NaN')
        assert "NaN" in text
        with pytest.raises(ModelFormatError):
            model_from_json(text)
