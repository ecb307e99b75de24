import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helmsight.dataset import Dataset
from helmsight.domain import (
    BEHAVIOUR_TOKENS,
    DEFAULT_VOCABULARY,
    FeatureVocabulary,
    VehicleState,
    enumerate_state_space,
)
from helmsight.errors import EmptyDataset, EmptyNode, InvalidAlpha, InvalidK, VocabularyMismatch
from helmsight.surrogate import (
    decision_path,
    gini,
    hamming_distance,
    knn_predict,
    load_model,
    model_from_dict,
    model_to_dict,
    predict,
    save_model,
    train_categorical_nb,
    train_decision_tree,
    train_knn,
)


def make_dataset(rows, labels, sizes=None, class_names=("c0", "c1")):
    rows = np.asarray(rows)
    if sizes is None:
        sizes = [int(rows[:, j].max()) + 1 for j in range(rows.shape[1])]
    vocabulary = FeatureVocabulary(
        [f"f{j}" for j in range(rows.shape[1])],
        [[f"v{v}" for v in range(size)] for size in sizes],
    )
    return Dataset(
        features=rows,
        labels=np.asarray(labels),
        vocabulary=vocabulary,
        class_names=tuple(class_names),
    )


# --- gini --------------------------------------------------------------------


def test_gini_pure_node_is_zero():
    assert gini([6, 0, 0, 0, 0, 0]) == 0.0


def test_gini_two_equal_classes():
    assert gini([3, 3, 0, 0, 0, 0]) == pytest.approx(0.5)


def test_gini_hand_computed_mixture():
    # 1 - (0.25 + 0.0625 + 0.0625)
    assert gini([2, 1, 1, 0, 0, 0]) == pytest.approx(0.625)


def test_gini_rejects_empty_counts():
    with pytest.raises(EmptyNode):
        gini([0, 0, 0])


def test_gini_rejects_negative_counts():
    with pytest.raises(ValueError):
        gini([3, -1])


# --- decision tree -----------------------------------------------------------


def test_tree_separable_by_single_feature():
    rows = [[v, j % 3] for v in range(3) for j in range(4)]
    labels = [v for v in range(3) for _ in range(4)]
    data = make_dataset(rows, labels, class_names=("a", "b", "c"))
    tree = train_decision_tree(data, max_depth=None, max_leaf_nodes=None)
    assert tree.used_features() == {0}
    predictions = tree.predict_proba(data.features).argmax(axis=1)
    assert (predictions == data.labels).all()


def test_tree_respects_leaf_budget(clean_data):
    tree = train_decision_tree(clean_data, max_depth=8, max_leaf_nodes=15)
    assert tree.leaf_count() <= 15
    assert tree.depth() <= 8


def test_tree_on_noiseless_data_is_nearly_exact(clean_data, clean_tree):
    predictions = clean_tree.predict_proba(clean_data.features).argmax(axis=1)
    accuracy = (predictions == clean_data.labels).mean()
    assert accuracy >= 0.99


def test_tree_counts_are_consistent(clean_tree):
    for node in clean_tree.iter_nodes():
        if not node.is_leaf:
            assert (node.counts == node.left.counts + node.right.counts).all()


def test_tree_training_is_deterministic(clean_data):
    a = train_decision_tree(clean_data, 8, 15)
    b = train_decision_tree(clean_data, 8, 15)
    assert model_to_dict(a) == model_to_dict(b)


def test_unlimited_tree_reaches_perfect_training_accuracy(clean_data):
    tree = train_decision_tree(clean_data, max_depth=None, max_leaf_nodes=None)
    predictions = tree.predict_proba(clean_data.features).argmax(axis=1)
    assert (predictions == clean_data.labels).mean() == 1.0


def test_tree_rejects_empty_dataset():
    data = make_dataset(np.zeros((0, 2), dtype=int), [], sizes=[2, 2])
    with pytest.raises(EmptyDataset):
        train_decision_tree(data)


def test_decision_path_of_single_leaf_tree_is_empty():
    data = make_dataset([[0, 1], [1, 0]], [0, 0])
    tree = train_decision_tree(data)
    assert decision_path(tree, (0, 0)) == []


def test_decision_path_single_split_names_feature():
    rows = [[0, 0], [0, 1], [1, 0], [1, 1]]
    labels = [0, 0, 1, 1]
    tree = train_decision_tree(make_dataset(rows, labels))
    path = decision_path(tree, (0, 1))
    assert len(path) == 1
    assert path[0][0] == 0


def test_decision_path_separates_obstacle_rule(clean_tree):
    state = VehicleState(True, "waypoint", "transiting", True, True)
    features = {step[0] for step in decision_path(clean_tree, state)}
    names = {DEFAULT_VOCABULARY.feature_names[i] for i in features}
    assert {"obstacle_found", "progress_type"} <= names


# --- categorical naive bayes ---------------------------------------------------


def nb_example_dataset():
    # one binary feature; (a,c0),(a,c0),(b,c1),(a,c1)
    rows = [[0], [0], [1], [0]]
    labels = [0, 0, 1, 1]
    return make_dataset(rows, labels, sizes=[2])


def test_nb_smoothed_likelihoods_match_hand_computation():
    nb = train_categorical_nb(nb_example_dataset(), alpha=1.0)
    tables = nb.log_likelihood_tables()
    assert np.exp(tables[0][0, 0]) == pytest.approx(3 / 4)
    assert np.exp(tables[0][0, 1]) == pytest.approx(1 / 2)


def test_nb_posterior_matches_hand_computation():
    nb = train_categorical_nb(nb_example_dataset(), alpha=1.0)
    prediction = predict(nb, (0,))
    assert prediction.probabilities[0] == pytest.approx(0.6)
    assert prediction.predicted == 0


def test_nb_single_class_data_predicts_it_everywhere():
    rows = [[0, 1], [1, 0], [1, 1]]
    nb = train_categorical_nb(make_dataset(rows, [1, 1, 1]), alpha=1.0)
    for row in ([0, 0], [1, 1], [0, 1]):
        prediction = predict(nb, row)
        assert prediction.predicted == 1
        assert prediction.probabilities[1] == pytest.approx(1.0, abs=1e-9)


def test_nb_likelihood_rows_sum_to_one(ambiguous_data):
    nb = train_categorical_nb(ambiguous_data, alpha=1.0)
    for table in nb.log_likelihood_tables():
        sums = np.exp(table).sum(axis=0)
        assert np.allclose(sums, 1.0, atol=1e-9)


def test_nb_rejects_bad_alpha():
    with pytest.raises(InvalidAlpha):
        train_categorical_nb(nb_example_dataset(), alpha=0.0)


# --- knn -----------------------------------------------------------------------


def test_knn_exact_match_with_k1():
    rows = [[0, 1], [1, 0], [1, 1]]
    labels = [0, 1, 1]
    model = train_knn(make_dataset(rows, labels), k=1)
    prediction = knn_predict(model, (0, 1))
    assert prediction.predicted == 0
    assert prediction.probabilities[0] == 1.0


def test_hamming_distance_counts_differing_coordinates():
    a = VehicleState(True, "survey", "executing", True, False).codes()
    b = VehicleState(True, "survey", "transiting", True, False).codes()
    assert hamming_distance(a, b) == 1


def test_knn_vote_shares():
    rows = [[0, 0], [0, 1], [1, 1]]
    labels = [1, 1, 2]
    model = train_knn(make_dataset(rows, labels, class_names=("a", "b", "c")), k=3)
    prediction = knn_predict(model, (0, 0))
    assert prediction.probabilities[1] == pytest.approx(2 / 3)
    assert prediction.predicted == 1


def test_knn_distance_ties_break_by_row_index():
    rows = [[0, 0], [0, 0], [0, 0]]
    labels = [1, 0, 0]
    model = train_knn(make_dataset(rows, labels), k=1)
    assert knn_predict(model, (0, 0)).predicted == 1


def test_knn_rejects_bad_k():
    data = make_dataset([[0, 0], [1, 1]], [0, 1])
    with pytest.raises(InvalidK):
        train_knn(data, k=3)
    with pytest.raises(InvalidK):
        train_knn(data, k=0)


# --- shared prediction contract -------------------------------------------------


def test_constant_label_training_predicts_constant(clean_data):
    rows = clean_data.features[:200]
    data = Dataset(
        features=rows,
        labels=np.full(200, 2),
        vocabulary=DEFAULT_VOCABULARY,
        class_names=BEHAVIOUR_TOKENS,
    )
    tree = train_decision_tree(data)
    for state in enumerate_state_space()[:20]:
        assert predict(tree, state).predicted == 2


@given(st.integers(0, 2**31 - 1))
def test_predictions_satisfy_simplex_invariant(seed):
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, 3, size=(40, 3))
    labels = rng.integers(0, 4, size=40)
    data = make_dataset(rows, labels, sizes=[3, 3, 3], class_names=("a", "b", "c", "d"))
    queries = rng.integers(0, 3, size=(15, 3))
    for model in (
        train_decision_tree(data, 4, 8),
        train_categorical_nb(data, 0.5),
        train_knn(data, 3),
    ):
        probs = model.predict_proba(queries)
        assert (probs >= 0).all()
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-9)


def test_tree_probabilities_are_leaf_proportions():
    # a leaf holding counts [0, 9, 0, 0, 0, 1] must emit P(class 1) = 0.9
    rows = [[0, 0]] * 10 + [[1, 0]] * 4
    labels = [1] * 9 + [5] + [0] * 4
    data = make_dataset(rows, labels, sizes=[2, 2], class_names=tuple(f"c{i}" for i in range(6)))
    tree = train_decision_tree(data, max_depth=1, max_leaf_nodes=2)
    prediction = predict(tree, (0, 0))
    assert prediction.probabilities[1] == pytest.approx(0.9)
    assert prediction.predicted == 1


def test_argmax_tie_breaks_to_lowest_code():
    rows = [[0], [0]]
    labels = [0, 1]
    model = train_knn(make_dataset(rows, labels, sizes=[1]), k=2)
    prediction = knn_predict(model, (0,))
    assert prediction.probabilities[0] == prediction.probabilities[1] == 0.5
    assert prediction.predicted == 0


# --- persistence ------------------------------------------------------------------


@pytest.mark.parametrize("kind", ["tree", "nb", "knn"])
def test_serialised_models_predict_identically(tmp_path, clean_data, kind):
    trainer = {
        "tree": lambda d: train_decision_tree(d, 8, 15),
        "nb": lambda d: train_categorical_nb(d, 1.0),
        "knn": lambda d: train_knn(d.subset(range(500)), 5),
    }[kind]
    model = trainer(clean_data)
    path = tmp_path / f"{kind}.model.json"
    save_model(model, path)
    loaded = load_model(path)
    states = np.asarray([state.codes() for state in enumerate_state_space()])
    assert np.array_equal(model.predict_proba(states), loaded.predict_proba(states))


def test_model_load_refuses_vocabulary_mismatch(tmp_path):
    data = make_dataset([[0, 1], [1, 0]], [0, 1])
    model = train_decision_tree(data)
    path = tmp_path / "model.json"
    save_model(model, path)
    with pytest.raises(VocabularyMismatch):
        load_model(path)  # expects the five-feature default vocabulary


def test_model_dict_digest_tamper_detected(tmp_path):
    data = make_dataset([[0, 1], [1, 0]], [0, 1])
    payload = model_to_dict(train_decision_tree(data))
    payload["vocabulary"]["digest"] = "0" * 16
    with pytest.raises(VocabularyMismatch):
        model_from_dict(payload, expected_vocabulary=None)
