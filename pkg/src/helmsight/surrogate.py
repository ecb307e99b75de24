"""Classifiers over categorical vehicle-state features.

Three models are implemented from first principles so that training is
fully deterministic (every tie-break is fixed): a best-first CART-style
decision tree with category-subset splits, categorical Naive Bayes with
Laplace smoothing, and a Hamming-distance K-nearest-neighbours voter.
All of them expose class-probability predictions, which downstream
attribution is computed on.

Model files are self-describing JSON: format version, model kind,
vocabulary (with digest), class names, parameters and a deduplicated
background sample of the training states.  Loading refuses files whose
vocabulary digest differs from the expected vocabulary.
"""

from __future__ import annotations

import heapq
import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .dataset import Dataset
from .domain import DEFAULT_VOCABULARY, FeatureVocabulary, VehicleState
from .errors import (
    EmptyDataset,
    EmptyNode,
    InvalidAlpha,
    InvalidK,
    ModelFormatError,
    UnlabelledData,
    VocabularyMismatch,
)

MODEL_FORMAT = "helmsight-model/1"

# Background samples embedded in model files are capped to bound the cost
# of attribution; sampling is seeded so files are reproducible.
BACKGROUND_CAP = 512
_BACKGROUND_SAMPLE_SEED = 97


@dataclass(frozen=True)
class Prediction:
    """Class-probability vector; argmax ties resolve to the lowest code."""

    probabilities: tuple[float, ...]
    predicted: int

    def confidence(self) -> float:
        return self.probabilities[self.predicted]


def _prediction_from_probs(probs: np.ndarray) -> Prediction:
    return Prediction(tuple(float(p) for p in probs), int(np.argmax(probs)))


def gini(counts: Sequence[float]) -> float:
    """CART impurity 1 - sum(p^2) of a class-count vector."""
    arr = np.asarray(counts, dtype=np.float64)
    if (arr < 0).any():
        raise ValueError("class counts must be non-negative")
    total = arr.sum()
    if total <= 0:
        raise EmptyNode("impurity of an empty count vector is undefined")
    p = arr / total
    return float(1.0 - np.dot(p, p))


def _require_labelled(data: Dataset) -> tuple[np.ndarray, np.ndarray]:
    if data.n_rows == 0:
        raise EmptyDataset("training requires at least one row")
    if data.labels is None:
        raise UnlabelledData("training requires labelled data")
    return data.features, data.labels


def _background_sample(features: np.ndarray) -> np.ndarray:
    unique = np.unique(features, axis=0)
    if unique.shape[0] > BACKGROUND_CAP:
        rng = np.random.default_rng(_BACKGROUND_SAMPLE_SEED)
        pick = np.sort(rng.choice(unique.shape[0], size=BACKGROUND_CAP, replace=False))
        unique = unique[pick]
    return unique


# --- decision tree -----------------------------------------------------------


@dataclass
class TreeNode:
    counts: np.ndarray  # per-class row counts reaching this node
    depth: int
    feature: int | None = None
    left_categories: tuple[int, ...] | None = None  # codes routed left
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def proportions(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    def route(self, row: Sequence[int]) -> "TreeNode":
        assert self.feature is not None and self.left is not None and self.right is not None
        if int(row[self.feature]) in self.left_categories:  # type: ignore[operator]
            return self.left
        return self.right


@dataclass
class DecisionTreeModel:
    kind = "tree"
    root: TreeNode
    vocabulary: FeatureVocabulary
    class_names: tuple[str, ...]
    max_depth: int | None
    max_leaf_nodes: int | None
    background: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.int64))

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def params(self) -> dict:
        return {"max_depth": self.max_depth, "max_leaf_nodes": self.max_leaf_nodes}

    def leaf_count(self) -> int:
        return sum(1 for node in self.iter_nodes() if node.is_leaf)

    def depth(self) -> int:
        return max(node.depth for node in self.iter_nodes())

    def iter_nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.append(node.right)
                stack.append(node.left)

    def leaf_for(self, row: Sequence[int]) -> TreeNode:
        node = self.root
        while not node.is_leaf:
            node = node.route(row)
        return node

    def path_nodes(self, row: Sequence[int]) -> list[TreeNode]:
        """Root-to-leaf node sequence for a coded row (leaf included)."""
        node = self.root
        path = [node]
        while not node.is_leaf:
            node = node.route(row)
            path.append(node)
        return path

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.int64)
        out = np.empty((X.shape[0], self.n_classes), dtype=np.float64)
        self._fill(self.root, X, out, np.arange(X.shape[0]))
        return out

    def _fill(self, node: TreeNode, X: np.ndarray, out: np.ndarray, idx: np.ndarray) -> None:
        if idx.size == 0:
            return
        if node.is_leaf:
            out[idx] = node.proportions()
            return
        mask = np.isin(X[idx, node.feature], node.left_categories)
        self._fill(node.left, X, out, idx[mask])
        self._fill(node.right, X, out, idx[~mask])

    def used_features(self) -> set[int]:
        return {node.feature for node in self.iter_nodes() if not node.is_leaf}


@lru_cache(maxsize=None)
def _proper_subsets(domain_size: int) -> tuple[tuple[int, ...], ...]:
    """All non-empty proper subsets of 0..k-1 in lexicographic tuple order."""
    everything = itertools.chain.from_iterable(
        itertools.combinations(range(domain_size), size) for size in range(1, domain_size)
    )
    return tuple(sorted(everything))


def _gini_from_counts(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.dot(p, p))


def _best_split(
    X: np.ndarray, y: np.ndarray, rows: np.ndarray, sizes: Sequence[int], n_classes: int
) -> tuple[float, int, tuple[int, ...]] | None:
    """Best (gain, feature, subset) for one node, or None when no split helps.

    Gain is the un-normalised weighted impurity decrease
    n*g(node) - nL*g(L) - nR*g(R); ties resolve to the lowest feature index
    and then the lexicographically smallest category subset, which the
    iteration order guarantees.
    """
    node_counts = np.bincount(y[rows], minlength=n_classes).astype(np.float64)
    node_total = rows.size
    node_score = node_total * _gini_from_counts(node_counts)
    best: tuple[float, int, tuple[int, ...]] | None = None
    for feature in range(X.shape[1]):
        k = sizes[feature]
        table = np.zeros((k, n_classes), dtype=np.float64)
        np.add.at(table, (X[rows, feature], y[rows]), 1.0)
        for subset in _proper_subsets(k):
            left = table[list(subset)].sum(axis=0)
            n_left = left.sum()
            if n_left == 0 or n_left == node_total:
                continue
            right = node_counts - left
            gain = node_score - n_left * _gini_from_counts(left) - (
                node_total - n_left
            ) * _gini_from_counts(right)
            if best is None or gain > best[0] + 1e-12:
                best = (gain, feature, subset)
    if best is None or best[0] <= 1e-12:
        return None
    return best


def train_decision_tree(
    data: Dataset, max_depth: int | None = 8, max_leaf_nodes: int | None = 15
) -> DecisionTreeModel:
    """Greedy best-first growth: always split the frontier leaf with the
    largest weighted impurity decrease."""
    X, y = _require_labelled(data)
    sizes = data.vocabulary.sizes()
    n_classes = data.n_classes

    root = TreeNode(np.bincount(y, minlength=n_classes).astype(np.int64), depth=0)
    rows_of = {id(root): np.arange(data.n_rows)}

    counter = itertools.count()
    heap: list[tuple[float, int, TreeNode]] = []

    def consider(node: TreeNode) -> None:
        if max_depth is not None and node.depth >= max_depth:
            return
        rows = rows_of[id(node)]
        if rows.size < 2:
            return
        found = _best_split(X, y, rows, sizes, n_classes)
        if found is None:
            return
        gain, feature, subset = found
        node.feature = feature  # stashed; applied only if the split is taken
        node.left_categories = subset
        heapq.heappush(heap, (-gain, next(counter), node))

    consider(root)
    leaves = 1
    while heap and (max_leaf_nodes is None or leaves < max_leaf_nodes):
        _, _, node = heapq.heappop(heap)
        rows = rows_of.pop(id(node))
        mask = np.isin(X[rows, node.feature], node.left_categories)
        left_rows, right_rows = rows[mask], rows[~mask]
        node.left = TreeNode(
            np.bincount(y[left_rows], minlength=n_classes).astype(np.int64), node.depth + 1
        )
        node.right = TreeNode(
            np.bincount(y[right_rows], minlength=n_classes).astype(np.int64), node.depth + 1
        )
        rows_of[id(node.left)] = left_rows
        rows_of[id(node.right)] = right_rows
        leaves += 1
        consider(node.left)
        consider(node.right)

    # nodes left on the heap stay leaves: drop their stashed split
    while heap:
        _, _, node = heapq.heappop(heap)
        node.feature = None
        node.left_categories = None

    return DecisionTreeModel(
        root=root,
        vocabulary=data.vocabulary,
        class_names=data.class_names,
        max_depth=max_depth,
        max_leaf_nodes=max_leaf_nodes,
        background=_background_sample(X),
    )


def decision_path(
    tree: DecisionTreeModel, state: "VehicleState | Sequence[int]"
) -> list[tuple[int, str, tuple[int, ...]]]:
    """Root-to-leaf trace: (feature index, branch taken, node class counts)."""
    row = encode_state(tree, state)
    steps = []
    node = tree.root
    while not node.is_leaf:
        went_left = int(row[node.feature]) in node.left_categories
        steps.append((node.feature, "left" if went_left else "right", tuple(int(c) for c in node.counts)))
        node = node.left if went_left else node.right
    return steps


# --- categorical naive bayes --------------------------------------------------


@dataclass
class CategoricalNBModel:
    kind = "nb"
    alpha: float
    class_counts: np.ndarray  # (C,)
    value_counts: list[np.ndarray]  # per feature: (k_f, C)
    vocabulary: FeatureVocabulary
    class_names: tuple[str, ...]
    background: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.int64))

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def params(self) -> dict:
        return {"alpha": self.alpha}

    def log_likelihood_tables(self) -> list[np.ndarray]:
        tables = []
        for feature, counts in enumerate(self.value_counts):
            k = counts.shape[0]
            tables.append(
                np.log(counts + self.alpha) - np.log(self.class_counts + self.alpha * k)
            )
        return tables

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.int64)
        total = self.class_counts.sum()
        with np.errstate(divide="ignore"):
            log_joint = np.where(
                self.class_counts > 0, np.log(self.class_counts / total), -np.inf
            )[None, :].repeat(X.shape[0], axis=0)
        for feature, table in enumerate(self.log_likelihood_tables()):
            log_joint += table[X[:, feature]]
        peak = log_joint.max(axis=1, keepdims=True)
        weights = np.exp(log_joint - peak)
        return weights / weights.sum(axis=1, keepdims=True)

    def used_features(self) -> set[int]:
        return set(range(self.vocabulary.n_features))


def train_categorical_nb(data: Dataset, alpha: float = 1.0) -> CategoricalNBModel:
    if alpha <= 0:
        raise InvalidAlpha(f"alpha must be positive, got {alpha}")
    X, y = _require_labelled(data)
    n_classes = data.n_classes
    class_counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    value_counts = []
    for feature, k in enumerate(data.vocabulary.sizes()):
        table = np.zeros((k, n_classes), dtype=np.float64)
        np.add.at(table, (X[:, feature], y), 1.0)
        value_counts.append(table)
    return CategoricalNBModel(
        alpha=float(alpha),
        class_counts=class_counts,
        value_counts=value_counts,
        vocabulary=data.vocabulary,
        class_names=data.class_names,
        background=_background_sample(X),
    )


# --- k-nearest neighbours -------------------------------------------------------


@dataclass
class KNNModel:
    kind = "knn"
    k: int
    train_features: np.ndarray
    train_labels: np.ndarray
    vocabulary: FeatureVocabulary
    class_names: tuple[str, ...]
    background: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.int64))

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def params(self) -> dict:
        return {"k": self.k}

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.int64)
        out = np.empty((X.shape[0], self.n_classes), dtype=np.float64)
        chunk = max(1, 2_000_000 // max(1, self.train_features.shape[0]))
        for start in range(0, X.shape[0], chunk):
            block = X[start : start + chunk]
            distances = (block[:, None, :] != self.train_features[None, :, :]).sum(axis=2)
            # stable sort: equal distances resolve to the lower training-row index
            order = np.argsort(distances, axis=1, kind="stable")[:, : self.k]
            votes = self.train_labels[order]
            for i in range(block.shape[0]):
                out[start + i] = np.bincount(votes[i], minlength=self.n_classes) / self.k
        return out

    def used_features(self) -> set[int]:
        return set(range(self.vocabulary.n_features))


def train_knn(data: Dataset, k: int = 5) -> KNNModel:
    X, y = _require_labelled(data)
    if not 1 <= k <= data.n_rows:
        raise InvalidK(f"k must lie in [1, {data.n_rows}], got {k}")
    return KNNModel(
        k=int(k),
        train_features=X.copy(),
        train_labels=y.copy(),
        vocabulary=data.vocabulary,
        class_names=data.class_names,
        background=_background_sample(X),
    )


def hamming_distance(a: Sequence[int], b: Sequence[int]) -> int:
    return int(np.sum(np.asarray(a) != np.asarray(b)))


SurrogateModel = Union[DecisionTreeModel, CategoricalNBModel, KNNModel]


def encode_state(model: SurrogateModel, state: "VehicleState | Sequence[int]") -> np.ndarray:
    if isinstance(state, VehicleState):
        return np.asarray(state.codes(), dtype=np.int64)
    return np.asarray(state, dtype=np.int64)


def predict(model: SurrogateModel, state: "VehicleState | Sequence[int]") -> Prediction:
    row = encode_state(model, state)
    probs = model.predict_proba(row[None, :])[0]
    return _prediction_from_probs(probs)


def knn_predict(model: KNNModel, state: "VehicleState | Sequence[int]") -> Prediction:
    return predict(model, state)


# --- persistence ---------------------------------------------------------------


def _tree_to_dict(node: TreeNode) -> dict:
    payload: dict = {"counts": [int(c) for c in node.counts]}
    if not node.is_leaf:
        payload["feature"] = node.feature
        payload["left_categories"] = list(node.left_categories)
        payload["left"] = _tree_to_dict(node.left)
        payload["right"] = _tree_to_dict(node.right)
    return payload


def _tree_from_dict(payload: dict, depth: int = 0) -> TreeNode:
    node = TreeNode(np.asarray(payload["counts"], dtype=np.int64), depth)
    if "feature" in payload:
        node.feature = int(payload["feature"])
        node.left_categories = tuple(int(c) for c in payload["left_categories"])
        node.left = _tree_from_dict(payload["left"], depth + 1)
        node.right = _tree_from_dict(payload["right"], depth + 1)
    return node


def model_to_dict(model: SurrogateModel) -> dict:
    payload = {
        "format": MODEL_FORMAT,
        "kind": model.kind,
        "vocabulary": {
            "features": list(model.vocabulary.feature_names),
            "categories": [list(c) for c in model.vocabulary.categories],
            "digest": model.vocabulary.digest(),
        },
        "classes": list(model.class_names),
        "background": model.background.tolist(),
    }
    if isinstance(model, DecisionTreeModel):
        payload["params"] = model.params()
        payload["tree"] = _tree_to_dict(model.root)
    elif isinstance(model, CategoricalNBModel):
        payload["params"] = model.params()
        payload["class_counts"] = model.class_counts.tolist()
        payload["value_counts"] = [t.tolist() for t in model.value_counts]
    elif isinstance(model, KNNModel):
        payload["params"] = model.params()
        payload["train_features"] = model.train_features.tolist()
        payload["train_labels"] = model.train_labels.tolist()
    else:  # pragma: no cover
        raise ModelFormatError(f"unsupported model type {type(model)!r}")
    return payload


def model_from_dict(
    payload: dict, expected_vocabulary: FeatureVocabulary | None = DEFAULT_VOCABULARY
) -> SurrogateModel:
    if payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"unsupported model format {payload.get('format')!r}")
    spec = payload["vocabulary"]
    vocabulary = FeatureVocabulary(spec["features"], spec["categories"])
    if vocabulary.digest() != spec["digest"]:
        raise VocabularyMismatch("embedded vocabulary digest is inconsistent")
    if expected_vocabulary is not None and vocabulary.digest() != expected_vocabulary.digest():
        raise VocabularyMismatch(
            "model was trained against a different feature vocabulary"
        )
    classes = tuple(payload["classes"])
    background = np.asarray(payload["background"], dtype=np.int64)
    if background.size == 0:
        background = background.reshape(0, vocabulary.n_features)
    kind = payload.get("kind")
    if kind == "tree":
        params = payload["params"]
        return DecisionTreeModel(
            root=_tree_from_dict(payload["tree"]),
            vocabulary=vocabulary,
            class_names=classes,
            max_depth=params.get("max_depth"),
            max_leaf_nodes=params.get("max_leaf_nodes"),
            background=background,
        )
    if kind == "nb":
        return CategoricalNBModel(
            alpha=float(payload["params"]["alpha"]),
            class_counts=np.asarray(payload["class_counts"], dtype=np.float64),
            value_counts=[np.asarray(t, dtype=np.float64) for t in payload["value_counts"]],
            vocabulary=vocabulary,
            class_names=classes,
            background=background,
        )
    if kind == "knn":
        return KNNModel(
            k=int(payload["params"]["k"]),
            train_features=np.asarray(payload["train_features"], dtype=np.int64),
            train_labels=np.asarray(payload["train_labels"], dtype=np.int64),
            vocabulary=vocabulary,
            class_names=classes,
            background=background,
        )
    raise ModelFormatError(f"unsupported model kind {kind!r}")


def save_model(model: SurrogateModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(model_to_dict(model), handle, indent=1)
        handle.write("\n")


def load_model(
    path: str | Path, expected_vocabulary: FeatureVocabulary | None = DEFAULT_VOCABULARY
) -> SurrogateModel:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"not a model file: {exc}") from None
    return model_from_dict(payload, expected_vocabulary)
