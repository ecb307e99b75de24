"""Model selection and unbiased metric reporting.

Nested cross-validation: stratified outer folds give the evaluation
estimate, and an inner stratified CV over a fixed hyperparameter grid
selects the configuration retrained on each outer-train set.  Everything
is seeded and tie-breaks are fixed (first grid point in declaration
order), so reports are reproducible except for wall-clock timings.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dataset import Dataset
from .errors import EmptyDataset, EmptyMatrix, InsufficientClassCount, LengthMismatch
from .surrogate import (
    SurrogateModel,
    train_categorical_nb,
    train_decision_tree,
    train_knn,
)

# Candidate hyperparameters per model kind, in declaration order.
HYPER_GRID: dict[str, tuple[dict, ...]] = {
    "tree": tuple(
        {"max_depth": depth, "max_leaf_nodes": leaves}
        for depth in (2, 4, 6, 8, 10)
        for leaves in (8, 15, 31)
    ),
    "nb": tuple({"alpha": alpha} for alpha in (0.1, 0.5, 1.0)),
    "knn": tuple({"k": k} for k in (1, 3, 5, 7)),
}

TRAINERS: dict[str, Callable[..., SurrogateModel]] = {
    "tree": train_decision_tree,
    "nb": train_categorical_nb,
    "knn": train_knn,
}

MODEL_LABELS = {"tree": "Decision Tree", "nb": "CategoricalNB", "knn": "KNN"}


def confusion_matrix(
    true_labels: Sequence[int], predicted_labels: Sequence[int], n_classes: int
) -> np.ndarray:
    """Entry (i, j) counts rows of true class i predicted as class j."""
    true_arr = np.asarray(true_labels, dtype=np.int64)
    pred_arr = np.asarray(predicted_labels, dtype=np.int64)
    if true_arr.shape != pred_arr.shape:
        raise LengthMismatch(
            f"label vectors differ in length: {true_arr.shape[0]} vs {pred_arr.shape[0]}"
        )
    matrix = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(matrix, (true_arr, pred_arr), 1)
    return matrix


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float  # macro over classes present in truth
    recall: float
    f1: float
    per_class_precision: tuple[float, ...] = ()
    per_class_recall: tuple[float, ...] = ()
    per_class_f1: tuple[float, ...] = ()
    zero_precision_classes: tuple[int, ...] = ()  # present in truth, never predicted

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.accuracy, self.precision, self.recall, self.f1)


def classification_metrics(matrix: np.ndarray) -> Metrics:
    """Accuracy plus macro precision/recall/F1 over classes present in truth.

    A zero denominator (class absent from predictions or truth) contributes
    a 0 for that class rather than an error.
    """
    cm = np.asarray(matrix, dtype=np.float64)
    total = cm.sum()
    if total <= 0:
        raise EmptyMatrix("confusion matrix has no entries")
    accuracy = float(np.trace(cm) / total)
    row_sums = cm.sum(axis=1)
    col_sums = cm.sum(axis=0)
    diag = np.diag(cm)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(col_sums > 0, diag / col_sums, 0.0)
        recall = np.where(row_sums > 0, diag / row_sums, 0.0)
        f1 = np.where(precision + recall > 0, 2 * precision * recall / (precision + recall), 0.0)
    present = row_sums > 0
    flagged = tuple(int(c) for c in np.flatnonzero(present & (col_sums == 0)))
    return Metrics(
        accuracy=accuracy,
        precision=float(precision[present].mean()),
        recall=float(recall[present].mean()),
        f1=float(f1[present].mean()),
        per_class_precision=tuple(float(p) for p in precision),
        per_class_recall=tuple(float(r) for r in recall),
        per_class_f1=tuple(float(v) for v in f1),
        zero_precision_classes=flagged,
    )


def _stratified_folds(labels: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
    """Deterministic stratified k-fold assignment: shuffle within class, deal
    round-robin."""
    rng = random.Random(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for c in np.unique(labels):
        rows = np.flatnonzero(labels == c).tolist()
        rng.shuffle(rows)
        for i, row in enumerate(rows):
            folds[i % k].append(row)
    return [np.asarray(sorted(fold), dtype=np.int64) for fold in folds]


def _score(model: SurrogateModel, data: Dataset) -> tuple[Metrics, np.ndarray, float]:
    started = time.perf_counter()
    predictions = model.predict_proba(data.features).argmax(axis=1)
    elapsed = time.perf_counter() - started
    cm = confusion_matrix(data.labels, predictions, data.n_classes)
    return classification_metrics(cm), cm, elapsed


def evaluate_on(model: SurrogateModel, data: Dataset) -> tuple[Metrics, np.ndarray]:
    """Single-pass scoring of a trained model on a labelled dataset."""
    if data.n_rows == 0:
        raise EmptyDataset("evaluation requires at least one row")
    if data.labels is None:
        raise EmptyDataset("evaluation requires labels")
    metrics, cm, _ = _score(model, data)
    return metrics, cm


@dataclass(frozen=True)
class ModelReport:
    model_kind: str
    accuracy: float
    precision: float
    recall: float
    f1: float
    fit_time: float
    score_time: float
    selected_params: tuple[dict, ...]  # one per outer fold
    confusion: np.ndarray  # pooled over outer folds
    fold_metrics: tuple[Metrics, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "model": MODEL_LABELS.get(self.model_kind, self.model_kind),
            "kind": self.model_kind,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "fit_time": self.fit_time,
            "score_time": self.score_time,
            "selected_params": list(self.selected_params),
            "confusion_matrix": self.confusion.tolist(),
        }


def nested_cv(
    data: Dataset,
    model_kind: str,
    grid: Sequence[dict] | None = None,
    outer_k: int = 5,
    inner_k: int = 3,
    seed: int = 0,
) -> ModelReport:
    """Outer stratified folds estimate performance; inner folds pick the grid
    point with the best mean accuracy (ties: first in declaration order)."""
    if data.labels is None or data.n_rows == 0:
        raise EmptyDataset("nested CV requires labelled rows")
    grid = tuple(grid if grid is not None else HYPER_GRID[model_kind])
    trainer = TRAINERS[model_kind]
    counts = data.class_counts()
    for c in np.flatnonzero(counts > 0):
        if counts[c] < outer_k:
            raise InsufficientClassCount(
                f"class {data.class_names[c]!r} has {int(counts[c])} rows; "
                f"{outer_k} folds need at least {outer_k}"
            )

    outer_folds = _stratified_folds(data.labels, outer_k, seed)
    all_rows = np.arange(data.n_rows)
    pooled = np.zeros((data.n_classes, data.n_classes), dtype=np.int64)
    fold_metrics: list[Metrics] = []
    selected: list[dict] = []
    fit_time = 0.0
    score_time = 0.0

    for fold_index, test_rows in enumerate(outer_folds):
        train_rows = np.setdiff1d(all_rows, test_rows)
        outer_train = data.subset(train_rows)
        outer_test = data.subset(test_rows)

        inner_folds = _stratified_folds(outer_train.labels, inner_k, seed + fold_index + 1)
        inner_all = np.arange(outer_train.n_rows)
        best_params: dict | None = None
        best_score = -1.0
        for params in grid:
            scores = []
            for inner_test in inner_folds:
                inner_train = np.setdiff1d(inner_all, inner_test)
                started = time.perf_counter()
                model = trainer(outer_train.subset(inner_train), **params)
                fit_time += time.perf_counter() - started
                metrics, _, elapsed = _score(model, outer_train.subset(inner_test))
                score_time += elapsed
                scores.append(metrics.accuracy)
            mean_score = float(np.mean(scores))
            if mean_score > best_score + 1e-12:  # strict improvement keeps first grid point on ties
                best_score = mean_score
                best_params = params
        selected.append(dict(best_params))

        started = time.perf_counter()
        model = trainer(outer_train, **best_params)
        fit_time += time.perf_counter() - started
        metrics, cm, elapsed = _score(model, outer_test)
        score_time += elapsed
        pooled += cm
        fold_metrics.append(metrics)

    return ModelReport(
        model_kind=model_kind,
        accuracy=float(np.mean([m.accuracy for m in fold_metrics])),
        precision=float(np.mean([m.precision for m in fold_metrics])),
        recall=float(np.mean([m.recall for m in fold_metrics])),
        f1=float(np.mean([m.f1 for m in fold_metrics])),
        fit_time=fit_time,
        score_time=score_time,
        selected_params=tuple(selected),
        confusion=pooled,
        fold_metrics=tuple(fold_metrics),
    )


def compare_models(
    data: Dataset, outer_k: int = 5, inner_k: int = 3, seed: int = 0
) -> dict[str, ModelReport]:
    """Nested-CV reports for every implemented model kind."""
    return {
        kind: nested_cv(data, kind, outer_k=outer_k, inner_k=inner_k, seed=seed)
        for kind in ("tree", "nb", "knn")
    }


def comparison_table(reports: dict[str, ModelReport]) -> str:
    """Human-readable comparison in the style of a model-evaluation table."""
    header = f"{'Model':<22}{'Accuracy':>10}{'Precision':>11}{'Recall':>9}{'F1':>8}{'Fit(s)':>9}{'Score(s)':>10}"
    lines = [header, "-" * len(header)]
    for kind in ("tree", "nb", "knn"):
        if kind not in reports:
            continue
        r = reports[kind]
        lines.append(
            f"{MODEL_LABELS[kind]:<22}{r.accuracy:>10.4f}{r.precision:>11.4f}"
            f"{r.recall:>9.4f}{r.f1:>8.4f}{r.fit_time:>9.4f}{r.score_time:>10.4f}"
        )
    return "\n".join(lines)
