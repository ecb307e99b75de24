"""Feature-contribution estimation and counterfactual queries.

Two attribution routes are provided.  The model-agnostic route computes
exact interventional Shapley values by enumerating all feature coalitions
(feasible because there are only five features, so 32 coalitions); absent
features are marginalised by splicing values from a background set of
states.  The transparent route walks a decision tree's routing path and
credits each split's change in target-class proportion to the split
feature; its arithmetic is done on exact rationals so the telescoping
identity holds with no tolerance at all.

Both attribute the probability of the predicted class: the sum of the
contributions equals the predicted probability minus the background
expectation (the model's prior belief).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .dataset import Dataset
from .domain import DEFAULT_VOCABULARY, FeatureVocabulary, VehicleState
from .errors import EmptyBackground, EmptyEdit, UnknownCategory
from .surrogate import (
    DecisionTreeModel,
    Prediction,
    SurrogateModel,
    encode_state,
    predict,
)

CAUSALITY_THRESHOLD = 0.05


@dataclass(frozen=True)
class Background:
    """Reference states used to marginalise absent features."""

    states: np.ndarray

    def __post_init__(self) -> None:
        states = np.asarray(self.states, dtype=np.int64)
        object.__setattr__(self, "states", states)
        if states.ndim != 2 or states.shape[0] == 0:
            raise EmptyBackground("background must hold at least one state row")

    @classmethod
    def from_model(cls, model: SurrogateModel) -> "Background":
        return cls(model.background)

    @classmethod
    def from_dataset(cls, data: Dataset) -> "Background":
        return cls(np.unique(data.features, axis=0))


@dataclass(frozen=True)
class Attribution:
    """Per-feature contributions to the predicted-class probability."""

    target_class: int
    base: float
    phi: tuple[float, ...]
    method: str  # "shapley" or "tree_path"
    prediction: Prediction
    # exact rational mirror, populated by the tree-path route only
    exact_base: Fraction | None = None
    exact_phi: tuple[Fraction, ...] | None = None
    exact_outcome: Fraction | None = None  # routed leaf's target-class proportion

    def total(self) -> float:
        return self.base + math.fsum(self.phi)

    def efficiency_gap(self) -> float:
        """|sum(phi) - (f(x) - base)|; ~0 for exact Shapley values."""
        return abs(math.fsum(self.phi) - (self.prediction.probabilities[self.target_class] - self.base))

    def telescoping_residual(self) -> Fraction | None:
        """Exact residual of base + sum(phi) against the leaf proportion."""
        if self.exact_base is None:
            return None
        return self.exact_outcome - (self.exact_base + sum(self.exact_phi, Fraction(0)))


def _coalition_weights(n_features: int) -> list[float]:
    fact = math.factorial
    return [
        fact(size) * fact(n_features - 1 - size) / fact(n_features)
        for size in range(n_features)
    ]


def shapley_values(
    model: SurrogateModel,
    state: "VehicleState | Sequence[int]",
    background: "Background | np.ndarray",
    target_class: int | None = None,
) -> Attribution:
    """Exact interventional Shapley values for the predicted class.

    The value of a coalition is the mean predicted probability over
    composites that take the instance's values on coalition features and a
    background row's values elsewhere; contributions are aggregated over
    all 2^M coalitions with the classical Shapley weights.
    """
    if not isinstance(background, Background):
        background = Background(background)
    row = encode_state(model, state)
    n_features = row.shape[0]
    prediction = predict(model, row)
    target = prediction.predicted if target_class is None else int(target_class)

    rows = background.states
    values = np.empty(1 << n_features, dtype=np.float64)
    for mask in range(1 << n_features):
        composite = rows.copy()
        for feature in range(n_features):
            if mask >> feature & 1:
                composite[:, feature] = row[feature]
        values[mask] = float(model.predict_proba(composite)[:, target].mean())

    weights = _coalition_weights(n_features)
    phi = [0.0] * n_features
    for mask in range(1 << n_features):
        size = bin(mask).count("1")
        for feature in range(n_features):
            if mask >> feature & 1:
                continue
            phi[feature] += weights[size] * (values[mask | (1 << feature)] - values[mask])

    return Attribution(
        target_class=target,
        base=float(values[0]),
        phi=tuple(phi),
        method="shapley",
        prediction=prediction,
    )


def tree_path_contribution(
    tree: DecisionTreeModel, state: "VehicleState | Sequence[int]", target_class: int | None = None
) -> Attribution:
    """Credit each split on the routing path with its change in
    target-class proportion; the contributions telescope exactly from the
    root proportion to the leaf proportion."""
    row = encode_state(tree, state)
    path = tree.path_nodes(row)
    leaf = path[-1]
    prediction = predict(tree, row)
    target = prediction.predicted if target_class is None else int(target_class)

    def proportion(node) -> Fraction:
        return Fraction(int(node.counts[target]), int(node.counts.sum()))

    exact_phi = [Fraction(0)] * tree.vocabulary.n_features
    for parent, child in zip(path, path[1:]):
        exact_phi[parent.feature] += proportion(child) - proportion(parent)
    exact_base = proportion(path[0])

    return Attribution(
        target_class=target,
        base=float(exact_base),
        phi=tuple(float(p) for p in exact_phi),
        method="tree_path",
        prediction=prediction,
        exact_base=exact_base,
        exact_phi=tuple(exact_phi),
        exact_outcome=proportion(leaf),
    )


def attribute(
    model: SurrogateModel,
    state: "VehicleState | Sequence[int]",
    background: "Background | np.ndarray | None" = None,
    method: str | None = None,
) -> Attribution:
    """Dispatch to the transparent route for trees, Shapley otherwise."""
    if method is None:
        method = "tree_path" if isinstance(model, DecisionTreeModel) else "shapley"
    if method == "tree_path":
        if not isinstance(model, DecisionTreeModel):
            raise ValueError("tree_path attribution requires a decision tree")
        return tree_path_contribution(model, state)
    if method == "shapley":
        if background is None:
            background = Background.from_model(model)
        return shapley_values(model, state, background)
    raise ValueError(f"unknown attribution method {method!r}")


@dataclass(frozen=True)
class Cause:
    feature: str
    value: str
    weight: float


@dataclass(frozen=True)
class CausalitySet:
    """Supporting features for a prediction, strongest first."""

    causes: tuple[Cause, ...]
    weak: bool = False  # no feature met the threshold; best effort single cause

    def feature_names(self) -> tuple[str, ...]:
        return tuple(cause.feature for cause in self.causes)


def infer_causality(
    attribution: Attribution,
    state: "VehicleState | Sequence[int]",
    threshold: float = CAUSALITY_THRESHOLD,
    vocabulary: FeatureVocabulary = DEFAULT_VOCABULARY,
) -> CausalitySet:
    """Features contributing at least `threshold` probability mass, paired
    with their observed values.  Negative contributions never count as
    causes; when nothing qualifies the single largest contribution is
    returned and flagged weak."""
    if isinstance(state, VehicleState):
        tokens = state.tokens()
    else:
        tokens = vocabulary.decode_codes(state)
    ranked = sorted(enumerate(attribution.phi), key=lambda item: (-item[1], item[0]))
    strong = [(i, weight) for i, weight in ranked if weight >= threshold]
    weak = not strong
    if weak:
        strong = [ranked[0]]
    causes = tuple(
        Cause(vocabulary.feature_names[i], tokens[vocabulary.feature_names[i]], float(w))
        for i, w in strong
    )
    return CausalitySet(causes=causes, weak=weak)


@dataclass(frozen=True)
class CounterfactualResult:
    original_state: VehicleState
    original_prediction: Prediction
    edits: dict[str, str]
    result_state: VehicleState
    result_prediction: Prediction
    changed: bool
    delta_phi: tuple[float, ...]
    original_attribution: Attribution
    result_attribution: Attribution


def apply_edits(state: VehicleState, edits: Mapping[str, str]) -> VehicleState:
    tokens = state.tokens()
    for feature, token in edits.items():
        if feature not in tokens:
            raise UnknownCategory(feature, str(token))
        tokens[feature] = token
    from .domain import validate_state

    return validate_state(tokens)


def counterfactual(
    model: SurrogateModel,
    state: VehicleState,
    edits: Mapping[str, str],
    background: "Background | np.ndarray | None" = None,
    method: str | None = None,
) -> CounterfactualResult:
    """Re-predict under the edited state and report the attribution shift."""
    if not edits:
        raise EmptyEdit("a counterfactual query needs at least one edit")
    edited = apply_edits(state, edits)
    before = attribute(model, state, background, method)
    after = attribute(model, edited, background, method)
    return CounterfactualResult(
        original_state=state,
        original_prediction=before.prediction,
        edits=dict(edits),
        result_state=edited,
        result_prediction=after.prediction,
        changed=after.prediction.predicted != before.prediction.predicted,
        delta_phi=tuple(a - b for a, b in zip(after.phi, before.phi)),
        original_attribution=before,
        result_attribution=after,
    )
