"""Request/response models for the HTTP API.

States travel as canonical lower-case tokens; every payload mirrors the
structures produced by the core package so wire data round-trips through
the same schemas the files use.
"""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..domain import BEHAVIOUR_TOKENS, VehicleState, validate_state
from ..explain import Attribution, CausalitySet, CounterfactualResult
from ..knowledge import ConceptSet
from ..surrogate import Prediction


class StatePayload(BaseModel):
    ready_plan: str
    current_objective: str
    progress_type: str
    same_objective: str
    obstacle_found: str

    def to_state(self) -> VehicleState:
        return validate_state(self.model_dump())

    @classmethod
    def from_state(cls, state: VehicleState) -> "StatePayload":
        return cls(**state.tokens())


class PredictionPayload(BaseModel):
    behaviour: str
    confidence: float
    probabilities: dict[str, float]

    @classmethod
    def from_prediction(cls, prediction: Prediction) -> "PredictionPayload":
        return cls(
            behaviour=BEHAVIOUR_TOKENS[prediction.predicted],
            confidence=prediction.confidence(),
            probabilities=dict(zip(BEHAVIOUR_TOKENS, prediction.probabilities)),
        )


class CausePayload(BaseModel):
    feature: str
    value: str
    weight: float


class AttributionPayload(BaseModel):
    target: str
    base: float
    method: str
    phi: dict[str, float]

    @classmethod
    def from_attribution(cls, attribution: Attribution, feature_names) -> "AttributionPayload":
        return cls(
            target=BEHAVIOUR_TOKENS[attribution.target_class],
            base=attribution.base,
            method=attribution.method,
            phi=dict(zip(feature_names, attribution.phi)),
        )


def causes_payload(causality: CausalitySet) -> list[CausePayload]:
    return [CausePayload(feature=c.feature, value=c.value, weight=c.weight) for c in causality.causes]


class PredictRequest(BaseModel):
    state: StatePayload


class ExplainRequest(BaseModel):
    state: StatePayload
    method: str | None = Field(default=None, pattern="^(shapley|tree_path)$")
    vessel: str = "vehicle"


class ExplainResponse(BaseModel):
    state: StatePayload
    prediction: PredictionPayload
    attribution: AttributionPayload
    causes: list[CausePayload]
    weak: bool
    sentence: str


class WhatifRequest(BaseModel):
    state: StatePayload
    edits: dict[str, str]
    method: str | None = Field(default=None, pattern="^(shapley|tree_path)$")
    vessel: str = "vehicle"


class WhatifResponse(BaseModel):
    original_state: StatePayload
    original_prediction: PredictionPayload
    edits: dict[str, str]
    result_state: StatePayload
    result_prediction: PredictionPayload
    changed: bool
    delta_phi: dict[str, float]
    sentence: str

    @classmethod
    def from_result(
        cls, result: CounterfactualResult, sentence: str, feature_names
    ) -> "WhatifResponse":
        return cls(
            original_state=StatePayload.from_state(result.original_state),
            original_prediction=PredictionPayload.from_prediction(result.original_prediction),
            edits=result.edits,
            result_state=StatePayload.from_state(result.result_state),
            result_prediction=PredictionPayload.from_prediction(result.result_prediction),
            changed=result.changed,
            delta_phi=dict(zip(feature_names, result.delta_phi)),
            sentence=sentence,
        )


class EntryTimePayload(BaseModel):
    mission: str
    tick: int


class KnowledgeEntryPayload(BaseModel):
    vessel: str
    behaviour: str
    causality: list[CausePayload]
    time: EntryTimePayload
    explanation_type: str
    confidence: float

    @classmethod
    def from_entry(cls, entry: ConceptSet) -> "KnowledgeEntryPayload":
        return cls(
            vessel=entry.vessel,
            behaviour=entry.behaviour.token,
            causality=causes_payload(entry.causality),
            time=EntryTimePayload(mission=entry.time.mission, tick=entry.time.tick),
            explanation_type=entry.explanation_type,
            confidence=entry.confidence,
        )


class FeedItem(BaseModel):
    entry: KnowledgeEntryPayload
    sentence: str


class MissionRequest(BaseModel):
    preset: str | None = None  # paper-scale | trial | scenario1..scenario4 | fig5
    plan: list[str] | None = None
    seed: int = 0
    ambiguity: float = 0.0
    noise: float = 0.0
    model_ref: str | None = None


class MissionCreated(BaseModel):
    mission_id: str
    records: int
    entries: int


class MissionState(BaseModel):
    vessel: str
    tick: int
    state: StatePayload
    prediction: PredictionPayload


class VocabularyPayload(BaseModel):
    features: list[dict]
    behaviours: list[str]
