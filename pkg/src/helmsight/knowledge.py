"""Append-only knowledge base of contextualised concept sets.

Each entry couples a vessel, the predicted behaviour, the inferred
causality and a mission-relative time.  Consecutive duplicates (same
behaviour caused by the same feature set) are suppressed so the base
reads as a sequence of events rather than per-tick spam; counterfactual
entries are operator queries and are always kept.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .domain import Behaviour
from .errors import TimeRegression
from .explain import CAUSALITY_THRESHOLD, CausalitySet, Cause
from .surrogate import Prediction

BEHAVIOUR_CAUSALITY = "behaviour_causality"
REPLANNING_CLARIFICATION = "replanning_clarification"
COUNTERFACTUAL = "counterfactual"

_REPLANNING_BEHAVIOURS = (Behaviour.REPLANNED_TRANSIT, Behaviour.AVOID_OBSTACLE)


@dataclass(frozen=True)
class EntryTime:
    mission: str
    tick: int


@dataclass(frozen=True)
class ConceptSet:
    vessel: str
    behaviour: Behaviour
    causality: CausalitySet
    time: EntryTime
    explanation_type: str
    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must lie in [0, 1], got {self.confidence}")

    def dedup_key(self) -> tuple[Behaviour, frozenset[str]]:
        return (self.behaviour, frozenset(self.causality.feature_names()))


def make_concept_set(
    vessel: str,
    prediction: Prediction,
    causality: CausalitySet,
    tick: int,
    mission: str,
    counterfactual: bool = False,
) -> ConceptSet:
    """Wrap a prediction and its causes; replanning behaviours are tagged as
    replanning clarifications, counterfactual results keep their own tag."""
    behaviour = Behaviour.from_code(prediction.predicted)
    if counterfactual:
        explanation_type = COUNTERFACTUAL
    elif behaviour in _REPLANNING_BEHAVIOURS:
        explanation_type = REPLANNING_CLARIFICATION
    else:
        explanation_type = BEHAVIOUR_CAUSALITY
    return ConceptSet(
        vessel=vessel,
        behaviour=behaviour,
        causality=causality,
        time=EntryTime(mission, tick),
        explanation_type=explanation_type,
        confidence=prediction.confidence(),
    )


@dataclass
class KnowledgeBase:
    entries: list[ConceptSet] = field(default_factory=list)

    def latest_for(self, vessel: str) -> ConceptSet | None:
        for entry in reversed(self.entries):
            if entry.vessel == vessel:
                return entry
        return None

    def append(self, concept_set: ConceptSet) -> bool:
        """Store the entry unless it duplicates the vessel's latest one.

        Returns True when stored.  Counterfactual entries are always stored
        (an operator may query the same situation repeatedly)."""
        latest = self.latest_for(concept_set.vessel)
        if latest is not None:
            if concept_set.time.tick < latest.time.tick:
                raise TimeRegression(
                    f"entry at tick {concept_set.time.tick} precedes the latest "
                    f"tick {latest.time.tick} for vessel {concept_set.vessel!r}"
                )
            if concept_set.explanation_type != COUNTERFACTUAL:
                if concept_set.dedup_key() == latest.dedup_key():
                    return False
                if concept_set.time.tick == latest.time.tick:
                    raise TimeRegression(
                        f"behaviour entries for vessel {concept_set.vessel!r} must "
                        f"strictly increase in time"
                    )
        self.entries.append(concept_set)
        return True

    def query(
        self,
        vessel: str | None = None,
        since_tick: int | None = None,
        until_tick: int | None = None,
        behaviour: Behaviour | None = None,
        explanation_type: str | None = None,
    ) -> tuple[ConceptSet, ...]:
        out = []
        for entry in self.entries:
            if vessel is not None and entry.vessel != vessel:
                continue
            if since_tick is not None and entry.time.tick < since_tick:
                continue
            if until_tick is not None and entry.time.tick > until_tick:
                continue
            if behaviour is not None and entry.behaviour != behaviour:
                continue
            if explanation_type is not None and entry.explanation_type != explanation_type:
                continue
            out.append(entry)
        return tuple(out)


def entry_to_dict(entry: ConceptSet) -> dict:
    return {
        "vessel": entry.vessel,
        "behaviour": entry.behaviour.token,
        "causality": [
            {"feature": c.feature, "value": c.value, "weight": c.weight}
            for c in entry.causality.causes
        ],
        "time": {"mission": entry.time.mission, "tick": entry.time.tick},
        "explanation_type": entry.explanation_type,
        "confidence": entry.confidence,
    }


def entry_from_dict(payload: dict) -> ConceptSet:
    causes = tuple(
        Cause(item["feature"], item["value"], float(item["weight"]))
        for item in payload["causality"]
    )
    weak = bool(causes) and all(c.weight < CAUSALITY_THRESHOLD for c in causes)
    return ConceptSet(
        vessel=payload["vessel"],
        behaviour=Behaviour.from_token(payload["behaviour"]),
        causality=CausalitySet(causes=causes, weak=weak),
        time=EntryTime(payload["time"]["mission"], int(payload["time"]["tick"])),
        explanation_type=payload["explanation_type"],
        confidence=float(payload["confidence"]),
    )


def save_knowledge(entries: Iterable[ConceptSet], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for entry in entries:
            handle.write(json.dumps(entry_to_dict(entry)) + "\n")


def append_knowledge(entry: ConceptSet, path: str | Path) -> None:
    with open(path, "a", encoding="utf-8", newline="\n") as handle:
        handle.write(json.dumps(entry_to_dict(entry)) + "\n")


def load_knowledge(path: str | Path) -> KnowledgeBase:
    kb = KnowledgeBase()
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                kb.entries.append(entry_from_dict(json.loads(line)))
    return kb
