"""Rule-based surface realisation of concept sets.

Templates cover every behaviour and every (feature, value) pair, so
realisation is total over the domain; totality is enumerable and checked
in the test suite.  Sentences are deterministic: same concept set, same
sentence.
"""

from __future__ import annotations

from .domain import FEATURE_DOMAINS, FEATURE_NAMES, Behaviour
from .errors import MissingTemplate
from .explain import CounterfactualResult
from .knowledge import COUNTERFACTUAL, REPLANNING_CLARIFICATION, ConceptSet

# Present-progressive descriptions of each behaviour, with purpose clause.
VERB_PHRASES: dict[Behaviour, str] = {
    Behaviour.WAIT: "waiting for a valid plan",
    Behaviour.TRANSIT: "transiting to its objective",
    Behaviour.SURVEY: "performing a survey of the area",
    Behaviour.HOLD_POSITION: "holding its position",
    Behaviour.REPLANNED_TRANSIT: "transiting along a replanned route",
    Behaviour.AVOID_OBSTACLE: "changing its trajectory to avoid an obstacle",
}

# The same actions de-inflected for the modal "would".
INFINITIVE_PHRASES: dict[Behaviour, str] = {
    Behaviour.WAIT: "wait for a valid plan",
    Behaviour.TRANSIT: "transit to its objective",
    Behaviour.SURVEY: "perform a survey of the area",
    Behaviour.HOLD_POSITION: "hold its position",
    Behaviour.REPLANNED_TRANSIT: "transit along a replanned route",
    Behaviour.AVOID_OBSTACLE: "change its trajectory to avoid an obstacle",
}

# Indicative cause phrases for every (feature, value) pair.
CAUSE_PHRASES: dict[tuple[str, str], str] = {
    ("ready_plan", "true"): "a valid plan is loaded",
    ("ready_plan", "false"): "no valid plan is loaded",
    ("current_objective", "none"): "no objective is assigned",
    ("current_objective", "launch"): "the current objective is the launch point",
    ("current_objective", "waypoint"): "the current objective is a waypoint",
    ("current_objective", "survey"): "the current objective is a survey",
    ("current_objective", "hold"): "the current objective is a holding point",
    ("current_objective", "recovery"): "the current objective is the recovery point",
    ("progress_type", "idle"): "the vehicle is idle",
    ("progress_type", "transiting"): "the vehicle is moving between locations",
    ("progress_type", "executing"): "the vehicle is executing its objective",
    ("progress_type", "replanning"): "a new route is being computed",
    ("progress_type", "completed"): "the plan has been completed",
    ("same_objective", "true"): "the objective has not changed",
    ("same_objective", "false"): "the objective has just changed",
    ("obstacle_found", "true"): "an obstacle was detected on its path",
    ("obstacle_found", "false"): "no obstacle is present",
}

# Subjunctive phrasings of the same pairs, for "what if" questions.
EDIT_PHRASES: dict[tuple[str, str], str] = {
    ("ready_plan", "true"): "a valid plan were loaded",
    ("ready_plan", "false"): "no valid plan were loaded",
    ("current_objective", "none"): "no objective were assigned",
    ("current_objective", "launch"): "the current objective were the launch point",
    ("current_objective", "waypoint"): "the current objective were a waypoint",
    ("current_objective", "survey"): "the current objective were a survey",
    ("current_objective", "hold"): "the current objective were a holding point",
    ("current_objective", "recovery"): "the current objective were the recovery point",
    ("progress_type", "idle"): "the vehicle were idle",
    ("progress_type", "transiting"): "the vehicle were moving between locations",
    ("progress_type", "executing"): "the vehicle were executing its objective",
    ("progress_type", "replanning"): "a new route were being computed",
    ("progress_type", "completed"): "the plan were completed",
    ("same_objective", "true"): "the objective had not changed",
    ("same_objective", "false"): "the objective had just changed",
    ("obstacle_found", "true"): "an obstacle were detected",
    ("obstacle_found", "false"): "no obstacle were present",
}

REPLANNING_PREFIX = "Replanning was needed: "


def check_totality() -> None:
    """Raise MissingTemplate if any behaviour or (feature, value) pair has
    no phrase; enumerable because the domains are closed."""
    for behaviour in Behaviour:
        if behaviour not in VERB_PHRASES:
            raise MissingTemplate(f"no verb phrase for behaviour {behaviour.token!r}")
        if behaviour not in INFINITIVE_PHRASES:
            raise MissingTemplate(f"no infinitive phrase for behaviour {behaviour.token!r}")
    for name in FEATURE_NAMES:
        for token in FEATURE_DOMAINS[name]:
            if (name, token) not in CAUSE_PHRASES:
                raise MissingTemplate(f"no cause phrase for ({name}, {token})")
            if (name, token) not in EDIT_PHRASES:
                raise MissingTemplate(f"no edit phrase for ({name}, {token})")


def _subject(vessel: str) -> str:
    return vessel[:1].upper() + vessel[1:] if vessel else "Vehicle"


def _join(phrases: list[str]) -> str:
    return " and ".join(phrases)


def _cause_phrases(concept_set: ConceptSet) -> list[str]:
    phrases = []
    for cause in concept_set.causality.causes:
        key = (cause.feature, cause.value)
        if key not in CAUSE_PHRASES:
            raise MissingTemplate(f"no cause phrase for {key}")
        phrases.append(CAUSE_PHRASES[key])
    if not phrases:
        raise MissingTemplate("concept set carries no causes")
    return phrases


def realise(concept_set: ConceptSet) -> str:
    """One grammatical sentence per concept set."""
    behaviour = concept_set.behaviour
    if behaviour not in VERB_PHRASES:
        raise MissingTemplate(f"no verb phrase for behaviour {behaviour.token!r}")
    subject = _subject(concept_set.vessel)
    causes = _join(_cause_phrases(concept_set))
    if concept_set.explanation_type == COUNTERFACTUAL:
        return (
            f"In the queried scenario, {subject} would "
            f"{INFINITIVE_PHRASES[behaviour]} because {causes}."
        )
    sentence = f"{subject} is {VERB_PHRASES[behaviour]} because {causes}."
    if concept_set.explanation_type == REPLANNING_CLARIFICATION:
        return REPLANNING_PREFIX + sentence
    return sentence


def realise_counterfactual(result: CounterfactualResult, vessel: str = "vehicle") -> str:
    """Subjunctive sentence for a what-if query."""
    edit_phrases = []
    for feature, token in result.edits.items():
        key = (feature, token)
        if key not in EDIT_PHRASES:
            raise MissingTemplate(f"no edit phrase for {key}")
        edit_phrases.append(EDIT_PHRASES[key])
    subject = _subject(vessel)
    condition = _join(edit_phrases)
    behaviour = Behaviour.from_code(result.result_prediction.predicted)
    if result.changed:
        return f"If {condition}, {subject} would {INFINITIVE_PHRASES[behaviour]}."
    return f"If {condition}, {subject} would continue {VERB_PHRASES[behaviour]}."
