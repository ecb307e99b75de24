"""Closed categorical vocabulary shared by every other module.

The five observable vehicle-state features and the six behaviours form a
fixed, finite vocabulary.  Everything downstream (simulation, training,
attribution, wire payloads) encodes against this module, so category codes
are stable regardless of which categories a particular log happens to
contain.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Mapping, Sequence

from .errors import UnknownBehaviour, UnknownCategory, UnknownFeature


class Behaviour(Enum):
    """The six behaviours a vessel can exhibit, in code order."""

    WAIT = "wait"
    TRANSIT = "transit"
    SURVEY = "survey"
    HOLD_POSITION = "hold_position"
    REPLANNED_TRANSIT = "replanned_transit"
    AVOID_OBSTACLE = "avoid_obstacle"

    @property
    def code(self) -> int:
        return _BEHAVIOUR_CODES[self]

    @property
    def token(self) -> str:
        return self.value

    @classmethod
    def from_token(cls, token: str) -> "Behaviour":
        try:
            return cls(token)
        except ValueError:
            raise UnknownBehaviour(token) from None

    @classmethod
    def from_code(cls, code: int) -> "Behaviour":
        try:
            return BEHAVIOURS[code]
        except IndexError:
            raise UnknownBehaviour(str(code)) from None


BEHAVIOURS: tuple[Behaviour, ...] = tuple(Behaviour)
_BEHAVIOUR_CODES = {behaviour: i for i, behaviour in enumerate(BEHAVIOURS)}
N_BEHAVIOURS = len(BEHAVIOURS)

BEHAVIOUR_TOKENS: tuple[str, ...] = tuple(b.value for b in BEHAVIOURS)

# Feature order is fixed: attribution vectors, encoded rows and wire
# payloads all rely on it.
FEATURE_NAMES: tuple[str, ...] = (
    "ready_plan",
    "current_objective",
    "progress_type",
    "same_objective",
    "obstacle_found",
)

BOOL_TOKENS: tuple[str, ...] = ("false", "true")
OBJECTIVE_TOKENS: tuple[str, ...] = ("none", "launch", "waypoint", "survey", "hold", "recovery")
PROGRESS_TOKENS: tuple[str, ...] = ("idle", "transiting", "executing", "replanning", "completed")

FEATURE_DOMAINS: dict[str, tuple[str, ...]] = {
    "ready_plan": BOOL_TOKENS,
    "current_objective": OBJECTIVE_TOKENS,
    "progress_type": PROGRESS_TOKENS,
    "same_objective": BOOL_TOKENS,
    "obstacle_found": BOOL_TOKENS,
}

STATE_SPACE_SIZE = 2 * 6 * 5 * 2 * 2  # 240


def bool_token(value: bool) -> str:
    return BOOL_TOKENS[int(value)]


def parse_bool_token(feature: str, token: str) -> bool:
    if token == "true":
        return True
    if token == "false":
        return False
    raise UnknownCategory(feature, token)


@dataclass(frozen=True)
class VehicleState:
    """One observation of the five categorical vehicle-state features."""

    ready_plan: bool
    current_objective: str
    progress_type: str
    same_objective: bool
    obstacle_found: bool

    def __post_init__(self) -> None:
        if self.current_objective not in OBJECTIVE_TOKENS:
            raise UnknownCategory("current_objective", str(self.current_objective))
        if self.progress_type not in PROGRESS_TOKENS:
            raise UnknownCategory("progress_type", str(self.progress_type))

    def tokens(self) -> dict[str, str]:
        """Canonical token mapping, in feature order."""
        return {
            "ready_plan": bool_token(self.ready_plan),
            "current_objective": self.current_objective,
            "progress_type": self.progress_type,
            "same_objective": bool_token(self.same_objective),
            "obstacle_found": bool_token(self.obstacle_found),
        }

    def codes(self) -> tuple[int, ...]:
        return DEFAULT_VOCABULARY.encode_tokens(self.tokens())

    def replace(self, **edits: object) -> "VehicleState":
        fields = {
            "ready_plan": self.ready_plan,
            "current_objective": self.current_objective,
            "progress_type": self.progress_type,
            "same_objective": self.same_objective,
            "obstacle_found": self.obstacle_found,
        }
        fields.update(edits)
        return VehicleState(**fields)  # type: ignore[arg-type]


@dataclass(frozen=True)
class StateRecord:
    """One labelled (or unlabelled) observation from a vessel log."""

    vessel: str
    tick: int
    state: VehicleState
    behaviour: Behaviour | None = None

    def __post_init__(self) -> None:
        if self.tick < 0:
            raise ValueError(f"tick must be non-negative, got {self.tick}")


class FeatureVocabulary:
    """Ordered feature names with their closed category lists and code maps."""

    def __init__(self, feature_names: Sequence[str], categories: Sequence[Sequence[str]]):
        if len(feature_names) != len(categories):
            raise ValueError("one category list per feature required")
        self.feature_names: tuple[str, ...] = tuple(feature_names)
        self.categories: tuple[tuple[str, ...], ...] = tuple(tuple(c) for c in categories)
        self._code_maps: tuple[dict[str, int], ...] = tuple(
            {token: code for code, token in enumerate(cats)} for cats in self.categories
        )
        self._index = {name: i for i, name in enumerate(self.feature_names)}

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(cats) for cats in self.categories)

    def feature_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownFeature(extra=(name,)) from None

    def encode(self, feature: int | str, token: str) -> int:
        idx = feature if isinstance(feature, int) else self.feature_index(feature)
        try:
            return self._code_maps[idx][token]
        except KeyError:
            raise UnknownCategory(self.feature_names[idx], token) from None

    def decode(self, feature: int | str, code: int) -> str:
        idx = feature if isinstance(feature, int) else self.feature_index(feature)
        cats = self.categories[idx]
        if not 0 <= code < len(cats):
            raise UnknownCategory(self.feature_names[idx], str(code))
        return cats[code]

    def encode_tokens(self, tokens: Mapping[str, str]) -> tuple[int, ...]:
        given = set(tokens)
        expected = set(self.feature_names)
        if given != expected:
            raise UnknownFeature(missing=sorted(expected - given), extra=sorted(given - expected))
        return tuple(self.encode(i, tokens[name]) for i, name in enumerate(self.feature_names))

    def decode_codes(self, codes: Sequence[int]) -> dict[str, str]:
        if len(codes) != self.n_features:
            raise UnknownFeature(missing=self.feature_names[len(codes):])
        return {name: self.decode(i, int(codes[i])) for i, name in enumerate(self.feature_names)}

    def digest(self) -> str:
        """Stable hash of the vocabulary, embedded in model files."""
        text = "\n".join(
            name + "=" + ",".join(cats) for name, cats in zip(self.feature_names, self.categories)
        )
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FeatureVocabulary)
            and self.feature_names == other.feature_names
            and self.categories == other.categories
        )

    def __hash__(self) -> int:
        return hash((self.feature_names, self.categories))


DEFAULT_VOCABULARY = FeatureVocabulary(
    FEATURE_NAMES, tuple(FEATURE_DOMAINS[name] for name in FEATURE_NAMES)
)


def validate_state(raw: Mapping[str, str]) -> VehicleState:
    """Resolve a token mapping against the feature domains.

    Raises UnknownFeature when keys are missing or unexpected and
    UnknownCategory when a token falls outside its feature's domain.
    """
    given = set(raw)
    expected = set(FEATURE_NAMES)
    if given != expected:
        raise UnknownFeature(missing=sorted(expected - given), extra=sorted(given - expected))
    for name in FEATURE_NAMES:
        token = raw[name]
        if token not in FEATURE_DOMAINS[name]:
            raise UnknownCategory(name, token)
    return VehicleState(
        ready_plan=parse_bool_token("ready_plan", raw["ready_plan"]),
        current_objective=raw["current_objective"],
        progress_type=raw["progress_type"],
        same_objective=parse_bool_token("same_objective", raw["same_objective"]),
        obstacle_found=parse_bool_token("obstacle_found", raw["obstacle_found"]),
    )


def state_from_codes(codes: Sequence[int]) -> VehicleState:
    return validate_state(DEFAULT_VOCABULARY.decode_codes(codes))


def enumerate_state_space() -> tuple[VehicleState, ...]:
    """All 240 states in lexicographic order of their coded features."""
    ranges = [range(size) for size in DEFAULT_VOCABULARY.sizes()]
    return tuple(state_from_codes(codes) for codes in itertools.product(*ranges))


def iter_feature_value_pairs() -> Iterator[tuple[str, str]]:
    """Every (feature, category) pair in vocabulary order (17 in total)."""
    for name in FEATURE_NAMES:
        for token in FEATURE_DOMAINS[name]:
            yield name, token
