"""Exception types shared across the package."""

from __future__ import annotations

from typing import Iterable


class HelmsightError(Exception):
    """Base class for every error raised by this package."""


class UnknownFeature(HelmsightError):
    """A state mapping has missing or unexpected feature keys."""

    def __init__(self, missing: Iterable[str] = (), extra: Iterable[str] = ()):
        self.missing = tuple(missing)
        self.extra = tuple(extra)
        parts = []
        if self.missing:
            parts.append("missing: " + ", ".join(self.missing))
        if self.extra:
            parts.append("unexpected: " + ", ".join(self.extra))
        super().__init__("; ".join(parts) or "feature key mismatch")


class UnknownCategory(HelmsightError):
    """A token is outside the declared domain of its feature."""

    def __init__(self, feature: str, token: str):
        self.feature = feature
        self.token = token
        super().__init__(f"unknown category {token!r} for feature {feature!r}")


class UnknownBehaviour(UnknownCategory):
    """A behaviour token is not one of the six supported behaviours."""

    def __init__(self, token: str):
        super().__init__("behaviour", token)


class InvalidPlan(HelmsightError):
    """A mission plan violates its structural constraints."""


class UnknownScenario(HelmsightError):
    """Requested scripted scenario does not exist."""

    def __init__(self, name: str, known: Iterable[str]):
        self.name = name
        super().__init__(f"unknown scenario {name!r}; known: {', '.join(known)}")


class ParseError(HelmsightError):
    """A log line could not be parsed."""

    def __init__(self, line_number: int, reason: str):
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"line {line_number}: {reason}")


class DegenerateClass(HelmsightError):
    """A class has too few rows to be split."""


class EmptyDataset(HelmsightError):
    """An operation received a dataset with no rows."""


class UnlabelledData(HelmsightError):
    """An operation requiring labels received an unlabelled dataset."""


class EmptyNode(HelmsightError):
    """Impurity was requested for an empty class-count vector."""


class InvalidAlpha(HelmsightError):
    """Smoothing strength must be positive."""


class InvalidK(HelmsightError):
    """Neighbour count outside [1, training rows]."""


class ModelFormatError(HelmsightError):
    """A model file is malformed or has an unsupported format version."""


class VocabularyMismatch(HelmsightError):
    """A model file was trained against a different feature vocabulary."""


class LengthMismatch(HelmsightError):
    """Paired label vectors have different lengths."""


class EmptyMatrix(HelmsightError):
    """Metrics were requested for an all-zero confusion matrix."""


class InsufficientClassCount(HelmsightError):
    """A class has fewer rows than the number of folds requires."""


class EmptyBackground(HelmsightError):
    """Attribution requires a non-empty background set."""


class EmptyEdit(HelmsightError):
    """A counterfactual query carried no edits."""


class TimeRegression(HelmsightError):
    """A knowledge entry is older than the vessel's latest entry."""


class MissingTemplate(HelmsightError):
    """The realiser has no template for the requested content."""
