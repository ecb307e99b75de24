"""Log ingestion, categorical encoding and deterministic splits.

The on-disk log format is one record per line:

    vessel=<id> tick=<int> ready_plan=<bool> current_objective=<token>
    progress_type=<token> same_objective=<bool> obstacle_found=<bool>
    behaviour=<token>

(single line, space-separated, LF-terminated; `behaviour` is omitted for
unlabelled streams).  A CSV export with the same columns is also supported.
Feature vocabularies are closed: codes come from the domain module and are
never inferred from data, so a model trained on one log applies to any
other.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .domain import (
    BEHAVIOUR_TOKENS,
    DEFAULT_VOCABULARY,
    FEATURE_NAMES,
    Behaviour,
    FeatureVocabulary,
    StateRecord,
    validate_state,
)
from .errors import DegenerateClass, ParseError, UnknownBehaviour
from .sim import StateLog

_LOG_KEYS = ("vessel", "tick", *FEATURE_NAMES)
_CSV_HEADER = (*_LOG_KEYS, "behaviour")


@dataclass(frozen=True)
class Dataset:
    """Encoded feature matrix plus labels and record metadata."""

    features: np.ndarray  # (rows, n_features) integer codes
    labels: np.ndarray | None  # (rows,) class codes, None when unlabelled
    vocabulary: FeatureVocabulary
    class_names: tuple[str, ...]
    vessels: tuple[str, ...] = ()
    ticks: tuple[int, ...] = ()
    provenance: str = ""

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=np.int64)
        object.__setattr__(self, "features", features)
        if features.ndim != 2 or features.shape[1] != self.vocabulary.n_features:
            raise ValueError("feature matrix shape does not match the vocabulary")
        sizes = self.vocabulary.sizes()
        for column, size in enumerate(sizes):
            col = features[:, column]
            if col.size and (col.min() < 0 or col.max() >= size):
                raise ValueError(f"feature column {column} holds codes outside 0..{size - 1}")
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            object.__setattr__(self, "labels", labels)
            if labels.shape != (features.shape[0],):
                raise ValueError("labels length must match feature rows")
            if labels.size and (labels.min() < 0 or labels.max() >= len(self.class_names)):
                raise ValueError("label codes outside the declared classes")

    @property
    def n_rows(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def class_counts(self) -> np.ndarray:
        if self.labels is None:
            return np.zeros(self.n_classes, dtype=np.int64)
        return np.bincount(self.labels, minlength=self.n_classes)

    def subset(self, indices: Sequence[int], provenance: str = "") -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            features=self.features[idx],
            labels=None if self.labels is None else self.labels[idx],
            vocabulary=self.vocabulary,
            class_names=self.class_names,
            vessels=tuple(self.vessels[i] for i in idx) if self.vessels else (),
            ticks=tuple(self.ticks[i] for i in idx) if self.ticks else (),
            provenance=provenance or self.provenance,
        )

    def records(self) -> tuple[StateRecord, ...]:
        """Reconstruct state records; requires vessel/tick metadata."""
        if len(self.vessels) != self.n_rows or len(self.ticks) != self.n_rows:
            raise ValueError("dataset carries no per-row vessel/tick metadata")
        out = []
        for i in range(self.n_rows):
            tokens = self.vocabulary.decode_codes(self.features[i])
            behaviour = None
            if self.labels is not None:
                behaviour = Behaviour.from_code(int(self.labels[i]))
            out.append(
                StateRecord(self.vessels[i], self.ticks[i], validate_state(tokens), behaviour)
            )
        return tuple(out)


def dataset_from_records(records: Iterable[StateRecord], provenance: str = "") -> Dataset:
    rows, labels, vessels, ticks = [], [], [], []
    labelled = None
    for record in records:
        rows.append(record.state.codes())
        vessels.append(record.vessel)
        ticks.append(record.tick)
        if record.behaviour is None:
            if labelled is True:
                raise ValueError("mixed labelled and unlabelled records")
            labelled = False
        else:
            if labelled is False:
                raise ValueError("mixed labelled and unlabelled records")
            labelled = True
            labels.append(record.behaviour.code)
    features = np.asarray(rows, dtype=np.int64).reshape(len(rows), len(FEATURE_NAMES))
    return Dataset(
        features=features,
        labels=np.asarray(labels, dtype=np.int64) if labelled else None,
        vocabulary=DEFAULT_VOCABULARY,
        class_names=BEHAVIOUR_TOKENS,
        vessels=tuple(vessels),
        ticks=tuple(ticks),
        provenance=provenance,
    )


def dataset_from_logs(logs: Iterable[StateLog], provenance: str = "") -> Dataset:
    """Flatten mission logs into one dataset, offsetting ticks per mission."""
    merged: list[StateRecord] = []
    offset = 0
    for log in logs:
        highest = offset
        for record in log.records:
            shifted = record.tick + offset
            merged.append(StateRecord(record.vessel, shifted, record.state, record.behaviour))
            highest = max(highest, shifted)
        offset = highest + 1
    return dataset_from_records(merged, provenance)


# --- plain-text log format ---------------------------------------------------


def _format_record(record: StateRecord) -> str:
    tokens = record.state.tokens()
    parts = [f"vessel={record.vessel}", f"tick={record.tick}"]
    parts.extend(f"{name}={tokens[name]}" for name in FEATURE_NAMES)
    if record.behaviour is not None:
        parts.append(f"behaviour={record.behaviour.token}")
    return " ".join(parts)


def write_log(records: Iterable[StateRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(_format_record(record) + "\n")


def _parse_line(line: str, line_number: int) -> StateRecord:
    fields: dict[str, str] = {}
    for chunk in line.split(" "):
        key, sep, value = chunk.partition("=")
        if not sep or not key:
            raise ParseError(line_number, f"malformed field {chunk!r}")
        if key in fields:
            raise ParseError(line_number, f"duplicate field {key!r}")
        fields[key] = value
    missing = [key for key in _LOG_KEYS if key not in fields]
    if missing:
        raise ParseError(line_number, "missing fields: " + ", ".join(missing))
    extra = [key for key in fields if key not in _CSV_HEADER]
    if extra:
        raise ParseError(line_number, "unexpected fields: " + ", ".join(extra))
    try:
        tick = int(fields["tick"])
    except ValueError:
        raise ParseError(line_number, f"tick is not an integer: {fields['tick']!r}") from None
    if tick < 0:
        raise ParseError(line_number, f"tick must be non-negative: {tick}")
    state = validate_state({name: fields[name] for name in FEATURE_NAMES})
    behaviour = None
    if "behaviour" in fields:
        behaviour = Behaviour.from_token(fields["behaviour"])
    return StateRecord(fields["vessel"], tick, state, behaviour)


def parse_log_lines(lines: Iterable[str]) -> list[StateRecord]:
    records = []
    for line_number, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line:
            continue
        records.append(_parse_line(line, line_number))
    return records


def load_log(path: str | Path, provenance: str | None = None) -> Dataset:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        records = read_csv(path)
    else:
        with open(path, "r", encoding="utf-8") as handle:
            records = parse_log_lines(handle)
    return dataset_from_records(records, provenance if provenance is not None else str(path))


# --- CSV export ---------------------------------------------------------------


def write_csv(records: Iterable[StateRecord], path: str | Path) -> None:
    records = list(records)
    labelled = any(r.behaviour is not None for r in records)
    header = _CSV_HEADER if labelled else _LOG_KEYS
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for record in records:
            tokens = record.state.tokens()
            row = [record.vessel, str(record.tick)] + [tokens[name] for name in FEATURE_NAMES]
            if labelled:
                row.append(record.behaviour.token if record.behaviour else "")
            writer.writerow(row)


def read_csv(path: str | Path) -> list[StateRecord]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(1, "empty CSV file") from None
        if tuple(header) not in (_CSV_HEADER, _LOG_KEYS):
            raise ParseError(1, "unexpected CSV header: " + ",".join(header))
        labelled = tuple(header) == _CSV_HEADER
        records = []
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(line_number, f"expected {len(header)} columns, got {len(row)}")
            fields = dict(zip(header, row))
            try:
                tick = int(fields["tick"])
            except ValueError:
                raise ParseError(line_number, f"tick is not an integer: {fields['tick']!r}") from None
            state = validate_state({name: fields[name] for name in FEATURE_NAMES})
            behaviour = None
            if labelled:
                try:
                    behaviour = Behaviour.from_token(fields["behaviour"])
                except UnknownBehaviour:
                    raise
            records.append(StateRecord(fields["vessel"], tick, state, behaviour))
    return records


# --- deterministic stratified splits -----------------------------------------


@dataclass(frozen=True)
class Split:
    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    seed: int

    def __post_init__(self) -> None:
        train, test = set(self.train_indices), set(self.test_indices)
        if train & test:
            raise ValueError("train and test indices overlap")


def stratified_split(dataset: Dataset, test_fraction: float, seed: int) -> Split:
    """Per-class proportional allocation with largest-remainder rounding."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    if dataset.labels is None:
        raise DegenerateClass("cannot stratify an unlabelled dataset")
    n = dataset.n_rows
    counts = dataset.class_counts()
    present = [c for c in range(dataset.n_classes) if counts[c] > 0]
    for c in present:
        if counts[c] == 1:
            raise DegenerateClass(
                f"class {dataset.class_names[c]!r} has a single row and cannot be split"
            )
    target_total = round(n * test_fraction)
    quotas = {c: counts[c] * test_fraction for c in present}
    allocation = {c: int(quotas[c]) for c in present}
    remaining = target_total - sum(allocation.values())
    # ties broken by class code order
    by_remainder = sorted(present, key=lambda c: (-(quotas[c] - allocation[c]), c))
    for c in by_remainder:
        if remaining <= 0:
            break
        if allocation[c] < counts[c] - 1:
            allocation[c] += 1
            remaining -= 1

    rng = random.Random(seed)
    train: list[int] = []
    test: list[int] = []
    for c in present:
        rows = np.flatnonzero(dataset.labels == c).tolist()
        rng.shuffle(rows)
        take = allocation[c]
        test.extend(rows[:take])
        train.extend(rows[take:])
    return Split(tuple(sorted(train)), tuple(sorted(test)), seed)
