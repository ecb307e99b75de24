import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helmsight.dataset import (
    Dataset,
    dataset_from_logs,
    dataset_from_records,
    load_log,
    parse_log_lines,
    read_csv,
    stratified_split,
    write_csv,
    write_log,
)
from helmsight.domain import BEHAVIOUR_TOKENS, DEFAULT_VOCABULARY, Behaviour, StateRecord, VehicleState
from helmsight.errors import DegenerateClass, ParseError, UnknownCategory
from helmsight.sim import preset_config, simulate_missions

LINE = (
    "vessel=heron tick={tick} ready_plan=true current_objective=survey "
    "progress_type=executing same_objective=true obstacle_found=false behaviour=survey"
)


def _records(n=10):
    state = VehicleState(True, "survey", "executing", True, False)
    return [StateRecord("heron", tick, state, Behaviour.SURVEY) for tick in range(n)]


def test_load_log_counts_rows(tmp_path):
    path = tmp_path / "log.txt"
    path.write_text("\n".join(LINE.format(tick=t) for t in range(10)) + "\n", encoding="utf-8")
    data = load_log(path)
    assert data.n_rows == 10
    assert data.features.shape == (10, 5)


def test_unknown_behaviour_token_is_a_category_error():
    line = LINE.format(tick=0).replace("behaviour=survey", "behaviour=fly")
    with pytest.raises(UnknownCategory):
        parse_log_lines([line])


def test_malformed_line_reports_line_number():
    lines = [LINE.format(tick=0), "vessel=heron tick=one"]
    with pytest.raises(ParseError) as err:
        parse_log_lines(lines)
    assert err.value.line_number == 2


def test_duplicate_field_is_rejected():
    with pytest.raises(ParseError):
        parse_log_lines([LINE.format(tick=0) + " tick=4"])


def test_log_round_trip_is_byte_identical(tmp_path):
    config = preset_config("trial", seed=3, ambiguity_rate=0.02)
    data = dataset_from_logs(simulate_missions(config))
    first = tmp_path / "a.log"
    second = tmp_path / "b.log"
    write_log(data.records(), first)
    reloaded = load_log(first)
    write_log(reloaded.records(), second)
    assert first.read_bytes() == second.read_bytes()
    assert np.array_equal(data.features, reloaded.features)
    assert np.array_equal(data.labels, reloaded.labels)


def test_csv_round_trip(tmp_path):
    records = _records(6)
    path = tmp_path / "log.csv"
    write_csv(records, path)
    assert read_csv(path) == records
    assert load_log(path).n_rows == 6


def test_csv_rejects_unknown_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1,2,3\n", encoding="utf-8")
    with pytest.raises(ParseError):
        read_csv(path)


def test_unlabelled_stream_loads_without_labels(tmp_path):
    line = LINE.format(tick=0).replace(" behaviour=survey", "")
    path = tmp_path / "log.txt"
    path.write_text(line + "\n", encoding="utf-8")
    data = load_log(path)
    assert data.labels is None


def test_paper_scale_dataset_shape(clean_data):
    assert clean_data.n_rows >= 5056
    assert clean_data.features.shape[1] == 5
    assert clean_data.class_names == BEHAVIOUR_TOKENS


def _synthetic(counts):
    rows, labels = [], []
    for code, count in enumerate(counts):
        for _ in range(count):
            rows.append([0, 0, 0, 0, 0])
            labels.append(code)
    return Dataset(
        features=np.asarray(rows),
        labels=np.asarray(labels),
        vocabulary=DEFAULT_VOCABULARY,
        class_names=BEHAVIOUR_TOKENS,
    )


def test_split_even_classes_is_exactly_proportional():
    data = _synthetic([50, 50])
    split = stratified_split(data, 0.2, seed=1)
    assert len(split.test_indices) == 20
    test_labels = data.labels[list(split.test_indices)]
    assert (test_labels == 0).sum() == 10
    assert (test_labels == 1).sum() == 10


def test_split_imbalanced_uses_largest_remainder():
    data = _synthetic([90, 10])
    split = stratified_split(data, 0.2, seed=1)
    test_labels = data.labels[list(split.test_indices)]
    assert (test_labels == 0).sum() == 18
    assert (test_labels == 1).sum() == 2


def test_split_is_deterministic():
    data = _synthetic([40, 25, 35])
    assert stratified_split(data, 0.3, seed=9) == stratified_split(data, 0.3, seed=9)


def test_split_partitions_rows_exactly():
    data = _synthetic([40, 25, 35])
    split = stratified_split(data, 0.25, seed=4)
    combined = sorted(split.train_indices + split.test_indices)
    assert combined == list(range(data.n_rows))


def test_split_rejects_single_row_class():
    data = _synthetic([30, 1])
    with pytest.raises(DegenerateClass):
        stratified_split(data, 0.2, seed=0)


@given(st.integers(0, 2**31 - 1), st.floats(0.1, 0.5))
def test_split_class_proportions_stay_close(seed, fraction):
    data = _synthetic([120, 60, 30])
    split = stratified_split(data, fraction, seed=seed)
    total = data.class_counts() / data.n_rows
    for indices in (split.train_indices, split.test_indices):
        labels = data.labels[list(indices)]
        proportions = np.bincount(labels, minlength=6) / len(labels)
        for c in range(3):
            # classes with >= 25 rows stay within 2 percentage points
            if data.class_counts()[c] >= 25:
                assert abs(proportions[c] - total[c]) < 0.02


def test_dataset_records_round_trip(clean_data):
    subset = clean_data.subset(range(50))
    rebuilt = dataset_from_records(subset.records())
    assert np.array_equal(rebuilt.features, subset.features)
    assert np.array_equal(rebuilt.labels, subset.labels)
