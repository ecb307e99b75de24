import pytest
from hypothesis import given
from hypothesis import strategies as st

from helmsight.domain import (
    BEHAVIOUR_TOKENS,
    BEHAVIOURS,
    DEFAULT_VOCABULARY,
    FEATURE_DOMAINS,
    FEATURE_NAMES,
    Behaviour,
    VehicleState,
    enumerate_state_space,
    state_from_codes,
    validate_state,
)
from helmsight.errors import UnknownCategory, UnknownFeature


def test_six_behaviours_in_code_order():
    assert BEHAVIOUR_TOKENS == (
        "wait",
        "transit",
        "survey",
        "hold_position",
        "replanned_transit",
        "avoid_obstacle",
    )
    for code, behaviour in enumerate(BEHAVIOURS):
        assert behaviour.code == code
        assert Behaviour.from_code(code) is behaviour
        assert Behaviour.from_token(behaviour.token) is behaviour


def test_behaviour_parse_rejects_unknown_token():
    with pytest.raises(UnknownCategory):
        Behaviour.from_token("fly")


def test_validate_state_accepts_declared_tokens():
    state = validate_state(
        {
            "ready_plan": "true",
            "current_objective": "survey",
            "progress_type": "executing",
            "same_objective": "true",
            "obstacle_found": "false",
        }
    )
    assert state == VehicleState(True, "survey", "executing", True, False)


def test_validate_state_rejects_unknown_category():
    raw = {
        "ready_plan": "maybe",
        "current_objective": "survey",
        "progress_type": "executing",
        "same_objective": "true",
        "obstacle_found": "false",
    }
    with pytest.raises(UnknownCategory) as err:
        validate_state(raw)
    assert err.value.feature == "ready_plan"
    assert err.value.token == "maybe"


def test_validate_state_rejects_missing_keys():
    with pytest.raises(UnknownFeature):
        validate_state({"ready_plan": "true"})


def test_validate_state_rejects_extra_keys():
    raw = {name: FEATURE_DOMAINS[name][0] for name in FEATURE_NAMES}
    raw["depth"] = "10"
    with pytest.raises(UnknownFeature):
        validate_state(raw)


def test_state_space_has_240_unique_valid_states():
    states = enumerate_state_space()
    assert len(states) == 240
    assert len(set(states)) == 240
    for state in states:
        assert validate_state(state.tokens()) == state


def test_state_space_starts_at_all_zero_codes():
    first = enumerate_state_space()[0]
    assert first == VehicleState(False, "none", "idle", False, False)
    assert first.codes() == (0, 0, 0, 0, 0)


def test_state_space_is_deterministic():
    assert enumerate_state_space() == enumerate_state_space()


def test_feature_code_round_trip():
    for i, name in enumerate(FEATURE_NAMES):
        for code, token in enumerate(FEATURE_DOMAINS[name]):
            assert DEFAULT_VOCABULARY.encode(i, token) == code
            assert DEFAULT_VOCABULARY.decode(i, code) == token
        with pytest.raises(UnknownCategory):
            DEFAULT_VOCABULARY.encode(i, "bogus")
        with pytest.raises(UnknownCategory):
            DEFAULT_VOCABULARY.decode(i, len(FEATURE_DOMAINS[name]))


@given(
    st.tuples(
        st.integers(0, 1),
        st.integers(0, 5),
        st.integers(0, 4),
        st.integers(0, 1),
        st.integers(0, 1),
    )
)
def test_any_coded_state_round_trips(codes):
    state = state_from_codes(codes)
    assert state.codes() == codes


def test_vocabulary_digest_is_stable():
    assert DEFAULT_VOCABULARY.digest() == DEFAULT_VOCABULARY.digest()
    assert len(DEFAULT_VOCABULARY.digest()) == 16
