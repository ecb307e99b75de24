"""Shared fixtures: simulated datasets and trained models are expensive, so
they are built once per session with pinned seeds."""

from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from helmsight.dataset import dataset_from_logs
from helmsight.pipeline import train_deployment_model
from helmsight.sim import preset_config, simulate_missions
from helmsight.surrogate import train_decision_tree

settings.register_profile(
    "ci",
    derandomize=True,
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")

CLEAN_SEED = 11
TRIAL_SEED = 99
AMBIGUOUS_SEED = 2024


@pytest.fixture(scope="session")
def clean_data():
    logs = simulate_missions(preset_config("paper-scale", seed=CLEAN_SEED))
    return dataset_from_logs(logs, provenance=f"paper-scale seed={CLEAN_SEED}")


@pytest.fixture(scope="session")
def trial_data():
    logs = simulate_missions(preset_config("trial", seed=TRIAL_SEED))
    return dataset_from_logs(logs, provenance=f"trial seed={TRIAL_SEED}")


@pytest.fixture(scope="session")
def ambiguous_data():
    logs = simulate_missions(
        preset_config("paper-scale", seed=AMBIGUOUS_SEED, ambiguity_rate=0.05)
    )
    return dataset_from_logs(logs, provenance=f"paper-scale seed={AMBIGUOUS_SEED} ambiguity=0.05")


@pytest.fixture(scope="session")
def clean_tree(clean_data):
    return train_decision_tree(clean_data, max_depth=8, max_leaf_nodes=15)


@pytest.fixture(scope="session")
def deployment_tree():
    return train_deployment_model()
