"""End-to-end orchestration: state stream -> predict -> explain -> store -> verbalise.

For each incoming record the surrogate predicts the behaviour, an
attribution is computed, causality is inferred, a concept set is appended
to the knowledge base (deduplicated against the vessel's latest entry)
and every stored entry is realised into a sentence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .dataset import dataset_from_logs
from .domain import StateRecord
from .explain import Background, attribute, infer_causality
from .knowledge import ConceptSet, KnowledgeBase, make_concept_set, save_knowledge
from .realiser import realise
from .sim import SCENARIO_NAMES, StateLog, preset_config, scenario_replay, simulate_missions
from .surrogate import SurrogateModel, predict, train_decision_tree

EmitFn = Callable[[ConceptSet, str], None]


@dataclass
class PipelineResult:
    knowledge: KnowledgeBase
    sentences: list[str] = field(default_factory=list)  # aligned with knowledge.entries
    records_processed: int = 0

    def feed(self) -> list[tuple[ConceptSet, str]]:
        return list(zip(self.knowledge.entries, self.sentences))


def run_records(
    model: SurrogateModel,
    records: Iterable[StateRecord],
    mission: str,
    knowledge: KnowledgeBase | None = None,
    method: str | None = None,
    background: Background | None = None,
    emit: EmitFn | None = None,
) -> PipelineResult:
    """Feed records through predict -> explain -> represent -> realise."""
    result = PipelineResult(knowledge if knowledge is not None else KnowledgeBase())
    if len(result.knowledge.entries) != len(result.sentences):
        result.sentences = [realise(entry) for entry in result.knowledge.entries]
    for record in records:
        prediction = predict(model, record.state)
        attribution = attribute(model, record.state, background, method)
        causality = infer_causality(attribution, record.state)
        concept_set = make_concept_set(
            record.vessel, prediction, causality, record.tick, mission
        )
        result.records_processed += 1
        if result.knowledge.append(concept_set):
            sentence = realise(concept_set)
            result.sentences.append(sentence)
            if emit is not None:
                emit(concept_set, sentence)
    return result


def run_log(
    model: SurrogateModel,
    log: StateLog,
    knowledge: KnowledgeBase | None = None,
    method: str | None = None,
    background: Background | None = None,
    emit: EmitFn | None = None,
) -> PipelineResult:
    return run_records(
        model, log.records, log.mission_id, knowledge, method, background, emit
    )


def replay_scenarios(
    model: SurrogateModel,
    names: Sequence[str] = SCENARIO_NAMES,
    method: str | None = None,
    emit: EmitFn | None = None,
) -> PipelineResult:
    """Replay scripted scenarios through one shared knowledge base (they are
    consecutive segments of a single mission)."""
    result: PipelineResult | None = None
    knowledge = KnowledgeBase()
    for name in names:
        log = scenario_replay(name)
        partial = run_log(model, log, knowledge, method, emit=emit)
        if result is None:
            result = partial
        else:
            result.records_processed += partial.records_processed
            result.sentences = partial.sentences
    return result if result is not None else PipelineResult(knowledge)


def train_deployment_model(
    seed: int = 2024, ambiguity_rate: float = 0.05
) -> SurrogateModel:
    """The default runtime surrogate: a depth-8/15-leaf tree trained on
    ambiguity-injected simulation data."""
    config = preset_config("paper-scale", seed, ambiguity_rate=ambiguity_rate)
    data = dataset_from_logs(simulate_missions(config), provenance=f"deployment seed={seed}")
    return train_decision_tree(data, max_depth=8, max_leaf_nodes=15)


@dataclass(frozen=True)
class PipelineConfig:
    model_file: str | None = None
    scenarios: tuple[str, ...] = SCENARIO_NAMES
    log_path: str | None = None
    knowledge_out: str | None = None
    method: str | None = None
    train_seed: int = 2024
    quiet: bool = False


def run_pipeline(config: PipelineConfig) -> int:
    """CLI-facing wrapper; returns a process exit status."""
    from .dataset import load_log
    from .surrogate import load_model

    if config.model_file:
        model = load_model(config.model_file)
    else:
        model = train_deployment_model(config.train_seed)

    def emit(entry: ConceptSet, sentence: str) -> None:
        if not config.quiet:
            print(f"[{entry.time.mission}:{entry.time.tick:>5}] {entry.vessel} "
                  f"{entry.behaviour.token} ({entry.explanation_type}) {sentence}")

    if config.log_path:
        data = load_log(config.log_path)
        records = data.records()
        result = run_records(
            model, records, Path(config.log_path).stem, method=config.method, emit=emit
        )
    else:
        result = replay_scenarios(model, config.scenarios, config.method, emit=emit)

    if config.knowledge_out:
        save_knowledge(result.knowledge.entries, config.knowledge_out)
    return 0
