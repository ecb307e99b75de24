"""HTTP service exposing the prediction/explanation pipeline.

Missions run eagerly when created; their explanation feed is stored in the
session and persisted to an append-only knowledge file, and the stream
endpoint replays it as server-sent events (optionally paced).  Prediction,
explanation and what-if queries are stateless.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, StreamingResponse

from ..domain import BEHAVIOUR_TOKENS, FEATURE_DOMAINS, FEATURE_NAMES
from ..errors import HelmsightError, InvalidPlan, UnknownCategory, UnknownFeature, UnknownScenario
from ..explain import attribute, counterfactual, infer_causality
from ..knowledge import ConceptSet, entry_to_dict, save_knowledge
from ..pipeline import run_log, train_deployment_model
from ..realiser import realise, realise_counterfactual
from ..sim import (
    SCENARIO_NAMES,
    SimConfig,
    build_mission,
    preset_config,
    run_mission,
    scenario_replay,
    simulate_missions,
)
from ..surrogate import SurrogateModel, load_model, predict
from .schemas import (
    AttributionPayload,
    ExplainRequest,
    ExplainResponse,
    FeedItem,
    KnowledgeEntryPayload,
    MissionCreated,
    MissionRequest,
    MissionState,
    PredictionPayload,
    PredictRequest,
    StatePayload,
    VocabularyPayload,
    WhatifRequest,
    WhatifResponse,
    causes_payload,
)


@dataclass
class Session:
    mission_id: str
    records: list
    feed: list[tuple[ConceptSet, str]] = field(default_factory=list)


def _bad_request(error: HelmsightError) -> HTTPException:
    return HTTPException(status_code=400, detail=str(error))


def create_app(
    model: SurrogateModel | None = None,
    model_file: str | None = None,
    data_dir: str | Path | None = None,
) -> FastAPI:
    if model is None:
        model = load_model(model_file) if model_file else train_deployment_model()
    knowledge_dir = Path(data_dir) if data_dir else None
    if knowledge_dir:
        knowledge_dir.mkdir(parents=True, exist_ok=True)

    app = FastAPI(title="helmsight", version="0.1.0")
    sessions: dict[str, Session] = {}
    lock = threading.Lock()
    counter = {"next": 0}

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request, error: RequestValidationError):
        fields = ".".join(str(part) for part in error.errors()[0]["loc"] if part != "body")
        return JSONResponse(
            status_code=400,
            content={"detail": f"malformed request body at {fields or 'body'}"},
        )

    def _session(mission_id: str) -> Session:
        with lock:
            if mission_id not in sessions:
                raise HTTPException(status_code=404, detail=f"unknown mission {mission_id!r}")
            return sessions[mission_id]

    def _run_session(log, session_model) -> Session:
        with lock:
            mission_id = f"{log.mission_id}-{counter['next']:03d}"
            counter["next"] += 1
        feed: list[tuple[ConceptSet, str]] = []
        run_log(
            session_model,
            log,
            emit=lambda entry, sentence: feed.append((entry, sentence)),
        )
        session = Session(mission_id=mission_id, records=list(log.records), feed=feed)
        with lock:
            sessions[mission_id] = session
        if knowledge_dir:
            save_knowledge([e for e, _ in feed], knowledge_dir / f"{mission_id}.jsonl")
        return session

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "model": model.kind}

    @app.get("/vocabulary", response_model=VocabularyPayload)
    def vocabulary() -> VocabularyPayload:
        return VocabularyPayload(
            features=[
                {"name": name, "values": list(FEATURE_DOMAINS[name])} for name in FEATURE_NAMES
            ],
            behaviours=list(BEHAVIOUR_TOKENS),
        )

    @app.post("/predict", response_model=PredictionPayload)
    def predict_endpoint(request: PredictRequest) -> PredictionPayload:
        try:
            state = request.state.to_state()
        except (UnknownCategory, UnknownFeature) as error:
            raise _bad_request(error) from None
        return PredictionPayload.from_prediction(predict(model, state))

    @app.post("/explain", response_model=ExplainResponse)
    def explain_endpoint(request: ExplainRequest) -> ExplainResponse:
        try:
            state = request.state.to_state()
            attribution = attribute(model, state, method=request.method)
        except (UnknownCategory, UnknownFeature) as error:
            raise _bad_request(error) from None
        except ValueError as error:
            raise HTTPException(status_code=400, detail=str(error)) from None
        causality = infer_causality(attribution, state)
        from ..knowledge import make_concept_set

        concept_set = make_concept_set(request.vessel, attribution.prediction, causality, 0, "query")
        return ExplainResponse(
            state=StatePayload.from_state(state),
            prediction=PredictionPayload.from_prediction(attribution.prediction),
            attribution=AttributionPayload.from_attribution(attribution, FEATURE_NAMES),
            causes=causes_payload(causality),
            weak=causality.weak,
            sentence=realise(concept_set),
        )

    @app.post("/whatif", response_model=WhatifResponse)
    def whatif_endpoint(request: WhatifRequest) -> WhatifResponse:
        try:
            state = request.state.to_state()
            result = counterfactual(model, state, request.edits, method=request.method)
        except (UnknownCategory, UnknownFeature) as error:
            raise _bad_request(error) from None
        except HelmsightError as error:
            raise _bad_request(error) from None
        sentence = realise_counterfactual(result, request.vessel)
        return WhatifResponse.from_result(result, sentence, FEATURE_NAMES)

    @app.post("/missions", response_model=MissionCreated)
    def create_mission(request: MissionRequest) -> MissionCreated:
        session_model = model
        if request.model_ref:
            try:
                session_model = load_model(request.model_ref)
            except (OSError, HelmsightError) as error:
                raise HTTPException(status_code=400, detail=str(error)) from None
        try:
            if request.plan:
                plan = build_mission(request.plan, seed=request.seed)
                config = SimConfig(
                    seed=request.seed,
                    ambiguity_rate=request.ambiguity,
                    label_noise_rate=request.noise,
                )
                log = run_mission(plan, config, mission_id=f"plan{request.seed}")
            elif request.preset in SCENARIO_NAMES:
                log = scenario_replay(request.preset)
            elif request.preset == "fig5":
                merged = []
                for name in SCENARIO_NAMES:
                    merged.extend(scenario_replay(name).records)
                from ..sim import StateLog

                log = StateLog("fig5", tuple(merged))
            elif request.preset:
                # a live session is one mission; the multi-mission presets
                # only control the tick budget here
                preset = preset_config(
                    request.preset,
                    seed=request.seed,
                    ambiguity_rate=request.ambiguity,
                    label_noise_rate=request.noise,
                )
                config = SimConfig(
                    seed=preset.seed,
                    mission_count=1,
                    mean_mission_ticks=preset.mean_mission_ticks,
                    ambiguity_rate=preset.ambiguity_rate,
                    label_noise_rate=preset.label_noise_rate,
                )
                log = simulate_missions(config)[0]
            else:
                raise HTTPException(status_code=400, detail="either preset or plan is required")
        except (UnknownScenario, InvalidPlan, ValueError) as error:
            raise HTTPException(status_code=400, detail=str(error)) from None

        session = _run_session(log, session_model)
        return MissionCreated(
            mission_id=session.mission_id,
            records=len(session.records),
            entries=len(session.feed),
        )

    @app.get("/missions/{mission_id}/state", response_model=MissionState)
    def mission_state(mission_id: str) -> MissionState:
        session = _session(mission_id)
        record = session.records[-1]
        return MissionState(
            vessel=record.vessel,
            tick=record.tick,
            state=StatePayload.from_state(record.state),
            prediction=PredictionPayload.from_prediction(predict(model, record.state)),
        )

    @app.get("/missions/{mission_id}/knowledge", response_model=list[FeedItem])
    def mission_knowledge(mission_id: str, since_tick: int = Query(default=0)) -> list[FeedItem]:
        session = _session(mission_id)
        return [
            FeedItem(entry=KnowledgeEntryPayload.from_entry(entry), sentence=sentence)
            for entry, sentence in session.feed
            if entry.time.tick >= since_tick
        ]

    @app.get("/missions/{mission_id}/stream")
    def mission_stream(
        mission_id: str,
        since_tick: int = Query(default=0),
        pace: float = Query(default=0.0, ge=0.0, le=5.0),
    ) -> StreamingResponse:
        session = _session(mission_id)

        def generate():
            for entry, sentence in session.feed:
                if entry.time.tick < since_tick:
                    continue
                payload = {"entry": entry_to_dict(entry), "sentence": sentence}
                yield f"id: {entry.time.tick}\nevent: concept_set\ndata: {json.dumps(payload)}\n\n"
                if pace:
                    time.sleep(pace)
            yield "event: end\ndata: {}\n\n"

        return StreamingResponse(generate(), media_type="text/event-stream")

    return app
