"""Command-line entry points; each subcommand is a thin wrapper over the
core package.  `serve` starts the HTTP service."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .dataset import dataset_from_logs, load_log, write_csv, write_log
from .domain import FEATURE_NAMES, validate_state
from .errors import HelmsightError
from .explain import attribute, counterfactual, infer_causality
from .knowledge import load_knowledge
from .pipeline import PipelineConfig, run_pipeline
from .realiser import realise, realise_counterfactual
from .selection import compare_models, comparison_table, evaluate_on
from .sim import PRESETS, SCENARIO_NAMES, SimConfig, preset_config, simulate_missions
from .surrogate import (
    load_model,
    save_model,
    train_categorical_nb,
    train_decision_tree,
    train_knn,
)

DATA_DIR_ENV = "HELMSIGHT_DATA_DIR"


def default_data_dir() -> Path:
    return Path(os.environ.get(DATA_DIR_ENV, "."))


def _parse_state(text: str):
    tokens = {}
    for chunk in text.split(","):
        key, sep, value = chunk.partition("=")
        if not sep:
            raise HelmsightError(f"state entries look like key=value, got {chunk!r}")
        tokens[key.strip()] = value.strip()
    return validate_state(tokens)


def _parse_edits(text: str) -> dict[str, str]:
    edits = {}
    for chunk in text.split(","):
        key, sep, value = chunk.partition("=")
        if not sep:
            raise HelmsightError(f"edits look like key=value, got {chunk!r}")
        edits[key.strip()] = value.strip()
    return edits


def _emit_kv(record: dict, indent: int = 0) -> None:
    pad = "  " * indent
    for key, value in record.items():
        if isinstance(value, dict):
            print(f"{pad}{key}:")
            _emit_kv(value, indent + 1)
        else:
            print(f"{pad}{key}={value}")


def cmd_simulate(args) -> int:
    if args.preset:
        config = preset_config(
            args.preset, seed=args.seed, ambiguity_rate=args.ambiguity, label_noise_rate=args.noise
        )
    else:
        config = SimConfig(
            seed=args.seed,
            mission_count=args.missions,
            mean_mission_ticks=args.mean_ticks,
            ambiguity_rate=args.ambiguity,
            label_noise_rate=args.noise,
        )
    data = dataset_from_logs(simulate_missions(config))
    out = Path(args.out)
    if out.suffix.lower() == ".csv":
        write_csv(data.records(), out)
    else:
        write_log(data.records(), out)
    print(f"wrote {data.n_rows} records to {out}")
    return 0


_TRAINERS = {
    "tree": lambda data, args: train_decision_tree(data, args.max_depth, args.max_leaf_nodes),
    "nb": lambda data, args: train_categorical_nb(data, args.alpha),
    "knn": lambda data, args: train_knn(data, args.k),
}


def cmd_train(args) -> int:
    data = load_log(args.data)
    model = _TRAINERS[args.model](data, args)
    save_model(model, args.out)
    print(f"trained {args.model} on {data.n_rows} rows -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    model = load_model(args.model_file)
    data = load_log(args.data)
    metrics, cm = evaluate_on(model, data)
    report = {
        "model": model.kind,
        "rows": data.n_rows,
        "accuracy": metrics.accuracy,
        "precision": metrics.precision,
        "recall": metrics.recall,
        "f1": metrics.f1,
        "confusion_matrix": cm.tolist(),
    }
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=1) + "\n", encoding="utf-8")
    print(
        f"accuracy={metrics.accuracy:.4f} precision={metrics.precision:.4f} "
        f"recall={metrics.recall:.4f} f1={metrics.f1:.4f}"
    )
    return 0


def cmd_compare(args) -> int:
    data = load_log(args.data)
    reports = compare_models(data, outer_k=args.outer_k, inner_k=args.inner_k, seed=args.seed)
    table = comparison_table(reports)
    print(table)
    if args.report:
        payload = {kind: report.to_dict() for kind, report in reports.items()}
        Path(args.report).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
    return 0


def cmd_explain(args) -> int:
    model = load_model(args.model_file)
    state = _parse_state(args.state)
    attribution = attribute(model, state, method=args.method)
    causality = infer_causality(attribution, state)
    from .domain import BEHAVIOUR_TOKENS
    from .knowledge import make_concept_set

    concept_set = make_concept_set(args.vessel, attribution.prediction, causality, 0, "query")
    _emit_kv(
        {
            "behaviour": BEHAVIOUR_TOKENS[attribution.prediction.predicted],
            "confidence": round(attribution.prediction.confidence(), 6),
            "method": attribution.method,
            "base": round(attribution.base, 6),
            "phi": {
                name: round(value, 6) for name, value in zip(FEATURE_NAMES, attribution.phi)
            },
            "causes": {c.feature: f"{c.value} ({c.weight:.3f})" for c in causality.causes},
            "sentence": realise(concept_set),
        }
    )
    return 0


def cmd_whatif(args) -> int:
    model = load_model(args.model_file)
    state = _parse_state(args.state)
    edits = _parse_edits(args.edit)
    result = counterfactual(model, state, edits, method=args.method)
    from .domain import BEHAVIOUR_TOKENS

    _emit_kv(
        {
            "original_behaviour": BEHAVIOUR_TOKENS[result.original_prediction.predicted],
            "result_behaviour": BEHAVIOUR_TOKENS[result.result_prediction.predicted],
            "changed": result.changed,
            "delta_phi": {
                name: round(value, 6) for name, value in zip(FEATURE_NAMES, result.delta_phi)
            },
            "sentence": realise_counterfactual(result, args.vessel),
        }
    )
    return 0


def cmd_verbalise(args) -> int:
    kb = load_knowledge(args.kb)
    type_filter = {
        "E1": "behaviour_causality",
        "E2": "replanning_clarification",
        "E3": "counterfactual",
    }.get(args.type)
    for entry in kb.entries:
        if type_filter and entry.explanation_type != type_filter:
            continue
        print(realise(entry))
    return 0


def cmd_replay(args) -> int:
    names = SCENARIO_NAMES if args.scenario == "all" else (args.scenario,)
    config = PipelineConfig(
        model_file=args.model_file,
        scenarios=tuple(names),
        knowledge_out=args.kb_out,
        method=args.method,
        train_seed=args.seed,
        quiet=args.quiet,
    )
    return run_pipeline(config)


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(model_file=args.model_file, data_dir=args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="helmsight",
        description="Surrogate-model transparency for autonomous vessel behaviour.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate labelled mission logs")
    p.add_argument("--missions", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ambiguity", type=float, default=0.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--mean-ticks", type=int, default=1350)
    p.add_argument("--preset", choices=sorted(PRESETS), default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="train a surrogate model")
    p.add_argument("--model", choices=("tree", "nb", "knn"), required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--max-leaf-nodes", type=int, default=15)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--k", type=int, default=5)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a model file on a labelled log")
    p.add_argument("--model-file", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="nested-CV comparison of all models")
    p.add_argument("--data", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--outer-k", type=int, default=5)
    p.add_argument("--inner-k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("explain", help="attribute a prediction to features")
    p.add_argument("--model-file", required=True)
    p.add_argument("--state", required=True, help="key=value,... over the five features")
    p.add_argument("--method", choices=("shapley", "tree_path"), default=None)
    p.add_argument("--vessel", default="vehicle")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("whatif", help="counterfactual query")
    p.add_argument("--model-file", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--edit", required=True, help="key=value,... feature edits")
    p.add_argument("--method", choices=("shapley", "tree_path"), default=None)
    p.add_argument("--vessel", default="vehicle")
    p.set_defaults(func=cmd_whatif)

    p = sub.add_parser("verbalise", help="print one sentence per knowledge entry")
    p.add_argument("--kb", required=True)
    p.add_argument("--type", choices=("E1", "E2", "E3"), default=None)
    p.set_defaults(func=cmd_verbalise)

    p = sub.add_parser("replay", help="pipe scripted scenarios through the pipeline")
    p.add_argument("--scenario", choices=SCENARIO_NAMES + ("all",), default="all")
    p.add_argument("--model-file", default=None)
    p.add_argument("--kb-out", default=None)
    p.add_argument("--method", choices=("shapley", "tree_path"), default=None)
    p.add_argument("--seed", type=int, default=2024, help="training seed when no model file is given")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--model-file", default=None)
    p.add_argument("--data-dir", default=str(default_data_dir()))
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (HelmsightError, OSError, ValueError) as error:
        print(f"error: {error}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
