"""Deterministic stand-in for the vessel autonomy.

Runs a mission plan over two collaborating vessels (a surveyor executing
the plan and a scout reporting obstacles), emitting per-tick labelled
state records.  Labels come from an explicit rule table over the vehicle
state, which doubles as the fidelity oracle for the surrogate models.

One tick is one simulated second.  Everything is driven by seeded RNGs,
so a (plan, config) pair always reproduces the same log bit for bit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .domain import BEHAVIOURS, N_BEHAVIOURS, Behaviour, StateRecord, VehicleState
from .errors import InvalidPlan, UnknownScenario

OBJECTIVE_KINDS = ("launch", "waypoint", "survey", "hold", "recovery")

SURVEYOR = "heron"
SCOUT = "philos"


def reference_policy(state: VehicleState) -> Behaviour:
    """Behaviour activation rules; first matching rule wins."""
    if not state.ready_plan:
        return Behaviour.WAIT
    if state.obstacle_found and state.progress_type == "transiting":
        return Behaviour.AVOID_OBSTACLE
    if state.progress_type == "replanning":
        return Behaviour.REPLANNED_TRANSIT
    if state.progress_type == "transiting":
        return Behaviour.TRANSIT
    if state.progress_type == "executing":
        if not state.same_objective:
            return Behaviour.TRANSIT
        if state.current_objective == "survey":
            return Behaviour.SURVEY
        if state.current_objective in ("hold", "launch", "recovery"):
            return Behaviour.HOLD_POSITION
    return Behaviour.WAIT


@dataclass(frozen=True)
class Objective:
    """One plan step: approach transit followed by on-station execution."""

    kind: str
    transit_ticks: int
    execute_ticks: int

    def __post_init__(self) -> None:
        if self.kind not in OBJECTIVE_KINDS:
            raise InvalidPlan(f"unknown objective kind {self.kind!r}")
        if self.transit_ticks < 0 or self.execute_ticks < 0:
            raise InvalidPlan("objective durations must be non-negative")
        if self.transit_ticks + self.execute_ticks < 1:
            raise InvalidPlan("objective must last at least one tick")


@dataclass(frozen=True)
class StaticObstacle:
    """A known obstacle crossed during one objective's transit leg."""

    objective_index: int
    offset: int
    length: int


@dataclass(frozen=True)
class MissionPlan:
    objectives: tuple[Objective, ...]
    static_obstacles: tuple[StaticObstacle, ...] = ()
    dynamic_events: tuple[int, ...] = ()  # absolute ticks of scout reports

    def __post_init__(self) -> None:
        if not self.objectives:
            raise InvalidPlan("plan has no objectives")
        if self.objectives[0].kind != "launch":
            raise InvalidPlan("first objective must be launch")
        if self.objectives[-1].kind != "recovery":
            raise InvalidPlan("last objective must be recovery")


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    mission_count: int = 1
    mean_mission_ticks: int = 1350
    label_noise_rate: float = 0.0
    ambiguity_rate: float = 0.0

    def __post_init__(self) -> None:
        for name in ("label_noise_rate", "ambiguity_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {rate}")


@dataclass(frozen=True)
class StateLog:
    """Per-mission record stream, ordered by (tick, vessel)."""

    mission_id: str
    records: tuple[StateRecord, ...]

    def __post_init__(self) -> None:
        last_tick: dict[str, int] = {}
        for record in self.records:
            previous = last_tick.get(record.vessel)
            if previous is not None and record.tick <= previous:
                raise ValueError(
                    f"ticks for vessel {record.vessel!r} must strictly increase"
                )
            last_tick[record.vessel] = record.tick

    def vessels(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for record in self.records:
            seen.setdefault(record.vessel, None)
        return tuple(seen)

    def for_vessel(self, vessel: str) -> tuple[StateRecord, ...]:
        return tuple(r for r in self.records if r.vessel == vessel)


# --- plan construction -----------------------------------------------------

_DEFAULT_DURATIONS = {
    # kind: ((transit lo, transit hi), (execute lo, execute hi))
    "launch": ((10, 20), (6, 12)),
    "recovery": ((10, 20), (6, 12)),
    # survey areas are adjacent: short hops between long on-station sweeps
    "survey": ((13, 18), (110, 160)),
    "waypoint": ((8, 20), (0, 0)),
    "hold": ((8, 25), (25, 60)),
}

# Fraction of survey/hold objectives started in place (the vehicle is
# already on station, so the approach transit is skipped).
_IN_PLACE_RATE = 0.35


def _draw_objective(kind: str, rng: random.Random) -> Objective:
    (t_lo, t_hi), (e_lo, e_hi) = _DEFAULT_DURATIONS[kind]
    transit = rng.randint(t_lo, t_hi)
    execute = rng.randint(e_lo, e_hi) if e_hi else 0
    if kind in ("hold", "survey") and rng.random() < _IN_PLACE_RATE:
        transit = 0
    return Objective(kind, transit, execute)


def _draw_obstacles(
    objectives: Sequence[Objective], rng: random.Random
) -> tuple[tuple[StaticObstacle, ...], tuple[int, ...]]:
    statics: list[StaticObstacle] = []
    for index, objective in enumerate(objectives):
        leg = objective.transit_ticks
        if leg >= 10 and rng.random() < 0.45:
            length = rng.randint(2, 3)
            offset = rng.randint(2, max(2, leg - length - 2))
            statics.append(StaticObstacle(index, offset, length))
    total = sum(o.transit_ticks + o.execute_ticks for o in objectives)
    events = sorted(
        rng.randint(total // 8, max(total // 8 + 1, total - 50))
        for _ in range(rng.randint(4, 6))
    )
    return tuple(statics), tuple(events)


def build_mission(objective_kinds: Sequence[str], seed: int) -> MissionPlan:
    """Wrap the given objective kinds into a full plan with seeded durations."""
    if not objective_kinds:
        raise InvalidPlan("objective_kinds must not be empty")
    kinds = list(objective_kinds)
    for kind in kinds:
        if kind not in OBJECTIVE_KINDS:
            raise InvalidPlan(f"unknown objective kind {kind!r}")
    if not kinds or kinds[0] != "launch":
        kinds.insert(0, "launch")
    if kinds[-1] != "recovery":
        kinds.append("recovery")
    rng = random.Random(f"plan:{seed}")
    objectives = tuple(_draw_objective(kind, rng) for kind in kinds)
    statics, events = _draw_obstacles(objectives, rng)
    return MissionPlan(objectives, statics, events)


def generate_mission_plan(seed: str | int, mean_mission_ticks: int = 1350) -> MissionPlan:
    """Draw a mission whose nominal duration approximates the requested mean."""
    rng = random.Random(f"mission:{seed}")
    launch = _draw_objective("launch", rng)
    recovery = _draw_objective("recovery", rng)
    overhead = 45  # pre-launch, gaps, replanning and completed-tail allowance
    budget = mean_mission_ticks - overhead
    budget -= launch.transit_ticks + launch.execute_ticks
    budget -= recovery.transit_ticks + recovery.execute_ticks

    body: list[Objective] = [_draw_objective("survey", rng)]
    budget -= body[0].transit_ticks + body[0].execute_ticks
    while budget >= 70:
        kind = rng.choices(("survey", "waypoint", "hold"), weights=(0.5, 0.25, 0.25))[0]
        objective = _draw_objective(kind, rng)
        cost = objective.transit_ticks + objective.execute_ticks
        if cost > budget:
            if kind == "survey" and budget - objective.transit_ticks >= 60:
                objective = Objective(kind, objective.transit_ticks, budget - objective.transit_ticks)
                cost = budget
            else:
                break
        body.append(objective)
        budget -= cost
    if budget > 0:
        for i in range(len(body) - 1, -1, -1):
            if body[i].kind == "survey":
                body[i] = Objective("survey", body[i].transit_ticks, body[i].execute_ticks + budget)
                break

    objectives = (launch, *body, recovery)
    statics, events = _draw_obstacles(objectives, rng)
    return MissionPlan(objectives, statics, events)


# --- mission execution -----------------------------------------------------


@dataclass
class _TrueTick:
    ready: bool
    objective: str
    progress: str
    obstacle: bool


class _Timeline:
    """Tick-by-tick truth for one vessel, with obstacle/replan insertion."""

    def __init__(self, rng: random.Random, report_windows: Sequence[tuple[int, int]]):
        self.rng = rng
        self.report_windows = list(report_windows)
        self.handled: set[int] = set()
        self.ticks: list[_TrueTick] = []

    def _report_active(self, tick: int) -> int | None:
        for i, (start, end) in enumerate(self.report_windows):
            if start <= tick < end:
                return i
        return None

    def emit(self, n: int, ready: bool, objective: str, progress: str, obstacle: bool = False) -> None:
        for _ in range(n):
            flag = obstacle
            if not flag:
                flag = self._report_active(len(self.ticks)) is not None
            self.ticks.append(_TrueTick(ready, objective, progress, flag))

    def emit_transit_leg(self, objective: str, length: int, statics: Iterable[tuple[int, int]]) -> None:
        """Transit with obstacle windows; an avoidance run triggers one replan."""
        static_windows = list(statics)
        offset = 0
        while offset < length:
            tick = len(self.ticks)
            report = self._report_active(tick)
            static_hit = any(s <= offset < s + w for s, w in static_windows)
            obstructed = static_hit or (report is not None and report not in self.handled)
            if obstructed:
                # avoid while the report lasts, then replan once
                while offset < length and (
                    any(s <= offset < s + w for s, w in static_windows)
                    or self._report_active(len(self.ticks)) is not None
                ):
                    self.ticks.append(_TrueTick(True, objective, "transiting", True))
                    offset += 1
                if report is not None:
                    self.handled.add(report)
                replan = self.rng.randint(4, 8)
                obstacle_during_replan = self.rng.random() < 0.5
                for _ in range(replan):
                    self.ticks.append(_TrueTick(True, objective, "replanning", obstacle_during_replan))
            else:
                self.ticks.append(_TrueTick(True, objective, "transiting", report is not None))
                offset += 1


def _surveyor_timeline(plan: MissionPlan, rng: random.Random) -> list[_TrueTick]:
    windows = [(t, t + rng.randint(2, 5)) for t in plan.dynamic_events]
    line = _Timeline(rng, windows)
    line.emit(rng.randint(4, 9), False, "none", "idle")
    line.emit(rng.randint(1, 3), True, "none", "idle")
    previous = "none"
    statics_by_leg: dict[int, list[tuple[int, int]]] = {}
    for obstacle in plan.static_obstacles:
        statics_by_leg.setdefault(obstacle.objective_index, []).append(
            (obstacle.offset, obstacle.length)
        )
    for index, objective in enumerate(plan.objectives):
        if index > 0 and rng.random() < 0.3:
            line.emit(rng.randint(1, 3), True, previous, "idle")
        if objective.transit_ticks:
            line.emit_transit_leg(
                objective.kind, objective.transit_ticks, statics_by_leg.get(index, ())
            )
        if objective.execute_ticks:
            line.emit(objective.execute_ticks, True, objective.kind, "executing")
        previous = objective.kind
    line.emit(rng.randint(3, 8), True, "recovery", "completed")
    return line.ticks


def _scout_timeline(plan: MissionPlan, rng: random.Random, target_length: int) -> list[_TrueTick]:
    windows = [(t, t + rng.randint(2, 5)) for t in plan.dynamic_events]
    line = _Timeline(rng, windows)
    line.emit(rng.randint(2, 6), False, "none", "idle")
    line.emit(rng.randint(1, 2), True, "none", "idle")
    line.emit_transit_leg("launch", rng.randint(8, 16), ())
    line.emit(rng.randint(4, 8), True, "launch", "executing")
    recovery_budget = 35
    toggle = 0
    while len(line.ticks) < target_length - recovery_budget:
        if toggle % 2 == 0:
            line.emit_transit_leg("waypoint", rng.randint(10, 18), ())
        else:
            if rng.random() >= 0.25:
                line.emit_transit_leg("survey", rng.randint(7, 11), ())
            line.emit(rng.randint(90, 140), True, "survey", "executing")
        toggle += 1
    line.emit_transit_leg("recovery", rng.randint(10, 18), ())
    line.emit(rng.randint(5, 10), True, "recovery", "executing")
    line.emit(rng.randint(3, 6), True, "recovery", "completed")
    return line.ticks


def _emit_records(
    vessel: str, truth: Sequence[_TrueTick], config: SimConfig, rng: random.Random
) -> list[StateRecord]:
    records: list[StateRecord] = []
    previous_objective = truth[0].objective
    last_progress = truth[0].progress
    stale_progress: str | None = None  # progress value before the latest change
    for tick, item in enumerate(truth):
        if item.progress != last_progress:
            stale_progress = last_progress
            last_progress = item.progress
        same = item.objective == previous_objective
        previous_objective = item.objective
        true_state = VehicleState(
            ready_plan=item.ready,
            current_objective=item.objective,
            progress_type=item.progress,
            same_objective=same,
            obstacle_found=item.obstacle,
        )
        label = reference_policy(true_state)
        emitted = true_state
        if config.ambiguity_rate and rng.random() < config.ambiguity_rate:
            if stale_progress is not None and stale_progress != item.progress:
                emitted = true_state.replace(progress_type=stale_progress)
        if config.label_noise_rate and rng.random() < config.label_noise_rate:
            label = BEHAVIOURS[rng.randrange(N_BEHAVIOURS)]
        records.append(StateRecord(vessel, tick, emitted, label))
    return records


def run_mission(plan: MissionPlan, config: SimConfig, mission_id: str = "m0") -> StateLog:
    """Simulate one mission over both vessels; reproducible per (plan, config)."""
    rng = random.Random(f"run:{config.seed}:{mission_id}")
    surveyor_truth = _surveyor_timeline(plan, rng)
    scout_truth = _scout_timeline(plan, rng, len(surveyor_truth))
    per_vessel = {
        SURVEYOR: _emit_records(SURVEYOR, surveyor_truth, config, rng),
        SCOUT: _emit_records(SCOUT, scout_truth, config, rng),
    }
    merged: list[StateRecord] = [r for records in per_vessel.values() for r in records]
    merged.sort(key=lambda r: (r.tick, r.vessel))
    return StateLog(mission_id, tuple(merged))


def simulate_missions(config: SimConfig) -> list[StateLog]:
    """Generate and run `mission_count` missions from the config seed."""
    logs = []
    for index in range(config.mission_count):
        plan = generate_mission_plan(f"{config.seed}:{index}", config.mean_mission_ticks)
        logs.append(run_mission(plan, config, mission_id=f"m{config.seed}-{index}"))
    return logs


PRESETS: dict[str, dict[str, int]] = {
    # Yields >= 5056 records (3 missions x ~1350 ticks x 2 vessels).
    "paper-scale": {"mission_count": 3, "mean_mission_ticks": 1350},
    # A single-mission hold-out log of >= 1331 records.
    "trial": {"mission_count": 1, "mean_mission_ticks": 1350},
}


def preset_config(
    name: str,
    seed: int,
    ambiguity_rate: float = 0.0,
    label_noise_rate: float = 0.0,
) -> SimConfig:
    try:
        sizes = PRESETS[name]
    except KeyError:
        raise UnknownScenario(name, PRESETS) from None
    return SimConfig(
        seed=seed,
        mission_count=sizes["mission_count"],
        mean_mission_ticks=sizes["mean_mission_ticks"],
        ambiguity_rate=ambiguity_rate,
        label_noise_rate=label_noise_rate,
    )


# --- scripted scenario replays ---------------------------------------------

_FIG_MISSION = "fig5"


def _scripted(rows: Iterable[tuple[int, tuple, str]]) -> tuple[StateRecord, ...]:
    records = []
    for tick, (ready, objective, progress, same, obstacle), label in rows:
        state = VehicleState(ready, objective, progress, same, obstacle)
        records.append(StateRecord(SURVEYOR, tick, state, Behaviour.from_token(label)))
    return tuple(records)


def _scenario_rows() -> dict[str, tuple[StateRecord, ...]]:
    scenario1 = _scripted(
        [
            (0, (False, "none", "idle", True, False), "wait"),
            (1, (False, "none", "idle", True, False), "wait"),
            (2, (True, "launch", "transiting", False, False), "transit"),
            (3, (True, "launch", "transiting", True, False), "transit"),
            (4, (True, "launch", "transiting", True, False), "transit"),
            (5, (True, "launch", "executing", True, False), "hold_position"),
            (6, (True, "launch", "executing", True, False), "hold_position"),
            (7, (True, "waypoint", "transiting", False, False), "transit"),
            (8, (True, "waypoint", "transiting", True, False), "transit"),
            (9, (True, "waypoint", "transiting", True, False), "transit"),
            (10, (True, "waypoint", "transiting", True, False), "transit"),
            (11, (True, "waypoint", "transiting", True, False), "transit"),
        ]
    )
    scenario2 = _scripted(
        [
            (12, (True, "survey", "transiting", False, False), "transit"),
            (13, (True, "survey", "transiting", True, False), "transit"),
            (14, (True, "survey", "transiting", True, True), "avoid_obstacle"),
            (15, (True, "survey", "transiting", True, True), "avoid_obstacle"),
            (16, (True, "survey", "transiting", True, True), "avoid_obstacle"),
            (17, (True, "survey", "replanning", True, True), "replanned_transit"),
            (18, (True, "survey", "replanning", True, True), "replanned_transit"),
            (19, (True, "survey", "replanning", True, False), "replanned_transit"),
        ]
    )
    # Stale progress_type: the survey has already started, but the emitted
    # state still reads "transiting", so the label disagrees with the state.
    scenario3 = _scripted(
        [
            (20, (True, "survey", "transiting", True, False), "survey"),
        ]
    )
    scenario4 = _scripted(
        [
            (21, (True, "survey", "executing", True, False), "survey"),
            (22, (True, "survey", "executing", True, False), "survey"),
            (23, (True, "survey", "executing", True, False), "survey"),
            (24, (True, "survey", "executing", True, False), "survey"),
            (25, (True, "survey", "executing", True, False), "survey"),
            (26, (True, "survey", "executing", True, False), "survey"),
        ]
    )
    return {
        "scenario1": scenario1,
        "scenario2": scenario2,
        "scenario3": scenario3,
        "scenario4": scenario4,
    }


SCENARIO_NAMES = ("scenario1", "scenario2", "scenario3", "scenario4")


def scenario_replay(name: str) -> StateLog:
    """Fixed scripted segments of one mission, used for end-to-end replays."""
    rows = _scenario_rows()
    if name not in rows:
        raise UnknownScenario(name, SCENARIO_NAMES)
    return StateLog(_FIG_MISSION, rows[name])
