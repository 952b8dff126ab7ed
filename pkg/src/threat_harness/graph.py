"""
Threat Scenario Runner

Plays a scenario script step by step against a ThreatEnvironment, then
scans the audit log for unauthorized record changes and writes the report.
The environment travels in config["configurable"]["env"].
"""

from typing import TypedDict

from langchain_core.runnables import RunnableConfig
from langgraph.graph import END, START, StateGraph

from .detector import find_denied, find_unauthorized
from .scenarios import (
    Scenario,
    ScenarioKind,
    ScenarioReport,
    StepOutcome,
    ThreatEnvironment,
    execute_step,
)


class ScenarioState(TypedDict, total=False):
    """State schema for one scenario run."""
    scenario: Scenario
    cursor: int
    start_seq: int
    victim_owner: str | None
    outcomes: list[StepOutcome]
    observations: dict[str, tuple[str, ...]]
    evidence: list[int]
    denied: list[int]
    report: ScenarioReport | None


def _env(config: RunnableConfig) -> ThreatEnvironment:
    return config["configurable"]["env"]


def begin(state: ScenarioState, config: RunnableConfig) -> ScenarioState:
    """Mark where this run starts in the audit log."""
    env = _env(config)
    return {
        **state,
        "cursor": 0,
        "start_seq": len(env.tree.audit),
        "victim_owner": env.owner_of(state["scenario"].victim),
        "outcomes": [],
        "observations": {},
    }


def run_step(state: ScenarioState, config: RunnableConfig) -> ScenarioState:
    """Execute the next scripted step."""
    step = state["scenario"].steps[state["cursor"]]
    outcome = execute_step(_env(config), step)
    observations = dict(state["observations"])
    if outcome.contacts is not None:
        observations[outcome.detail] = outcome.contacts
    return {
        **state,
        "cursor": state["cursor"] + 1,
        "outcomes": [*state["outcomes"], outcome],
        "observations": observations,
    }


def should_continue(state: ScenarioState) -> str:
    return "step" if state["cursor"] < len(state["scenario"].steps) else "detect"


def detect(state: ScenarioState, config: RunnableConfig) -> ScenarioState:
    """Flag record changes whose actor is not the registrant of record."""
    entries = _env(config).tree.audit.entries()
    return {
        **state,
        "evidence": [e.seq for e in find_unauthorized(entries, state["start_seq"])],
        "denied": [e.seq for e in find_denied(entries, state["start_seq"])],
    }


def write_report(state: ScenarioState, config: RunnableConfig) -> ScenarioState:
    """Decide whether the attack achieved its aim."""
    env = _env(config)
    scenario = state["scenario"]
    observed = state["observations"]
    before = observed.get("before", ())
    after = observed.get("after", ())
    is_owner = scenario.attacker == state["victim_owner"]
    notes = []

    if scenario.kind is ScenarioKind.HIJACK:
        succeeded = env.actor(scenario.attacker).sip_uri in after
    elif scenario.kind is ScenarioKind.EAVESDROP:
        succeeded = after[:1] == (scenario.relay,)
        if "after-relay-removed" in observed:
            stale = observed["after-relay-removed"][:1] == (scenario.relay,)
            if stale:
                notes.append("relay removed but callers are still sent to it")
    else:
        succeeded = bool(before) and not after

    if is_owner:
        notes.append("attacker is the registrant of record; change was authorized")
    if scenario.relay and scenario.relay in env.relays:
        relay_target = env.relays[scenario.relay]
    else:
        relay_target = None

    report = ScenarioReport(
        kind=scenario.kind,
        enforce=env.enforce,
        victim=scenario.victim,
        attacker=scenario.attacker,
        attack_succeeded=succeeded and not is_owner,
        detected=bool(state["evidence"]),
        evidence=tuple(state["evidence"]),
        denied=tuple(state["denied"]),
        before=before,
        after=after,
        relay_target=relay_target,
        notes=tuple(notes),
        steps=tuple(state["outcomes"]),
    )
    return {**state, "report": report}


# Build graph
builder = StateGraph(ScenarioState)
builder.add_node("begin", begin)
builder.add_node("step", run_step)
builder.add_node("detect", detect)
builder.add_node("report", write_report)

builder.add_edge(START, "begin")
builder.add_conditional_edges("begin", should_continue, ["step", "detect"])
builder.add_conditional_edges("step", should_continue, ["step", "detect"])
builder.add_edge("detect", "report")
builder.add_edge("report", END)

graph = builder.compile()
