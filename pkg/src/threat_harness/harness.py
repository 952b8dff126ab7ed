"""Entry points for the scripted attack scenarios."""

import logging

from ..e164_core.numbers import E164Number
from .graph import graph
from .scenarios import (
    DEFAULT_ATTACKER,
    ScenarioKind,
    ScenarioReport,
    ThreatEnvironment,
    load_scenario,
)

logger = logging.getLogger(__name__)


def run_scenario(
    kind: ScenarioKind,
    env: ThreatEnvironment,
    victim: E164Number | None = None,
    attacker: str = DEFAULT_ATTACKER,
    variant: str | None = None,
) -> ScenarioReport:
    scenario = load_scenario(kind, env, victim, attacker, variant)
    state = graph.invoke(
        {"scenario": scenario},
        {"configurable": {"env": env}, "recursion_limit": 4 * len(scenario.steps) + 10},
    )
    report = state["report"]
    logger.info(
        "%s (enforce=%s): attack_succeeded=%s detected=%s",
        kind.value,
        env.enforce,
        report.attack_succeeded,
        report.detected,
    )
    return report


def run_hijack(
    env: ThreatEnvironment, victim: E164Number | None = None, attacker: str = DEFAULT_ATTACKER
) -> ScenarioReport:
    """The attacker points the victim's sip contact at itself."""
    return run_scenario(ScenarioKind.HIJACK, env, victim, attacker)


def run_eavesdrop(
    env: ThreatEnvironment,
    victim: E164Number | None = None,
    attacker: str = DEFAULT_ATTACKER,
    remove_relay: bool = False,
) -> ScenarioReport:
    """The attacker inserts a relay that forwards to the victim's real contact."""
    variant = "relay-removed" if remove_relay else None
    return run_scenario(ScenarioKind.EAVESDROP, env, victim, attacker, variant)


def run_dos(
    env: ThreatEnvironment, victim: E164Number | None = None, attacker: str = DEFAULT_ATTACKER
) -> ScenarioReport:
    """The attacker rewrites the victim's records so nothing matches."""
    return run_scenario(ScenarioKind.DENIAL_OF_SERVICE, env, victim, attacker)


RUNNERS = {
    ScenarioKind.HIJACK: run_hijack,
    ScenarioKind.EAVESDROP: run_eavesdrop,
    ScenarioKind.DENIAL_OF_SERVICE: run_dos,
}
