"""
Registry-data attack scenarios: hijack, eavesdrop and denial of service.

A scenario is a script of registry and resolver actions (threat-harness/*.tsv)
run against a seeded environment. Each line is

    <step-no>\t<actor>\t<action>\t<args...>

with `{victim}`, `{attacker}`, `{caller}`, `{attacker_sip}`, `{victim_sip}`
and `{relay}` filled in from the environment before the run.
"""

import logging
import os
import re
from enum import StrEnum
from pathlib import Path

from pydantic import BaseModel, ConfigDict

from ..clock import Clock, ManualClock
from ..e164_core.numbers import E164Number, normalize
from ..errors import AuthFailed, ConfigError, EnumError, NoApplicableRecords, NxDomain
from ..naptr.records import RecordSet
from ..naptr.rewrite import RewriteRule
from ..registry.models import Credential
from ..registry.tree import EnumTree, TreePolicy
from ..resolver.resolver import Resolver
from ..resolver.roots import RootConfig
from ..seed import ACME, ACTORS, BETA, CHARLIE, CREDENTIALS, sample_tree

logger = logging.getLogger(__name__)

SCRIPT_DIR = Path(os.path.join(os.path.dirname(__file__), "../../threat-harness"))
SEED_EPOCH = 1_767_225_600.0
_PLACEHOLDER = re.compile(r"\{(\w+)\}")


class ScenarioKind(StrEnum):
    HIJACK = "hijack"
    EAVESDROP = "eavesdrop"
    DENIAL_OF_SERVICE = "dos"


class Step(BaseModel):
    model_config = ConfigDict(frozen=True)

    no: int
    actor: str
    action: str
    args: tuple[str, ...] = ()


class Scenario(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ScenarioKind
    victim: E164Number
    attacker: str
    steps: tuple[Step, ...]
    relay: str | None = None


class StepOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    step: Step
    ok: bool
    detail: str = ""
    audit_seq: int | None = None
    contacts: tuple[str, ...] | None = None


class ActorProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    number: E164Number
    sip_uri: str
    credential: Credential

    @property
    def relay_uri(self) -> str:
        return "sip:relay@" + self.sip_uri.partition("@")[2]


class ThreatEnvironment:
    """The seeded root-1 tree, its actors, a cache-less resolver and the
    relay table an eavesdropper forwards through."""

    def __init__(self, enforce: bool, clock: Clock | None = None):
        self.enforce = enforce
        self.clock = clock or ManualClock(SEED_EPOCH)
        self.tree: EnumTree = sample_tree(TreePolicy(enforce_auth=enforce), self.clock)
        self.resolver = Resolver(RootConfig.single(self.tree), cache=None, clock=self.clock)
        self.relays: dict[str, str] = {}
        self.actors = {
            actor: ActorProfile(
                id=actor, number=number, sip_uri=sip, credential=CREDENTIALS[actor]
            )
            for actor, (number, sip, _) in ACTORS.items()
        }

    def actor(self, actor_id: str) -> ActorProfile:
        try:
            return self.actors[actor_id]
        except KeyError:
            raise ConfigError(f"{actor_id!r} is not a seeded actor") from None

    def owner_of(self, number: E164Number) -> str | None:
        registration = self.tree.registration(number)
        return registration.registrant.id if registration else None

    def contacts(self, number: E164Number) -> tuple[str, ...]:
        """What a caller gets for the number right now; empty when nothing applies."""
        try:
            result = self.resolver.resolve(number)
        except (NxDomain, NoApplicableRecords) as exc:
            logger.info("resolving %s: %s", number, exc)
            return ()
        return tuple(str(contact) for contact in result.contacts)

    def current_record_set(self, number: E164Number) -> RecordSet:
        record_set = self.tree.live_record_sets().get(number.digits)
        if record_set is None:
            raise NxDomain(f"{number} has no live record set")
        return record_set


def default_victim() -> E164Number:
    return ACTORS[ACME][0]


DEFAULT_ATTACKER = BETA
CALLER = CHARLIE


def script_path(kind: ScenarioKind, variant: str | None = None) -> Path:
    name = f"{kind.value}-{variant}.tsv" if variant else f"{kind.value}.tsv"
    return SCRIPT_DIR / name


def parse_script(text: str, values: dict[str, str]) -> tuple[Step, ...]:
    def fill(field: str) -> str:
        def replace(match: re.Match[str]) -> str:
            if match.group(1) not in values:
                raise ConfigError(f"unknown placeholder {match.group(0)} in scenario script")
            return values[match.group(1)]

        return _PLACEHOLDER.sub(replace, field)

    steps = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) < 3 or not fields[0].isdigit():
            raise ConfigError(f"scenario line {lineno}: expected <step>\\t<actor>\\t<action>")
        steps.append(
            Step(
                no=int(fields[0]),
                actor=fill(fields[1]),
                action=fields[2],
                args=tuple(fill(f) for f in fields[3:]),
            )
        )
    return tuple(steps)


def load_scenario(
    kind: ScenarioKind,
    env: ThreatEnvironment,
    victim: E164Number | None = None,
    attacker: str = DEFAULT_ATTACKER,
    variant: str | None = None,
) -> Scenario:
    victim = victim or default_victim()
    attacking = env.actor(attacker)
    owner = env.owner_of(victim)
    if owner is None:
        raise ConfigError(f"victim {victim} is not registered")
    values = {
        "victim": victim.digits,
        "attacker": attacker,
        "caller": CALLER,
        "attacker_sip": attacking.sip_uri,
        "victim_sip": env.actor(owner).sip_uri if owner in env.actors else "",
        "relay": attacking.relay_uri,
    }
    path = script_path(kind, variant)
    if not path.is_file():
        raise ConfigError(f"no scenario script {path.name}")
    steps = parse_script(path.read_text(), values)
    for step in steps:
        env.actor(step.actor)
        if step.action in NUMBER_ACTIONS:
            if not step.args or not env.tree.oracle.is_assigned(normalize("+" + step.args[0])):
                raise ConfigError(f"step {step.no} names a number that is not seeded")
    return Scenario(
        kind=kind, victim=victim, attacker=attacker, steps=steps, relay=attacking.relay_uri
    )


# -- step execution -------------------------------------------------------

def _resolve(env: ThreatEnvironment, step: Step, actor: ActorProfile) -> StepOutcome:
    number = normalize("+" + step.args[0])
    contacts = env.contacts(number)
    return StepOutcome(step=step, ok=True, detail=step.args[1], contacts=contacts)


def _mutate(
    env: ThreatEnvironment, step: Step, actor: ActorProfile, record_set: RecordSet
) -> StepOutcome:
    number = normalize("+" + step.args[0])
    before = len(env.tree.audit)
    try:
        env.tree.update_records(number, actor.credential, record_set)
        ok, detail = True, "applied"
    except AuthFailed as exc:
        ok, detail = False, f"denied: {exc}"
    entries = env.tree.audit.entries()
    seq = entries[-1].seq if len(entries) > before else None
    return StepOutcome(step=step, ok=ok, detail=detail, audit_seq=seq)


def _rewrite_contact(env: ThreatEnvironment, step: Step, actor: ActorProfile) -> StepOutcome:
    number = normalize("+" + step.args[0])
    app, uri = step.args[1], step.args[2]
    current = env.current_record_set(number)
    records = tuple(
        record.model_copy(
            update={"rewrite": RewriteRule(delimiter="!", pattern="^.*$", substitution=uri)}
        )
        if record.offers(app)
        else record
        for record in current.records
    )
    return _mutate(env, step, actor, current.model_copy(update={"records": records}))


def _corrupt(env: ThreatEnvironment, step: Step, actor: ActorProfile) -> StepOutcome:
    number = normalize("+" + step.args[0])
    garbage = RewriteRule(delimiter="!", pattern=step.args[1], substitution="sip:void@invalid")
    current = env.current_record_set(number)
    records = tuple(record.model_copy(update={"rewrite": garbage}) for record in current.records)
    return _mutate(env, step, actor, current.model_copy(update={"records": records}))


def _add_relay(env: ThreatEnvironment, step: Step, actor: ActorProfile) -> StepOutcome:
    relay, target = step.args[0], step.args[1]
    env.relays[relay] = target
    return StepOutcome(step=step, ok=True, detail=f"{relay} forwards to {target}")


def _remove_relay(env: ThreatEnvironment, step: Step, actor: ActorProfile) -> StepOutcome:
    removed = env.relays.pop(step.args[0], None)
    return StepOutcome(step=step, ok=removed is not None, detail="relay removed")


ACTIONS = {
    "resolve": (_resolve, 2),
    "rewrite-contact": (_rewrite_contact, 3),
    "corrupt": (_corrupt, 2),
    "add-relay": (_add_relay, 2),
    "remove-relay": (_remove_relay, 1),
}
NUMBER_ACTIONS = frozenset({"resolve", "rewrite-contact", "corrupt"})


def execute_step(env: ThreatEnvironment, step: Step) -> StepOutcome:
    if step.action not in ACTIONS:
        raise ConfigError(f"step {step.no}: unknown action {step.action!r}")
    handler, arity = ACTIONS[step.action]
    if len(step.args) < arity:
        raise ConfigError(f"step {step.no}: {step.action} needs {arity} arguments")
    try:
        outcome = handler(env, step, env.actor(step.actor))
    except ConfigError:
        raise
    except EnumError as exc:
        outcome = StepOutcome(step=step, ok=False, detail=str(exc))
    logger.info("step %d %s %s: %s", step.no, step.actor, step.action, outcome.detail)
    return outcome


class ScenarioReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ScenarioKind
    enforce: bool
    victim: E164Number
    attacker: str
    attack_succeeded: bool
    detected: bool
    evidence: tuple[int, ...] = ()
    denied: tuple[int, ...] = ()
    before: tuple[str, ...] = ()
    after: tuple[str, ...] = ()
    relay_target: str | None = None
    notes: tuple[str, ...] = ()
    steps: tuple[StepOutcome, ...] = ()

    def render_human(self) -> str:
        def flag(value: bool) -> str:
            return "true" if value else "false"

        lines = [
            f"scenario: {self.kind.value} (enforcement {'on' if self.enforce else 'off'})",
            f"victim: +{self.victim.digits}  attacker: {self.attacker}",
            f"attack_succeeded={flag(self.attack_succeeded)} detected={flag(self.detected)}",
            f"before: {', '.join(self.before) or '(no contacts)'}",
            f"after:  {', '.join(self.after) or '(no contacts)'}",
        ]
        if self.relay_target is not None:
            lines.append(f"relay forwards to: {self.relay_target}")
        if self.evidence:
            lines.append("unauthorized audit entries: " + ", ".join(map(str, self.evidence)))
        if self.denied:
            lines.append("denied attempts: " + ", ".join(map(str, self.denied)))
        lines.extend(f"note: {note}" for note in self.notes)
        lines.append("steps:")
        for outcome in self.steps:
            step = outcome.step
            lines.append(f"  {step.no}. {step.actor} {step.action}: {outcome.detail}")
        return "\n".join(lines) + "\n"

    def render_tsv(self) -> str:
        rows = []
        for outcome in self.steps:
            step = outcome.step
            result = "ok" if outcome.ok else "failed"
            extra = list(outcome.contacts or ())
            if outcome.audit_seq is not None:
                extra.append(f"seq={outcome.audit_seq}")
            rows.append([str(step.no), step.actor, step.action, result, *extra])
        rows.append(
            [
                "-",
                "harness",
                "report",
                f"kind={self.kind.value}",
                f"enforce={'on' if self.enforce else 'off'}",
                f"attack_succeeded={str(self.attack_succeeded).lower()}",
                f"detected={str(self.detected).lower()}",
                "evidence=" + ",".join(map(str, self.evidence)),
                "denied=" + ",".join(map(str, self.denied)),
            ]
        )
        return "".join("\t".join(row) + "\n" for row in rows)
