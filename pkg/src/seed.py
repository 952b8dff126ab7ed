"""
Seeded sample world: Joe's published record set, the ACME/BETA/CHARLIE
actors, and three roots (1 default, 36 and 46) for multi-root routing.

Data files live in sample-seed/ next to the package.
"""

import os
from pathlib import Path

from .clock import Clock, system_clock
from .config import DEFAULT_TTL
from .e164_core.numbers import E164Number, to_domain
from .naptr.records import NaptrRecord, RecordSet
from .naptr.rewrite import RewriteRule
from .naptr.zonefile import parse_zone
from .registry.models import AuthEvidence, AuthMethod, Credential, ProvisioningMode, Registrant
from .registry.oracle import AssignmentOracle
from .registry.tree import EnumTree, TreePolicy
from .resolver.roots import RootConfig, RootEntry, parse_roots

SEED_DIR = Path(os.path.join(os.path.dirname(__file__), "../sample-seed"))

SAMPLE_APEX = "e164.foo"
SAMPLE_NUMBER = E164Number(digits="112025551212")
SAMPLE_DIALING_CONTEXT = "11202"

ACME = "ACME"
BETA = "BETA"
CHARLIE = "CHARLIE"

# number, sip contact and Tier-2 provider of each seeded registrant in root 1
ACTORS = {
    ACME: (E164Number(digits="12025550100"), "sip:sales@acme.example", "t2-a"),
    BETA: (E164Number(digits="12025550200"), "sip:sales@beta.example", "t2-b"),
    CHARLIE: (E164Number(digits="12025550300"), "sip:charlie@charlie.example", "t2-b"),
}
LONDON_NUMBER = E164Number(digits="442079460000")

CREDENTIALS = {
    "joe": Credential(holder="joe", secret="joe-secret"),
    ACME: Credential(holder=ACME, secret="acme-secret"),
    BETA: Credential(holder=BETA, secret="beta-secret"),
    CHARLIE: Credential(holder=CHARLIE, secret="charlie-secret"),
    "londoner": Credential(holder="londoner", secret="london-secret"),
}
ENROLLING_AUTHORITY = Credential(holder="nanp-enroller", secret="enroll-secret")

DEFAULT_ROOT = 1
ROOT_36 = 36
ROOT_46 = 46


def sample_record_set(apex: str = SAMPLE_APEX, corrected: bool = False) -> RecordSet:
    """Joe's three-record set; `corrected` swaps in a mailto rule that matches."""
    name = "joe-corrected.zone" if corrected else "joe.zone"
    (record_set,) = parse_zone((SEED_DIR / name).read_text(), apex=SAMPLE_APEX)
    return record_set.model_copy(update={"owner": to_domain(SAMPLE_NUMBER, apex)})


def contact_record_set(
    number: E164Number, apex: str, sip_uri: str, ttl: int = DEFAULT_TTL
) -> RecordSet:
    """A sip contact first, then the number itself as a tel URI."""
    return RecordSet(
        owner=to_domain(number, apex),
        ttl_seconds=ttl,
        records=(
            NaptrRecord(
                order=10,
                preference=10,
                flags="u",
                service="E2U+sip",
                rewrite=RewriteRule(delimiter="!", pattern="^.*$", substitution=sip_uri),
            ),
            NaptrRecord(
                order=100,
                preference=10,
                flags="u",
                service="E2U+tel",
                rewrite=RewriteRule(
                    delimiter="!", pattern="^(.*)$", substitution="tel:\\1"
                ),
            ),
        ),
    )


def enroll(
    tree: EnumTree,
    number: E164Number,
    registrant_id: str,
    record_set: RecordSet,
    provider_id: str,
    cc: str = "1",
) -> None:
    """Delegate a number to a provider and register it with callback evidence."""
    tree.delegate_number(cc, number, provider_id)
    evidence = AuthEvidence(
        method=AuthMethod.CALLBACK_COMPLETED,
        payload="ok",
        asserted_number=number,
        claimant=registrant_id,
    )
    carrier = tree.oracle.lookup(number).carrier
    tree.register(
        number,
        Registrant(id=registrant_id, display_name=registrant_id, carrier=carrier),
        evidence,
        record_set,
        CREDENTIALS[registrant_id],
    )


def sample_tree(
    policy: TreePolicy | None = None, clock: Clock = system_clock, corrected: bool = False
) -> EnumTree:
    """Root 1: country code 1 authorized, Joe, ACME and BETA registered,
    CHARLIE assigned and delegated but unregistered, and country code 44 staged but not
    yet authorized."""
    oracle = AssignmentOracle.from_tsv((SEED_DIR / "oracle.tsv").read_text())
    tree = EnumTree(SAMPLE_APEX, policy, oracle=oracle, clock=clock)
    tree.authorize_country("1", "nanp-registry")
    tree.create_provider("t2-a")
    tree.create_provider("t2-b")
    tree.create_provider("t2-bulk", ProvisioningMode.OPT_OUT)
    tree.add_authority(ENROLLING_AUTHORITY)

    enroll(tree, SAMPLE_NUMBER, "joe", sample_record_set(SAMPLE_APEX, corrected), "t2-a")
    for actor in (ACME, BETA):
        number, sip, provider = ACTORS[actor]
        enroll(tree, number, actor, contact_record_set(number, SAMPLE_APEX, sip), provider)
    tree.delegate_number("1", ACTORS[CHARLIE][0], ACTORS[CHARLIE][2])

    tree.stage_country("44", "uk-registry")
    tree.create_provider("t2-uk")
    london = contact_record_set(LONDON_NUMBER, SAMPLE_APEX, "sip:reception@london.example")
    enroll(tree, LONDON_NUMBER, "londoner", london, "t2-uk", cc="44")
    return tree


def _other_root(apex: str, clock: Clock, policy: TreePolicy | None) -> EnumTree:
    oracle = AssignmentOracle.from_tsv((SEED_DIR / "oracle.tsv").read_text())
    tree = EnumTree(apex, policy, oracle=oracle, clock=clock)
    tree.authorize_country("1", f"registry.{apex}")
    tree.create_provider("t2")
    return tree


def sample_roots(
    policy: TreePolicy | None = None, clock: Clock = system_clock
) -> RootConfig:
    """Roots 1, 36 and 46 as listed in sample-seed/roots.tsv.

    Root 36 holds Joe's number with a different sip contact than root 1;
    root 46 holds only CHARLIE's number.
    """
    apexes = {root_id: apex for root_id, apex, _, _ in parse_roots(_roots_text())}
    root36 = _other_root(apexes[ROOT_36], clock, policy)
    enroll(
        root36,
        SAMPLE_NUMBER,
        "joe",
        contact_record_set(SAMPLE_NUMBER, root36.apex, "sip:joe@root36.example"),
        "t2",
    )
    root46 = _other_root(apexes[ROOT_46], clock, policy)
    charlie = ACTORS[CHARLIE][0]
    enroll(
        root46,
        charlie,
        CHARLIE,
        contact_record_set(charlie, root46.apex, "sip:charlie@root46.example"),
        "t2",
    )
    trees = {DEFAULT_ROOT: sample_tree(policy, clock), ROOT_36: root36, ROOT_46: root46}
    return RootConfig(
        roots={rid: RootEntry(apex=apexes[rid], tree=tree) for rid, tree in trees.items()},
        default_root=DEFAULT_ROOT,
    )


def _roots_text() -> str:
    return (SEED_DIR / "roots.tsv").read_text()
