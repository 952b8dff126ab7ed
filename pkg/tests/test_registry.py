from concurrent.futures import ThreadPoolExecutor

import pytest

from src.e164_core.numbers import E164Number, to_domain
from src.errors import (
    AlreadyAuthorized,
    AlreadyDelegated,
    AuthFailed,
    DuplicateRegistration,
    InvalidCountryCode,
    ModeMismatch,
    NoSuchChallenge,
    NoSuchRegistration,
    NotDelegatedHere,
    NxDomain,
    OpenChallengeExists,
    OptOutRefused,
    ProviderConflict,
    UnknownNumber,
    UnknownProvider,
    WrongCarrier,
    WrongCountryCode,
)
from src.naptr.zonefile import export_zone
from src.registry.audit import AuditLog
from src.registry.models import (
    AuthEvidence,
    AuthMethod,
    DisputeStatus,
    ProvisioningMode,
    Registrant,
)
from src.registry.storage import load_tree, save_tree
from src.registry.tree import SECONDS_PER_DAY, EnumTree, TreePolicy
from src.resolver.resolver import Resolver
from src.resolver.roots import RootConfig
from src.seed import (
    ACME,
    ACTORS,
    BETA,
    CHARLIE,
    CREDENTIALS,
    ENROLLING_AUTHORITY,
    SAMPLE_NUMBER,
    sample_tree,
)

from .conftest import callback, credential, sip_record_set

ACME_NUMBER = ACTORS[ACME][0]
CHARLIE_NUMBER = ACTORS[CHARLIE][0]
SPARE = E164Number(digits="12025550999")


def evidence(method: AuthMethod, payload: str, number: E164Number, claimant: str):
    return AuthEvidence(method=method, payload=payload, asserted_number=number, claimant=claimant)


def register_charlie(tree: EnumTree, ev: AuthEvidence | None = None):
    return tree.register(
        CHARLIE_NUMBER,
        Registrant(id=CHARLIE, display_name=CHARLIE),
        ev if ev is not None else callback(CHARLIE_NUMBER, CHARLIE),
        sip_record_set(CHARLIE_NUMBER, "sip:charlie@charlie.example"),
        CREDENTIALS[CHARLIE],
    )


# -- zone setup ----------------------------------------------------------------

def test_authorize_twice(tree):
    with pytest.raises(AlreadyAuthorized):
        tree.authorize_country("1", "nanp-registry")


@pytest.mark.parametrize("cc", ["", "1234", "1a"])
def test_authorize_invalid_country_code(tree, cc):
    with pytest.raises(InvalidCountryCode):
        tree.authorize_country(cc, "somebody")


def test_staged_country_is_not_delegated(tree):
    cc, entry = tree.country_entry("442079460000")
    assert cc == "44"
    assert not entry.authorized
    assert entry.delegation is None


def test_authorize_staged_country_with_other_provider(tree):
    with pytest.raises(ProviderConflict):
        tree.authorize_country("44", "someone-else")
    tree.authorize_country("44", "uk-registry")
    assert tree.country_entry("442079460000")[1].authorized


def test_delegate_number(tree):
    zone = tree.delegate_number("1", SPARE, "t2-a")
    assert zone.delegations[SPARE.digits] == "t2-a"
    assert tree.audit.entries()[-1].action == "delegate"


def test_delegate_twice(tree):
    tree.delegate_number("1", SPARE, "t2-a")
    with pytest.raises(AlreadyDelegated):
        tree.delegate_number("1", SPARE, "t2-b")


def test_delegate_wrong_country_code(tree):
    with pytest.raises(WrongCountryCode):
        tree.delegate_number("1", E164Number(digits="4418005551212"), "t2-a")


def test_delegate_to_unknown_provider(tree):
    with pytest.raises(UnknownProvider):
        tree.delegate_number("1", SPARE, "t2-nowhere")


def test_delegate_without_national_zone(tree):
    with pytest.raises(InvalidCountryCode):
        tree.delegate_number("7", E164Number(digits="74951234567"), "t2-a")


# -- verification ---------------------------------------------------------------

def test_callback_accepted(tree):
    assert tree.verify_assignee(CHARLIE_NUMBER, callback(CHARLIE_NUMBER, CHARLIE)).accepted


def test_other_claimant_rejected(tree):
    verdict = tree.verify_assignee(CHARLIE_NUMBER, callback(CHARLIE_NUMBER, BETA))
    assert not verdict.accepted
    assert "BETA" in verdict.reason


def test_unassigned_number(tree):
    with pytest.raises(UnknownNumber):
        tree.verify_assignee(SPARE, callback(SPARE, "nobody"))


@pytest.mark.parametrize(
    "method, payload, accepted",
    [
        (AuthMethod.PHONE_BILL_SHOWN, "carrier-b", True),
        (AuthMethod.PHONE_BILL_SHOWN, "carrier-a", False),
        (AuthMethod.LIDB_MATCH, "carrier-b", True),
        (AuthMethod.ONA_DISCLOSURE, "carrier-b", True),
        (AuthMethod.ANI_MATCH, "+12025550300", True),
        (AuthMethod.ANI_MATCH, "+12025550200", False),
        (AuthMethod.DIRECTORY_LISTING_MATCH, CHARLIE, True),
        (AuthMethod.THIRD_PARTY_CERTIFICATE, f"acme-ca:{CHARLIE}", False),
        (AuthMethod.CALLBACK_COMPLETED, "no-answer", False),
    ],
)
def test_evidence_methods(tree, method, payload, accepted):
    ev = evidence(method, payload, CHARLIE_NUMBER, CHARLIE)
    assert tree.verify_assignee(CHARLIE_NUMBER, ev).accepted is accepted


def test_trusted_certificate_issuer(clock):
    tree = sample_tree(TreePolicy(trusted_issuers=["acme-ca"]), clock)
    ev = evidence(AuthMethod.THIRD_PARTY_CERTIFICATE, f"acme-ca:{CHARLIE}", CHARLIE_NUMBER, CHARLIE)
    assert tree.verify_assignee(CHARLIE_NUMBER, ev).accepted


# -- registration ---------------------------------------------------------------

def test_register(tree):
    register_charlie(tree)
    registration = tree.registration(CHARLIE_NUMBER)
    assert registration.registrant.id == CHARLIE
    assert registration.mode is ProvisioningMode.OPT_IN
    assert CHARLIE_NUMBER.digits in tree.live_record_sets()
    last = tree.audit.entries()[-1]
    assert (last.actor, last.action, last.number) == (CHARLIE, "register", CHARLIE_NUMBER)


def test_register_with_rejected_evidence(tree):
    before = export_zone(tree.all_record_sets())
    with pytest.raises(AuthFailed):
        register_charlie(tree, callback(CHARLIE_NUMBER, BETA))
    assert tree.registration(CHARLIE_NUMBER) is None
    assert export_zone(tree.all_record_sets()) == before
    assert tree.audit.entries()[-1].action == "register-denied"


def test_register_under_someone_elses_evidence(tree):
    with pytest.raises(AuthFailed):
        tree.register(
            CHARLIE_NUMBER,
            Registrant(id=BETA),
            callback(CHARLIE_NUMBER, CHARLIE),
            sip_record_set(CHARLIE_NUMBER, "sip:beta@beta.example"),
            CREDENTIALS[BETA],
        )
    assert tree.registration(CHARLIE_NUMBER) is None
    denied = tree.audit.entries()[-1]
    assert (denied.actor, denied.action) == (BETA, "register-denied")
    assert denied.detail == "evidence names someone else"


def test_register_without_evidence(tree):
    with pytest.raises(AuthFailed):
        tree.register(
            CHARLIE_NUMBER,
            Registrant(id=CHARLIE),
            None,
            sip_record_set(CHARLIE_NUMBER, "sip:c@x"),
            CREDENTIALS[CHARLIE],
        )


def test_register_twice(tree):
    with pytest.raises(DuplicateRegistration):
        tree.register(
            SAMPLE_NUMBER,
            Registrant(id="joe"),
            callback(SAMPLE_NUMBER, "joe"),
            sip_record_set(SAMPLE_NUMBER, "sip:joe@x"),
            CREDENTIALS["joe"],
        )


def test_register_undelegated(tree):
    tree.oracle.assign(SPARE, "dana", "carrier-a")
    with pytest.raises(NotDelegatedHere):
        tree.register(
            SPARE,
            Registrant(id="dana"),
            callback(SPARE, "dana"),
            sip_record_set(SPARE, "sip:d@x"),
            credential("dana"),
        )


def test_register_mode_mismatch(tree):
    with pytest.raises(ModeMismatch):
        tree.register(
            CHARLIE_NUMBER,
            Registrant(id=CHARLIE),
            callback(CHARLIE_NUMBER, CHARLIE),
            sip_record_set(CHARLIE_NUMBER, "sip:c@x"),
            CREDENTIALS[CHARLIE],
            mode=ProvisioningMode.OPT_OUT,
        )


def bulk_enroll(tree: EnumTree, provider: str, authority=ENROLLING_AUTHORITY):
    tree.oracle.assign(SPARE, "dana", "carrier-a")
    tree.delegate_number("1", SPARE, provider)
    return tree.register(
        SPARE,
        Registrant(id="dana"),
        None,
        sip_record_set(SPARE, "sip:dana@bulk.example"),
        credential("dana"),
        authority=authority,
    )


def test_opt_out_enrollment_then_withdrawal(tree):
    bulk_enroll(tree, "t2-bulk")
    registration = tree.registration(SPARE)
    assert registration.opt_out_eligible
    assert registration.enrolled_by == ENROLLING_AUTHORITY.holder

    tree.opt_out(SPARE, "dana", callback(SPARE, "dana"))
    assert tree.registration(SPARE) is None
    assert SPARE.digits not in tree.live_record_sets()
    actions = [e.action for e in tree.audit.entries() if e.number == SPARE]
    assert actions[-2:] == ["register", "opt-out"]


def test_bulk_enrollment_needs_authority(tree):
    with pytest.raises(AuthFailed):
        bulk_enroll(tree, "t2-bulk", authority=None)


def test_bulk_enrollment_of_unassigned_number(tree):
    tree.delegate_number("1", SPARE, "t2-bulk")
    with pytest.raises(UnknownNumber):
        tree.register(
            SPARE,
            Registrant(id="dana"),
            None,
            sip_record_set(SPARE, "sip:dana@bulk.example"),
            credential("dana"),
            authority=ENROLLING_AUTHORITY,
        )
    assert tree.registration(SPARE) is None
    assert tree.audit.entries()[-1].action == "register-denied"


def test_mandated_enrollment_refuses_opt_out(tree):
    tree.create_provider("t2-corp", ProvisioningMode.MANDATED)
    bulk_enroll(tree, "t2-corp")
    with pytest.raises(OptOutRefused):
        tree.opt_out(SPARE, "dana", callback(SPARE, "dana"))
    assert tree.registration(SPARE) is not None


def test_opt_out_by_someone_else(tree):
    bulk_enroll(tree, "t2-bulk")
    with pytest.raises(AuthFailed):
        tree.opt_out(SPARE, BETA, callback(SPARE, BETA))


# -- updates --------------------------------------------------------------------

def test_owner_update(tree):
    tree.update_records(SAMPLE_NUMBER, CREDENTIALS["joe"], sip_record_set(SAMPLE_NUMBER, "sip:j@n"))
    record_set = tree.live_record_sets()[SAMPLE_NUMBER.digits]
    assert record_set.records[0].rewrite.substitution == "sip:j@n"


def test_non_owner_update(tree):
    before = tree.live_record_sets()[ACME_NUMBER.digits]
    with pytest.raises(AuthFailed):
        tree.update_records(ACME_NUMBER, CREDENTIALS[BETA], sip_record_set(ACME_NUMBER, "sip:b@x"))
    assert tree.live_record_sets()[ACME_NUMBER.digits] == before
    last = tree.audit.entries()[-1]
    assert (last.actor, last.action) == (BETA, "update-denied")


def test_non_owner_update_without_enforcement(open_tree):
    open_tree.update_records(
        ACME_NUMBER, CREDENTIALS[BETA], sip_record_set(ACME_NUMBER, "sip:b@x")
    )
    last = open_tree.audit.entries()[-1]
    assert (last.actor, last.action) == (BETA, "update")


def test_update_unregistered(tree):
    with pytest.raises(NoSuchRegistration):
        tree.update_records(
            CHARLIE_NUMBER, CREDENTIALS[CHARLIE], sip_record_set(CHARLIE_NUMBER, "sip:c@x")
        )


# -- lifecycle ------------------------------------------------------------------

def test_port_leaves_records_alone(tree):
    before = export_zone(tree.all_record_sets())
    tree.port_number(ACME_NUMBER, "carrier-a", "carrier-z")
    assert export_zone(tree.all_record_sets()) == before

    registration = tree.registration(ACME_NUMBER)
    assert registration.registrant.carrier == "carrier-z"
    assert registration.registrant.subscription_state.kind == "ported"

    new_bill = evidence(AuthMethod.LIDB_MATCH, "carrier-z", ACME_NUMBER, ACME)
    old_bill = evidence(AuthMethod.LIDB_MATCH, "carrier-a", ACME_NUMBER, ACME)
    assert tree.verify_assignee(ACME_NUMBER, new_bill).accepted
    assert not tree.verify_assignee(ACME_NUMBER, old_bill).accepted


def test_port_from_wrong_carrier(tree):
    with pytest.raises(WrongCarrier):
        tree.port_number(ACME_NUMBER, "carrier-b", "carrier-z")


def test_port_unknown_number(tree):
    with pytest.raises(UnknownNumber):
        tree.port_number(SPARE, "carrier-a", "carrier-z")


def test_coupled_disconnect_quarantines_then_purges(tree, clock):
    tree.disconnect_number(SAMPLE_NUMBER)
    assert SAMPLE_NUMBER.digits not in tree.live_record_sets()
    assert tree.record_set("t2-a", to_domain(SAMPLE_NUMBER, tree.apex)) is None
    assert tree.registration(SAMPLE_NUMBER).registrant.subscription_state.kind == "disconnected"

    clock.advance(29 * SECONDS_PER_DAY)
    assert tree.purge_quarantined() == []
    clock.advance(SECONDS_PER_DAY)
    assert tree.purge_quarantined() == [SAMPLE_NUMBER]
    assert tree.registration(SAMPLE_NUMBER) is None


def test_custom_quarantine(tree, clock):
    tree.disconnect_number(SAMPLE_NUMBER, quarantine_days=1)
    clock.advance(SECONDS_PER_DAY)
    assert tree.purge_quarantined() == [SAMPLE_NUMBER]


def test_decoupled_disconnect_keeps_records(tree):
    before = tree.live_record_sets()[SAMPLE_NUMBER.digits]
    tree.set_lifecycle(coupled=False)
    tree.disconnect_number(SAMPLE_NUMBER)
    assert tree.live_record_sets()[SAMPLE_NUMBER.digits] == before
    assert not tree.oracle.is_assigned(SAMPLE_NUMBER)


def test_disconnect_unknown_number(tree):
    with pytest.raises(UnknownNumber):
        tree.disconnect_number(SPARE)


# -- disputes -------------------------------------------------------------------

def test_second_open_dispute(tree):
    tree.file_dispute(ACME_NUMBER, "mallory", "trademark")
    with pytest.raises(OpenChallengeExists):
        tree.file_dispute(ACME_NUMBER, "eve", "prior use")


def test_dispute_on_unregistered_number(tree):
    with pytest.raises(NoSuchRegistration):
        tree.file_dispute(CHARLIE_NUMBER, "mallory", "squatting")


def test_denied_dispute_changes_nothing(tree):
    before = export_zone(tree.all_record_sets())
    challenge = tree.file_dispute(ACME_NUMBER, "mallory", "trademark")
    resolved = tree.resolve_dispute(challenge.id, DisputeStatus.DENIED)
    assert resolved.status is DisputeStatus.DENIED
    assert tree.registration(ACME_NUMBER).registrant.id == ACME
    assert export_zone(tree.all_record_sets()) == before
    with pytest.raises(NoSuchChallenge):
        tree.resolve_dispute(challenge.id, DisputeStatus.DENIED)


def test_upheld_dispute_transfers_registration(tree):
    challenge = tree.file_dispute(ACME_NUMBER, "mallory", "trademark")
    tree.resolve_dispute(challenge.id, DisputeStatus.UPHELD_TRANSFERRED, credential("mallory"))

    assert tree.registration(ACME_NUMBER).registrant.id == "mallory"
    assert len(tree.snapshot().tier2["t2-a"].archive[ACME_NUMBER.digits]) == 1
    assert ACME_NUMBER.digits not in tree.live_record_sets()
    last = tree.audit.entries()[-1]
    assert last.action == "dispute-transfer"
    assert "registrant=mallory" in last.detail

    with pytest.raises(AuthFailed):
        tree.update_records(ACME_NUMBER, CREDENTIALS[ACME], sip_record_set(ACME_NUMBER, "sip:a@x"))
    tree.update_records(ACME_NUMBER, credential("mallory"), sip_record_set(ACME_NUMBER, "sip:m@x"))
    assert [c.status for c in tree.list_disputes()] == [DisputeStatus.UPHELD_TRANSFERRED]


def test_transfer_installs_challenger_records(tree):
    challenge = tree.file_dispute(ACME_NUMBER, BETA, "trademark")
    tree.resolve_dispute(
        challenge.id,
        DisputeStatus.UPHELD_TRANSFERRED,
        CREDENTIALS[BETA],
        record_set=sip_record_set(ACME_NUMBER, "sip:sales@beta.example"),
    )
    resolver = Resolver(RootConfig.single(tree), clock=tree.clock)
    assert [str(c) for c in resolver.resolve(ACME_NUMBER).contacts] == ["sip:sales@beta.example"]
    (archived,) = tree.snapshot().tier2["t2-a"].archive[ACME_NUMBER.digits]
    assert "sip:sales@acme.example" in archived


def test_transfer_without_records_stops_resolution(tree):
    challenge = tree.file_dispute(ACME_NUMBER, BETA, "trademark")
    tree.resolve_dispute(challenge.id, DisputeStatus.UPHELD_TRANSFERRED, CREDENTIALS[BETA])
    resolver = Resolver(RootConfig.single(tree), clock=tree.clock)
    with pytest.raises(NxDomain):
        resolver.resolve(ACME_NUMBER)


def test_unknown_challenge(tree):
    with pytest.raises(NoSuchChallenge):
        tree.resolve_dispute(42, DisputeStatus.DENIED)


# -- audit and storage ----------------------------------------------------------

def test_each_mutation_appends_one_entry(tree):
    count = len(tree.audit)
    register_charlie(tree)
    assert len(tree.audit) == count + 1
    tree.update_records(
        CHARLIE_NUMBER, CREDENTIALS[CHARLIE], sip_record_set(CHARLIE_NUMBER, "sip:c2@x")
    )
    assert len(tree.audit) == count + 2
    seqs = [entry.seq for entry in tree.audit.entries()]
    assert seqs == list(range(1, len(seqs) + 1))


def test_audit_log_tsv_round_trip(tree):
    tree.file_dispute(ACME_NUMBER, "mallory", "tab\there")
    restored = AuditLog.from_tsv(tree.audit.to_tsv())
    assert restored.entries() == tree.audit.entries()


def test_save_and_load(tree, clock, tmp_path):
    tree.disconnect_number(SAMPLE_NUMBER)
    tree.file_dispute(ACME_NUMBER, "mallory", "trademark")
    save_tree(tree, tmp_path)
    first = {p.name: p.read_text() for p in tmp_path.iterdir()}

    loaded = load_tree(tmp_path, clock)
    assert loaded.snapshot() == tree.snapshot()
    assert loaded.audit.entries() == tree.audit.entries()
    assert loaded.oracle.to_tsv() == tree.oracle.to_tsv()

    save_tree(loaded, tmp_path)
    assert {p.name: p.read_text() for p in tmp_path.iterdir()} == first


def test_readers_never_see_half_an_update(tree):
    versions = [sip_record_set(SAMPLE_NUMBER, f"sip:v{i}@x") for i in range(2)]
    expected = {versions[0], versions[1]}
    tree.update_records(SAMPLE_NUMBER, CREDENTIALS["joe"], versions[0])

    def write(i: int) -> None:
        tree.update_records(SAMPLE_NUMBER, CREDENTIALS["joe"], versions[i % 2])

    def read(_: int):
        return tree.live_record_sets()[SAMPLE_NUMBER.digits]

    with ThreadPoolExecutor(max_workers=8) as pool:
        writes = pool.map(write, range(50))
        seen = list(pool.map(read, range(200)))
        list(writes)
    assert set(seen) <= expected
