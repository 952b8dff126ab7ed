"""
One simulated ENUM tree: a Tier-0 zone under an apex, the national Tier-1
zones it delegates to, and the Tier-2 providers holding record sets.

Mutations go through a single lock and append exactly one audit entry;
reader methods take the same lock and hand out immutable values, so a
reader never sees half of a mutation.
"""

import logging
import threading

from pydantic import BaseModel, Field

from ..clock import Clock, system_clock, to_datetime
from ..config import DEFAULT_QUARANTINE_DAYS, DEFAULT_TTL
from ..e164_core.numbers import E164Number, EnumDomain, from_domain, normalize_apex, to_domain
from ..errors import (
    AlreadyAuthorized,
    AlreadyDelegated,
    AuthFailed,
    ConfigError,
    DuplicateRegistration,
    InvalidCountryCode,
    ModeMismatch,
    NoSuchChallenge,
    NoSuchRegistration,
    NotDelegatedHere,
    OpenChallengeExists,
    OptOutRefused,
    ProviderConflict,
    UnknownNumber,
    UnknownProvider,
    WrongCountryCode,
)
from ..naptr.records import RecordSet
from ..naptr.zonefile import export_zone
from .audit import AuditLog
from .models import (
    AuditEntry,
    AuthEvidence,
    AuthVerdict,
    Credential,
    DisputeChallenge,
    DisputeStatus,
    ProvisioningMode,
    Registrant,
    Registration,
    SubscriptionState,
    Tier0Entry,
    Tier0Zone,
    Tier1Zone,
    Tier2Zone,
    check_country_code,
)
from .oracle import AssignmentOracle, verify_assignee

logger = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400


class TreePolicy(BaseModel):
    """Per-tree administration policy."""

    coupled: bool = True
    quarantine_days: int = DEFAULT_QUARANTINE_DAYS
    enforce_auth: bool = True
    default_ttl: int = DEFAULT_TTL
    # enrolling authority -> credential digest
    authorities: dict[str, str] = Field(default_factory=dict)
    trusted_issuers: list[str] = Field(default_factory=list)


class TreeSnapshot(BaseModel):
    """Everything in a tree except the oracle and the audit log."""

    apex: str
    policy: TreePolicy
    tier0: Tier0Zone
    tier1: dict[str, Tier1Zone] = Field(default_factory=dict)
    tier2: dict[str, Tier2Zone] = Field(default_factory=dict)
    disputes: dict[int, DisputeChallenge] = Field(default_factory=dict)


class EnumTree:
    def __init__(
        self,
        apex: str,
        policy: TreePolicy | None = None,
        oracle: AssignmentOracle | None = None,
        audit: AuditLog | None = None,
        clock: Clock = system_clock,
    ):
        apex = normalize_apex(apex)
        self._state = TreeSnapshot(
            apex=apex,
            policy=(policy or TreePolicy()).model_copy(deep=True),
            tier0=Tier0Zone(apex=apex),
        )
        self.oracle = oracle or AssignmentOracle()
        self.oracle.trusted_issuers = tuple(self._state.policy.trusted_issuers)
        self.audit = audit or AuditLog()
        self.clock = clock
        self._lock = threading.RLock()

    @classmethod
    def from_snapshot(
        cls,
        snapshot: TreeSnapshot,
        oracle: AssignmentOracle | None = None,
        audit: AuditLog | None = None,
        clock: Clock = system_clock,
    ) -> "EnumTree":
        tree = cls(snapshot.apex, snapshot.policy, oracle, audit, clock)
        tree._state = snapshot.model_copy(deep=True)
        return tree

    @property
    def apex(self) -> str:
        return self._state.apex

    @property
    def policy(self) -> TreePolicy:
        return self._state.policy

    def snapshot(self) -> TreeSnapshot:
        with self._lock:
            return self._state.model_copy(deep=True)

    def _audit(
        self, actor: str, action: str, number: E164Number | None, detail: str = ""
    ) -> AuditEntry:
        entry = self.audit.append(self.clock(), actor, action, number, detail)
        log = logger.warning if action.endswith("-denied") else logger.info
        log("audit #%d %s %s %s %s", entry.seq, actor, action, number or "-", detail)
        return entry

    # -- zone setup --------------------------------------------------------

    def stage_country(self, cc: str, provider_id: str, actor: str = "tier1") -> Tier1Zone:
        """Prepare a national zone ahead of authorization; Tier 0 does not
        delegate to it until authorize_country."""
        check_country_code(cc)
        with self._lock:
            existing = self._state.tier1.get(cc)
            if existing is not None:
                if existing.provider_id != provider_id:
                    raise ProviderConflict(
                        f"country {cc} is already run by {existing.provider_id!r}"
                    )
                return existing.model_copy(deep=True)
            zone = Tier1Zone(country_code=cc, provider_id=provider_id)
            self._state.tier1[cc] = zone
            self._state.tier0.entries.setdefault(cc, Tier0Entry())
            self._audit(actor, "stage-country", E164Number(digits=cc), f"provider={provider_id}")
            return zone.model_copy(deep=True)

    def authorize_country(self, cc: str, provider_id: str, actor: str = "tier0") -> Tier0Zone:
        """A nation opts in and names its single Tier-1 provider."""
        check_country_code(cc)
        with self._lock:
            entry = self._state.tier0.entries.get(cc)
            if entry is not None and entry.authorized:
                raise AlreadyAuthorized(
                    f"country {cc} is already delegated to {entry.delegation!r}"
                )
            zone = self._state.tier1.get(cc)
            if zone is not None and zone.provider_id != provider_id:
                raise ProviderConflict(f"country {cc} is staged for {zone.provider_id!r}")
            if zone is None:
                self._state.tier1[cc] = Tier1Zone(country_code=cc, provider_id=provider_id)
            self._state.tier0.entries[cc] = Tier0Entry(authorized=True, delegation=provider_id)
            detail = f"provider={provider_id}"
            self._audit(actor, "authorize-country", E164Number(digits=cc), detail)
            return self._state.tier0.model_copy(deep=True)

    def create_provider(
        self,
        provider_id: str,
        mode: ProvisioningMode = ProvisioningMode.OPT_IN,
        actor: str = "tier1",
    ) -> Tier2Zone:
        with self._lock:
            if provider_id in self._state.tier2:
                raise ProviderConflict(f"provider {provider_id!r} already exists")
            zone = Tier2Zone(provider_id=provider_id, mode=mode)
            self._state.tier2[provider_id] = zone
            self._audit(actor, "create-provider", None, f"provider={provider_id} mode={mode}")
            return zone.model_copy(deep=True)

    def add_authority(self, credential: Credential, actor: str = "tier1") -> None:
        """Register an enrolling authority for opt-out and mandated enrollment."""
        with self._lock:
            self._state.policy.authorities[credential.holder] = credential.digest()
            self._audit(actor, "add-authority", None, f"authority={credential.holder}")

    def delegate_number(
        self, cc: str, number: E164Number, tier2_provider: str, actor: str = "tier1"
    ) -> Tier1Zone:
        with self._lock:
            zone = self._state.tier1.get(cc)
            if zone is None:
                raise InvalidCountryCode(f"no Tier-1 zone for country code {cc}")
            if not number.digits.startswith(cc) or number.digits == cc:
                raise WrongCountryCode(f"{number} is not under country code {cc}")
            if number.digits in zone.delegations:
                raise AlreadyDelegated(
                    f"{number} is already delegated to {zone.delegations[number.digits]!r}"
                )
            if tier2_provider not in self._state.tier2:
                raise UnknownProvider(f"no Tier-2 provider {tier2_provider!r}")
            zone.delegations[number.digits] = tier2_provider
            self._audit(actor, "delegate", number, f"provider={tier2_provider}")
            return zone.model_copy(deep=True)

    # -- registrant operations ---------------------------------------------

    def verify_assignee(self, number: E164Number, evidence: AuthEvidence) -> AuthVerdict:
        return verify_assignee(number, evidence, self.oracle)

    def _delegated_provider(self, number: E164Number) -> Tier2Zone | None:
        cc = self._state.tier0.country_of(number.digits)
        zone = self._state.tier1.get(cc) if cc else None
        provider = zone.delegations.get(number.digits) if zone else None
        return self._state.tier2.get(provider) if provider else None

    def _registered(self, number: E164Number) -> tuple[Tier2Zone, Registration]:
        zone = self._delegated_provider(number)
        registration = zone.registrant_index.get(number.digits) if zone else None
        if zone is None or registration is None:
            raise NoSuchRegistration(f"{number} is not registered")
        return zone, registration

    def _owned(self, number: E164Number, record_set: RecordSet) -> RecordSet:
        """Re-home a record set under this tree's domain for the number."""
        domain = to_domain(number, self.apex)
        if record_set.owner.labels != domain.labels:
            raise ConfigError(f"record set for {record_set.owner} does not belong to {number}")
        if record_set.owner == domain:
            return record_set
        return record_set.model_copy(update={"owner": domain})

    def register(
        self,
        number: E164Number,
        registrant: Registrant,
        evidence: AuthEvidence | None,
        record_set: RecordSet,
        credential: Credential,
        mode: ProvisioningMode | None = None,
        authority: Credential | None = None,
        provider_id: str | None = None,
    ) -> Tier2Zone:
        """Store a record set for an authenticated assignee, or for a bulk
        enrollment made by a recognized enrolling authority."""
        with self._lock:
            zone = self._delegated_provider(number)
            if zone is None or (provider_id is not None and zone.provider_id != provider_id):
                where = provider_id or "any provider"
                raise NotDelegatedHere(f"{number} is not delegated to {where}")
            mode = mode or zone.mode
            if mode != zone.mode:
                raise ModeMismatch(f"provider {zone.provider_id!r} enrolls {zone.mode}, not {mode}")
            if number.digits in zone.registrant_index:
                raise DuplicateRegistration(f"{number} is already registered")
            owned = self._owned(number, record_set)

            if mode is ProvisioningMode.OPT_IN:
                actor = registrant.id
                if self.policy.enforce_auth:
                    if evidence is None:
                        verdict = AuthVerdict(accepted=False, reason="no evidence offered")
                    else:
                        verdict = verify_assignee(number, evidence, self.oracle)
                    if verdict.accepted and evidence.claimant != registrant.id:
                        verdict = AuthVerdict(accepted=False, reason="evidence names someone else")
                    if not verdict.accepted:
                        self._audit(actor, "register-denied", number, verdict.reason)
                        raise AuthFailed(f"cannot register {number}: {verdict.reason}")
            else:
                actor = authority.holder if authority else registrant.id
                if not self.oracle.is_assigned(number):
                    self._audit(actor, "register-denied", number, "number is not assigned")
                    raise UnknownNumber(f"{number} is not an assigned number")
                if self.policy.enforce_auth and not self._is_authority(authority):
                    self._audit(actor, "register-denied", number, "not an enrolling authority")
                    raise AuthFailed(f"{mode} enrollment of {number} needs an enrolling authority")

            zone.registrant_index[number.digits] = Registration(
                registrant=registrant,
                mode=mode,
                credential_digest=credential.digest(),
                enrolled_by=actor,
                opt_out_eligible=mode is not ProvisioningMode.MANDATED,
            )
            zone.record_sets[str(owned.owner)] = owned
            zone.quarantine.pop(number.digits, None)
            self._audit(actor, "register", number, f"registrant={registrant.id} mode={mode}")
            return zone.model_copy(deep=True)

    def _is_authority(self, authority: Credential | None) -> bool:
        if authority is None:
            return False
        return self.policy.authorities.get(authority.holder) == authority.digest()

    def update_records(
        self, number: E164Number, credential: Credential, record_set: RecordSet
    ) -> Tier2Zone:
        """Replace a registered number's record set. Resolvers see the change
        only once their cached copy expires."""
        with self._lock:
            zone, registration = self._registered(number)
            owned = self._owned(number, record_set)
            if self.policy.enforce_auth and credential.digest() != registration.credential_digest:
                self._audit(credential.holder, "update-denied", number, "credential mismatch")
                raise AuthFailed(f"{credential.holder!r} may not update {number}")
            zone.record_sets[str(owned.owner)] = owned
            self._audit(credential.holder, "update", number, f"records={len(owned.records)}")
            return zone.model_copy(deep=True)

    def opt_out(self, number: E164Number, registrant_id: str, evidence: AuthEvidence) -> Tier2Zone:
        """The assignee withdraws an enrollment; mandated enrollments stay."""
        with self._lock:
            zone, registration = self._registered(number)
            if not registration.opt_out_eligible:
                self._audit(registrant_id, "opt-out-denied", number, f"mode={registration.mode}")
                raise OptOutRefused(f"{number} was enrolled as {registration.mode}")
            if self.policy.enforce_auth:
                verdict = verify_assignee(number, evidence, self.oracle)
                if verdict.accepted and evidence.claimant != registrant_id:
                    verdict = AuthVerdict(accepted=False, reason="evidence names someone else")
                if not verdict.accepted:
                    self._audit(registrant_id, "opt-out-denied", number, verdict.reason)
                    raise AuthFailed(f"cannot opt {number} out: {verdict.reason}")
            del zone.registrant_index[number.digits]
            zone.record_sets.pop(str(to_domain(number, self.apex)), None)
            self._audit(registrant_id, "opt-out", number, f"mode={registration.mode}")
            return zone.model_copy(deep=True)

    # -- number lifecycle --------------------------------------------------

    def port_number(self, number: E164Number, from_carrier: str, to_carrier: str) -> None:
        """Move the authentication source of truth to the new carrier. The
        record set is not touched."""
        with self._lock:
            self.oracle.port(number, from_carrier, to_carrier)
            zone = self._delegated_provider(number)
            registration = zone.registrant_index.get(number.digits) if zone else None
            if registration is not None:
                registration.registrant = registration.registrant.model_copy(
                    update={
                        "carrier": to_carrier,
                        "subscription_state": SubscriptionState(
                            kind="ported", to_carrier=to_carrier
                        ),
                    }
                )
            self._audit(to_carrier, "port", number, f"from={from_carrier} to={to_carrier}")

    def disconnect_number(self, number: E164Number, quarantine_days: int | None = None) -> None:
        """The telephone number is terminated. Coupled trees stop resolving it
        at once and purge it after quarantine; decoupled trees keep it."""
        with self._lock:
            now = self.clock()
            self.oracle.release(number)
            zone = self._delegated_provider(number)
            registration = zone.registrant_index.get(number.digits) if zone else None
            if registration is not None:
                registration.registrant = registration.registrant.model_copy(
                    update={
                        "subscription_state": SubscriptionState(
                            kind="disconnected", at=to_datetime(now)
                        )
                    }
                )
            if self.policy.coupled:
                days = self.policy.quarantine_days if quarantine_days is None else quarantine_days
                until = now + days * SECONDS_PER_DAY
                if zone is not None:
                    zone.quarantine[number.digits] = until
                detail = f"coupled quarantine-days={days}"
            else:
                detail = "decoupled"
            self._audit("carrier", "disconnect", number, detail)

    def set_lifecycle(self, coupled: bool, actor: str = "tier2") -> None:
        """Choose whether disconnects remove ENUM data (coupled) or leave it."""
        with self._lock:
            self._state.policy.coupled = coupled
            self._audit(actor, "set-lifecycle", None, "coupled" if coupled else "decoupled")

    def purge_quarantined(self) -> list[E164Number]:
        """Delete record sets whose quarantine has run out."""
        with self._lock:
            now = self.clock()
            purged = []
            for zone in self._state.tier2.values():
                for digits, until in list(zone.quarantine.items()):
                    if until > now:
                        continue
                    number = E164Number(digits=digits)
                    del zone.quarantine[digits]
                    zone.registrant_index.pop(digits, None)
                    zone.record_sets.pop(str(to_domain(number, self.apex)), None)
                    self._audit("tier2", "purge", number, f"provider={zone.provider_id}")
                    purged.append(number)
            return purged

    # -- disputes ----------------------------------------------------------

    def file_dispute(self, number: E164Number, challenger: str, grounds: str) -> DisputeChallenge:
        with self._lock:
            self._registered(number)
            for challenge in self._state.disputes.values():
                if challenge.number == number and challenge.status is DisputeStatus.OPEN:
                    raise OpenChallengeExists(f"challenge #{challenge.id} on {number} is open")
            challenge = DisputeChallenge(
                id=len(self._state.disputes) + 1,
                number=number,
                challenger=challenger,
                grounds=grounds,
            )
            self._state.disputes[challenge.id] = challenge
            self._audit(challenger, "dispute-filed", number, f"challenge={challenge.id} {grounds}")
            return challenge.model_copy()

    def resolve_dispute(
        self,
        challenge_id: int,
        outcome: DisputeStatus,
        challenger_credential: Credential | None = None,
        actor: str = "dispute-panel",
        record_set: RecordSet | None = None,
    ) -> DisputeChallenge:
        """Close an open challenge. A transfer archives the loser's record set
        and takes it out of the zone; the challenger's set replaces it when
        one is given."""
        with self._lock:
            challenge = self._state.disputes.get(challenge_id)
            if challenge is None or challenge.status is not DisputeStatus.OPEN:
                raise NoSuchChallenge(f"no open challenge #{challenge_id}")
            if outcome is DisputeStatus.OPEN:
                raise ConfigError("a dispute is resolved as upheld-transferred or denied")
            number = challenge.number
            if outcome is DisputeStatus.DENIED:
                challenge.status = outcome
                self._audit(actor, "dispute-denied", number, f"challenge={challenge_id}")
                return challenge.model_copy()

            if challenger_credential is None:
                raise ConfigError("a transfer needs the challenger's new credential")
            zone, registration = self._registered(number)
            owned = self._owned(number, record_set) if record_set is not None else None
            key = str(to_domain(number, self.apex))
            current = zone.record_sets.pop(key, None)
            if current is not None:
                zone.archive.setdefault(number.digits, []).append(export_zone([current]))
            if owned is not None:
                zone.record_sets[key] = owned
            registration.registrant = Registrant(
                id=challenge.challenger, display_name=challenge.challenger
            )
            registration.credential_digest = challenger_credential.digest()
            challenge.status = outcome
            self._audit(
                actor,
                "dispute-transfer",
                number,
                f"registrant={challenge.challenger} challenge={challenge_id}",
            )
            return challenge.model_copy()

    def list_disputes(self) -> list[DisputeChallenge]:
        with self._lock:
            return [c.model_copy() for c in self._state.disputes.values()]

    # -- zone import -------------------------------------------------------

    def import_record_sets(self, record_sets: list[RecordSet], actor: str = "operator") -> int:
        """Load record sets into the Tier-2 providers their numbers are
        delegated to."""
        with self._lock:
            for record_set in record_sets:
                number = from_domain(record_set.owner)
                zone = self._delegated_provider(number)
                if zone is None:
                    raise NotDelegatedHere(f"{number} is not delegated in this tree")
                owned = self._owned(number, record_set)
                zone.record_sets[str(owned.owner)] = owned
                self._audit(actor, "zone-import", number, f"provider={zone.provider_id}")
            return len(record_sets)

    # -- readers -----------------------------------------------------------

    def country_entry(self, digits: str) -> tuple[str, Tier0Entry] | None:
        with self._lock:
            cc = self._state.tier0.country_of(digits)
            if cc is None:
                return None
            return cc, self._state.tier0.entries[cc].model_copy()

    def tier1_delegation(self, cc: str, provider_id: str, digits: str) -> str | None:
        with self._lock:
            zone = self._state.tier1.get(cc)
            if zone is None or zone.provider_id != provider_id:
                return None
            return zone.delegations.get(digits)

    def record_set(self, provider_id: str, domain: EnumDomain) -> RecordSet | None:
        """The live record set for a domain; quarantined numbers have none."""
        with self._lock:
            zone = self._state.tier2.get(provider_id)
            if zone is None:
                return None
            if from_domain(domain).digits in zone.quarantine:
                return None
            return zone.record_sets.get(str(domain))

    def registration(self, number: E164Number) -> Registration | None:
        with self._lock:
            zone = self._delegated_provider(number)
            registration = zone.registrant_index.get(number.digits) if zone else None
            return registration.model_copy(deep=True) if registration else None

    def all_record_sets(self) -> list[RecordSet]:
        with self._lock:
            return [rs for zone in self._state.tier2.values() for rs in zone.record_sets.values()]

    def live_record_sets(self) -> dict[str, RecordSet]:
        """digits -> record set for every number a resolver can currently reach."""
        with self._lock:
            live = {}
            for cc, zone in self._state.tier1.items():
                entry = self._state.tier0.entries.get(cc)
                if entry is None or not entry.authorized or entry.delegation != zone.provider_id:
                    continue
                for digits, provider_id in zone.delegations.items():
                    if self._state.tier0.country_of(digits) != cc:
                        continue
                    number = E164Number(digits=digits)
                    record_set = self.record_set(provider_id, to_domain(number, self.apex))
                    if record_set is not None:
                        live[digits] = record_set
            return live
