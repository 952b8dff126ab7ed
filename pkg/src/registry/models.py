"""
Value types of the tiered ENUM registry.

Tier 0 delegates country codes (only once a nation has authorized it),
Tier 1 delegates numbers to Tier 2 providers, and Tier 2 holds the NAPTR
record sets together with who registered them.
"""

import hashlib
import re
from datetime import datetime
from enum import StrEnum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..e164_core.numbers import E164Number
from ..errors import ConfigError, InvalidCountryCode
from ..naptr.records import RecordSet

_COUNTRY_CODE = re.compile(r"[0-9]{1,3}")


def check_country_code(cc: str) -> str:
    if not _COUNTRY_CODE.fullmatch(cc):
        raise InvalidCountryCode(f"country code {cc!r} must be 1-3 digits")
    return cc


class ProvisioningMode(StrEnum):
    OPT_IN = "opt-in"
    OPT_OUT = "opt-out"
    MANDATED = "mandated"


class AuthMethod(StrEnum):
    CALLBACK_COMPLETED = "callback"
    PHONE_BILL_SHOWN = "bill"
    LIDB_MATCH = "lidb"
    ANI_MATCH = "ani"
    DIRECTORY_LISTING_MATCH = "directory"
    THIRD_PARTY_CERTIFICATE = "certificate"
    ONA_DISCLOSURE = "ona"


class AuthEvidence(BaseModel):
    """Proof offered by `claimant` that they are the assignee of a number."""

    model_config = ConfigDict(frozen=True)

    method: AuthMethod
    payload: str
    asserted_number: E164Number
    claimant: str

    @field_validator("payload")
    @classmethod
    def _payload_present(cls, value: str) -> str:
        if not value:
            raise ValueError("evidence payload must not be empty")
        return value


class AuthVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    accepted: bool
    reason: str = ""


ACCEPTED = AuthVerdict(accepted=True)


def rejected(reason: str) -> AuthVerdict:
    return AuthVerdict(accepted=False, reason=reason)


class Credential(BaseModel):
    """A secret held by a registrant or an enrolling authority."""

    model_config = ConfigDict(frozen=True)

    holder: str
    secret: str

    def digest(self) -> str:
        return hashlib.sha256(f"{self.holder}\0{self.secret}".encode()).hexdigest()

    @classmethod
    def parse(cls, text: str) -> "Credential":
        holder, sep, secret = text.partition(":")
        if not sep or not holder or not secret:
            raise ConfigError(f"credential {text!r} must look like holder:secret")
        return cls(holder=holder, secret=secret)


class SubscriptionState(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["active", "ported", "disconnected"] = "active"
    to_carrier: str | None = None
    at: datetime | None = None


class Registrant(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    display_name: str = ""
    subscription_state: SubscriptionState = SubscriptionState()
    carrier: str = ""


class Registration(BaseModel):
    """Tier-2 bookkeeping for one registered number."""

    registrant: Registrant
    mode: ProvisioningMode
    credential_digest: str
    enrolled_by: str
    opt_out_eligible: bool = False


class Tier0Entry(BaseModel):
    authorized: bool = False
    delegation: str | None = None


class Tier0Zone(BaseModel):
    apex: str
    entries: dict[str, Tier0Entry] = Field(default_factory=dict)

    def country_of(self, digits: str) -> str | None:
        """Longest country code known to this zone that prefixes the number."""
        for length in (3, 2, 1):
            cc = digits[:length]
            if len(cc) == length and cc in self.entries:
                return cc
        return None


class Tier1Zone(BaseModel):
    country_code: str
    provider_id: str
    delegations: dict[str, str] = Field(default_factory=dict)


class Tier2Zone(BaseModel):
    provider_id: str
    mode: ProvisioningMode = ProvisioningMode.OPT_IN
    # Keyed by rendered owner domain; persisted as zone files, not in the manifest.
    record_sets: dict[str, RecordSet] = Field(default_factory=dict, exclude=True)
    registrant_index: dict[str, Registration] = Field(default_factory=dict)
    # digits -> epoch seconds after which a disconnected number is purged
    quarantine: dict[str, float] = Field(default_factory=dict)
    archive: dict[str, list[str]] = Field(default_factory=dict)


class AuditEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    seq: int
    timestamp: datetime
    actor: str
    action: str
    # None for zone-level changes that concern no single number.
    number: E164Number | None
    detail: str = ""


class DisputeStatus(StrEnum):
    OPEN = "open"
    UPHELD_TRANSFERRED = "upheld-transferred"
    DENIED = "denied"


class DisputeChallenge(BaseModel):
    id: int
    number: E164Number
    challenger: str
    grounds: str
    status: DisputeStatus = DisputeStatus.OPEN
