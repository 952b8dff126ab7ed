"""
Telephone-number assignment oracle and assignee verification.

The oracle stands in for the telephone network's own records (who holds a
number and which carrier serves it). Each evidence method is a strategy
that checks its payload against the oracle; the carrier-backed methods
follow the number when it is ported.
"""

import logging
import threading
from collections.abc import Callable

from pydantic import BaseModel, ConfigDict

from ..e164_core.numbers import E164Number
from ..errors import ConfigError, UnknownNumber, WrongCarrier
from .models import ACCEPTED, AuthEvidence, AuthMethod, AuthVerdict, rejected

logger = logging.getLogger(__name__)


class Assignment(BaseModel):
    model_config = ConfigDict(frozen=True)

    registrant_id: str
    carrier: str


class AssignmentOracle:
    """number -> (registrant, carrier). Disconnected numbers are removed."""

    def __init__(
        self,
        assignments: dict[str, Assignment] | None = None,
        trusted_issuers: tuple[str, ...] = (),
    ):
        self._assignments = dict(assignments or {})
        self.trusted_issuers = trusted_issuers
        self._lock = threading.Lock()

    def assign(self, number: E164Number, registrant_id: str, carrier: str) -> None:
        with self._lock:
            self._assignments[number.digits] = Assignment(
                registrant_id=registrant_id, carrier=carrier
            )

    def lookup(self, number: E164Number) -> Assignment:
        with self._lock:
            assignment = self._assignments.get(number.digits)
        if assignment is None:
            raise UnknownNumber(f"{number} is not an assigned telephone number")
        return assignment

    def is_assigned(self, number: E164Number) -> bool:
        with self._lock:
            return number.digits in self._assignments

    def port(self, number: E164Number, from_carrier: str, to_carrier: str) -> Assignment:
        with self._lock:
            current = self._assignments.get(number.digits)
            if current is None:
                raise UnknownNumber(f"{number} is not an assigned telephone number")
            if current.carrier != from_carrier:
                raise WrongCarrier(
                    f"{number} is served by {current.carrier!r}, not {from_carrier!r}"
                )
            ported = current.model_copy(update={"carrier": to_carrier})
            self._assignments[number.digits] = ported
            return ported

    def release(self, number: E164Number) -> Assignment:
        with self._lock:
            current = self._assignments.pop(number.digits, None)
        if current is None:
            raise UnknownNumber(f"{number} is not an assigned telephone number")
        return current

    def to_tsv(self) -> str:
        with self._lock:
            rows = sorted(self._assignments.items())
        return "".join(f"{digits}\t{a.registrant_id}\t{a.carrier}\n" for digits, a in rows)

    @classmethod
    def from_tsv(cls, text: str, trusted_issuers: tuple[str, ...] = ()) -> "AssignmentOracle":
        assignments = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ConfigError(f"oracle line {lineno}: expected 3 tab-separated fields")
            digits, registrant_id, carrier = fields
            number = E164Number(digits=digits)
            assignments[number.digits] = Assignment(registrant_id=registrant_id, carrier=carrier)
        return cls(assignments, trusted_issuers)


def _callback(ev: AuthEvidence, held: Assignment, oracle: AssignmentOracle) -> AuthVerdict:
    if ev.payload.lower() != "ok":
        return rejected("callback was not completed")
    return ACCEPTED


def _carrier_record(ev: AuthEvidence, held: Assignment, oracle: AssignmentOracle) -> AuthVerdict:
    # Bills, LIDB and ONA disclosures come from whichever carrier serves the line now.
    if ev.payload != held.carrier:
        return rejected(f"{ev.payload!r} is not the serving carrier")
    return ACCEPTED


def _ani(ev: AuthEvidence, held: Assignment, oracle: AssignmentOracle) -> AuthVerdict:
    if ev.payload.lstrip("+") != ev.asserted_number.digits:
        return rejected("calling number identification does not match")
    return ACCEPTED


def _directory(ev: AuthEvidence, held: Assignment, oracle: AssignmentOracle) -> AuthVerdict:
    if ev.payload != held.registrant_id:
        return rejected("directory listing names someone else")
    return ACCEPTED


def _certificate(ev: AuthEvidence, held: Assignment, oracle: AssignmentOracle) -> AuthVerdict:
    issuer, _, subject = ev.payload.partition(":")
    if issuer not in oracle.trusted_issuers:
        return rejected(f"certificate issuer {issuer!r} is not trusted")
    if subject != held.registrant_id:
        return rejected("certificate subject is not the assignee")
    return ACCEPTED


_STRATEGIES: dict[
    AuthMethod, Callable[[AuthEvidence, Assignment, AssignmentOracle], AuthVerdict]
] = {
    AuthMethod.CALLBACK_COMPLETED: _callback,
    AuthMethod.PHONE_BILL_SHOWN: _carrier_record,
    AuthMethod.LIDB_MATCH: _carrier_record,
    AuthMethod.ONA_DISCLOSURE: _carrier_record,
    AuthMethod.ANI_MATCH: _ani,
    AuthMethod.DIRECTORY_LISTING_MATCH: _directory,
    AuthMethod.THIRD_PARTY_CERTIFICATE: _certificate,
}


def verify_assignee(
    number: E164Number, evidence: AuthEvidence, directory: AssignmentOracle
) -> AuthVerdict:
    """Accepted iff the oracle says the claimant holds the number and the
    evidence checks out for its method."""
    if evidence.asserted_number != number:
        return rejected(f"evidence is for {evidence.asserted_number}, not {number}")
    held = directory.lookup(number)
    if held.registrant_id != evidence.claimant:
        return rejected(f"{evidence.claimant!r} is not the assignee of {number}")
    verdict = _STRATEGIES[evidence.method](evidence, held, directory)
    logger.debug("verify %s via %s: %s", number, evidence.method, verdict)
    return verdict


def parse_evidence(text: str, number: E164Number, claimant: str) -> AuthEvidence:
    """`method:payload`, as given on the command line."""
    method, sep, payload = text.partition(":")
    if not sep:
        raise ConfigError(f"evidence {text!r} must look like method:payload")
    if not payload:
        raise ConfigError(f"evidence {text!r} has an empty payload")
    try:
        auth_method = AuthMethod(method.lower())
    except ValueError as exc:
        known = ", ".join(m.value for m in AuthMethod)
        raise ConfigError(f"unknown evidence method {method!r} (known: {known})") from exc
    return AuthEvidence(
        method=auth_method, payload=payload, asserted_number=number, claimant=claimant
    )
