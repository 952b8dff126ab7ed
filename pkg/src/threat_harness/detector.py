"""Audit-log detector: record changes made by anyone but the registrant of record."""

import re

from ..registry.audit import OWNERSHIP_ACTIONS, RECORD_ACTIONS
from ..registry.models import AuditEntry

_REGISTRANT = re.compile(r"\bregistrant=(\S+)")


def registrant_in(entry: AuditEntry) -> str | None:
    match = _REGISTRANT.search(entry.detail)
    return match.group(1) if match else None


def find_unauthorized(entries: list[AuditEntry], since_seq: int = 0) -> list[AuditEntry]:
    """Record mutations after `since_seq` whose actor was not, at that moment,
    the registrant of record for the number."""
    owners: dict[str, str | None] = {}
    flagged = []
    for entry in entries:
        if entry.number is None:
            continue
        digits = entry.number.digits
        if entry.action in OWNERSHIP_ACTIONS:
            owners[digits] = registrant_in(entry)
        elif entry.action in RECORD_ACTIONS and entry.seq > since_seq:
            if entry.actor != owners.get(digits):
                flagged.append(entry)
    return flagged


def find_denied(entries: list[AuditEntry], since_seq: int = 0) -> list[AuditEntry]:
    return [e for e in entries if e.seq > since_seq and e.action.endswith("-denied")]
