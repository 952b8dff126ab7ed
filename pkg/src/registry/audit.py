"""Append-only audit log; one entry per registry mutation or denied attempt."""

import re
import threading
from datetime import datetime

from ..clock import to_datetime
from ..e164_core.numbers import E164Number
from ..errors import ConfigError
from .models import AuditEntry

# Actions that change who controls a number's records.
OWNERSHIP_ACTIONS = frozenset({"register", "dispute-transfer"})
# Actions on records that only the registrant of record may perform.
RECORD_ACTIONS = frozenset({"update", "opt-out"})

_FIELD_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n"}
_FIELD_UNESCAPE = re.compile(r"\\(.)")


def _escape(value: str) -> str:
    return "".join(_FIELD_ESCAPES.get(char, char) for char in value)


def _unescape(value: str) -> str:
    return _FIELD_UNESCAPE.sub(
        lambda m: {"t": "\t", "n": "\n"}.get(m.group(1), m.group(1)), value
    )


class AuditLog:
    def __init__(self, entries: list[AuditEntry] | None = None):
        self._entries = list(entries or [])
        self._lock = threading.Lock()

    def append(
        self, now: float, actor: str, action: str, number: E164Number | None, detail: str = ""
    ) -> AuditEntry:
        with self._lock:
            entry = AuditEntry(
                seq=len(self._entries) + 1,
                timestamp=to_datetime(now),
                actor=actor,
                action=action,
                number=number,
                detail=detail,
            )
            self._entries.append(entry)
            return entry

    def entries(self) -> list[AuditEntry]:
        with self._lock:
            return list(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def to_tsv(self) -> str:
        return "".join(
            "\t".join(
                (
                    str(e.seq),
                    e.timestamp.isoformat(),
                    _escape(e.actor),
                    e.action,
                    e.number.digits if e.number else "-",
                    _escape(e.detail),
                )
            )
            + "\n"
            for e in self.entries()
        )

    @classmethod
    def from_tsv(cls, text: str) -> "AuditLog":
        entries = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            fields = line.split("\t")
            if len(fields) != 6:
                raise ConfigError(f"audit line {lineno}: expected 6 tab-separated fields")
            seq, timestamp, actor, action, digits, detail = fields
            if int(seq) != len(entries) + 1:
                raise ConfigError(f"audit line {lineno}: sequence gap at {seq}")
            entries.append(
                AuditEntry(
                    seq=int(seq),
                    timestamp=datetime.fromisoformat(timestamp),
                    actor=_unescape(actor),
                    action=action,
                    number=None if digits == "-" else E164Number(digits=digits),
                    detail=_unescape(detail),
                )
            )
        return cls(entries)
