"""TTL-bounded record-set cache keyed by (root id, domain)."""

import logging
import threading

from pydantic import BaseModel, ConfigDict

from ..clock import Clock
from ..e164_core.numbers import EnumDomain
from ..naptr.records import RecordSet

logger = logging.getLogger(__name__)

CacheKey = tuple[int, str]


class CacheEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    key: CacheKey
    value: RecordSet
    expires_at: float


class TtlCache:
    """Entries are served strictly before their expiry and replaced whole."""

    def __init__(self):
        self._entries: dict[CacheKey, CacheEntry] = {}
        self._lock = threading.Lock()

    @staticmethod
    def key(root_id: int, domain: EnumDomain) -> CacheKey:
        return (root_id, str(domain))

    def get(self, root_id: int, domain: EnumDomain, clock: Clock) -> RecordSet | None:
        key = self.key(root_id, domain)
        now = clock()
        with self._lock:
            entry = self._entries.get(key)
            if entry is not None and now >= entry.expires_at:
                del self._entries[key]
                entry = None
        if entry is None:
            logger.debug("cache miss %s", key)
            return None
        logger.debug("cache hit %s (expires %.0f)", key, entry.expires_at)
        return entry.value

    def put(self, root_id: int, domain: EnumDomain, record_set: RecordSet, clock: Clock) -> None:
        if record_set.ttl_seconds <= 0:
            return
        key = self.key(root_id, domain)
        entry = CacheEntry(key=key, value=record_set, expires_at=clock() + record_set.ttl_seconds)
        with self._lock:
            self._entries[key] = entry

    def invalidate(self, root_id: int | None = None) -> None:
        with self._lock:
            if root_id is None:
                self._entries.clear()
            else:
                for key in [k for k in self._entries if k[0] == root_id]:
                    del self._entries[key]

    def __len__(self) -> int:
        return len(self._entries)
