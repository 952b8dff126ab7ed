"""
Resolver front end: single-root resolution, dial-string routing,
metasearch across every known root, and bookmarked lookups.
"""

import logging
import threading

from langchain_core.runnables import RunnableConfig
from pydantic import BaseModel, ConfigDict

from ..clock import Clock, system_clock
from ..config import DEFAULT_ACCESS_CODES
from ..dns_wire.transport import DEFAULT_RETRIES, DEFAULT_TIMEOUT, DatagramTransport
from ..e164_core.numbers import (
    AccessCode,
    DialString,
    E164Number,
    ExtensionTagged,
    classify_dial_string,
)
from ..errors import NoApplicableRecords, NxDomain, TransportError
from ..naptr.rewrite import ContactUri
from .bookmarks import BookmarkStore
from .cache import TtlCache
from .graph import ResolutionState, graph
from .roots import RootConfig

logger = logging.getLogger(__name__)


class ResolutionResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    number: E164Number
    root_id: int
    contacts: tuple[ContactUri, ...]
    from_cache: bool = False
    queried_zones: tuple[str, ...] = ()


class Bypass(BaseModel):
    """An access code: the device handles it without any ENUM lookup."""

    model_config = ConfigDict(frozen=True)

    raw: DialString
    code: str
    queried_zones: tuple[str, ...] = ()


class Resolver:
    def __init__(
        self,
        roots: RootConfig,
        cache: TtlCache | None = None,
        clock: Clock = system_clock,
        access_codes: tuple[str, ...] = DEFAULT_ACCESS_CODES,
        dialing_context: str = "",
        timeout: float = DEFAULT_TIMEOUT,
        retries: int = DEFAULT_RETRIES,
        transport: DatagramTransport | None = None,
    ):
        self.roots = roots
        self.cache = cache
        self.clock = clock
        self.access_codes = tuple(access_codes)
        self.dialing_context = dialing_context
        self.timeout = timeout
        self.retries = retries
        self.transport = transport
        # (root id, zone) for every zone queried, across all resolutions
        self.query_log: list[tuple[int, str]] = []
        self._log_lock = threading.Lock()

    def _config(self) -> RunnableConfig:
        return {
            "configurable": {
                "roots": self.roots,
                "cache": self.cache,
                "clock": self.clock,
                "timeout": self.timeout,
                "retries": self.retries,
                "transport": self.transport,
            }
        }

    def _start(
        self, number: E164Number, root_id: int | None, service_filter: str | None
    ) -> ResolutionState:
        return {
            "number": number,
            "root_id": self.roots.default_root if root_id is None else root_id,
            "service_filter": service_filter,
            "queried_zones": [],
            "error": None,
        }

    def _finish(self, state: ResolutionState) -> ResolutionResult:
        queried = state.get("queried_zones", [])
        with self._log_lock:
            self.query_log.extend((state["root_id"], zone) for zone in queried)
        if state.get("error") is not None:
            logger.info("%s @ root %s: %s", state["number"], state["root_id"], state["error"])
            raise state["error"]
        result = ResolutionResult(
            number=state["number"],
            root_id=state["root_id"],
            contacts=tuple(state["contacts"]),
            from_cache=state.get("from_cache", False),
            queried_zones=tuple(queried),
        )
        logger.info(
            "%s @ root %s: %d contacts%s",
            result.number,
            result.root_id,
            len(result.contacts),
            " (cached)" if result.from_cache else "",
        )
        return result

    def resolve(
        self,
        number: E164Number,
        root_id: int | None = None,
        service_filter: str | None = None,
    ) -> ResolutionResult:
        state = graph.invoke(self._start(number, root_id, service_filter), self._config())
        return self._finish(state)

    async def aresolve(
        self,
        number: E164Number,
        root_id: int | None = None,
        service_filter: str | None = None,
    ) -> ResolutionResult:
        state = await graph.ainvoke(self._start(number, root_id, service_filter), self._config())
        return self._finish(state)

    def resolve_dial(
        self, raw: DialString, service_filter: str | None = None
    ) -> ResolutionResult | Bypass:
        """Route a dialed string: access codes bypass ENUM, `number#root`
        goes to that root only, anything else to the default root."""
        dialed = classify_dial_string(raw, self.access_codes, self.dialing_context)
        if isinstance(dialed, AccessCode):
            logger.info("%s is an access code; bypassing ENUM", dialed.code)
            return Bypass(raw=raw, code=dialed.code)
        if isinstance(dialed, ExtensionTagged):
            self.roots.entry(dialed.root_id)
            return self.resolve(dialed.number, dialed.root_id, service_filter)
        return self.resolve(dialed.number, None, service_filter)

    def metasearch(
        self, number: E164Number, service_filter: str | None = None
    ) -> list[ResolutionResult]:
        """Query every root in id order and return each hit. Conflicting hits
        are all returned."""
        hits = []
        for root_id in self.roots.ids():
            try:
                hits.append(self.resolve(number, root_id, service_filter))
            except (NxDomain, NoApplicableRecords):
                continue
            except TransportError as exc:
                logger.warning("root %s unreachable during metasearch: %s", root_id, exc)
        return hits

    def bookmark_and_resolve(
        self,
        number: E164Number,
        store: BookmarkStore,
        service_filter: str | None = None,
    ) -> ResolutionResult:
        """Resolve against the bookmarked root, or metasearch and bookmark the
        first hit. A miss at the bookmarked root drops the bookmark."""
        bookmark = store.get(number)
        if bookmark is not None and bookmark.root_id in self.roots.roots:
            try:
                return self.resolve(number, bookmark.root_id, service_filter)
            except (NxDomain, NoApplicableRecords):
                store.invalidate(number)
                raise

        hits = self.metasearch(number, service_filter)
        if not hits:
            raise NxDomain(f"{number} is not registered under any known root")
        store.put(number, hits[0].root_id)
        return hits[0]
