"""
Resolution Walk

Resolves one E.164 number against one root. Local roots are walked zone by
zone (Tier 0 -> Tier 1 -> Tier 2) with every zone queried recorded; remote
roots get a single NAPTR query over UDP. Record sets are cached by TTL;
delegations are not, so every uncached walk starts again at Tier 0.

The root registry, cache and clock travel in config["configurable"].
Nodes never raise: a failure is stored under "error" and the walk ends.
"""

import logging
import secrets
from typing import Any, TypedDict

from langchain_core.runnables import RunnableConfig
from langgraph.graph import END, START, StateGraph

from ..clock import system_clock
from ..dns_wire.codec import check_rcode, decode_response, encode_query
from ..dns_wire.transport import DEFAULT_RETRIES, DEFAULT_TIMEOUT, udp_exchange
from ..e164_core.numbers import E164Number, EnumDomain, to_domain
from ..errors import EnumError, NxDomain, UnauthorizedCountry
from ..naptr.records import RecordSet, select_services
from ..naptr.rewrite import ContactUri
from .cache import TtlCache
from .roots import RootConfig, RootEntry

logger = logging.getLogger(__name__)


class ResolutionState(TypedDict, total=False):
    """State schema for one resolution."""
    number: E164Number
    root_id: int
    service_filter: str | None
    domain: EnumDomain
    queried_zones: list[str]
    country_code: str
    tier1_provider: str
    tier2_provider: str
    record_set: RecordSet | None
    from_cache: bool
    remote: bool
    contacts: list[ContactUri]
    error: EnumError | None


def _settings(config: RunnableConfig) -> dict[str, Any]:
    return config.get("configurable", {})


def _root(state: ResolutionState, config: RunnableConfig) -> RootEntry:
    roots: RootConfig = _settings(config)["roots"]
    return roots.entry(state["root_id"])


def _remember(state: ResolutionState, config: RunnableConfig, record_set: RecordSet) -> None:
    cache: TtlCache | None = _settings(config).get("cache")
    if cache is not None:
        clock = _settings(config).get("clock", system_clock)
        cache.put(state["root_id"], state["domain"], record_set, clock)


def _queried(state: ResolutionState, zone: str) -> list[str]:
    logger.debug("root %s: querying %s", state["root_id"], zone)
    return [*state.get("queried_zones", []), zone]


def check_cache(state: ResolutionState, config: RunnableConfig) -> ResolutionState:
    """Map the number into the root's namespace and try the cache."""
    try:
        entry = _root(state, config)
        domain = to_domain(state["number"], entry.apex)
    except EnumError as exc:
        return {**state, "error": exc}

    record_set = None
    cache: TtlCache | None = _settings(config).get("cache")
    if cache is not None:
        clock = _settings(config).get("clock", system_clock)
        record_set = cache.get(state["root_id"], domain, clock)
    return {
        **state,
        "domain": domain,
        "record_set": record_set,
        "from_cache": record_set is not None,
        "remote": not entry.is_local,
        "queried_zones": [],
    }


def route_after_cache(state: ResolutionState) -> str:
    if state.get("error"):
        return END
    if state.get("record_set") is not None:
        return "select"
    return "remote" if state["remote"] else "tier0"


def query_tier0(state: ResolutionState, config: RunnableConfig) -> ResolutionState:
    """Find the country code and check the nation authorized it."""
    tree = _root(state, config).tree
    queried = _queried(state, tree.apex)
    found = tree.country_entry(state["number"].digits)
    if found is None:
        error = NxDomain(f"no country code of {state['number']} is known under {tree.apex}")
        return {**state, "queried_zones": queried, "error": error}
    cc, entry = found
    if not entry.authorized or entry.delegation is None:
        error = UnauthorizedCountry(f"country code {cc} is not delegated under {tree.apex}")
        return {**state, "queried_zones": queried, "error": error}
    return {
        **state,
        "queried_zones": queried,
        "country_code": cc,
        "tier1_provider": entry.delegation,
    }


def query_tier1(state: ResolutionState, config: RunnableConfig) -> ResolutionState:
    """Find the Tier-2 provider the national zone points at."""
    tree = _root(state, config).tree
    cc = state["country_code"]
    queried = _queried(state, ".".join((*reversed(cc), tree.apex)))
    provider = tree.tier1_delegation(cc, state["tier1_provider"], state["number"].digits)
    if provider is None:
        error = NxDomain(f"{state['number']} is not delegated by country code {cc}")
        return {**state, "queried_zones": queried, "error": error}
    return {**state, "queried_zones": queried, "tier2_provider": provider}


def query_tier2(state: ResolutionState, config: RunnableConfig) -> ResolutionState:
    """Fetch the record set from the provider holding it."""
    tree = _root(state, config).tree
    queried = _queried(state, str(state["domain"]))
    record_set = tree.record_set(state["tier2_provider"], state["domain"])
    if record_set is None:
        error = NxDomain(f"{state['domain']} does not exist")
        return {**state, "queried_zones": queried, "error": error}
    _remember(state, config, record_set)
    return {**state, "queried_zones": queried, "record_set": record_set}


def query_remote(state: ResolutionState, config: RunnableConfig) -> ResolutionState:
    """One NAPTR query to the root's endpoint."""
    settings = _settings(config)
    endpoint = _root(state, config).endpoint
    domain = state["domain"]
    queried = _queried(state, str(domain))
    query_id = settings.get("id_source", lambda: secrets.randbelow(0x10000))()
    try:
        reply = udp_exchange(
            endpoint,
            encode_query(domain, query_id),
            timeout=settings.get("timeout", DEFAULT_TIMEOUT),
            retries=settings.get("retries", DEFAULT_RETRIES),
            transport=settings.get("transport"),
        )
        message = check_rcode(decode_response(reply), domain)
        if not message.answers:
            raise NxDomain(f"{endpoint} has no NAPTR records for {domain}")
        record_set = RecordSet(
            owner=domain,
            ttl_seconds=min(answer.ttl for answer in message.answers),
            records=tuple(message.records()),
        )
    except EnumError as exc:
        return {**state, "queried_zones": queried, "error": exc}
    _remember(state, config, record_set)
    return {**state, "queried_zones": queried, "record_set": record_set}


def select(state: ResolutionState) -> ResolutionState:
    """Order the records and rewrite them into contacts."""
    try:
        contacts = select_services(
            state["record_set"], state["number"].aus, state.get("service_filter")
        )
    except EnumError as exc:
        return {**state, "error": exc}
    return {**state, "contacts": contacts}


def stop_on_error(next_node: str):
    def route(state: ResolutionState) -> str:
        return END if state.get("error") else next_node

    return route


# Build graph
builder = StateGraph(ResolutionState)
builder.add_node("cache", check_cache)
builder.add_node("tier0", query_tier0)
builder.add_node("tier1", query_tier1)
builder.add_node("tier2", query_tier2)
builder.add_node("remote", query_remote)
builder.add_node("select", select)

builder.add_edge(START, "cache")
builder.add_conditional_edges("cache", route_after_cache, ["tier0", "remote", "select", END])
builder.add_conditional_edges("tier0", stop_on_error("tier1"), ["tier1", END])
builder.add_conditional_edges("tier1", stop_on_error("tier2"), ["tier2", END])
builder.add_conditional_edges("tier2", stop_on_error("select"), ["select", END])
builder.add_conditional_edges("remote", stop_on_error("select"), ["select", END])
builder.add_edge("select", END)

graph = builder.compile()
