"""UDP exchange with retry and message-id filtering."""

import logging
import socket
import time
from typing import Protocol

from pydantic import BaseModel, ConfigDict

from ..clock import Clock
from ..errors import ConfigError, DnsWireError, IdMismatchExhausted, Timeout
from .codec import MAX_RECEIVE

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 2.0
DEFAULT_RETRIES = 2


class Endpoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    host: str
    port: int = 53

    @classmethod
    def parse(cls, text: str) -> "Endpoint":
        """`host:port`, `[v6-address]:port` or a bare host."""
        text = text.strip()
        if text.startswith("["):
            host, _, rest = text[1:].partition("]")
            port = rest.removeprefix(":") or "53"
        elif text.count(":") == 1:
            host, _, port = text.partition(":")
        else:
            host, port = text, "53"
        if not host or not port.isdigit() or not 0 < int(port) < 65536:
            raise ConfigError(f"endpoint {text!r} must look like host:port")
        return cls(host=host, port=int(port))

    def __str__(self) -> str:
        host = f"[{self.host}]" if ":" in self.host else self.host
        return f"{host}:{self.port}"


class DatagramTransport(Protocol):
    def send(self, data: bytes) -> None: ...

    def receive(self, timeout: float) -> bytes | None:
        """Next datagram, or None if nothing arrives within `timeout` seconds."""
        ...

    def close(self) -> None: ...


class UdpTransport:
    def __init__(self, endpoint: Endpoint):
        try:
            family, _, _, _, address = socket.getaddrinfo(
                endpoint.host, endpoint.port, type=socket.SOCK_DGRAM
            )[0]
        except OSError as exc:
            raise DnsWireError(f"cannot resolve endpoint {endpoint}: {exc}") from exc
        self._address = address
        self._sock = socket.socket(family, socket.SOCK_DGRAM)

    def send(self, data: bytes) -> None:
        try:
            self._sock.sendto(data, self._address)
        except OSError as exc:
            logger.debug("send to %s failed: %s", self._address, exc)

    def receive(self, timeout: float) -> bytes | None:
        self._sock.settimeout(max(timeout, 0.001))
        try:
            data, _ = self._sock.recvfrom(MAX_RECEIVE)
        except TimeoutError:
            return None
        except OSError as exc:
            # ICMP port unreachable surfaces here on some platforms
            logger.debug("receive from %s failed: %s", self._address, exc)
            return None
        return data

    def close(self) -> None:
        self._sock.close()


def udp_exchange(
    endpoint: Endpoint,
    query: bytes,
    timeout: float = DEFAULT_TIMEOUT,
    retries: int = DEFAULT_RETRIES,
    transport: DatagramTransport | None = None,
    monotonic: Clock = time.monotonic,
) -> bytes:
    """Send `query` up to retries+1 times and return the first reply whose id
    matches. Replies with any other id are discarded."""
    if len(query) < 2:
        raise DnsWireError("query too short to carry a message id")
    if retries < 0:
        raise ConfigError("retries must be zero or more")
    owned = transport is None
    transport = transport or UdpTransport(endpoint)
    discarded = 0
    try:
        for attempt in range(1, retries + 2):
            transport.send(query)
            deadline = monotonic() + timeout
            while (remaining := deadline - monotonic()) > 0:
                data = transport.receive(remaining)
                if data is None:
                    break
                if data[:2] == query[:2]:
                    return data
                discarded += 1
                logger.warning(
                    "discarding reply with id %s from %s (expected %s)",
                    data[:2].hex(),
                    endpoint,
                    query[:2].hex(),
                )
            logger.debug("attempt %d to %s got no answer", attempt, endpoint)
    finally:
        if owned:
            transport.close()
    if discarded:
        raise IdMismatchExhausted(
            f"{endpoint}: {discarded} replies with the wrong id in {retries + 1} attempts"
        )
    raise Timeout(f"{endpoint}: no answer after {retries + 1} attempts of {timeout}s")
