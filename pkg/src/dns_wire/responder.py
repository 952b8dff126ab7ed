"""
Loopback DNS responder that serves a tree's live NAPTR data over UDP.

Authoritative for every domain a resolver could currently reach in the
tree; anything else under the apex is NXDOMAIN and names outside the apex
are REFUSED.
"""

import logging
import socketserver
import threading

import dns.exception
import dns.message
import dns.name
import dns.rcode
import dns.rdatatype

from ..registry.tree import EnumTree
from .codec import encode_response
from .transport import Endpoint

logger = logging.getLogger(__name__)


class _Handler(socketserver.BaseRequestHandler):
    server: "_Server"

    def handle(self) -> None:
        data, sock = self.request
        reply = self.server.responder.answer(data)
        if reply is not None:
            sock.sendto(reply, self.client_address)


class _Server(socketserver.ThreadingUDPServer):
    daemon_threads = True
    allow_reuse_address = True
    responder: "NaptrResponder"


class NaptrResponder:
    def __init__(self, tree: EnumTree, host: str = "127.0.0.1", port: int = 0):
        self.tree = tree
        self._server = _Server((host, port), _Handler)
        self._server.responder = self
        self._thread: threading.Thread | None = None

    @property
    def endpoint(self) -> Endpoint:
        host, port = self._server.server_address[:2]
        return Endpoint(host=host, port=port)

    def answer(self, data: bytes) -> bytes | None:
        try:
            query = dns.message.from_wire(data)
        except dns.exception.DNSException as exc:
            logger.debug("dropping unparsable query: %s", exc)
            return None
        if not query.question:
            return None
        question = query.question[0]
        qname = question.name.to_text(omit_final_dot=True).lower()
        apex = dns.name.from_text(self.tree.apex)

        records, rcode = (), dns.rcode.NOERROR
        if not question.name.is_subdomain(apex):
            rcode = dns.rcode.REFUSED
        else:
            served = {str(rs.owner): rs for rs in self.tree.live_record_sets().values()}
            record_set = served.get(qname)
            if record_set is None:
                rcode = dns.rcode.NXDOMAIN
            elif question.rdtype == dns.rdatatype.NAPTR:
                records = record_set.records
        ttl = record_set.ttl_seconds if records else 0
        logger.debug("answering %s with %s", qname, dns.rcode.to_text(rcode))
        return encode_response(query.id, qname, records, ttl=ttl, rcode=rcode)

    def start(self) -> Endpoint:
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        logger.info("responder for %s listening on %s", self.tree.apex, self.endpoint)
        return self.endpoint

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join()

    def __enter__(self) -> "NaptrResponder":
        self.start()
        return self

    def __exit__(self, *exc_info) -> None:
        self.stop()
