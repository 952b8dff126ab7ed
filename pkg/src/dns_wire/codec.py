"""
DNS wire codec for NAPTR queries and responses, on top of dnspython.

Queries carry one question (qtype NAPTR, qclass IN), RD set, no EDNS.
The decoder follows name-compression pointers, refuses TC-flagged replies,
and turns every dnspython parse failure into an enumkit error.
"""

import logging

import dns.exception
import dns.flags
import dns.message
import dns.name
import dns.rcode
import dns.rdataclass
import dns.rdatatype
import dns.rrset
from dns.rdtypes.ANY.NAPTR import NAPTR
from pydantic import BaseModel, ConfigDict

from ..e164_core.numbers import EnumDomain
from ..errors import (
    CompressionLoop,
    DnsWireError,
    EnumError,
    MalformedMessage,
    MalformedRdata,
    NameTooLong,
    NxDomain,
    ServerFailure,
    TruncatedMessage,
)
from ..naptr.records import NaptrRecord
from ..naptr.rewrite import RewriteRule

logger = logging.getLogger(__name__)

HEADER_SIZE = 12
MAX_SEND = 512
MAX_RECEIVE = 4096
QTYPE_NAPTR = dns.rdatatype.NAPTR.value
QCLASS_IN = dns.rdataclass.IN.value


class WireNaptr(BaseModel):
    """NAPTR rdata exactly as carried on the wire."""

    model_config = ConfigDict(frozen=True)

    order: int
    preference: int
    flags: str
    service: str
    regexp: str
    replacement: str = "."

    @classmethod
    def from_record(cls, record: NaptrRecord) -> "WireNaptr":
        return cls(
            order=record.order,
            preference=record.preference,
            flags=record.flags,
            service=record.service,
            regexp=record.rewrite.render(),
            replacement=record.replacement or ".",
        )

    def to_record(self) -> NaptrRecord:
        try:
            return NaptrRecord(
                order=self.order,
                preference=self.preference,
                flags=self.flags,
                service=self.service,
                rewrite=RewriteRule.parse(self.regexp),
                replacement=self.replacement,
            )
        except EnumError as exc:
            raise MalformedRdata(f"NAPTR rdata is not a valid ENUM record: {exc}") from exc

    @classmethod
    def from_rdata(cls, rdata: NAPTR) -> "WireNaptr":
        try:
            return cls(
                order=rdata.order,
                preference=rdata.preference,
                flags=rdata.flags.decode(),
                service=rdata.service.decode(),
                regexp=rdata.regexp.decode(),
                replacement=rdata.replacement.to_text(omit_final_dot=True) or ".",
            )
        except UnicodeDecodeError as exc:
            raise MalformedRdata(f"NAPTR character string is not UTF-8: {exc}") from exc

    def to_rdata(self) -> NAPTR:
        try:
            return NAPTR(
                dns.rdataclass.IN,
                dns.rdatatype.NAPTR,
                self.order,
                self.preference,
                self.flags.encode(),
                self.service.encode(),
                self.regexp.encode(),
                dns.name.from_text(self.replacement),
            )
        except (ValueError, dns.exception.DNSException) as exc:
            raise DnsWireError(f"cannot encode NAPTR rdata: {exc}") from exc


class Question(BaseModel):
    model_config = ConfigDict(frozen=True)

    qname: str
    qtype: int = QTYPE_NAPTR
    qclass: int = QCLASS_IN


class Answer(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    ttl: int
    rdata: WireNaptr


class DnsMessage(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: int
    qr: bool
    opcode: int
    rd: bool
    tc: bool = False
    rcode: int = dns.rcode.NOERROR.value
    question: Question | None = None
    answers: tuple[Answer, ...] = ()

    def records(self) -> list[NaptrRecord]:
        return [answer.rdata.to_record() for answer in self.answers]


def _query_name(domain: EnumDomain | str) -> dns.name.Name:
    text = str(domain).strip()
    if not text or text == ".":
        raise NameTooLong("query name is empty")
    try:
        return dns.name.from_text(text)
    except (dns.name.LabelTooLong, dns.name.NameTooLong) as exc:
        raise NameTooLong(f"{text[:40]}...: {exc}") from exc
    except dns.exception.DNSException as exc:
        raise DnsWireError(f"invalid query name {text!r}: {exc}") from exc


def _check_id(query_id: int) -> int:
    if not 0 <= query_id <= 0xFFFF:
        raise DnsWireError(f"message id {query_id} is not a 16-bit integer")
    return query_id


def _make_query(domain: EnumDomain | str, query_id: int) -> dns.message.QueryMessage:
    query = dns.message.make_query(
        _query_name(domain), dns.rdatatype.NAPTR, dns.rdataclass.IN, use_edns=False
    )
    query.id = _check_id(query_id)
    query.flags = dns.flags.RD
    return query


def encode_query(domain: EnumDomain | str, query_id: int) -> bytes:
    wire = _make_query(domain, query_id).to_wire()
    if len(wire) > MAX_SEND:
        raise NameTooLong(f"query of {len(wire)} bytes exceeds {MAX_SEND}")
    return wire


def encode_response(
    query_id: int,
    domain: EnumDomain | str,
    records: list[NaptrRecord] | tuple[NaptrRecord, ...] = (),
    ttl: int = 3600,
    rcode: int = dns.rcode.NOERROR,
) -> bytes:
    """Build an authoritative reply to a NAPTR query for `domain`."""
    response = dns.message.make_response(_make_query(domain, query_id))
    response.flags |= dns.flags.AA
    response.set_rcode(rcode)
    if records:
        rrset = dns.rrset.RRset(_query_name(domain), dns.rdataclass.IN, dns.rdatatype.NAPTR)
        for record in records:
            rrset.add(WireNaptr.from_record(record).to_rdata(), ttl)
        response.answer.append(rrset)
    return response.to_wire()


def decode_response(data: bytes) -> DnsMessage:
    if len(data) < HEADER_SIZE:
        raise TruncatedMessage(f"{len(data)} bytes is shorter than a DNS header")
    if len(data) > MAX_RECEIVE:
        raise MalformedMessage(f"{len(data)} bytes exceeds the {MAX_RECEIVE}-byte receive limit")
    try:
        head = dns.message.from_wire(data, question_only=True, raise_on_truncation=True)
    except dns.message.Truncated as exc:
        raise TruncatedMessage("reply has the TC bit set; TCP fallback is not supported") from exc
    except dns.name.BadPointer as exc:
        raise CompressionLoop(f"bad compression pointer in question: {exc}") from exc
    except dns.message.ShortHeader as exc:
        raise TruncatedMessage(str(exc)) from exc
    except dns.exception.DNSException as exc:
        raise MalformedMessage(f"cannot parse question: {exc}") from exc
    except Exception as exc:
        # dnspython raises builtin errors on some hostile inputs
        raise MalformedMessage(f"cannot parse question: {exc!r}") from exc

    try:
        message = dns.message.from_wire(data, raise_on_truncation=True)
    except dns.name.BadPointer as exc:
        raise CompressionLoop(f"bad compression pointer in answers: {exc}") from exc
    except dns.exception.DNSException as exc:
        raise MalformedRdata(f"cannot parse answer records: {exc}") from exc
    except Exception as exc:
        raise MalformedRdata(f"cannot parse answer records: {exc!r}") from exc

    question = None
    if head.question:
        q = head.question[0]
        question = Question(
            qname=q.name.to_text(omit_final_dot=True), qtype=int(q.rdtype), qclass=int(q.rdclass)
        )

    answers = []
    for rrset in message.answer:
        if rrset.rdtype != dns.rdatatype.NAPTR:
            kind = dns.rdatatype.to_text(rrset.rdtype)
            logger.debug("ignoring %s answer for %s", kind, rrset.name)
            continue
        for rdata in rrset:
            answers.append(
                Answer(
                    name=rrset.name.to_text(omit_final_dot=True),
                    ttl=rrset.ttl,
                    rdata=WireNaptr.from_rdata(rdata),
                )
            )

    return DnsMessage(
        id=message.id,
        qr=bool(message.flags & dns.flags.QR),
        opcode=int(message.opcode()),
        rd=bool(message.flags & dns.flags.RD),
        tc=bool(message.flags & dns.flags.TC),
        rcode=int(message.rcode()),
        question=question,
        answers=tuple(answers),
    )


def check_rcode(message: DnsMessage, domain: EnumDomain | str) -> DnsMessage:
    """NXDOMAIN becomes NxDomain; any other failure rcode becomes ServerFailure."""
    if message.rcode == dns.rcode.NXDOMAIN:
        raise NxDomain(f"{domain} does not exist")
    if message.rcode != dns.rcode.NOERROR:
        raise ServerFailure(f"server answered {dns.rcode.to_text(message.rcode)} for {domain}")
    return message
