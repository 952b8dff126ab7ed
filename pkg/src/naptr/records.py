"""
NAPTR records in master-file form, and service selection over a record set.
"""

import logging
import re

from pydantic import BaseModel, ConfigDict, field_validator

from ..e164_core.numbers import EnumDomain
from ..errors import (
    BadBackReference,
    MalformedService,
    NaptrSyntaxError,
    NoApplicableRecords,
    RangeError,
    UnsupportedFlag,
)
from .rewrite import ContactUri, RewriteRule, apply_rewrite

logger = logging.getLogger(__name__)

MAX_U16 = 65535
TERMINAL_FLAG = "u"
ENUM_RESOLUTION = "E2U"

_TOKEN = re.compile(r'"(?:[^"\\]|\\.)*"|;.*|[^\s"]+|"')
_QUOTED_ESCAPE = re.compile(r"\\([0-9]{3}|.)", re.DOTALL)


def parse_service_field(service: str) -> tuple[str, str]:
    """Split `<app>+E2U` (or `E2U+<app>`) into (app, "E2U")."""
    parts = service.split("+")
    if len(parts) != 2:
        raise MalformedService(f"service {service!r} must have exactly one '+'")
    left, right = parts
    if right.upper() == ENUM_RESOLUTION and left:
        return left, right
    if left.upper() == ENUM_RESOLUTION and right:
        return right, left
    raise MalformedService(f"service {service!r} has no {ENUM_RESOLUTION} side")


class NaptrRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    order: int
    preference: int
    flags: str
    service: str
    rewrite: RewriteRule
    replacement: str = ""

    @field_validator("order", "preference")
    @classmethod
    def _check_u16(cls, value: int) -> int:
        if not 0 <= value <= MAX_U16:
            raise RangeError(f"{value} is outside 0..{MAX_U16}")
        return value

    @field_validator("flags")
    @classmethod
    def _check_flags(cls, value: str) -> str:
        value = value.lower()
        if value not in ("", TERMINAL_FLAG):
            raise UnsupportedFlag(f"flag {value!r} is not supported (only 'u')")
        return value

    @field_validator("service")
    @classmethod
    def _check_service(cls, value: str) -> str:
        parse_service_field(value)
        return value

    @field_validator("replacement")
    @classmethod
    def _check_replacement(cls, value: str) -> str:
        if value == ".":
            return ""
        if any(char.isspace() or char in '";' for char in value):
            raise NaptrSyntaxError(f"replacement {value!r} is not a domain name")
        return value

    @property
    def app(self) -> str:
        return parse_service_field(self.service)[0]

    def offers(self, service_filter: str) -> bool:
        """True when the enumservice (or its type before ':') is the filter."""
        app = self.app.lower()
        wanted = service_filter.lower()
        return app == wanted or app.split(":", 1)[0] == wanted


class RecordSet(BaseModel):
    """All NAPTR records of one owner, sharing a TTL."""

    model_config = ConfigDict(frozen=True)

    owner: EnumDomain
    ttl_seconds: int
    records: tuple[NaptrRecord, ...]

    @field_validator("ttl_seconds")
    @classmethod
    def _check_ttl(cls, value: int) -> int:
        if value < 0:
            raise RangeError(f"negative TTL {value}")
        return value


class Token(BaseModel):
    text: str
    quoted: bool
    column: int


def tokenize(line: str) -> list[Token]:
    tokens = []
    for match in _TOKEN.finditer(line):
        text = match.group()
        if text.startswith(";"):
            break
        if text == '"':
            raise NaptrSyntaxError("unterminated quoted string", column=match.start() + 1)
        if text.startswith('"'):
            tokens.append(Token(text=unquote(text[1:-1]), quoted=True, column=match.start() + 1))
        else:
            tokens.append(Token(text=text, quoted=False, column=match.start() + 1))
    return tokens


def unquote(text: str) -> str:
    def replace(escape: re.Match[str]) -> str:
        value = escape.group(1)
        return chr(int(value)) if len(value) == 3 else value

    return _QUOTED_ESCAPE.sub(replace, text)


def quote(text: str) -> str:
    out = []
    for char in text:
        if char in '"\\':
            out.append("\\" + char)
        elif ord(char) < 0x20 or ord(char) == 0x7F:
            out.append(f"\\{ord(char):03d}")
        else:
            out.append(char)
    return '"' + "".join(out) + '"'


def parse_record_entry(
    line: str, *, strict: bool = False
) -> tuple[str | None, int | None, NaptrRecord]:
    """Parse a master-file NAPTR line into (owner, ttl, record).

    Owner and TTL are None when the line omits them.
    """
    tokens = tokenize(line)
    if not tokens:
        raise NaptrSyntaxError("empty record line", column=1)
    type_index = next(
        (i for i, t in enumerate(tokens) if not t.quoted and t.text.upper() == "NAPTR"), None
    )
    if type_index is None:
        raise NaptrSyntaxError("expected 'NAPTR'", column=tokens[0].column)

    owner: str | None = None
    ttl: int | None = None
    seen_class = False
    owner_allowed = not line[:1].isspace()
    for position, token in enumerate(tokens[:type_index]):
        if not token.quoted and token.text.upper() == "IN" and not seen_class:
            seen_class = True
        # a column-0 token is the owner even when it is a single digit label
        elif position == 0 and owner_allowed and not token.quoted:
            owner = token.text
        elif not token.quoted and token.text.isdigit() and ttl is None:
            ttl = int(token.text)
        else:
            raise NaptrSyntaxError(f"unexpected {token.text!r}", column=token.column)

    fields = tokens[type_index + 1 :]
    if len(fields) != 6:
        column = fields[-1].column if fields else tokens[type_index].column
        raise NaptrSyntaxError(
            f"NAPTR needs order, preference, flags, service, regexp and replacement;"
            f" got {len(fields)} fields",
            column=column,
        )
    order_tok, pref_tok, flags_tok, service_tok, regexp_tok, replacement_tok = fields

    order = _u16(order_tok)
    preference = _u16(pref_tok)
    if flags_tok.text.lower() not in ("", TERMINAL_FLAG):
        raise UnsupportedFlag(
            f"flag {flags_tok.text!r} at column {flags_tok.column} is not supported (only 'u')"
        )
    if not regexp_tok.text:
        raise NaptrSyntaxError("empty regexp field", column=regexp_tok.column)
    try:
        rewrite = RewriteRule.parse(regexp_tok.text, strict=strict)
    except NaptrSyntaxError as exc:
        offset = 1 if regexp_tok.quoted else 0
        raise NaptrSyntaxError(
            exc.reason, column=regexp_tok.column + offset + (exc.column or 1) - 1
        ) from exc
    if replacement_tok.quoted:
        raise NaptrSyntaxError("replacement must not be quoted", column=replacement_tok.column)

    record = NaptrRecord(
        order=order,
        preference=preference,
        flags=flags_tok.text,
        service=service_tok.text,
        rewrite=rewrite,
        replacement=replacement_tok.text,
    )
    return owner, ttl, record


def parse_record_line(line: str, *, strict: bool = False) -> NaptrRecord:
    return parse_record_entry(line, strict=strict)[2]


def _u16(token: Token) -> int:
    if token.quoted or not token.text.isdigit() or not token.text.isascii():
        raise NaptrSyntaxError(f"expected an integer, got {token.text!r}", column=token.column)
    value = int(token.text)
    if value > MAX_U16:
        raise RangeError(f"{value} at column {token.column} is outside 0..{MAX_U16}")
    return value


def serialize_record(record: NaptrRecord) -> str:
    """Canonical single-space master-file form, without owner or TTL."""
    return " ".join(
        (
            "IN NAPTR",
            str(record.order),
            str(record.preference),
            quote(record.flags),
            quote(record.service),
            quote(record.rewrite.render()),
            record.replacement or ".",
        )
    )


def select_services(
    record_set: RecordSet, aus: str, service_filter: str | None = None
) -> list[ContactUri]:
    """Order records by (order, preference, position) and rewrite each
    terminal record against the AUS; records that do not apply are skipped."""
    ranked = sorted(
        enumerate(record_set.records), key=lambda item: (item[1].order, item[1].preference, item[0])
    )
    contacts = []
    for _, record in ranked:
        if record.flags != TERMINAL_FLAG:
            logger.debug("skipping non-terminal record %s", serialize_record(record))
            continue
        if service_filter and not record.offers(service_filter):
            continue
        try:
            uri = apply_rewrite(record.rewrite, aus, record.service)
        except BadBackReference as exc:
            logger.warning("skipping record in %s: %s", record_set.owner, exc)
            continue
        if uri is None:
            logger.debug("%s does not match %s", record.rewrite.render(), aus)
            continue
        contacts.append(uri)
    if not contacts:
        raise NoApplicableRecords(f"no record at {record_set.owner} applies to {aus}")
    return contacts
