"""
E.164 numbers and their ENUM domain names.

A dialed string is classified (access code, extension-tagged, plain number),
normalized into an E.164 digit string, and converted to the reversed,
dot-separated domain under an apex. Name arithmetic is done by dnspython.
"""

import re
from typing import Literal

import dns.e164
import dns.exception
import dns.name
from pydantic import BaseModel, ConfigDict, field_validator

from ..errors import (
    ApexMismatch,
    EmptyNumber,
    MalformedDomain,
    NotANumber,
    TooLong,
    UnclassifiableInput,
)

MAX_DIGITS = 15
EXTENSION_DELIMITER = "#"

# Separators a device may show between digits; anything else is a typo.
_SEPARATORS = str.maketrans("", "", "+-.() ")
_DIGITS = re.compile(r"[0-9]+")

# Text as entered on a device, kept verbatim on every classification.
DialString = str


class E164Number(BaseModel):
    """Canonical E.164 digit string, country code first."""

    model_config = ConfigDict(frozen=True)

    digits: str

    @field_validator("digits")
    @classmethod
    def _check_digits(cls, value: str) -> str:
        if not value:
            raise EmptyNumber("an E.164 number needs at least one digit")
        if not _DIGITS.fullmatch(value):
            raise NotANumber(f"not a digit string: {value!r}")
        if len(value) > MAX_DIGITS:
            raise TooLong(f"{len(value)} digits exceeds the E.164 maximum of {MAX_DIGITS}")
        return value

    @property
    def aus(self) -> str:
        """Application unique string fed to NAPTR rewrite rules."""
        return "+" + self.digits

    def __str__(self) -> str:
        return self.digits


class EnumDomain(BaseModel):
    """Reversed digit labels (least significant first) under an apex."""

    model_config = ConfigDict(frozen=True)

    labels: tuple[str, ...]
    apex: str

    @field_validator("labels")
    @classmethod
    def _check_labels(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        if not value:
            raise MalformedDomain("an ENUM domain needs at least one digit label")
        for label in value:
            if len(label) != 1 or not label.isdigit() or not label.isascii():
                raise MalformedDomain(f"label {label!r} is not a single decimal digit")
        return value

    @field_validator("apex")
    @classmethod
    def _normalize_apex(cls, value: str) -> str:
        return normalize_apex(value)

    def __str__(self) -> str:
        return ".".join((*self.labels, self.apex))

    def to_name(self) -> dns.name.Name:
        return dns.name.from_text(str(self))

    @classmethod
    def parse(cls, text: str, apex: str | None = None) -> "EnumDomain":
        """Parse a rendered domain. Without an apex, the leading all-digit
        labels belong to the number and the rest is the apex."""
        text = text.strip().rstrip(".")
        if not text:
            raise MalformedDomain("empty domain")
        if apex is None:
            parts = text.split(".")
            split = 0
            while split < len(parts) and parts[split].isdigit():
                split += 1
            if split == 0 or split == len(parts):
                raise MalformedDomain(f"cannot find the apex of {text!r}")
            apex = ".".join(parts[split:])
        apex = normalize_apex(apex)
        try:
            name = dns.name.from_text(text)
            origin = dns.name.from_text(apex)
        except dns.exception.DNSException as exc:
            raise MalformedDomain(f"invalid domain {text!r}: {exc}") from exc
        if not name.is_subdomain(origin) or name == origin:
            raise ApexMismatch(f"{text!r} is not under apex {apex!r}")
        relative = name.relativize(origin)
        labels = tuple(label.decode("ascii", "replace") for label in relative.labels)
        return cls(labels=labels, apex=apex)


class PlainNumber(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["e164"] = "e164"
    raw: DialString
    number: E164Number


class AccessCode(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["access-code"] = "access-code"
    raw: DialString
    code: str


class ExtensionTagged(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["extension"] = "extension"
    raw: DialString
    number: E164Number
    root_id: int


NumberClass = PlainNumber | AccessCode | ExtensionTagged


def normalize_apex(apex: str) -> str:
    apex = apex.strip().rstrip(".").lower()
    if not apex:
        raise MalformedDomain("empty apex")
    return apex


def normalize(raw: DialString, dialing_context: str = "") -> E164Number:
    """Strip separators and expand a national number with the dialing context."""
    text = raw.strip()
    international = text.startswith("+")
    residue = text.translate(_SEPARATORS)
    if not residue:
        raise EmptyNumber(f"no digits in {raw!r}")
    if not _DIGITS.fullmatch(residue):
        raise NotANumber(f"{raw!r} contains characters that are not digits or separators")
    digits = residue if international else dialing_context + residue
    return E164Number(digits=digits)


def render(number: E164Number) -> str:
    return number.aus


def classify_dial_string(
    raw: DialString,
    access_codes: tuple[str, ...] | list[str] = (),
    dialing_context: str = "",
) -> NumberClass:
    """Decide whether a dialed string is an access code, an extension-tagged
    number routed to a specific root, or a plain E.164 number."""
    if not raw:
        raise EmptyNumber("empty dial string")
    candidate = raw.strip()
    if candidate in access_codes:
        return AccessCode(raw=raw, code=candidate)

    if EXTENSION_DELIMITER in candidate:
        number_part, _, root_part = candidate.rpartition(EXTENSION_DELIMITER)
        if not _DIGITS.fullmatch(root_part):
            raise UnclassifiableInput(f"root id {root_part!r} in {raw!r} is not a decimal integer")
        number = _normalize_for_classification(raw, number_part, dialing_context)
        return ExtensionTagged(raw=raw, number=number, root_id=int(root_part))

    number = _normalize_for_classification(raw, candidate, dialing_context)
    return PlainNumber(raw=raw, number=number)


def _normalize_for_classification(raw: str, text: str, dialing_context: str) -> E164Number:
    try:
        return normalize(text, dialing_context)
    except NotANumber as exc:
        raise UnclassifiableInput(f"cannot classify {raw!r}: {exc}") from exc


def to_domain(number: E164Number, apex: str) -> EnumDomain:
    """Reverse the digits, one label each, under the apex."""
    origin = dns.name.from_text(normalize_apex(apex))
    name = dns.e164.from_e164(number.digits, origin=origin)
    labels = tuple(label.decode("ascii") for label in name.relativize(origin).labels)
    return EnumDomain(labels=labels, apex=apex)


def from_domain(domain: EnumDomain | str, apex: str | None = None) -> E164Number:
    """Inverse of to_domain."""
    if isinstance(domain, str):
        domain = EnumDomain.parse(domain, apex)
    elif apex is not None and normalize_apex(apex) != domain.apex:
        raise ApexMismatch(f"{domain} is not under apex {apex!r}")
    origin = dns.name.from_text(domain.apex)
    digits = dns.e164.to_e164(domain.to_name(), origin, want_plus_prefix=False)
    return E164Number(digits=digits)
