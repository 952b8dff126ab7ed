import hypothesis.strategies as st
import pytest
from hypothesis import given

from src.e164_core.numbers import (
    AccessCode,
    E164Number,
    EnumDomain,
    ExtensionTagged,
    PlainNumber,
    classify_dial_string,
    from_domain,
    normalize,
    render,
    to_domain,
)
from src.errors import (
    ApexMismatch,
    EmptyNumber,
    MalformedDomain,
    NotANumber,
    TooLong,
    UnclassifiableInput,
)

ACCESS_CODES = ("911", "411", "711")
digit_strings = st.text(alphabet="0123456789", min_size=1, max_size=15)


def test_normalize_strips_separators():
    assert normalize("+1-1-202-555-1212").digits == "112025551212"
    assert normalize("+1 (202) 555.1212").digits == "12025551212"


def test_normalize_expands_national_number():
    assert normalize("555-1212", "11202").digits == "112025551212"


def test_normalize_leading_plus_ignores_context():
    assert normalize("+44 20 7946 0000", "11202").digits == "442079460000"


@pytest.mark.parametrize(
    "raw, error",
    [
        ("+abc", NotANumber),
        ("555*1212", NotANumber),
        ("+1234567890123456", TooLong),
        ("", EmptyNumber),
        ("+-()", EmptyNumber),
    ],
)
def test_normalize_errors(raw, error):
    with pytest.raises(error):
        normalize(raw)


def test_context_can_push_past_fifteen_digits():
    with pytest.raises(TooLong):
        normalize("5551212345", "112023")


@given(digit_strings)
def test_normalize_is_idempotent(digits):
    once = normalize("+" + digits)
    assert normalize(render(once)) == once


def test_to_domain_golden():
    number = E164Number(digits="112025551212")
    assert str(to_domain(number, "e164.foo")) == "2.1.2.1.5.5.5.2.0.2.1.1.e164.foo"
    assert str(to_domain(number, "e164.arpa")) == "2.1.2.1.5.5.5.2.0.2.1.1.e164.arpa"


def test_to_domain_single_digit():
    assert str(to_domain(E164Number(digits="1"), "e164.arpa")) == "1.e164.arpa"


def test_to_domain_lowercases_apex():
    domain = to_domain(E164Number(digits="112025551212"), "E164.foo.")
    assert domain.apex == "e164.foo"


def test_from_domain_golden():
    assert from_domain("2.1.2.1.5.5.5.2.0.2.1.1.e164.foo").digits == "112025551212"
    assert from_domain("1.e164.arpa").digits == "1"


def test_from_domain_accepts_uppercase_apex():
    number = from_domain("2.1.2.1.5.5.5.2.0.2.1.1.E164.foo", apex="e164.foo")
    assert number.digits == "112025551212"


def test_domains_compare_case_insensitively():
    upper = EnumDomain.parse("2.1.E164.FOO")
    lower = EnumDomain.parse("2.1.e164.foo")
    assert upper == lower


def test_from_domain_rejects_multi_digit_label():
    with pytest.raises(MalformedDomain):
        from_domain("12.3.e164.arpa", apex="e164.arpa")


def test_from_domain_rejects_foreign_apex():
    with pytest.raises(ApexMismatch):
        from_domain("2.1.e164.foo", apex="e164.arpa")


@given(digit_strings, st.sampled_from(["e164.arpa", "e164.foo", "enum.example.net"]))
def test_domain_round_trip(digits, apex):
    number = E164Number(digits=digits)
    domain = to_domain(number, apex)
    assert len(domain.labels) == len(digits)
    assert str(domain) == ".".join(reversed(digits)) + "." + apex
    assert from_domain(domain) == number


def test_classify_access_code_first():
    assert classify_dial_string("911", ACCESS_CODES) == AccessCode(raw="911", code="911")


def test_classify_extension_tagged():
    dialed = classify_dial_string("5551212#36", ACCESS_CODES, "11202")
    assert isinstance(dialed, ExtensionTagged)
    assert dialed.number.digits == "112025551212"
    assert dialed.root_id == 36
    assert dialed.raw == "5551212#36"


def test_classify_plain_number():
    dialed = classify_dial_string("+112025551212", ACCESS_CODES)
    assert isinstance(dialed, PlainNumber)
    assert dialed.number.digits == "112025551212"


def test_classify_keeps_raw_text():
    dialed = classify_dial_string(" +1 202 555 1212 ", ACCESS_CODES)
    assert dialed.raw == " +1 202 555 1212 "


@pytest.mark.parametrize("raw", ["555-CALL", "5551212#x", "5551212#"])
def test_classify_unclassifiable(raw):
    with pytest.raises(UnclassifiableInput):
        classify_dial_string(raw, ACCESS_CODES)


def test_classify_empty():
    with pytest.raises(EmptyNumber):
        classify_dial_string("", ACCESS_CODES)
