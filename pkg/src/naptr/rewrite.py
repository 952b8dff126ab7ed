"""
NAPTR rewrite rules: `<delim><ERE><delim><substitution><delim>[i]`.

Patterns are written in a small ERE subset (anchors, bracket classes, `.`,
`*`, `+`, `?`, capture groups, alternation, backslash escapes) and translated
to Python `re` syntax before matching. In lenient mode a `+` with nothing to
repeat is a literal plus, which is how records like `!+(.*)!sip:...!` are
written in the wild.
"""

import logging
import re
from functools import lru_cache

from pydantic import BaseModel, ConfigDict

from ..errors import BadBackReference, NaptrSyntaxError

logger = logging.getLogger(__name__)

_ESCAPE = re.compile(r"\\(.)", re.DOTALL)


class ContactUri(BaseModel):
    """One contact produced by a rewrite: `<scheme>:<body>`."""

    model_config = ConfigDict(frozen=True)

    scheme: str
    body: str
    source_service: str = ""

    def __str__(self) -> str:
        return f"{self.scheme}:{self.body}"


class RewriteRule(BaseModel):
    model_config = ConfigDict(frozen=True)

    delimiter: str
    pattern: str
    substitution: str
    case_insensitive: bool = False

    @classmethod
    def parse(cls, text: str, *, strict: bool = False) -> "RewriteRule":
        """Split a rule on its (unescaped) delimiter and check the pattern compiles."""
        if not text:
            raise NaptrSyntaxError("empty rewrite rule", column=1)
        delimiter = text[0]
        if delimiter.isdigit() or delimiter in "\\i":
            raise NaptrSyntaxError(f"{delimiter!r} cannot delimit a rewrite rule", column=1)

        positions = []
        escaped = False
        for index, char in enumerate(text):
            if escaped:
                escaped = False
            elif char == "\\":
                escaped = True
            elif char == delimiter:
                positions.append(index)
        if len(positions) != 3:
            raise NaptrSyntaxError(
                f"rewrite rule needs exactly three {delimiter!r} delimiters,"
                f" found {len(positions)}",
                column=(positions[-1] + 1) if positions else 1,
            )
        first, second, third = positions
        flags = text[third + 1 :]
        if flags not in ("", "i"):
            raise NaptrSyntaxError(f"unknown rewrite flag {flags!r}", column=third + 2)

        rule = cls(
            delimiter=delimiter,
            pattern=text[first + 1 : second],
            substitution=text[second + 1 : third],
            case_insensitive=flags == "i",
        )
        try:
            compile_pattern(rule.pattern, strict=strict, case_insensitive=rule.case_insensitive)
        except NaptrSyntaxError as exc:
            raise NaptrSyntaxError(exc.reason, column=first + 1 + (exc.column or 1)) from exc
        return rule

    def render(self) -> str:
        d = self.delimiter
        return f"{d}{self.pattern}{d}{self.substitution}{d}{'i' if self.case_insensitive else ''}"


def translate_ere(pattern: str, *, strict: bool = False) -> str:
    """Translate the supported ERE subset into Python regex source."""
    out: list[str] = []
    depth = 0
    can_repeat = False
    i = 0
    while i < len(pattern):
        char = pattern[i]
        column = i + 1
        if char == "\\":
            if i + 1 >= len(pattern):
                raise NaptrSyntaxError("trailing backslash in pattern", column=column)
            out.append(re.escape(pattern[i + 1]))
            can_repeat = True
            i += 2
            continue
        if char == "[":
            end = i + 1
            if end < len(pattern) and pattern[end] == "^":
                end += 1
            if end < len(pattern) and pattern[end] == "]":
                end += 1
            while end < len(pattern) and pattern[end] != "]":
                end += 1
            if end >= len(pattern):
                raise NaptrSyntaxError("unterminated bracket expression", column=column)
            body = pattern[i + 1 : end]
            negate = body.startswith("^")
            if negate:
                body = body[1:]
            # Backslash is literal inside POSIX brackets.
            body = body.replace("\\", "\\\\").replace("[", "\\[")
            out.append("[" + ("^" if negate else "") + body + "]")
            can_repeat = True
            i = end + 1
            continue
        if char == "(":
            depth += 1
            out.append("(")
            can_repeat = False
        elif char == ")":
            if depth == 0:
                raise NaptrSyntaxError("unbalanced ')'", column=column)
            depth -= 1
            out.append(")")
            can_repeat = True
        elif char == "|":
            out.append("|")
            can_repeat = False
        elif char in "*+?":
            if can_repeat:
                out.append(char)
                can_repeat = False
            elif char == "+" and not strict:
                out.append(r"\+")
                can_repeat = True
            else:
                raise NaptrSyntaxError(f"{char!r} has nothing to repeat", column=column)
        elif char == "^":
            out.append("^")
            can_repeat = False
        elif char == "$":
            out.append(r"\Z")
            can_repeat = False
        elif char == ".":
            out.append(".")
            can_repeat = True
        elif char in "{}":
            raise NaptrSyntaxError("interval expressions are not supported", column=column)
        else:
            out.append(re.escape(char))
            can_repeat = True
        i += 1
    if depth:
        raise NaptrSyntaxError("unbalanced '('", column=len(pattern))
    return "".join(out)


@lru_cache(maxsize=1024)
def compile_pattern(
    pattern: str, *, strict: bool = False, case_insensitive: bool = False
) -> re.Pattern[str]:
    source = translate_ere(pattern, strict=strict)
    flags = re.DOTALL | (re.IGNORECASE if case_insensitive else 0)
    try:
        return re.compile(source, flags)
    except re.error as exc:
        raise NaptrSyntaxError(f"invalid pattern {pattern!r}: {exc.msg}", column=1) from exc


def apply_rewrite(rule: RewriteRule, aus: str, service: str = "") -> ContactUri | None:
    """Run a rule against the application unique string.

    Returns None when the pattern does not match.
    """
    compiled = compile_pattern(rule.pattern, case_insensitive=rule.case_insensitive)
    for escape in _ESCAPE.finditer(rule.substitution):
        ref = escape.group(1)
        if ref in "123456789" and int(ref) > compiled.groups:
            raise BadBackReference(
                f"\\{ref} in {rule.render()!r} but the pattern has {compiled.groups} groups"
            )

    match = compiled.search(aus)
    if match is None:
        return None

    def expand(escape: re.Match[str]) -> str:
        char = escape.group(1)
        if char in "123456789":
            return match.group(int(char)) or ""
        return char

    result = _ESCAPE.sub(expand, rule.substitution)
    scheme, colon, body = result.partition(":")
    if not colon or not scheme:
        logger.warning("rewrite %s produced %r, which is not a URI", rule.render(), result)
        return None
    return ContactUri(scheme=scheme, body=body, source_service=service)
