"""
Master-file import and export for ENUM record sets.

Understands `$ORIGIN` (also written `$ ORIGIN`), `$TTL`, comments after `;`
and blank lines. Export is canonical: sets sorted by owner, records in
insertion order, one `$ORIGIN`/`$TTL` pair per set.
"""

from ..config import DEFAULT_TTL
from ..e164_core.numbers import EnumDomain
from ..errors import EnumError, NaptrError, NaptrSyntaxError
from .records import NaptrRecord, RecordSet, parse_record_entry, serialize_record, tokenize


def parse_zone(
    text: str,
    *,
    apex: str | None = None,
    origin: str | None = None,
    default_ttl: int = DEFAULT_TTL,
    strict: bool = False,
) -> list[RecordSet]:
    """Parse a zone file into record sets, in order of first appearance."""
    current_origin = origin.rstrip(".") if origin else None
    current_ttl = default_ttl
    last_owner: str | None = None
    owners: dict[str, tuple[int, list[NaptrRecord]]] = {}

    for lineno, line in enumerate(text.splitlines(), start=1):
        try:
            tokens = tokenize(line)
        except NaptrSyntaxError as exc:
            raise NaptrSyntaxError(exc.reason, column=exc.column, line=lineno) from exc
        if not tokens:
            continue

        words = [t.text for t in tokens]
        if words[0] == "$" and len(words) > 1:
            words = ["$" + words[1], *words[2:]]
        if words[0].startswith("$"):
            directive = words[0].upper()
            if directive not in ("$ORIGIN", "$TTL") or len(words) != 2:
                raise NaptrSyntaxError(f"bad directive {line.strip()!r}", column=1, line=lineno)
            if directive == "$ORIGIN":
                current_origin = words[1].rstrip(".")
                last_owner = None
            else:
                if not words[1].isdigit():
                    raise NaptrSyntaxError(f"bad TTL {words[1]!r}", column=1, line=lineno)
                current_ttl = int(words[1])
            continue

        try:
            owner_text, ttl, record = parse_record_entry(line, strict=strict)
        except NaptrSyntaxError as exc:
            raise NaptrSyntaxError(exc.reason, column=exc.column, line=lineno) from exc
        except NaptrError as exc:
            raise type(exc)(f"line {lineno}: {exc}") from exc

        owner = _absolute_owner(owner_text, current_origin, last_owner, lineno)
        last_owner = owner
        entry = owners.setdefault(owner, (ttl if ttl is not None else current_ttl, []))
        entry[1].append(record)

    record_sets = []
    for owner, (ttl, records) in owners.items():
        try:
            domain = EnumDomain.parse(owner, apex)
        except EnumError as exc:
            raise NaptrSyntaxError(f"owner {owner!r}: {exc}", column=1) from exc
        record_sets.append(RecordSet(owner=domain, ttl_seconds=ttl, records=tuple(records)))
    return record_sets


def _absolute_owner(
    owner_text: str | None, origin: str | None, last_owner: str | None, lineno: int
) -> str:
    if owner_text is None:
        if last_owner is not None:
            return last_owner
        if origin is None:
            raise NaptrSyntaxError("record has no owner and no $ORIGIN", column=1, line=lineno)
        return origin
    if owner_text == "@":
        if origin is None:
            raise NaptrSyntaxError("'@' used without $ORIGIN", column=1, line=lineno)
        return origin
    if owner_text.endswith("."):
        return owner_text.rstrip(".")
    return f"{owner_text}.{origin}" if origin else owner_text


def export_zone(record_sets: list[RecordSet]) -> str:
    blocks = []
    for record_set in sorted(record_sets, key=lambda rs: str(rs.owner)):
        lines = [f"$TTL {record_set.ttl_seconds}", f"$ORIGIN {record_set.owner}"]
        lines.extend(serialize_record(record) for record in record_set.records)
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)
