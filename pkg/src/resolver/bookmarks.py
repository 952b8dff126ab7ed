"""Bookmark store: number -> the root where it was last found.

File format, one bookmark per line: `<digits>\t<root-id>\t<iso-timestamp>`.
"""

import threading
from datetime import datetime
from pathlib import Path

from pydantic import BaseModel, ConfigDict

from ..clock import Clock, system_clock, to_datetime
from ..e164_core.numbers import E164Number
from ..errors import ConfigError


class Bookmark(BaseModel):
    model_config = ConfigDict(frozen=True)

    number: E164Number
    root_id: int
    created_at: datetime


class BookmarkStore:
    def __init__(self, path: Path | None = None, clock: Clock = system_clock):
        self.path = path
        self.clock = clock
        self._bookmarks: dict[str, Bookmark] = {}
        self._lock = threading.Lock()
        if path is not None and path.is_file():
            self._bookmarks = {b.number.digits: b for b in self.parse(path.read_text())}

    def get(self, number: E164Number) -> Bookmark | None:
        with self._lock:
            return self._bookmarks.get(number.digits)

    def put(self, number: E164Number, root_id: int) -> Bookmark:
        bookmark = Bookmark(number=number, root_id=root_id, created_at=to_datetime(self.clock()))
        with self._lock:
            self._bookmarks[number.digits] = bookmark
        self._save()
        return bookmark

    def invalidate(self, number: E164Number) -> bool:
        with self._lock:
            removed = self._bookmarks.pop(number.digits, None) is not None
        if removed:
            self._save()
        return removed

    def __len__(self) -> int:
        return len(self._bookmarks)

    def to_tsv(self) -> str:
        with self._lock:
            rows = sorted(self._bookmarks.values(), key=lambda b: b.number.digits)
        return "".join(
            f"{b.number.digits}\t{b.root_id}\t{b.created_at.isoformat()}\n" for b in rows
        )

    @staticmethod
    def parse(text: str) -> list[Bookmark]:
        bookmarks = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3 or not fields[1].isdigit():
                raise ConfigError(f"bookmark line {lineno}: expected <digits>\\t<root>\\t<time>")
            digits, root_id, created = fields
            try:
                created_at = datetime.fromisoformat(created)
            except ValueError as exc:
                raise ConfigError(f"bookmark line {lineno}: bad timestamp {created!r}") from exc
            number = E164Number(digits=digits)
            bookmarks.append(Bookmark(number=number, root_id=int(root_id), created_at=created_at))
        return bookmarks

    def _save(self) -> None:
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(self.to_tsv())
