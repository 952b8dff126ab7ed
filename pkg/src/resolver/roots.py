"""
Root registry: which ENUM trees a resolver knows, keyed by integer root id.

File format, one root per line:

    <root-id>\t<apex>\t<local|host:port>[\tdefault]

A `local` root is a simulated tree kept under `roots/<root-id>/` in the
state directory. Without a `default` marker the lowest id is the default.
"""

from pathlib import Path

from pydantic import BaseModel, ConfigDict, model_validator

from ..clock import Clock, system_clock
from ..dns_wire.transport import Endpoint
from ..e164_core.numbers import normalize_apex
from ..errors import ConfigError, UnknownRootId
from ..registry.storage import load_tree, save_tree
from ..registry.tree import EnumTree

ROOTS_FILE = "roots.tsv"
ROOTS_DIR = "roots"
LOCAL = "local"


class RootEntry(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    apex: str
    tree: EnumTree | None = None
    endpoint: Endpoint | None = None

    @model_validator(mode="after")
    def _one_backend(self) -> "RootEntry":
        if (self.tree is None) == (self.endpoint is None):
            raise ValueError("a root is backed by a local tree or a remote endpoint, not both")
        return self

    @property
    def is_local(self) -> bool:
        return self.tree is not None


class RootConfig(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    roots: dict[int, RootEntry]
    default_root: int

    @model_validator(mode="after")
    def _default_known(self) -> "RootConfig":
        if self.default_root not in self.roots:
            raise ValueError(f"default root {self.default_root} is not configured")
        return self

    @classmethod
    def single(cls, tree: EnumTree, root_id: int = 1) -> "RootConfig":
        return cls(roots={root_id: RootEntry(apex=tree.apex, tree=tree)}, default_root=root_id)

    def entry(self, root_id: int) -> RootEntry:
        try:
            return self.roots[root_id]
        except KeyError:
            known = ", ".join(str(r) for r in sorted(self.roots))
            raise UnknownRootId(f"root {root_id} is not configured (known: {known})") from None

    def ids(self) -> list[int]:
        return sorted(self.roots)

    def to_tsv(self) -> str:
        lines = []
        for root_id in self.ids():
            entry = self.roots[root_id]
            backend = LOCAL if entry.is_local else str(entry.endpoint)
            marker = "\tdefault" if root_id == self.default_root else ""
            lines.append(f"{root_id}\t{entry.apex}\t{backend}{marker}\n")
        return "".join(lines)


def parse_roots(text: str) -> list[tuple[int, str, str, bool]]:
    """(root id, apex, backend, is default) per line, in file order."""
    rows = []
    seen = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) not in (3, 4) or (len(fields) == 4 and fields[3] != "default"):
            raise ConfigError(f"roots line {lineno}: expected <id>\\t<apex>\\t<local|host:port>")
        root_id, apex, backend = fields[:3]
        if not root_id.isdigit():
            raise ConfigError(f"roots line {lineno}: root id {root_id!r} is not an integer")
        if int(root_id) in seen:
            raise ConfigError(f"roots line {lineno}: root {root_id} listed twice")
        seen.add(int(root_id))
        rows.append((int(root_id), normalize_apex(apex), backend, len(fields) == 4))
    if not rows:
        raise ConfigError("no roots configured")
    return rows


def load_roots(state_dir: Path, clock: Clock = system_clock) -> RootConfig:
    path = state_dir / ROOTS_FILE
    if not path.is_file():
        raise ConfigError(f"no root registry at {path}; seed one with --seed-sample")
    roots = {}
    default = None
    for root_id, apex, backend, is_default in parse_roots(path.read_text()):
        if backend == LOCAL:
            tree = load_tree(state_dir / ROOTS_DIR / str(root_id), clock)
            if tree.apex != apex:
                raise ConfigError(f"root {root_id} is listed as {apex} but stores {tree.apex}")
            roots[root_id] = RootEntry(apex=apex, tree=tree)
        else:
            roots[root_id] = RootEntry(apex=apex, endpoint=Endpoint.parse(backend))
        if is_default:
            default = root_id
    return RootConfig(roots=roots, default_root=default if default is not None else min(roots))


def save_roots(config: RootConfig, state_dir: Path) -> None:
    state_dir.mkdir(parents=True, exist_ok=True)
    (state_dir / ROOTS_FILE).write_text(config.to_tsv())
    for root_id, entry in config.roots.items():
        if entry.tree is not None:
            save_tree(entry.tree, state_dir / ROOTS_DIR / str(root_id))
