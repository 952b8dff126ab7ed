"""
On-disk form of one tree: a directory of plain text files.

    tree.json               zones, registrations, quarantine, disputes, policy
    tier2-<provider>.zone   record sets in master-file format
    oracle.tsv              assignment oracle seed
    audit.log               audit log

Every writer is canonical, so save -> load -> save reproduces the same bytes.
"""

import logging
from pathlib import Path

from ..clock import Clock, system_clock
from ..errors import ConfigError
from ..naptr.zonefile import export_zone, parse_zone
from .audit import AuditLog
from .oracle import AssignmentOracle
from .tree import EnumTree, TreeSnapshot

logger = logging.getLogger(__name__)

MANIFEST = "tree.json"
ORACLE = "oracle.tsv"
AUDIT = "audit.log"


def zone_path(directory: Path, provider_id: str) -> Path:
    return directory / f"tier2-{provider_id}.zone"


def save_tree(tree: EnumTree, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    snapshot = tree.snapshot()
    (directory / MANIFEST).write_text(snapshot.model_dump_json(indent=2) + "\n")
    for stale in directory.glob("tier2-*.zone"):
        if stale.name[len("tier2-") : -len(".zone")] not in snapshot.tier2:
            stale.unlink()
    for provider_id, zone in snapshot.tier2.items():
        zone_path(directory, provider_id).write_text(export_zone(list(zone.record_sets.values())))
    (directory / ORACLE).write_text(tree.oracle.to_tsv())
    (directory / AUDIT).write_text(tree.audit.to_tsv())
    logger.debug("saved tree %s to %s", tree.apex, directory)


def load_tree(directory: Path, clock: Clock = system_clock) -> EnumTree:
    manifest = directory / MANIFEST
    if not manifest.is_file():
        raise ConfigError(f"no tree manifest at {manifest}")
    snapshot = TreeSnapshot.model_validate_json(manifest.read_text())
    for provider_id, zone in snapshot.tier2.items():
        path = zone_path(directory, provider_id)
        text = path.read_text() if path.is_file() else ""
        record_sets = parse_zone(text, apex=snapshot.apex, default_ttl=snapshot.policy.default_ttl)
        zone.record_sets = {str(rs.owner): rs for rs in record_sets}
    oracle_path = directory / ORACLE
    oracle = AssignmentOracle.from_tsv(
        oracle_path.read_text() if oracle_path.is_file() else "",
        tuple(snapshot.policy.trusted_issuers),
    )
    audit_path = directory / AUDIT
    audit = AuditLog.from_tsv(audit_path.read_text()) if audit_path.is_file() else AuditLog()
    return EnumTree.from_snapshot(snapshot, oracle, audit, clock)
