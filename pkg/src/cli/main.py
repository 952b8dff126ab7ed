"""
enumkit command line.

    enumkit [--state DIR] [--seed-sample] [--format human|tsv] <command> ...

Commands: resolve, admin, zone, dig, attack. Exit codes: 0 success,
2 NXDOMAIN or no applicable records, 3 authentication/authorization failure,
4 parse or configuration error, 5 transport failure.
"""

import argparse
import logging
import secrets
import sys
from pathlib import Path

from ..clock import system_clock
from ..config import Settings
from ..dns_wire.codec import check_rcode, decode_response, encode_query
from ..dns_wire.transport import DEFAULT_RETRIES, DEFAULT_TIMEOUT, Endpoint, udp_exchange
from ..e164_core.numbers import E164Number, EnumDomain, from_domain, normalize, to_domain
from ..errors import ConfigError, EnumError, NoApplicableRecords, NoSuchChallenge
from ..naptr.records import RecordSet, serialize_record
from ..naptr.zonefile import export_zone, parse_zone
from ..registry.models import Credential, DisputeStatus, ProvisioningMode, Registrant
from ..registry.oracle import parse_evidence
from ..registry.tree import EnumTree
from ..resolver.bookmarks import BookmarkStore
from ..resolver.cache import TtlCache
from ..resolver.resolver import Bypass, ResolutionResult, Resolver
from ..resolver.roots import RootConfig, load_roots, save_roots
from ..seed import SAMPLE_DIALING_CONTEXT, sample_roots
from ..threat_harness.harness import RUNNERS
from ..threat_harness.scenarios import DEFAULT_ATTACKER, ScenarioKind, ThreatEnvironment

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = ConfigError.exit_code


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the parse/config code, not argparse's 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- state -----------------------------------------------------------------

class Session:
    """Settings plus the root registry loaded from the state directory."""

    def __init__(self, args: argparse.Namespace, settings: Settings):
        self.args = args
        self.settings = settings
        self.state_dir = Path(args.state) if args.state else settings.state_dir
        self.dialing_context = (
            args.context if args.context is not None else settings.dialing_context
        )
        if args.seed_sample and not self.dialing_context:
            self.dialing_context = SAMPLE_DIALING_CONTEXT
        self._roots: RootConfig | None = None

    @property
    def roots(self) -> RootConfig:
        if self._roots is None:
            if self.args.seed_sample and not (self.state_dir / "roots.tsv").is_file():
                logger.info("seeding sample roots into %s", self.state_dir)
                save_roots(sample_roots(clock=system_clock), self.state_dir)
            self._roots = load_roots(self.state_dir, system_clock)
        return self._roots

    def tree(self, root_id: int | None) -> EnumTree:
        entry = self.roots.entry(self.roots.default_root if root_id is None else root_id)
        if entry.tree is None:
            raise ConfigError(f"root {root_id} is remote; only local roots can be administered")
        return entry.tree

    def save(self) -> None:
        if self._roots is not None:
            save_roots(self._roots, self.state_dir)

    def number(self, text: str) -> E164Number:
        return normalize(text, self.dialing_context)

    def resolver(self) -> Resolver:
        return Resolver(
            self.roots,
            cache=TtlCache(),
            clock=system_clock,
            access_codes=self.settings.access_codes,
            dialing_context=self.dialing_context,
        )


def _emit(line: str = "") -> None:
    print(line)


# -- resolve -----------------------------------------------------------------

def _print_result(result: ResolutionResult, fmt: str, with_root: bool = False) -> None:
    for rank, contact in enumerate(result.contacts, start=1):
        if fmt == "tsv":
            fields = [str(rank), contact.source_service, str(contact)]
            if with_root:
                fields.insert(0, str(result.root_id))
            _emit("\t".join(fields))
        else:
            _emit(f"  {rank}. {contact}  [{contact.source_service}]")


def _print_header(result: ResolutionResult, fmt: str) -> None:
    if fmt == "human":
        cached = " (cached)" if result.from_cache else ""
        _emit(f"+{result.number.digits} @ root {result.root_id}{cached}")


def cmd_resolve(session: Session, args: argparse.Namespace) -> int:
    fmt = args.format
    resolver = session.resolver()
    if args.meta:
        hits = resolver.metasearch(session.number(args.number), args.service)
        if not hits and fmt == "human":
            _emit("no root has a record for this number")
        for result in hits:
            _print_header(result, fmt)
            _print_result(result, fmt, with_root=True)
        return EXIT_OK if hits else 2

    if args.bookmark_store:
        store = BookmarkStore(Path(args.bookmark_store), system_clock)
        result = resolver.bookmark_and_resolve(session.number(args.number), store, args.service)
    elif args.root is not None:
        result = resolver.resolve(session.number(args.number), args.root, args.service)
    else:
        outcome = resolver.resolve_dial(args.number, args.service)
        if isinstance(outcome, Bypass):
            _emit(f"BYPASS\t{outcome.code}" if fmt == "tsv" else f"BYPASS {outcome.code}")
            return EXIT_OK
        result = outcome

    _print_header(result, fmt)
    _print_result(result, fmt)
    if fmt == "human" and result.queried_zones:
        _emit("queried: " + ", ".join(result.queried_zones))
    return EXIT_OK


# -- admin -------------------------------------------------------------------

def _record_set_for(path: str, number: E164Number) -> RecordSet:
    record_sets = parse_zone(Path(path).read_text())
    for record_set in record_sets:
        if from_domain(record_set.owner) == number:
            return record_set
    raise ConfigError(f"{path} has no record set for +{number.digits}")


def _credential(text: str | None, holder: str) -> tuple[Credential, bool]:
    if text:
        return Credential.parse(text), False
    return Credential(holder=holder, secret=secrets.token_hex(8)), True


def admin_register(tree: EnumTree, session: Session, args: argparse.Namespace) -> None:
    number = session.number(args.number)
    registrant_id = args.registrant or tree.oracle.lookup(number).registrant_id
    evidence = parse_evidence(args.evidence, number, registrant_id) if args.evidence else None
    credential, generated = _credential(args.credential, registrant_id)
    registrant = Registrant(
        id=registrant_id,
        display_name=registrant_id,
        carrier=tree.oracle.lookup(number).carrier if tree.oracle.is_assigned(number) else "",
    )
    tree.register(
        number,
        registrant,
        evidence,
        _record_set_for(args.zone_file, number),
        credential,
        mode=ProvisioningMode(args.mode) if args.mode else None,
        authority=Credential.parse(args.authority) if args.authority else None,
        provider_id=args.provider,
    )
    if generated:
        _emit(f"credential: {credential.holder}:{credential.secret}")


def admin_update(tree: EnumTree, session: Session, args: argparse.Namespace) -> None:
    number = session.number(args.number)
    credential = Credential.parse(args.credential)
    tree.update_records(number, credential, _record_set_for(args.zone_file, number))


def admin_disconnect(tree: EnumTree, session: Session, args: argparse.Namespace) -> None:
    if args.mode is not None:
        coupled = args.mode == "coupled"
        if coupled != tree.policy.coupled:
            tree.set_lifecycle(coupled)
    tree.disconnect_number(session.number(args.number), args.quarantine_days)


def admin_dispute(tree: EnumTree, session: Session, args: argparse.Namespace) -> None:
    if args.dispute_action == "file":
        challenge = tree.file_dispute(session.number(args.number), args.challenger, args.grounds)
        _emit(f"challenge #{challenge.id} filed")
    elif args.dispute_action == "resolve":
        credential = Credential.parse(args.credential) if args.credential else None
        record_set = None
        if args.zone_file:
            challenge = next((c for c in tree.list_disputes() if c.id == args.id), None)
            if challenge is None:
                raise NoSuchChallenge(f"no open challenge #{args.id}")
            record_set = _record_set_for(args.zone_file, challenge.number)
        challenge = tree.resolve_dispute(
            args.id, DisputeStatus(args.outcome), credential, record_set=record_set
        )
        _emit(f"challenge #{challenge.id} {challenge.status.value}")
    else:
        for challenge in tree.list_disputes():
            _emit(
                "\t".join(
                    (
                        str(challenge.id),
                        challenge.number.digits,
                        challenge.challenger,
                        challenge.status.value,
                        challenge.grounds,
                    )
                )
            )


def admin_opt_out(tree: EnumTree, session: Session, args: argparse.Namespace) -> None:
    number = session.number(args.number)
    tree.opt_out(number, args.registrant, parse_evidence(args.evidence, number, args.registrant))


ADMIN_ACTIONS = {
    "stage-cc": lambda tree, s, a: tree.stage_country(a.cc, a.provider),
    "authorize-cc": lambda tree, s, a: tree.authorize_country(a.cc, a.provider),
    "create-provider": lambda tree, s, a: tree.create_provider(
        a.provider, ProvisioningMode(a.mode)
    ),
    "delegate": lambda tree, s, a: tree.delegate_number(a.cc, s.number(a.number), a.provider),
    "register": admin_register,
    "update": admin_update,
    "disconnect": admin_disconnect,
    "port": lambda tree, s, a: tree.port_number(s.number(a.number), a.from_carrier, a.to_carrier),
    "opt-out": admin_opt_out,
    "purge": lambda tree, s, a: tree.purge_quarantined(),
    "dispute": admin_dispute,
}


def cmd_admin(session: Session, args: argparse.Namespace) -> int:
    tree = session.tree(args.root)
    before = len(tree.audit)
    try:
        ADMIN_ACTIONS[args.admin_action](tree, session, args)
    finally:
        session.save()
        for entry in tree.audit.entries()[before:]:
            digits = entry.number.digits if entry.number else "-"
            if args.format == "tsv":
                _emit(f"{entry.seq}\t{entry.actor}\t{entry.action}\t{digits}\t{entry.detail}")
            else:
                _emit(f"audit #{entry.seq} {entry.actor} {entry.action} {digits} {entry.detail}")
    return EXIT_OK


# -- zone --------------------------------------------------------------------

def cmd_zone(session: Session, args: argparse.Namespace) -> int:
    tree = session.tree(args.root)
    if args.zone_action == "export":
        text = export_zone(tree.all_record_sets())
        if args.file:
            Path(args.file).write_text(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK

    record_sets = parse_zone(
        Path(args.file).read_text(), apex=args.apex or tree.apex, strict=args.strict
    )
    try:
        count = tree.import_record_sets(record_sets, actor=args.actor)
    finally:
        session.save()
    if args.format == "human":
        _emit(f"imported {count} record sets into {tree.apex}")
    return EXIT_OK


# -- dig ---------------------------------------------------------------------

def _dig_domain(target: str, apex: str, dialing_context: str) -> EnumDomain | str:
    stripped = target.strip()
    if stripped.lstrip("+").replace("-", "").isdigit():
        return to_domain(normalize(stripped, dialing_context), apex)
    return stripped.rstrip(".")


def cmd_dig(session: Session, args: argparse.Namespace) -> int:
    endpoint = Endpoint.parse(args.server)
    domain = _dig_domain(args.target, args.apex or session.settings.apex, session.dialing_context)
    reply = udp_exchange(
        endpoint,
        encode_query(domain, secrets.randbelow(0x10000)),
        timeout=args.timeout,
        retries=args.retries,
    )
    message = check_rcode(decode_response(reply), domain)
    if not message.answers:
        raise NoApplicableRecords(f"{endpoint} has no NAPTR records for {domain}")
    if args.format == "human":
        _emit(f"; {len(message.answers)} NAPTR answers for {domain} from {endpoint}")
    for record in message.records():
        _emit(serialize_record(record))
    return EXIT_OK


# -- attack ------------------------------------------------------------------

def cmd_attack(session: Session, args: argparse.Namespace) -> int:
    env = ThreatEnvironment(enforce=args.enforce == "on")
    kind = ScenarioKind(args.kind)
    victim = session.number(args.victim) if args.victim else None
    if kind is ScenarioKind.EAVESDROP:
        report = RUNNERS[kind](env, victim, args.attacker, remove_relay=args.remove_relay)
    else:
        report = RUNNERS[kind](env, victim, args.attacker)
    sys.stdout.write(report.render_tsv() if args.format == "tsv" else report.render_human())
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="enumkit", description="ENUM resolution and registry toolkit")
    parser.add_argument("--state", help="state directory (default: $ENUMKIT_STATE)")
    parser.add_argument(
        "--seed-sample",
        action="store_true",
        help="create the sample roots in an empty state directory",
    )
    parser.add_argument("--context", help="dialing-context digits for national numbers")
    parser.add_argument("--format", choices=("human", "tsv"), default="human")
    parser.add_argument("--log-level", help="logging level (default: $ENUMKIT_LOG_LEVEL)")
    commands = parser.add_subparsers(dest="command", required=True)

    resolve = commands.add_parser("resolve", help="resolve a number to contact URIs")
    resolve.add_argument("number", help="+E.164, national number, 'number#root' or access code")
    resolve.add_argument("--root", type=int, help="resolve against this root only")
    resolve.add_argument("--service", help="only records offering this enumservice")
    resolve.add_argument("--meta", action="store_true", help="query every known root")
    resolve.add_argument("--bookmark-store", help="bookmark file to consult and update")
    resolve.set_defaults(handler=cmd_resolve)

    admin = commands.add_parser("admin", help="administer a simulated tree")
    admin.add_argument("--root", type=int, help="root to administer (default: default root)")
    actions = admin.add_subparsers(dest="admin_action", required=True)
    for name in ("stage-cc", "authorize-cc"):
        sub = actions.add_parser(name)
        sub.add_argument("--cc", required=True)
        sub.add_argument("--provider", required=True)
    sub = actions.add_parser("create-provider")
    sub.add_argument("--provider", required=True)
    sub.add_argument("--mode", choices=[m.value for m in ProvisioningMode], default="opt-in")
    sub = actions.add_parser("delegate")
    sub.add_argument("--cc", required=True)
    sub.add_argument("--number", required=True)
    sub.add_argument("--provider", required=True)
    sub = actions.add_parser("register")
    sub.add_argument("--number", required=True)
    sub.add_argument("--zone-file", required=True)
    sub.add_argument("--evidence", help="method:payload, e.g. callback:ok")
    sub.add_argument("--registrant", help="claimant id (default: the assignee on file)")
    sub.add_argument("--credential", help="holder:secret for later updates")
    sub.add_argument("--mode", choices=[m.value for m in ProvisioningMode])
    sub.add_argument("--authority", help="enrolling authority holder:secret")
    sub.add_argument("--provider")
    sub = actions.add_parser("update")
    sub.add_argument("--number", required=True)
    sub.add_argument("--zone-file", required=True)
    sub.add_argument("--credential", required=True)
    sub = actions.add_parser("disconnect")
    sub.add_argument("--number", required=True)
    sub.add_argument("--mode", choices=("coupled", "decoupled"))
    sub.add_argument("--quarantine-days", type=int)
    sub = actions.add_parser("port")
    sub.add_argument("--number", required=True)
    sub.add_argument("--from", dest="from_carrier", required=True)
    sub.add_argument("--to", dest="to_carrier", required=True)
    sub = actions.add_parser("opt-out")
    sub.add_argument("--number", required=True)
    sub.add_argument("--registrant", required=True)
    sub.add_argument("--evidence", required=True)
    actions.add_parser("purge")
    dispute = actions.add_parser("dispute")
    dispute_actions = dispute.add_subparsers(dest="dispute_action", required=True)
    sub = dispute_actions.add_parser("file")
    sub.add_argument("--number", required=True)
    sub.add_argument("--challenger", required=True)
    sub.add_argument("--grounds", required=True)
    sub = dispute_actions.add_parser("resolve")
    sub.add_argument("--id", type=int, required=True)
    sub.add_argument(
        "--outcome",
        required=True,
        choices=(DisputeStatus.UPHELD_TRANSFERRED.value, DisputeStatus.DENIED.value),
    )
    sub.add_argument("--credential", help="challenger's holder:secret (for a transfer)")
    sub.add_argument("--zone-file", help="the challenger's record set (for a transfer)")
    dispute_actions.add_parser("list")
    admin.set_defaults(handler=cmd_admin)

    zone = commands.add_parser("zone", help="export or import Tier-2 record sets")
    zone.add_argument("zone_action", choices=("export", "import"))
    zone.add_argument("file", nargs="?", help="zone file (export default: stdout)")
    zone.add_argument("--root", type=int)
    zone.add_argument("--apex", help="apex of the imported file (default: the root's)")
    zone.add_argument("--actor", default="operator")
    zone.add_argument("--strict", action="store_true", help="reject a bare leading '+' in rules")
    zone.set_defaults(handler=cmd_zone)

    dig = commands.add_parser("dig", help="query a DNS server for NAPTR records")
    dig.add_argument("target", help="number or domain")
    dig.add_argument("--server", required=True, help="host:port")
    dig.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT)
    dig.add_argument("--retries", type=int, default=DEFAULT_RETRIES)
    dig.add_argument("--apex", help="apex for number targets (default: $ENUMKIT_APEX)")
    dig.set_defaults(handler=cmd_dig)

    attack = commands.add_parser("attack", help="run a scripted attack scenario")
    attack.add_argument("kind", choices=[k.value for k in ScenarioKind])
    attack.add_argument("--enforce", choices=("on", "off"), default="on")
    attack.add_argument("--victim")
    attack.add_argument("--attacker", default=DEFAULT_ATTACKER)
    attack.add_argument("--remove-relay", action="store_true")
    attack.set_defaults(handler=cmd_attack)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "zone" and args.zone_action == "import" and not args.file:
        parser.error("zone import needs a file")
    try:
        settings = Settings.from_env()
    except ValueError as exc:
        print(f"enumkit: error: bad environment: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(levelname)s: %(message)s",
    )
    try:
        return args.handler(Session(args, settings), args)
    except EnumError as exc:
        print(f"enumkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"enumkit: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
