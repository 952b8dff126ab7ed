import os
import socket

import pytest

from src.cli.main import main
from src.dns_wire.responder import NaptrResponder
from src.naptr.records import serialize_record
from src.seed import sample_record_set, sample_tree

ACME_ZONE = (
    "$ORIGIN 0.0.1.0.5.5.5.2.0.2.1.e164.foo.\n"
    'IN NAPTR 10 10 "u" "E2U+sip" "!^.*$!sip:moved@acme.example!" .\n'
)
CHARLIE_ZONE = (
    "$ORIGIN 0.0.3.0.5.5.5.2.0.2.1.e164.foo.\n"
    'IN NAPTR 10 10 "u" "E2U+sip" "!^.*$!sip:charlie@charlie.example!" .\n'
)


class Cli:
    """Runs the CLI against a seeded state directory."""

    def __init__(self, state, capsys):
        self.state = state
        self.capsys = capsys
        self.err = ""

    def __call__(self, *argv: str) -> tuple[int, str]:
        code = main(["--state", str(self.state), "--seed-sample", *argv])
        captured = self.capsys.readouterr()
        self.err = captured.err
        return code, captured.out


@pytest.fixture
def run(tmp_path, capsys, monkeypatch):
    for name in [n for n in os.environ if n.startswith("ENUMKIT_")]:
        monkeypatch.delenv(name)
    return Cli(tmp_path / "state", capsys)


def write(tmp_path, name: str, text: str) -> str:
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_resolve_human(run):
    code, out = run("resolve", "+112025551212")
    assert code == 0
    assert out.splitlines()[:3] == [
        "+112025551212 @ root 1",
        "  1. sip:johndoe@company.com  [sip+E2U]",
        "  2. tel:+112025551212  [tel+E2U]",
    ]
    assert out.splitlines()[3].startswith("queried: e164.foo, 1.e164.foo, ")


def test_resolve_tsv(run):
    code, out = run("--format", "tsv", "resolve", "+1-1-202-555-1212")
    assert code == 0
    assert out == "1\tsip+E2U\tsip:johndoe@company.com\n2\ttel+E2U\ttel:+112025551212\n"


def test_national_number_uses_sample_context(run):
    code, out = run("--format", "tsv", "resolve", "555-1212")
    assert code == 0
    assert out.splitlines()[0] == "1\tsip+E2U\tsip:johndoe@company.com"


def test_access_code_bypass(run):
    assert run("--format", "tsv", "resolve", "911") == (0, "BYPASS\t911\n")


def test_extension_routes_to_root(run):
    code, out = run("--format", "tsv", "resolve", "5551212#36")
    assert code == 0
    assert out == "1\tE2U+sip\tsip:joe@root36.example\n2\tE2U+tel\ttel:+112025551212\n"


def test_metasearch_lists_every_root(run):
    code, out = run("--format", "tsv", "resolve", "--meta", "+112025551212")
    assert code == 0
    assert [line.split("\t")[:2] for line in out.splitlines()] == [
        ["1", "1"],
        ["1", "2"],
        ["36", "1"],
        ["36", "2"],
    ]


def test_metasearch_ignores_roots_file_order(run):
    argv = ("--format", "tsv", "resolve", "--meta", "+112025551212")
    code, first = run(*argv)
    assert code == 0
    roots = run.state / "roots.tsv"
    lines = roots.read_text().splitlines()
    roots.write_text("\n".join(reversed(lines)) + "\n")
    assert run(*argv) == (0, first)


def test_metasearch_without_hits(run):
    code, out = run("resolve", "--meta", "+12025550999")
    assert code == 2
    assert "no root has a record" in out


def test_bookmarked_resolution(run, tmp_path):
    store = tmp_path / "bookmarks.tsv"
    code, out = run("--format", "tsv", "resolve", "--bookmark-store", str(store), "+12025550300")
    assert code == 0
    assert out.splitlines()[0] == "1\tE2U+sip\tsip:charlie@root46.example"
    assert store.read_text().startswith("12025550300\t46\t")


def test_service_filter(run):
    code, out = run("--format", "tsv", "resolve", "--service", "tel", "+112025551212")
    assert (code, out) == (0, "1\ttel+E2U\ttel:+112025551212\n")


@pytest.mark.parametrize(
    "argv",
    [
        ("resolve", "+12025550999"),
        ("resolve", "+442079460000"),
        ("resolve", "--service", "fax", "+112025551212"),
    ],
)
def test_not_found_exits_2(run, argv):
    code, _ = run(*argv)
    assert code == 2


def test_parse_errors_exit_4(run):
    code, _ = run("resolve", "555-CALL")
    assert code == 4
    assert "UnclassifiableInput" in run.err
    assert run("resolve", "5551212#99")[0] == 4
    assert "UnknownRootId" in run.err


def test_unknown_command_exits_4(run):
    with pytest.raises(SystemExit) as caught:
        run("attack", "nosuch")
    assert caught.value.code == 4


def test_register_then_resolve(run, tmp_path):
    zone = write(tmp_path, "charlie.zone", CHARLIE_ZONE)
    assert run("resolve", "--root", "1", "+12025550300")[0] == 2

    code, out = run(
        "admin", "register", "--number", "+12025550300", "--zone-file", zone,
        "--evidence", "callback:ok",
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("credential: CHARLIE:")
    assert "register 12025550300 registrant=CHARLIE" in lines[1]

    code, out = run("--format", "tsv", "resolve", "--root", "1", "+12025550300")
    assert (code, out) == (0, "1\tE2U+sip\tsip:charlie@charlie.example\n")

    credential = lines[0].removeprefix("credential: ")
    code, _ = run(
        "admin", "update", "--number", "+12025550300", "--zone-file", zone,
        "--credential", credential,
    )
    assert code == 0


def test_register_without_evidence_exits_3(run, tmp_path):
    zone = write(tmp_path, "charlie.zone", CHARLIE_ZONE)
    code, out = run("admin", "register", "--number", "+12025550300", "--zone-file", zone)
    assert code == 3
    assert "register-denied" in out


def test_foreign_update_exits_3(run, tmp_path):
    zone = write(tmp_path, "acme.zone", ACME_ZONE)
    code, out = run(
        "admin", "update", "--number", "+12025550100", "--zone-file", zone,
        "--credential", "BETA:beta-secret",
    )
    assert code == 3
    assert "update-denied" in out
    assert run("--format", "tsv", "resolve", "+12025550100")[1].startswith(
        "1\tE2U+sip\tsip:sales@acme.example"
    )


def test_owner_update(run, tmp_path):
    zone = write(tmp_path, "acme.zone", ACME_ZONE)
    code, _ = run(
        "admin", "update", "--number", "+12025550100", "--zone-file", zone,
        "--credential", "ACME:acme-secret",
    )
    assert code == 0
    assert run("--format", "tsv", "resolve", "+12025550100")[1] == (
        "1\tE2U+sip\tsip:moved@acme.example\n"
    )


def test_authorize_country(run):
    assert run("resolve", "+442079460000")[0] == 2
    code, out = run("admin", "authorize-cc", "--cc", "44", "--provider", "uk-registry")
    assert code == 0
    assert "authorize-country 44" in out
    code, out = run("--format", "tsv", "resolve", "+442079460000")
    assert out.splitlines()[0] == "1\tE2U+sip\tsip:reception@london.example"


def test_disconnect_stops_resolution(run):
    code, out = run("admin", "disconnect", "--number", "+112025551212")
    assert code == 0
    assert "coupled quarantine-days=30" in out
    assert run("resolve", "+112025551212")[0] == 2


def test_dispute_flow(run):
    code, out = run(
        "admin", "dispute", "file", "--number", "+12025550100", "--challenger", "BETA",
        "--grounds", "trademark",
    )
    assert code == 0
    assert "challenge #1 filed" in out
    code, out = run("--format", "tsv", "admin", "dispute", "list")
    assert out.splitlines()[0] == "1\t12025550100\tBETA\topen\ttrademark"
    code, out = run("admin", "dispute", "resolve", "--id", "1", "--outcome", "denied")
    assert code == 0
    assert "challenge #1 denied" in out


def test_dispute_transfer_installs_challenger_zone(run, tmp_path):
    zone = write(tmp_path, "acme.zone", ACME_ZONE)
    run(
        "admin", "dispute", "file", "--number", "+12025550100", "--challenger", "BETA",
        "--grounds", "trademark",
    )
    code, out = run(
        "admin", "dispute", "resolve", "--id", "1", "--outcome", "upheld-transferred",
        "--credential", "BETA:beta-secret", "--zone-file", zone,
    )
    assert code == 0
    assert "challenge #1 upheld-transferred" in out
    assert run("--format", "tsv", "resolve", "+12025550100")[1] == (
        "1\tE2U+sip\tsip:moved@acme.example\n"
    )


def test_zone_round_trip(run, tmp_path):
    first = tmp_path / "first.zone"
    second = tmp_path / "second.zone"
    assert run("zone", "export", str(first))[0] == 0
    code, out = run("zone", "import", str(first))
    assert code == 0
    assert out.startswith("imported 4 record sets into e164.foo")
    assert run("zone", "export", str(second))[0] == 0
    assert first.read_bytes() == second.read_bytes()


def test_zone_import_needs_file(run):
    with pytest.raises(SystemExit) as caught:
        run("zone", "import")
    assert caught.value.code == 4


def test_dig_against_responder(run):
    with NaptrResponder(sample_tree()) as responder:
        code, out = run(
            "--format", "tsv", "dig", "+112025551212", "--server", str(responder.endpoint),
            "--apex", "e164.foo",
        )
    assert code == 0
    assert out.splitlines() == [serialize_record(r) for r in sample_record_set().records]


def test_dig_nxdomain(run):
    with NaptrResponder(sample_tree()) as responder:
        code, _ = run(
            "dig", "2.0.1.e164.foo", "--server", str(responder.endpoint), "--retries", "0"
        )
    assert code == 2


def test_dig_timeout_exits_5(run):
    with socket.socket(socket.AF_INET, socket.SOCK_DGRAM) as silent:
        silent.bind(("127.0.0.1", 0))
        port = silent.getsockname()[1]
        code, _ = run(
            "dig", "+112025551212", "--server", f"127.0.0.1:{port}", "--timeout", "0.05",
            "--retries", "0",
        )
    assert code == 5


def test_attack_report(run):
    code, out = run("--format", "tsv", "attack", "hijack", "--enforce", "off")
    assert code == 0
    summary = out.splitlines()[-1].split("\t")
    assert "attack_succeeded=true" in summary
    assert "detected=true" in summary


def test_attack_blocked(run):
    code, out = run("attack", "dos", "--enforce", "on")
    assert code == 0
    assert "attack_succeeded=false detected=false" in out
