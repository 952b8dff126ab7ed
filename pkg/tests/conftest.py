import pytest

from src.clock import ManualClock
from src.e164_core.numbers import E164Number, to_domain
from src.naptr.records import NaptrRecord, RecordSet
from src.naptr.rewrite import RewriteRule
from src.registry.models import AuthEvidence, AuthMethod, Credential
from src.registry.tree import TreePolicy
from src.resolver.resolver import Resolver
from src.resolver.roots import RootConfig
from src.seed import SAMPLE_APEX, sample_record_set, sample_roots, sample_tree

EPOCH = 1_767_225_600.0


@pytest.fixture
def clock():
    return ManualClock(EPOCH)


@pytest.fixture
def joe_records():
    return sample_record_set()


@pytest.fixture
def tree(clock):
    return sample_tree(clock=clock)


@pytest.fixture
def open_tree(clock):
    """The sample tree with registrant authentication switched off."""
    return sample_tree(TreePolicy(enforce_auth=False), clock)


@pytest.fixture
def roots(clock):
    return sample_roots(clock=clock)


@pytest.fixture
def resolver(tree, clock):
    return Resolver(RootConfig.single(tree), clock=clock)


def sip_record_set(number: E164Number, uri: str, ttl: int = 300, apex: str = SAMPLE_APEX):
    return RecordSet(
        owner=to_domain(number, apex),
        ttl_seconds=ttl,
        records=(
            NaptrRecord(
                order=10,
                preference=10,
                flags="u",
                service="E2U+sip",
                rewrite=RewriteRule(delimiter="!", pattern="^.*$", substitution=uri),
            ),
        ),
    )


def callback(number: E164Number, claimant: str) -> AuthEvidence:
    return AuthEvidence(
        method=AuthMethod.CALLBACK_COMPLETED,
        payload="ok",
        asserted_number=number,
        claimant=claimant,
    )


def credential(holder: str) -> Credential:
    return Credential(holder=holder, secret=f"{holder}-secret")
