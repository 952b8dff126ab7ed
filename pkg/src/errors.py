"""
Error hierarchy shared by every enumkit component.

Each error carries the CLI exit code it maps to:
0 success, 2 NXDOMAIN/no records, 3 authentication/authorization failure,
4 parse/config error, 5 transport failure.
"""


class EnumError(Exception):
    """Base class for all enumkit errors."""

    exit_code = 4


# e164-core

class NumberError(EnumError):
    pass


class NotANumber(NumberError):
    pass


class TooLong(NumberError):
    pass


class EmptyNumber(NumberError):
    pass


class UnclassifiableInput(NumberError):
    pass


class MalformedDomain(NumberError):
    pass


class ApexMismatch(NumberError):
    pass


# naptr

class NaptrError(EnumError):
    pass


class NaptrSyntaxError(NaptrError):
    """Master-file or rewrite-rule syntax error; `column` is 1-based."""

    def __init__(self, message: str, column: int | None = None, line: int | None = None):
        self.reason = message
        self.column = column
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class RangeError(NaptrError):
    pass


class UnsupportedFlag(NaptrError):
    pass


class MalformedService(NaptrError):
    pass


class BadBackReference(NaptrError):
    pass


class NoApplicableRecords(NaptrError):
    exit_code = 2


# registry

class RegistryError(EnumError):
    pass


class AlreadyAuthorized(RegistryError):
    pass


class InvalidCountryCode(RegistryError):
    pass


class ProviderConflict(RegistryError):
    pass


class UnknownProvider(RegistryError):
    pass


class WrongCountryCode(RegistryError):
    pass


class AlreadyDelegated(RegistryError):
    pass


class NotDelegatedHere(RegistryError):
    pass


class DuplicateRegistration(RegistryError):
    pass


class NoSuchRegistration(RegistryError):
    exit_code = 2


class ModeMismatch(RegistryError):
    pass


class OpenChallengeExists(RegistryError):
    pass


class NoSuchChallenge(RegistryError):
    pass


class WrongCarrier(RegistryError):
    exit_code = 3


class UnknownNumber(RegistryError):
    exit_code = 3


class AuthFailed(RegistryError):
    exit_code = 3


class OptOutRefused(RegistryError):
    exit_code = 3


# resolver

class ResolutionError(EnumError):
    pass


class NxDomain(ResolutionError):
    exit_code = 2


class UnauthorizedCountry(NxDomain):
    pass


class UnknownRootId(ResolutionError):
    pass


class ConfigError(EnumError):
    pass


# dns-wire

class DnsWireError(EnumError):
    pass


class NameTooLong(DnsWireError):
    pass


class MalformedMessage(DnsWireError):
    pass


class TruncatedMessage(MalformedMessage):
    pass


class CompressionLoop(MalformedMessage):
    pass


class MalformedRdata(MalformedMessage):
    pass


class TransportError(DnsWireError):
    exit_code = 5


class Timeout(TransportError):
    pass


class IdMismatchExhausted(TransportError):
    pass


class ServerFailure(TransportError):
    pass
