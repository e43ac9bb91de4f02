"""Exception hierarchy shared by the codec, the schema tools and COSE."""


class CborError(ValueError):
    """Base class for byte-level failures. ``offset`` points into the input."""

    code = "CborError"

    def __init__(self, message="", offset=None):
        super().__init__(message or self.code)
        self.offset = offset


class Invalid(CborError):
    code = "Invalid"


class Truncated(Invalid):
    code = "Truncated"


class ReservedInfo(Invalid):
    code = "ReservedInfo"


class IndefiniteLength(Invalid):
    code = "IndefiniteLength"


class InvalidSimple(Invalid):
    code = "InvalidSimple"


class InvalidUtf8(Invalid):
    code = "InvalidUtf8"


class CountOverflow(Invalid):
    code = "CountOverflow"


class BufferTooSmall(CborError):
    code = "BufferTooSmall"


class TooLarge(CborError):
    code = "TooLarge"


class NonMinimalInt(CborError):
    code = "NonMinimalInt"


class UnsortedOrDuplicateKeys(CborError):
    code = "UnsortedOrDuplicateKeys"


class DuplicateKey(CborError):
    code = "DuplicateKey"


class DepthExceeded(CborError):
    code = "DepthExceeded"


class CddlError(ValueError):
    """Base class for schema text and elaboration failures."""

    code = "CddlError"

    def __init__(self, message="", line=None, column=None, where=None):
        super().__init__(message or self.code)
        self.line = line
        self.column = column
        self.where = where

    @property
    def position(self):
        if self.line is None:
            return None
        return (self.line, self.column)


class CddlSyntaxError(CddlError):
    code = "SyntaxError"


class UnknownRule(CddlError):
    code = "UnknownRule"


class RecursiveRule(CddlError):
    code = "RecursiveRule"


class Unsupported(CddlError):
    code = "Unsupported"


class ElabError(CddlError):
    code = "ElabError"


class NonDisjointAlternatives(ElabError):
    code = "NonDisjointAlternatives"


class NonDeterministicMapGroup(ElabError):
    code = "NonDeterministicMapGroup"


class GreedyStarOverlap(ElabError):
    code = "GreedyStarOverlap"


class FootprintOverlap(ElabError):
    code = "FootprintOverlap"


class ValidationError(ValueError):
    """A well-formed deterministic item that does not match its schema."""

    code = "ValidationError"

    def __init__(self, message="", path=()):
        super().__init__(message or self.code)
        self.path = tuple(path)


class SchemaMismatch(ValidationError):
    code = "SchemaMismatch"


class CutViolation(ValidationError):
    code = "CutViolation"


class UnconsumedEntries(ValidationError):
    code = "UnconsumedEntries"


class SigmaError(ValueError):
    """A typed value that cannot be serialized into a schema-valid item."""

    def __init__(self, reason, message="", path=()):
        super().__init__(message or reason)
        self.reason = reason
        self.path = tuple(path)

    @property
    def code(self):
        return self.reason


class CoseError(ValueError):
    code = "CoseError"


class ParseFailure(CoseError):
    code = "ParseFailure"


class NonDeterministicEncoding(CoseError):
    code = "NonDeterministicEncoding"


class SignatureInvalid(CoseError):
    code = "SignatureInvalid"
