"""Exception hierarchy.

Every error carries a short ``kind`` string so callers (and the CLI) can
report failures uniformly without matching on class names.
"""


class DeckforgeError(Exception):
    kind = "error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        return {"kind": self.kind, "message": self.message, **self.details}


# package-io

class UnreadableZipError(DeckforgeError):
    kind = "unreadable-zip"


class MissingContentTypesError(DeckforgeError):
    kind = "missing-content-types"


class UnknownPartError(DeckforgeError, KeyError):
    kind = "unknown-part"

    def __str__(self):
        return self.message


class PackageIOError(DeckforgeError):
    kind = "io-failure"


class PackageInvalidError(DeckforgeError):
    kind = "validation-failed"

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# deck-model

class MalformedDeckError(DeckforgeError):
    kind = "malformed-deck"


# diff-engine

class SchemaMismatchError(DeckforgeError):
    kind = "schema-mismatch"


# edit-engine

class TargetNotFoundError(DeckforgeError):
    kind = "not-found"


class AmbiguousTargetError(DeckforgeError):
    kind = "ambiguous"


class InvalidParameterError(DeckforgeError):
    kind = "invalid-parameter"


class AddressNotFoundError(DeckforgeError):
    kind = "address-not-found"


class MalformedFragmentError(DeckforgeError):
    kind = "malformed-fragment"


# model-gateway

class GatewayError(DeckforgeError):
    kind = "gateway-error"


class TransportError(GatewayError):
    kind = "transport-failure"


class ReplayMissError(GatewayError):
    kind = "replay-miss"


class NoJSONFoundError(GatewayError):
    kind = "no-json-found"


class SchemaViolationError(GatewayError):
    kind = "schema-violation"


class SchemaInvalidError(GatewayError):
    """Raised when a response still fails validation after all retries."""

    kind = "schema-invalid-after-retries"


# visual-bridge

class RendererMissingError(DeckforgeError):
    kind = "renderer-missing"


class RendererTimeoutError(DeckforgeError):
    kind = "renderer-timeout"


class RenderFailedError(DeckforgeError):
    kind = "render-failed"


class RenderCountMismatchError(DeckforgeError):
    kind = "count-mismatch"


class DimensionMismatchError(DeckforgeError):
    kind = "dimension-mismatch"


# judge-harness / bench

class JudgeFailedError(DeckforgeError):
    kind = "judge-failed"


class UnknownCategoryError(DeckforgeError):
    kind = "unknown-category"


class CaseLoadError(DeckforgeError):
    kind = "bad-case"


class MissingCaseFileError(CaseLoadError):
    kind = "missing-file"


class InvalidDeckError(CaseLoadError):
    kind = "invalid-deck"


class BadMetadataError(CaseLoadError):
    kind = "bad-metadata"
