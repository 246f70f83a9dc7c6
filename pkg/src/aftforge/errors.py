"""Exception types shared across the toolchain."""


class AftforgeError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(AftforgeError):
    """Syntax error in an input document, with a 1-based position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}" if line else message)


class UnknownGateType(ParseError):
    pass


class DuplicateNodeId(ParseError):
    pass


class UnreachableNode(AftforgeError):
    pass


class SchemaError(AftforgeError):
    """Document parsed but does not have the expected shape."""


class ValidationError(AftforgeError):
    """Model violates its invariants; carries all collected diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class UnknownReference(AftforgeError):
    pass


class KindMismatch(AftforgeError):
    pass


class MalformedFeed(AftforgeError):
    pass


class MalformedCatalog(AftforgeError):
    pass


class UnparsableVector(AftforgeError):
    pass


class NoCvss(AftforgeError):
    pass


class UnparsableCpe(AftforgeError):
    pass


class UnknownCwe(AftforgeError):
    pass


class TemplateError(AftforgeError):
    pass


class SizeLimitExceeded(AftforgeError):
    pass


class MissingManifest(AftforgeError):
    pass
