"""Exception hierarchy shared by all muna modules."""


class MunaError(Exception):
    """Base class for every error raised by this package."""


class OutOfRange(MunaError):
    """An index or table entry falls outside the algebra."""


class BadArity(MunaError):
    """A size or depth parameter is too small to make sense."""


class NotConnected(MunaError):
    """Two nodes were expected to share a connected component."""


class DanglingPort(MunaError):
    """A node is declared a port but has a successor, or has neither."""


class Overflow(MunaError):
    """A requested unfolding exceeds the configured size cap."""


class BackwardsEternal(MunaError):
    """The element has non-empty preimages at every depth."""


class NoCycle(MunaError):
    """The component terminates in a forward ray, not a cycle."""


class EqualPoints(MunaError):
    """Two distinct points were required."""


class NotRF(MunaError):
    """The algebra is not residually finite; no separating map exists."""


class NotCS(MunaError):
    """The algebra is not completely separable."""


class BrokenHom(MunaError):
    """A claimed homomorphism fails the commuting condition somewhere."""


class SeparationFailed(MunaError):
    """A certificate's separation claim is false on the unfolding."""


class CapExceeded(MunaError):
    """A brute-force enumeration was asked to exceed its cap."""


class Mismatch(MunaError):
    """Cross-validation found a disagreement between symbolic and
    brute-force results; carries the offending report."""

    def __init__(self, detail, report=None):
        super().__init__(detail)
        self.report = report


class ParseError(MunaError):
    """Malformed DSL input, with source coordinates."""

    def __init__(self, message, line, col):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class UndefinedNode(MunaError):
    """A DSL clause or directive references an unknown name."""


class PortHasEdge(MunaError):
    """A DSL node is marked as a port but carries an out-edge."""
