"""Exception hierarchy shared by all modules."""


class UnivGroupError(Exception):
    """Base class for every error raised by this package."""


class ZeroWeightNonzeroVector(UnivGroupError, ValueError):
    """A generator pairs a zero weight with a nonzero vector, or the reverse.

    Either way the prescription cannot come from a metric: the first would be a
    pseudometric, the second would give d(t, t) > 0.
    """


class NotSpanning(UnivGroupError, ValueError):
    """The generator vectors do not span the full lattice."""


class ResourceLimit(UnivGroupError, RuntimeError):
    """A search exceeded its node budget."""


class RankMismatch(UnivGroupError, ValueError):
    pass


class KatetovViolation(UnivGroupError, ValueError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class VerificationFailure(UnivGroupError, AssertionError):
    """A post-condition that should hold by construction did not."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SharedPartMismatch(UnivGroupError, ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ParseError(UnivGroupError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class OracleAxiomViolation(UnivGroupError, ValueError):
    pass


class OracleDomainError(UnivGroupError, KeyError):
    """A table oracle was queried outside its table."""


class ApproximationNotCertified(UnivGroupError, RuntimeError):
    def __init__(self, message, worst_ratio=None, witness=None):
        super().__init__(message)
        self.worst_ratio = worst_ratio
        self.witness = witness
        self.partial = None  # set by embed_group: (chain, report) so far


class PreconditionViolation(UnivGroupError, ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConsistencyViolation(UnivGroupError, AssertionError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
