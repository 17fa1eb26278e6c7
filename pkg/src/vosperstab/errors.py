"""Exception hierarchy shared by every module."""


class VosperError(Exception):
    pass


class PreconditionError(VosperError, ValueError):
    """An operation was called outside its domain."""


class BoundViolation(VosperError, AssertionError):
    """A proven inequality failed numerically; always an implementation bug or bad input."""

    def __init__(self, name, lhs, rhs):
        self.name = name
        self.lhs = lhs
        self.rhs = rhs
        super().__init__(f"{name}: {lhs!r} > {rhs!r}")


class CapExceeded(VosperError, RuntimeError):
    """A configured safety cap was hit."""

    def __init__(self, cap, value, limit):
        self.cap = cap
        self.value = value
        self.limit = limit
        super().__init__(f"cap {cap!r} exceeded: {value} > {limit}")


class GrowthOverflow(VosperError, OverflowError):
    """Growth function value not representable as a float."""

    def __init__(self, M, log2_value):
        self.M = M
        self.log2_value = log2_value
        super().__init__(f"growth({M}) overflows: log2 value = {log2_value:.6g}")


class ModulusTooSmall(PreconditionError):
    """The prime is too small for the requested (lambda, n, d) or independence order."""


class NotIndependent(PreconditionError):
    def __init__(self, relation):
        self.relation = relation
        super().__init__(f"homomorphism is not independent: relation {relation}")


class ParseError(VosperError, ValueError):
    """Malformed input file; ``offset`` is the byte position of the problem."""

    def __init__(self, message, offset):
        self.offset = offset
        super().__init__(f"{message} (at byte offset {offset})")
