"""Exception hierarchy shared by the exact, combinatorial and numeric layers."""


class PeanoDiffError(ValueError):
    """Base class for every error raised by this package."""


class DuplicateNodes(PeanoDiffError):
    pass


class ArityMismatch(PeanoDiffError):
    pass


class InvalidOrder(PeanoDiffError):
    pass


class ZeroDilation(PeanoDiffError):
    pass


class OrderMismatch(PeanoDiffError):
    pass


class IntersectionNotN(PeanoDiffError):
    pass


class NodeNotShared(PeanoDiffError):
    pass


class DegenerateCombination(PeanoDiffError):
    pass


class RowOutOfRange(PeanoDiffError):
    pass


class ReplayMismatch(PeanoDiffError):
    pass


class NonPositive(PeanoDiffError):
    pass


class ZeroStep(PeanoDiffError):
    pass


class ExactUnavailable(PeanoDiffError):
    """Exact evaluation was requested at a point where the value is not rational."""


class MalformedCertificate(PeanoDiffError):
    pass
