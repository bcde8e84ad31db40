"""Exception hierarchy shared by every solver and generator."""


class CcspError(Exception):
    """Base class for all errors raised by this package."""


class InstanceSyntaxError(CcspError, ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class DuplicateClause(InstanceSyntaxError):
    pass


class IndexOutOfRange(InstanceSyntaxError):
    pass


class LabelOutOfRange(InstanceSyntaxError):
    pass


class ContradictionDetected(CcspError):
    """A clause has no satisfying completion under a partial assignment."""


class SearchSpaceTooLarge(CcspError):
    pass


class DeadTuple(CcspError):
    """Fixing a (k-1)-tuple leaves some clause with zero satisfying values."""


class NotInduced2(CcspError):
    pass


class EmptyLabelSet(CcspError):
    def __init__(self, var):
        self.var = var
        super().__init__(f"label set of variable {var} became empty")


class TrivialPredicate(CcspError, ValueError):
    pass


class DistributionNotBalanced(CcspError, ValueError):
    pass


class GadgetNotFound(CcspError):
    def __init__(self, kind, t, tries, last=None):
        self.kind = kind
        self.t = t
        self.tries = tries
        self.last = last
        super().__init__(f"no verified {kind} gadget with t={t} after {tries} tries")


class AlgoMismatch(CcspError, ValueError):
    """The instance shape does not fit the requested algorithm."""
