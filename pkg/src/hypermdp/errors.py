"""Exception taxonomy shared by all hypermdp modules."""


class HyperMdpError(Exception):
    """Base class for every error raised by this package."""


# -- model errors ------------------------------------------------------------

class ModelSyntaxError(HyperMdpError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RowSumError(ModelSyntaxError):
    """A transition row sums to neither 0 nor 1."""


class NoEnabledAction(HyperMdpError):
    """Some state has no action whose row sums to 1."""


class DanglingReference(ModelSyntaxError):
    """An undeclared state or proposition is referenced."""


class IncompatibleScheduler(HyperMdpError):
    """A scheduler picks an action that is not enabled in a state."""


class ArityZero(HyperMdpError):
    """Self-composition of zero chains was requested."""


# -- formula errors ----------------------------------------------------------

class FormulaSyntaxError(HyperMdpError):
    def __init__(self, message, line=1, col=1):
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}")


class UnboundStateVariable(HyperMdpError):
    pass


class UnboundSchedulerVariable(HyperMdpError):
    pass


class QuantifierOrderViolation(HyperMdpError):
    """A state quantifier appears before the scheduler quantifier it uses."""


class UnknownProposition(HyperMdpError):
    """A formula proposition is not part of the model's alphabet."""


# -- analysis errors ---------------------------------------------------------

class SingularSystem(HyperMdpError):
    """The reduced until equation system had no unique solution (internal bug)."""


class BoundError(HyperMdpError):
    """Bounded-until bounds violate 0 <= k1 <= k2."""


# -- checking / encoding errors ----------------------------------------------

class CapExceeded(HyperMdpError):
    """More quantifiers than the configured enumeration caps allow."""


class IllFormed(HyperMdpError):
    """The formula failed well-formedness checks during checking."""


class MixedSchedulerBlock(HyperMdpError):
    """Scheduler quantifiers mix exists and forall; not encodable, use enum."""


class IncompleteModel(HyperMdpError):
    """A solver model is missing required variable assignments."""
