"""Exception types shared across the library."""


class AlignmentError(ValueError):
    """Lengths or shapes of paired structures do not match."""


class ParameterError(ValueError):
    """A scalar or sequence parameter is outside its valid range."""


class ContractViolationError(RuntimeError):
    """A certified operator property (norm bound, adjoint pairing) fails."""


class DescentViolationError(RuntimeError):
    """The objective increased along the iteration.

    The iteration is guaranteed to decrease the objective whenever the
    certified norm bound (or the preconditioner domination condition)
    actually holds, so an increase means the operator lied about its
    contract and continuing would produce garbage.
    """
