'''Exception types raised by sosggm.

The domain errors derive from ValueError so that callers which only catch
ValueError (the convention for argument checking throughout the package) keep
working.
'''


class SosGgmError(Exception):
    '''Root of every sosggm specific exception.'''


class ModelDomainError(SosGgmError, ValueError):
    '''An argument lies outside the domain of the model or of an operation.'''


class UnsupportedParameterError(ModelDomainError):
    '''The operation exists, but not for this parameter (e.g. k != 2).'''


class EnumerationSizeError(ModelDomainError):
    '''Exhaustive enumeration would exceed the configured cap.'''

    def __init__(self, n_configs, cap):
        self.n_configs = n_configs
        self.cap = cap
        err_msg = (f'enumeration of {n_configs} gradient configurations exceeds the cap of {cap}; '
                   'reduce the depth of the subtree')
        super().__init__(err_msg)


class UnknownBranchError(ModelDomainError):
    '''A branch label was requested that does not exist at the given theta.'''

    def __init__(self, label, available):
        self.label = label
        self.available = list(available)
        err_msg = f'no branch labelled {label!r}; available: {", ".join(self.available) or "none"}'
        super().__init__(err_msg)


class NumericError(SosGgmError, ArithmeticError):
    '''A non-finite value appeared in an intermediate result.'''


class RootIsolationError(SosGgmError, RuntimeError):
    '''Internal error of the root isolator: a root could not be bracketed, or
    the result contradicts Descartes' rule of signs.'''


class IncompleteEnumerationError(SosGgmError, RuntimeError):
    '''A multistart enumeration is known to have missed solutions.'''


class TransitionNotFoundError(SosGgmError, RuntimeError):
    '''A bisection on a solution count found no change of count.'''
