class GameError(Exception):
    """Base class for every error raised by the game solver."""


class InvalidArgument(GameError, ValueError):
    pass


class UnattainedMinimum(InvalidArgument):
    """
    The weighted loss has no finite minimizer, e.g. one of the class weights is zero
    and the infimum is only reached at +/- infinity.
    """


class DegenerateKernel(GameError, ArithmeticError):
    pass


class InfeasibleTransport(GameError):
    pass


class ConvergenceFailure(GameError, RuntimeError):
    """
    An iterative method ran out of iterations. The last iterate is kept so callers
    can still write partial outputs. ``report`` is set when the iterate itself converged
    and only a later step (the certificate) did not.
    """
    def __init__(self, message, iterate=None, iterations=0, grad_norm=None, marginal_err=None,
                 report=None):
        super().__init__(message)
        self.iterate = iterate
        self.iterations = iterations
        self.grad_norm = grad_norm
        self.marginal_err = marginal_err
        self.report = report


class ConfigError(GameError):
    """Scenario file could not be read, parsed or validated."""
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])

    def __str__(self):
        if not self.diagnostics:
            return super().__str__()
        return '\n'.join([super().__str__()] + [f'  {line}' for line in self.diagnostics])
