"""Exception hierarchy.

``InputError`` subclasses map to CLI exit code 2 and ``NumericalError``
subclasses to exit code 3.
"""


class NcerError(Exception):
    pass


class InputError(NcerError, ValueError):
    pass


class NumericalError(NcerError, ArithmeticError):
    pass


class IsolatedVertexError(InputError):
    def __init__(self, indices):
        self.indices = [int(i) for i in indices]
        super().__init__(f"isolated vertices (zero degree): {self.indices}")


class InvalidKernelError(InputError):
    pass


class HyperplaneDegenerate(InputError):
    def __init__(self, indices):
        self.indices = [int(i) for i in indices]
        super().__init__(f"columns orthogonal to hyperplane normal: {self.indices}")


class RankDeficientError(NumericalError):
    pass


class RankDeficientEmbedding(RankDeficientError):
    pass


class ConvergenceError(NumericalError):
    pass


class IterationCapExceeded(NumericalError):
    """Raised when the MVEE solver hits its iteration cap.

    ``best`` holds the last iterate as an ``EllipsoidResult``; it is feasible
    but its duality gap exceeds the requested tolerance.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
