from typing import Optional


class KrtvError(Exception):
    pass


class ShapeMismatchError(KrtvError, ValueError):
    pass


class AdjointCheckError(KrtvError):
    pass


class SolverDivergedError(KrtvError):

    def __init__(self, message: str, iteration: int, block: Optional[str] = None):
        super().__init__(message)
        self.iteration = iteration
        self.block = block


class BracketError(KrtvError, ValueError):

    def __init__(self, message: str, samples: list):
        super().__init__(message)
        # (parameter, total variation) pairs sampled across the bracket
        self.samples = samples


class OracleSizeError(KrtvError, ValueError):
    pass


class LinearProgramError(KrtvError):
    pass


class PgmFormatError(KrtvError, ValueError):
    pass


class SignalFormatError(KrtvError, ValueError):
    pass
