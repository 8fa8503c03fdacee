"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class PolaromechError(Exception):
    """Base class for every error raised by the package."""


class UnknownMaterial(PolaromechError, KeyError):
    pass


class OutOfRange(PolaromechError, ValueError):
    pass


class NoBoundState(PolaromechError):
    pass


class NotConverged(PolaromechError):
    pass


class NoGuidedMode(PolaromechError):
    pass


class RootNotBracketed(PolaromechError):
    pass


class QWOutsideSpacer(PolaromechError, ValueError):
    pass


class GridMismatch(PolaromechError, ValueError):
    pass


class QuadratureNotConverged(PolaromechError):
    pass


class SingularTransfer(PolaromechError, ValueError):
    pass


class EigenSolverFailure(PolaromechError):
    pass


class SqueezeDiverges(PolaromechError, ValueError):
    pass


class UnstablePoint(PolaromechError):
    pass


class ResidueInvalid(PolaromechError):
    pass


class SingularResolvent(PolaromechError):
    pass


class ConfigInvalid(PolaromechError, ValueError):
    """Configuration rejected before any computation; carries line/field context."""

    def __init__(self, message: str, *, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class UnknownSweepVariable(ConfigInvalid):
    pass


class ComputeError(PolaromechError):
    """Numerical failure wrapped with the name of the module that raised it."""

    def __init__(self, module: str, cause: Exception):
        self.module = module
        self.cause = cause
        super().__init__(f"{module}: {type(cause).__name__}: {cause}")
