"""Exception hierarchy shared by the linear-algebra, module and arithmetic layers."""


class KleinSqError(Exception):
    pass


# f2la
class LengthMismatch(KleinSqError, ValueError):
    pass


class DimensionMismatch(KleinSqError, ValueError):
    pass


class NotASubspace(KleinSqError, ValueError):
    pass


# kleinmod
class InvalidModule(KleinSqError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid module")


class NotInFamily(KleinSqError):
    def __init__(self, message, functionals=None):
        self.functionals = functionals
        super().__init__(message)


class ModuleFormatError(KleinSqError, ValueError):
    pass


# decomp
class PhiNotFixed(KleinSqError, ValueError):
    pass


class NotComplement(KleinSqError, ValueError):
    pass


class NotInSubspace(KleinSqError, ValueError):
    pass


class VerificationFailed(KleinSqError, AssertionError):
    pass


class MissingFlag(KleinSqError, ValueError):
    pass


# arith
class ZeroInput(KleinSqError, ValueError):
    pass


class InvalidPlace(KleinSqError, ValueError):
    pass


class SquareParameter(KleinSqError, ValueError):
    pass


class DependentClasses(KleinSqError, ValueError):
    pass


class ParamsMismatch(KleinSqError, ValueError):
    pass


class PreconditionFailed(KleinSqError, ValueError):
    pass


class DegenerateNorm(KleinSqError, ValueError):
    pass


class InternalInconsistency(KleinSqError, AssertionError):
    pass


class InconsistentImage(KleinSqError, AssertionError):
    pass
