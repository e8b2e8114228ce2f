"""Exception hierarchy shared by all modules."""


class FermiFuseError(ValueError):
    """Base class for every error raised by the package."""


# linalg
class LinalgError(FermiFuseError):
    pass


class NotHermitian(LinalgError):
    pass


class Singular(LinalgError):
    pass


class DimensionMismatch(FermiFuseError):
    pass


# fermion_model
class OddN(FermiFuseError):
    pass


class TooLarge(FermiFuseError):
    pass


class NotOrthogonal(FermiFuseError):
    pass


class NotThetaOrthogonal(NotOrthogonal):
    pass


# clifford_fock
class NotInLagrangian(FermiFuseError):
    pass


class NotInDual(FermiFuseError):
    pass


class NotInMinusAlgebra(FermiFuseError):
    pass


# implementers
class NonUnique(FermiFuseError):
    pass


class Indeterminate(FermiFuseError):
    pass


class OddInput(FermiFuseError):
    pass


class NotEven(FermiFuseError):
    pass


# vn_algebra
class NotFaithful(FermiFuseError):
    pass


class NotCyclic(FermiFuseError):
    pass


class NotSeparating(FermiFuseError):
    pass


class NotFactor(FermiFuseError):
    pass


class NotIsomorphism(FermiFuseError):
    pass


class NotStandardForm(FermiFuseError):
    pass


class ConeAmbiguity(FermiFuseError):
    pass


class VacuumDegenerate(FermiFuseError):
    pass


# connes_fusion
class NotIntertwiner(FermiFuseError):
    pass


class AlgebraMismatch(FermiFuseError):
    pass


# implementer_fusion / fibre_fusion
class NotFusable(FermiFuseError):
    pass


class NoJCommutingPhase(FermiFuseError):
    pass


class IncompatibleTriple(FermiFuseError):
    pass
