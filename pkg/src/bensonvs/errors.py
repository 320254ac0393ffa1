"""Exception hierarchy shared by all modules."""


class BensonError(Exception):
    """Base class for every error raised by this package."""


class DimMismatch(BensonError, ValueError):
    pass


# cone
class RankDeficient(BensonError, ValueError):
    pass


class EmptyInterior(BensonError, ValueError):
    pass


class NotInterior(BensonError, ValueError):
    pass


# polyhedron
class UnboundedBelow(BensonError):
    pass


class Infeasible(BensonError):
    pass


class EmptyResult(BensonError):
    pass


# problem
class SchemaError(BensonError, ValueError):
    pass


class NotPSD(BensonError, ValueError):
    pass


class NonsmoothWithGeneralCone(BensonError, ValueError):
    pass


class WeightNotInDualCone(BensonError, ValueError):
    pass


class ZeroDirection(BensonError, ValueError):
    pass


# solvers
class Unbounded(BensonError):
    pass


class MaxIter(BensonError):
    pass


class LineSearchFail(BensonError):
    pass


class DualDegenerate(BensonError):
    pass


# driver
class InitUnbounded(BensonError):
    pass


class InitNoVertex(BensonError):
    pass


class OracleUnavailable(BensonError):
    pass


# instances / cli
class BadParameter(BensonError, ValueError):
    pass


class SingularStiffness(BensonError, ValueError):
    pass


class BadShape(BensonError, ValueError):
    pass


class WrongDimension(BensonError, ValueError):
    pass
