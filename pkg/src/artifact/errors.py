"""Exception hierarchy shared by all modules."""


class ArtifactError(Exception):
    """Base class for every error raised by the package."""


class InvalidInput(ArtifactError, ValueError):
    pass


class NoConvergence(ArtifactError):
    """An iterative solver ran out of iterations; ``report`` holds the last state."""

    def __init__(self, msg, report=None, last_good=None):
        super().__init__(msg)
        self.report = report
        self.last_good = last_good


class DerivativeVanishes(ArtifactError):
    pass


class NonFiniteKernel(ArtifactError):
    pass


class SingularSystem(ArtifactError):
    pass


class EvaluationTooCloseToContour(ArtifactError):
    pass


class ZeroOnBoundary(ArtifactError):
    pass


class AmbiguousCount(ArtifactError):
    pass


class OutsideStrip(ArtifactError):
    pass


class AtPole(ArtifactError):
    pass


class SeedOutsideStrip(ArtifactError):
    pass


class NewtonFailed(ArtifactError):
    pass


class AtBranchPoint(ArtifactError):
    pass


class RootCollision(ArtifactError):
    pass


class RootLeftStrip(ArtifactError):
    pass


class CannotSeparate(ArtifactError):
    pass


class BranchJump(ArtifactError):
    pass


class ExtrapolationDisagrees(ArtifactError):
    pass


class SmallDenominator(ArtifactError):
    pass


class GridTooCoarse(ArtifactError):
    pass


class FitIllConditioned(ArtifactError):
    pass


class TruncationNotSettled(ArtifactError):
    pass
