"""Exception types raised across the package."""


class LagGlueError(Exception):
    """Base class; ``payload`` carries diagnostic data for serialization."""

    def __init__(self, message, **payload):
        super().__init__(message)
        self.payload = payload

    def to_dict(self):
        out = {"error": type(self).__name__, "message": str(self)}
        for key, val in self.payload.items():
            try:
                out[key] = float(val)
            except (TypeError, ValueError):
                out[key] = repr(val)
        return out


class DegenerateFrame(LagGlueError):
    pass


class NotLagrangian(LagGlueError):
    pass


class OutOfDomain(LagGlueError):
    pass


class NoIntersection(LagGlueError):
    pass


class AngleConditionViolated(LagGlueError):
    pass


class QuadratureFailure(LagGlueError):
    pass


class InversionFailure(LagGlueError):
    pass


class ProjectionFailure(LagGlueError):
    pass


class IncompleteField(LagGlueError):
    pass


class SymmetryRequired(LagGlueError):
    pass


class SpectralFailure(LagGlueError):
    pass


class ChartOverflow(LagGlueError):
    pass


class IterationDiverged(LagGlueError):
    pass


class ConfigError(LagGlueError):
    pass
