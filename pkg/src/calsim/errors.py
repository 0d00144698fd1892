"""Exception types raised across the package."""


class InvalidInstanceError(ValueError):
    """An instance (or a vector passed against it) is malformed."""


class EstimatorFailure(RuntimeError):
    """A robust estimator did not converge."""


class SolverError(RuntimeError):
    """The min-max distribution fit could not be solved to certificate."""


class ConfigError(ValueError):
    """An experiment or algorithm configuration is invalid."""
