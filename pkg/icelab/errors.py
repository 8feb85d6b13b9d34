# icelab/errors.py
"""Exception hierarchy shared by the solver layers and the command line."""


class IcelabError(Exception):
    """Base class for every error raised by icelab."""


class GridError(IcelabError, ValueError):
    """Field dimensions do not match the owning grid, or the grid is too coarse."""


class ParameterError(IcelabError, ValueError):
    """A scalar parameter lies outside its admissible range."""


class DomainViolation(IcelabError, ValueError):
    """Ice fields left the admissible set V."""

    def __init__(self, field, bound, location=None, value=None):
        self.field = field
        self.bound = bound
        self.location = location
        self.value = value
        msg = f"{field} violates bound {bound}"
        if location is not None:
            msg += f" at grid point {location}"
        if value is not None:
            msg += f" (value {value:.6g})"
        super().__init__(msg)


class SolverError(IcelabError, RuntimeError):
    """An inner iteration failed to converge."""

    def __init__(self, message, residual_history=()):
        self.residual_history = list(residual_history)
        if self.residual_history:
            message = f"{message}; last residual {self.residual_history[-1]:.3e}"
        super().__init__(message)


class CouplingDivergence(SolverError):
    """Ocean/ice Picard iteration did not reach the coupling tolerance."""


class IceSolverError(SolverError):
    """The frozen-coefficient ice momentum solve did not converge."""


class EllipticityFailure(IcelabError):
    """The sampled symbol of the frozen Hibler operator is not positive."""

    def __init__(self, c_min, witness):
        self.c_min = c_min
        self.witness = witness
        super().__init__(f"ellipticity certificate failed: c_min={c_min:.6g} at {witness}")


class ManufacturedSolutionError(IcelabError, ValueError):
    """Exact fields handed to the manufactured forcing break a boundary or trace condition."""


class ConfigError(IcelabError):
    """Configuration could not be loaded or validated."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.violations))


class SnapshotError(IcelabError):
    """A snapshot directory could not be read back."""


class SnapshotVersionError(SnapshotError):
    pass


class SnapshotDimensionError(SnapshotError):
    pass


class SnapshotHashWarning(UserWarning):
    """Snapshot was written under a different configuration."""
