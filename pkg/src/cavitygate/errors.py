"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for all domain errors raised by this package."""


class ShapeError(SimulationError):
    """State/operator shapes are inconsistent or structurally invalid."""


class TruncationError(SimulationError):
    """A requested Fock occupation exceeds the configured truncation."""


class LeakageError(SimulationError):
    """Population in the top Fock level exceeded the configured tolerance.

    Raised during time evolution when the truncated cavity basis can no
    longer be trusted.
    """


class PhaseUndefinedError(SimulationError):
    """Global phase alignment requested against an (almost) orthogonal reference."""


class PreconditionError(SimulationError):
    """A protocol step was invoked on a state violating its preconditions."""


class NumericalInstabilityError(SimulationError):
    """The integrator produced non-finite or unphysically growing amplitudes."""
