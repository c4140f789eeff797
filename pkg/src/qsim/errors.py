"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for simulator errors."""


class CapacityError(SimulationError):
    """A requested size exceeds a hard resource cap."""


class ShapeError(SimulationError):
    """Dimension, index, or layout mismatch."""


class ArityError(SimulationError):
    """Parameter vector length does not match the parameter count."""


class FormError(SimulationError):
    """Operation received a Hamiltonian in the wrong form."""


class ParseError(SimulationError):
    """Malformed circuit description."""
