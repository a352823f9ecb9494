"""Exception hierarchy shared by all somsim modules."""


class SomsimError(Exception):
    """Base class for all somsim errors."""


class ConfigurationError(SomsimError):
    """Invalid user-supplied configuration (bounds, parameters, specs)."""


class ContractViolation(SomsimError):
    """A caller broke an operation precondition (e.g. dimension mismatch)."""


class ComputationError(SomsimError):
    """A numeric precondition failed during an update (e.g. invalid C)."""


class PropagationError(SomsimError):
    """A dead upstream map cannot feed the next network level."""


class CalibrationError(SomsimError):
    """Activation-scale calibration could not reach its target range."""
