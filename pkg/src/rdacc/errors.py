"""Exception hierarchy shared by all modules."""


class RdaccError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(RdaccError, ValueError):
    """An argument is outside its admissible range."""


class ConstructionError(RdaccError, ValueError):
    """A waveform cannot be built with the requested settings."""


class KinematicsError(RdaccError, ValueError):
    """The target motion model is unphysical for the requested times."""


class SynthesisError(RdaccError, ValueError):
    """An echo does not fit inside its receive window."""


class DegenerateSceneError(RdaccError, ValueError):
    """A reference response is zero, so a ratio is undefined."""
