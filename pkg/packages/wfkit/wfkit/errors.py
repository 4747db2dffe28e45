"""
Exception hierarchy for wfkit

Domain errors also derive from ValueError so callers that only know about
bad arguments keep working.
"""

from typing import Optional


class WavefrontError(Exception):
    """Base class for every error raised by wfkit"""


class WeightError(WavefrontError, ValueError):
    """Invalid weight construction, certificate or serialization"""


class GeometryError(WavefrontError, ValueError):
    """Invalid lattice, cone, cone pair or sampling grid"""


class InvalidLatticePairError(GeometryError):
    """Lattice pair that is not paired or lies beyond the critical density"""


class AtomError(WavefrontError, ValueError):
    """Invalid window or test distribution"""


class OracleUnavailableError(AtomError):
    """The atom has no closed-form Fourier transform"""


class NormError(WavefrontError, ValueError):
    """Invalid Lebesgue exponent, truncation radius or mixed-norm variant"""


class TransformError(WavefrontError, ValueError):
    """Grid or lattice incompatible with the discrete transforms"""


class WindowOverflowError(TransformError):
    """A scaled window leaves the sample box"""

    def __init__(self, message: str, required_half_width: float):
        super().__init__(message)
        self.required_half_width = required_half_width


class FrameError(WavefrontError, ValueError):
    """Gabor system cannot be built"""


class PainlessConditionError(FrameError):
    """Window support too wide for the frequency step"""

    def __init__(self, message: str, required_step: float):
        super().__init__(message)
        self.required_step = required_step


class IllConditionedFrameError(FrameError):
    """Translates of the window leave (near) gaps"""


class ConfigError(WavefrontError, ValueError):
    """Invalid configuration file or settings value"""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message)
        self.line = line
