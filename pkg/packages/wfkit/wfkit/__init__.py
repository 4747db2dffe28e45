"""
wfkit - Wave-front sets of ultradistributions
Fourier-Lebesgue, modulation and Gabor detectors for Gevrey-class singularities
"""

from .atoms import Atom, Signal, Window, corpus, gaussian_window, gevrey_bump, make_atom, plateau
from .config import Settings, configure, get_settings, load_settings, reset_settings
from .errors import (
    AtomError,
    ConfigError,
    FrameError,
    GeometryError,
    IllConditionedFrameError,
    InvalidLatticePairError,
    NormError,
    OracleUnavailableError,
    PainlessConditionError,
    TransformError,
    WavefrontError,
    WeightError,
    WindowOverflowError,
)
from .gabor import GaborSystem, build_gabor_system, coefficients, painless_dual, synthesize
from .geometry import BoxGrid, Cone, ConeCover, Lattice, LatticePair, make_pair
from .transform import Spectrum, StftGrid, dft, idft, stft, stft_adjoint
from .wavefront import (
    AnalysisParameters,
    CellVerdict,
    CrosscheckSummary,
    WavefrontReport,
    analyze,
    crosscheck,
    detect_df_fl,
    detect_df_gabor,
    detect_wf_fl,
    detect_wf_mod,
    estimate_wf_s,
    ground_truth_check,
)
from .weights import Weight

__version__ = "0.1.0"

__all__ = [
    "AnalysisParameters", "Atom", "AtomError", "BoxGrid", "CellVerdict", "Cone", "ConeCover",
    "ConfigError", "CrosscheckSummary", "FrameError", "GaborSystem", "GeometryError",
    "IllConditionedFrameError", "InvalidLatticePairError", "Lattice", "LatticePair", "NormError",
    "OracleUnavailableError", "PainlessConditionError", "Settings", "Signal", "Spectrum",
    "StftGrid", "TransformError", "WavefrontError", "WavefrontReport", "Weight", "WeightError",
    "Window", "WindowOverflowError", "analyze", "build_gabor_system", "coefficients", "configure",
    "corpus", "crosscheck", "detect_df_fl", "detect_df_gabor", "detect_wf_fl", "detect_wf_mod",
    "dft", "estimate_wf_s", "gaussian_window", "get_settings", "gevrey_bump", "ground_truth_check",
    "idft", "load_settings", "make_atom", "make_pair", "painless_dual", "plateau", "reset_settings",
    "stft", "stft_adjoint", "synthesize",
]
