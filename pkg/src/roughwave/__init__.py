"""Pseudospectral solver and certification harness for complex-valued damped
evolution equations u_tt + (-Delta)^sigma u + (-Delta)^delta u_t = u^p with
Fourier data supported in the first octant."""

__version__ = "0.1.0"

from .kernels import ModelParams, derived_exponents  # noqa: F401
from .spectral import GridSpec, SpectralField  # noqa: F401
