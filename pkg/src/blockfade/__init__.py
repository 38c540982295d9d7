"""Finite-blocklength bounds for the noncoherent Rayleigh block-fading channel."""

from .bounds import (BoundError, BoundResult, dt_lower, error_prob, mc_upper,
                     na_awgn, na_coherent, na_high_snr, na_quasistatic)
from .infodens import ChannelParams
from .sampling import McConfig, RngState
from .specfun import DomainError

__version__ = "0.1.0"

__all__ = [
    "BoundError", "BoundResult", "ChannelParams", "DomainError", "McConfig",
    "RngState", "dt_lower", "error_prob", "mc_upper", "na_awgn", "na_coherent",
    "na_high_snr", "na_quasistatic",
]
