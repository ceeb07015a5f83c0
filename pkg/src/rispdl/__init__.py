"""Mean-SNR analysis of RIS-aided SIMO uplinks with phase-dependent loss."""
from .analytic import (MeanSnrBreakdown, mean_snr, mu1_scaling_approximation,
                       pdl_penalty)
from .channel import (ArrayGeometry, ChannelSample, CorrelationSpec, LinkGains,
                      Scenario)
from .montecarlo import EstimateWithError, estimate_mean_snr
from .pdl import LossParams, loss, mu1, mu2

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry", "ChannelSample", "CorrelationSpec", "EstimateWithError",
    "LinkGains", "LossParams", "MeanSnrBreakdown", "Scenario",
    "estimate_mean_snr", "loss", "mean_snr", "mu1", "mu1_scaling_approximation",
    "mu2", "pdl_penalty",
]
