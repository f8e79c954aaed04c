"""Reduced-state sequence estimation for two-head two-track channels."""
from .channel import ChannelTarget, ItiModel, ReceivedPair, TrackPair, generate_inputs, snr_to_sigma, transmit
from .trellis import SubsetConfig, SubsetTrellis, build

__all__ = [
    "ChannelTarget",
    "ItiModel",
    "ReceivedPair",
    "TrackPair",
    "SubsetConfig",
    "SubsetTrellis",
    "build",
    "generate_inputs",
    "snr_to_sigma",
    "transmit",
]

__version__ = "0.1.0"
