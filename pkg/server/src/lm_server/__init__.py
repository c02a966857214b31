"""Transformer-backed distribution server for the covertext wire protocol."""

from .model import CausalLMBackend, ServerConfig
from .server import DistributionServer

__all__ = ["CausalLMBackend", "DistributionServer", "ServerConfig"]
