"""Simulation and analysis toolkit for bribery-resistant alerting protocols."""

from .core import (
    MICRO, Action, BribeVector, InvalidParams, NodeId, Outcome, ProtocolParams, TokenAmount,
    as_tokens, format_tokens, make_params,
)

__all__ = [
    "MICRO", "Action", "BribeVector", "InvalidParams", "NodeId", "Outcome", "ProtocolParams",
    "TokenAmount", "as_tokens", "format_tokens", "make_params",
]
