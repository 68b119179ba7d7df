"""Density-operator simulation of the quantum Newcomb game and its market variant."""

from qnewcomb.errors import ConsistencyError, ValidationError
from qnewcomb.game import GameState, MixedTactic, PayoffMatrix, expected_payoff
from qnewcomb.market import ProjectivePoint, ScanConfig, find_extrema, market_payoff
from qnewcomb.newcomb import ProtocolParams, run_meyer_protocol, verify_restoration

__all__ = [
    "ConsistencyError",
    "GameState",
    "MixedTactic",
    "PayoffMatrix",
    "ProjectivePoint",
    "ProtocolParams",
    "ScanConfig",
    "ValidationError",
    "expected_payoff",
    "find_extrema",
    "market_payoff",
    "run_meyer_protocol",
    "verify_restoration",
]
