"""Nonlocal games: classical and quantum values, or-games, magic square
strategies, Kochen-Specker sets and Schmidt-rank certificates."""

__version__ = "0.1.0"

from .errors import GameError
from .games import NonlocalGame, classical_value, perfect_classical_exists
from .numerics import BipartiteState, Tolerance
from .orgame import OrGame, or_game
from .strategies import QuantumStrategy, win_prob

__all__ = [
    "BipartiteState",
    "GameError",
    "NonlocalGame",
    "OrGame",
    "QuantumStrategy",
    "Tolerance",
    "classical_value",
    "or_game",
    "perfect_classical_exists",
    "win_prob",
]
