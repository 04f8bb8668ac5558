from .builtin import builtin, chsh_circuit, chsh_game, chsh_strategy, magic_square_game, magic_square_strategy
from .circuits import CircuitStrategy, Gate, QuantumGame, final_state, run_quantum_game
from .embed import embed_classical, embedded_verifier
from .model import (
    ClassicalGame,
    GameError,
    PovmStrategy,
    classical_value,
    round_distributions,
    strategy_value,
    strategy_value_product,
)

__all__ = [
    "CircuitStrategy",
    "ClassicalGame",
    "GameError",
    "Gate",
    "PovmStrategy",
    "QuantumGame",
    "builtin",
    "chsh_circuit",
    "chsh_game",
    "chsh_strategy",
    "classical_value",
    "embed_classical",
    "embedded_verifier",
    "final_state",
    "magic_square_game",
    "magic_square_strategy",
    "round_distributions",
    "run_quantum_game",
    "strategy_value",
    "strategy_value_product",
]
