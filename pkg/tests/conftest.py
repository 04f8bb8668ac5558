import numpy as np
import pytest

from embezzlab.games import ClassicalGame, Gate, PovmStrategy, QuantumGame
from embezzlab.games.builtin import PX, PZ

HAD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
I2 = np.eye(2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _proj(obs):
    return [(np.eye(2) + obs) / 2, (np.eye(2) - obs) / 2]


def two_round_game() -> ClassicalGame:
    """CHSH twice; round-2 questions are correlated with round-1 answers.

    After a1 ^ b1 == 0 the referee only asks (0, 0) or (1, 1), otherwise the
    off-diagonal pairs. The predicate requires the CHSH condition both rounds.
    """

    def pi(i, hist):
        if i == 0:
            return np.full((2, 2), 0.25)
        _, _, a, b = hist
        return np.eye(2) / 2 if a[0] == b[0] else (1 - np.eye(2)) / 2

    def predicate(s, t, a, b):
        return all((a[i] ^ b[i]) == (s[i] & t[i]) for i in range(2))

    return ClassicalGame((0, 1), (0, 1), (0, 1), (0, 1), predicate, pi, rounds=2, name="chsh2")


def two_round_strategy(adaptive: bool = False) -> PovmStrategy:
    """Two EPR pairs; round i measures pair i with the optimal CHSH observables.

    With ``adaptive`` Alice flips her round-2 observable after answering 1,
    which makes her operators genuinely history dependent.
    """
    alice_obs = {0: PZ, 1: PX}
    bob_obs = {0: (PZ + PX) / np.sqrt(2), 1: (PZ - PX) / np.sqrt(2)}
    alice, bob = {}, {}
    for s1 in (0, 1):
        alice[((s1,), ())] = [np.kron(p, I2) for p in _proj(alice_obs[s1])]
        bob[((s1,), ())] = [np.kron(p, I2) for p in _proj(bob_obs[s1])]
        for s2 in (0, 1):
            for a1 in (0, 1):
                obs = alice_obs[s2 ^ a1] if adaptive else alice_obs[s2]
                alice[((s1, s2), (a1,))] = [np.kron(I2, p) for p in _proj(obs)]
                bob[((s1, s2), (a1,))] = [np.kron(I2, p) for p in _proj(bob_obs[s2])]
    state = np.eye(4, dtype=complex).reshape(-1) / 2
    return PovmStrategy(state, 2, alice, bob)


def toy_quantum_game() -> QuantumGame:
    """Two rounds on d=2 prover registers (one com, one private qubit each).

    Qubits: 0 decision, 1 com_X, 2 com_Y. The verifier puts both com qubits
    in superposition, mixes them after round one, and accepts on parity.
    """
    hh = [Gate((1,), matrix=HAD), Gate((2,), matrix=HAD)]
    mix = Gate.from_function((0, 1, 2), lambda x: x ^ (4 if (x & 3) == 3 else 0))
    parity = Gate.from_function((0, 1, 2), lambda x: x ^ (4 if ((x >> 1) ^ x) & 1 else 0))
    return QuantumGame(1, 1, 1, [hh, [mix] + hh, [parity]], name="toy2")


@pytest.fixture
def chsh2():
    return two_round_game(), two_round_strategy()
