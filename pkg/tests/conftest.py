import numpy as np
import pytest

import qchanrate as qc

# Reference parameter set used across the suite: strongly asymmetric
# good/bad flip probabilities, moderately sticky state chain.
GE_TRANSITION = np.array([[0.9, 0.1], [0.2, 0.8]])
P_GOOD, P_BAD = 0.05, 0.95


def binary_entropy(p: float) -> float:
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


@pytest.fixture(scope="session")
def uniform():
    return qc.uniform_input()


@pytest.fixture(scope="session")
def classical_ge():
    return qc.build_gilbert_elliott(P_GOOD, P_BAD, GE_TRANSITION)


@pytest.fixture(scope="session")
def quantum_ge():
    """Compiled quantum Gilbert-Elliott channel at the reference setup."""
    return qc.compile_transfer_operators(
        qc.build_quantum_gilbert_elliott(P_GOOD, P_BAD, alpha=1.0)
    )
