import numpy as np
import pytest
from scipy.stats import unitary_group

from quantum_core import DensityMatrix, Unitary


@pytest.fixture
def rng():
    return np.random.default_rng(20120415)


def random_density_matrix(rng, n_qubits):
    dim = 2 ** n_qubits
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho))


def random_unitary(rng, n_qubits):
    return Unitary(unitary_group.rvs(2 ** n_qubits, random_state=rng))


def random_ket(rng, dim=2):
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)
