"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from shortpath_lab import cost as cost_mod
from shortpath_lab import spectral
from shortpath_lab.hypercube import spins_from_index

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])


def kron_chain(ops):
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(op, out)  # later factors act on higher bits
    return out


def dense_hb_oracle(cost, eta: float, b: float) -> np.ndarray:
    """Independent dense assembly of H_b from Pauli kron products and evaluate().

    Deliberately avoids the package's table/matvec machinery: the transverse
    field is a sum of single-qubit X kron factors and the diagonal applies
    g_eta pointwise to per-assignment evaluate() calls.
    """
    n = cost.n
    dim = 1 << n
    e_star = min(float(cost.evaluate(spins_from_index(a, n).tolist())) for a in range(dim))
    x_total = np.zeros((dim, dim))
    for i in range(n):
        ops = [np.eye(2)] * n
        ops[i] = PAULI_X
        x_total += kron_chain(ops)
    diag = np.empty(dim)
    for a in range(dim):
        x = float(cost.evaluate(spins_from_index(a, n).tolist())) / abs(e_star)
        diag[a] = b * min(0.0, (max(x, -1.0) + 1.0 - eta) / eta)
    return -x_total / n + np.diag(diag)


@pytest.fixture(scope="session")
def sk_n8():
    return cost_mod.sample_k_spin(8, 2, seed=101)


@pytest.fixture(scope="session")
def three_spin_n10():
    return cost_mod.sample_k_spin(10, 3, seed=202)


@pytest.fixture(scope="session")
def three_spin_n10_setup(three_spin_n10):
    table = cost_mod.enumerate_spectrum(three_spin_n10)
    values = cost_mod.value_table(three_spin_n10)
    return three_spin_n10, table, values


def build_op(values, table, eta, b):
    return spectral.build_hb(values, table.e_star, eta, b, table.optimal_assignments)
