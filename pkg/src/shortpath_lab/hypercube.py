"""Vectorized primitives on the n-dimensional hypercube.

Basis convention used throughout the package: computational basis index
``a`` (an integer in [0, 2^n)) encodes the spin assignment with
z_i = +1 when bit i of ``a`` is 0 and z_i = -1 when bit i is 1, so that
z_i = (-1)^{a_i}.
"""

from __future__ import annotations

import numpy as np


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform.

    Maps a coefficient vector w indexed by subset masks S to the table
    out[a] = sum_S w[S] * (-1)^{popcount(S & a)}, i.e. evaluates a polynomial
    in +-1 spins on every corner of the hypercube in O(n 2^n).
    """
    out = np.array(values, dtype=np.float64, copy=True)
    size = out.size
    if size == 0 or size & (size - 1):
        raise ValueError("fwht input length must be a positive power of two")
    h = 1
    while h < size:
        view = out.reshape(-1, 2, h)
        top = view[:, 0, :] + view[:, 1, :]
        bot = view[:, 0, :] - view[:, 1, :]
        view[:, 0, :] = top
        view[:, 1, :] = bot
        h *= 2
    return out


def neighbor_sum(values: np.ndarray, n: int) -> np.ndarray:
    """sum over the n Hamming neighbors: out[a] = sum_i values[a ^ (1 << i)].

    Works for float and integer dtypes alike; one strided pass per bit.
    """
    if values.shape != (1 << n,):
        raise ValueError("values must have length 2^n")
    out = np.zeros_like(values)
    for i in range(n):
        v = values.reshape(-1, 2, 1 << i)
        o = out.reshape(-1, 2, 1 << i)
        o[:, 0, :] += v[:, 1, :]
        o[:, 1, :] += v[:, 0, :]
    return out


def neighbor_mean(values: np.ndarray, n: int) -> np.ndarray:
    """Average of values over the n single-bit-flip neighbors of each vertex."""
    return neighbor_sum(np.asarray(values, dtype=np.float64), n) / n


def flip_bit(indices: np.ndarray | int, i: int):
    return np.bitwise_xor(indices, 1 << i)


def spins_from_index(a: int, n: int) -> np.ndarray:
    """Decode a basis index into the +-1 spin vector (z_0, ..., z_{n-1})."""
    bits = (a >> np.arange(n)) & 1
    return 1 - 2 * bits


def index_from_spins(z) -> int:
    """Inverse of spins_from_index; accepts any +-1 sequence."""
    a = 0
    for i, zi in enumerate(z):
        if zi == -1:
            a |= 1 << i
        elif zi != 1:
            raise ValueError(f"spin entries must be +1 or -1, got {zi!r}")
    return a


def local_patterns(indices: np.ndarray, variables: tuple[int, ...]) -> np.ndarray:
    """Pack the bits of the given variables into a local pattern index.

    Bit j of the result is bit variables[j] of the basis index, matching the
    clause convention in :mod:`shortpath_lab.cost`.
    """
    out = np.zeros_like(indices)
    for j, v in enumerate(variables):
        out |= ((indices >> v) & 1) << j
    return out
