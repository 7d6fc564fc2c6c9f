"""Named gate and state constants used by programs, scenarios and the CLI."""

from __future__ import annotations

import numpy as np

_S2 = 1.0 / np.sqrt(2.0)

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H = np.array([[_S2, _S2], [_S2, -_S2]], dtype=np.complex128)
CNOT = np.array([[1, 0, 0, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1],
                 [0, 0, 1, 0]], dtype=np.complex128)
SWAP = np.array([[1, 0, 0, 0],
                 [0, 0, 1, 0],
                 [0, 1, 0, 0],
                 [0, 0, 0, 1]], dtype=np.complex128)  # U_sigma |a,b> = |b,a>

BELL = np.array([_S2, 0, 0, _S2], dtype=np.complex128)  # (|00> + |11>)/sqrt(2)


def ket(dim: int, x: int) -> np.ndarray:
    v = np.zeros(dim, dtype=np.complex128)
    v[x] = 1.0
    return v


def butter(v: np.ndarray) -> np.ndarray:
    """|v><v|."""
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    return np.outer(v, v.conj())


def proj(dim: int, x: int) -> np.ndarray:
    """Computational basis projector |x><x|."""
    return butter(ket(dim, x))


GATES: dict[str, np.ndarray] = {
    "I2": I2,
    "X": X,
    "Z": Z,
    "H": H,
    "CNOT": CNOT,
    "SWAP": SWAP,
}

STATES: dict[str, np.ndarray] = {
    "bell": BELL,
    "ket0": ket(2, 0),
    "ket1": ket(2, 1),
    "plus": np.array([_S2, _S2], dtype=np.complex128),
    "minus": np.array([_S2, -_S2], dtype=np.complex128),
}
