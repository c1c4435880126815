"""Gate matrices for qubits and qudits.

Sign conventions follow the controlled-phase gate used throughout:
``CZ |x>|y> = exp(-2 pi i x y / d) |x>|y>``. The single-wire ``Z`` carries the
same minus sign (``Z |y> = exp(-2 pi i y / d) |y>``) so that applying ``Z**x``
to the target after reading ``x`` off the control reproduces ``CZ`` exactly.
This is the opposite of the usual clock-matrix convention.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .core import check_dim

GATE_IDS = ("X", "XD", "Z", "ZD", "H", "F", "FD", "CX", "CXD", "CZ", "CZD")

ARITY = {"X": 1, "XD": 1, "Z": 1, "ZD": 1, "H": 1, "F": 1, "FD": 1,
         "CX": 2, "CXD": 2, "CZ": 2, "CZD": 2}

_ADJOINT = {"X": "XD", "Z": "ZD", "F": "FD", "CX": "CXD", "CZ": "CZD", "H": "H"}
_ADJOINT.update({v: k for k, v in list(_ADJOINT.items())})

# Gates whose adjoint is themselves at d = 2.
_QUBIT_SELF_INVERSE = {"X": "X", "XD": "X", "Z": "Z", "ZD": "Z", "H": "H",
                       "CX": "CX", "CXD": "CX", "CZ": "CZ", "CZD": "CZ"}


def adjoint(name: str, d: int | None = None) -> str:
    """Mnemonic of the adjoint gate.

    With ``d == 2`` the self-inverse gates come back under their plain name,
    so ``adjoint("CX", 2) == "CX"``. F is left alone: at d = 2 it equals H but
    keeps its own spelling.
    """
    if name not in _ADJOINT:
        raise ValueError(f"unknown gate {name!r}")
    adj = _ADJOINT[name]
    if d == 2:
        return _QUBIT_SELF_INVERSE.get(adj, adj)
    return adj


def canonical(name: str, d: int) -> str:
    """Collapse ``XD``/``CXD``/... to their plain form when ``d == 2``."""
    if d == 2:
        return _QUBIT_SELF_INVERSE.get(name, name)
    return name


def fourier_pair(d: int) -> tuple[str, str]:
    """(basis change, its inverse): ``H, H`` for qubits, ``F, FD`` otherwise."""
    return ("H", "H") if d == 2 else ("F", "FD")


def _phase(k: np.ndarray, d: int) -> np.ndarray:
    # angle from the reduced integer exponent, one entry at a time
    return np.exp(2j * np.pi * (np.mod(k, d) / d))


def make_x(d: int) -> np.ndarray:
    d = check_dim(d)
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def make_xd(d: int) -> np.ndarray:
    return make_x(d).T.copy()


def make_z(d: int) -> np.ndarray:
    d = check_dim(d)
    return np.diag(_phase(-np.arange(d), d))


def make_zd(d: int) -> np.ndarray:
    return make_z(d).conj()


def make_hadamard(d: int = 2) -> np.ndarray:
    if d != 2:
        raise ValueError("H is only defined for qubits; use F for d > 2")
    return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def make_fourier(d: int) -> np.ndarray:
    """``F |y> = d**-0.5 * sum_z exp(2 pi i z y / d) |z>``."""
    d = check_dim(d)
    zy = np.outer(np.arange(d), np.arange(d))
    return _phase(zy, d) / np.sqrt(d)


def make_fourier_adj(d: int) -> np.ndarray:
    return make_fourier(d).conj().T


def make_cx(d: int) -> np.ndarray:
    """|x>|y> -> |x>|y+x mod d>, control on the first wire."""
    d = check_dim(d)
    u = np.zeros((d * d, d * d), dtype=complex)
    for x in range(d):
        for y in range(d):
            u[x * d + (y + x) % d, x * d + y] = 1
    return u


def make_cxd(d: int) -> np.ndarray:
    return make_cx(d).T.copy()


def make_cz(d: int) -> np.ndarray:
    d = check_dim(d)
    x, y = np.divmod(np.arange(d * d), d)
    return np.diag(_phase(-x * y, d))


def make_czd(d: int) -> np.ndarray:
    return make_cz(d).conj()


_BUILDERS = {"X": make_x, "XD": make_xd, "Z": make_z, "ZD": make_zd, "H": make_hadamard,
             "F": make_fourier, "FD": make_fourier_adj, "CX": make_cx, "CXD": make_cxd,
             "CZ": make_cz, "CZD": make_czd}


@lru_cache(maxsize=None)
def _cached(name: str, d: int) -> np.ndarray:
    u = _BUILDERS[name](d)
    u.setflags(write=False)
    return u


def gate_matrix(name: str, d: int) -> np.ndarray:
    """Matrix for a mnemonic; cached and read-only."""
    if name not in _BUILDERS:
        raise ValueError(f"unknown gate {name!r}; expected one of {', '.join(GATE_IDS)}")
    return _cached(name, check_dim(d))


def gate_power(name: str, d: int, k: int) -> np.ndarray:
    if ARITY.get(name) != 1:
        raise ValueError(f"only single-wire gates can be classically controlled, got {name!r}")
    return np.linalg.matrix_power(gate_matrix(name, d), int(k))
