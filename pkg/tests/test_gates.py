import cmath
import math

import numpy as np
import pytest

from qswap.core import is_unitary, tensor_embed
from qswap.gates import (GATE_IDS, adjoint, gate_matrix, gate_power, make_cx, make_cxd,
                         make_cz, make_czd, make_fourier, make_fourier_adj, make_hadamard,
                         make_x, make_z)

import oracle

DIMS = [2, 3, 4, 5, 7]


def col(u, k):
    return u[:, k]


def test_cx_qubit_example():
    # |1>|0> -> |1>|1>
    assert col(make_cx(2), 2)[3] == 1


def test_cx_qutrit_wraps():
    # |1>|2> -> |1>|0>
    assert col(make_cx(3), 1 * 3 + 2)[1 * 3 + 0] == 1


def test_cx_control_zero_is_identity():
    u = make_cx(2)
    for y in range(2):
        assert u[y, y] == 1


def test_cxd_examples():
    assert col(make_cxd(3), 3)[5] == 1  # |1>|0> -> |1>|2>
    np.testing.assert_array_equal(make_cxd(2), make_cx(2))


@pytest.mark.parametrize("d", DIMS)
def test_cxd_inverts_cx(d):
    np.testing.assert_array_equal(make_cxd(d) @ make_cx(d), np.eye(d * d))


def test_hadamard():
    h = make_hadamard()
    np.testing.assert_allclose(h[:, 0], [1 / math.sqrt(2)] * 2)
    np.testing.assert_allclose(h @ h, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(h, (make_x(2) + make_z(2)) / math.sqrt(2), atol=1e-15)
    with pytest.raises(ValueError):
        make_hadamard(3)


def test_fourier_qubit_is_hadamard():
    np.testing.assert_allclose(make_fourier(2), make_hadamard(), atol=1e-15)


@pytest.mark.parametrize("d", DIMS)
def test_fourier_matches_formula(d):
    f = make_fourier(d)
    for y in range(d):
        for z in range(d):
            assert abs(f[z, y] - cmath.exp(2j * math.pi * z * y / d) / math.sqrt(d)) < 1e-14
    np.testing.assert_allclose(make_fourier_adj(d) @ f, np.eye(d), atol=1e-14)
    np.testing.assert_allclose(f[:, 0], make_fourier_adj(d)[:, 0], atol=1e-15)
    np.testing.assert_allclose(f[:, 0], oracle.chi(d), atol=1e-15)


def test_cz_examples():
    assert abs(make_cz(3)[5, 5] - cmath.exp(-4j * math.pi / 3)) < 1e-15
    np.testing.assert_allclose(make_cz(2), np.diag([1, 1, 1, -1]), atol=1e-15)


@pytest.mark.parametrize("d", DIMS)
def test_cz_symmetric_in_its_wires(d):
    for u in (make_cz(d), make_czd(d)):
        np.testing.assert_array_equal(tensor_embed(u, [0, 1], 2, d), tensor_embed(u, [1, 0], 2, d))


def test_pauli_qubit():
    np.testing.assert_array_equal(make_x(2), [[0, 1], [1, 0]])
    np.testing.assert_allclose(make_z(2), np.diag([1, -1]), atol=1e-15)
    assert make_x(3)[0, 2] == 1  # X|2> = |0>


@pytest.mark.parametrize("d", DIMS)
@pytest.mark.parametrize("shift,controlled", [("X", "CX"), ("XD", "CXD"), ("Z", "CZ"), ("ZD", "CZD")])
def test_classical_control_rebuilds_controlled_gate(d, shift, controlled):
    # |x>|y> -> |x> (shift^x |y>), entry by entry over all d^2 inputs
    built = np.zeros((d * d, d * d), dtype=complex)
    for x in range(d):
        block = gate_power(shift, d, x)
        built[x * d:(x + 1) * d, x * d:(x + 1) * d] = block
    np.testing.assert_allclose(built, gate_matrix(controlled, d), atol=1e-14)
    np.testing.assert_allclose(oracle.unitary([(controlled, (0, 1))], d, 2),
                               gate_matrix(controlled, d), atol=1e-14)


@pytest.mark.parametrize("d,name", [(d, g) for g in GATE_IDS for d in DIMS
                                     if g != "H" or d == 2])
def test_unitary_and_adjoint_pairing(d, name):
    u = gate_matrix(name, d)
    assert is_unitary(u)
    np.testing.assert_allclose(gate_matrix(adjoint(name), d), u.conj().T, atol=1e-14)
    assert adjoint(adjoint(name)) == name


def test_qubit_adjoint_collapse():
    assert adjoint("X", 2) == "X" and adjoint("H", 2) == "H" and adjoint("CZ", 2) == "CZ"
    assert adjoint("CX", 3) == "CXD"


def test_gate_matrix_read_only():
    with pytest.raises(ValueError):
        gate_matrix("X", 2)[0, 0] = 5
    with pytest.raises(ValueError, match="unknown gate"):
        gate_matrix("Y", 2)


@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_fourier_conjugation_identities(d):
    f1 = tensor_embed(make_fourier(d), [1], 2, d)
    fd1 = tensor_embed(make_fourier_adj(d), [1], 2, d)
    cx, cz = make_cx(d), make_cz(d)
    np.testing.assert_allclose(cx @ f1, f1 @ cz, atol=1e-12)
    np.testing.assert_allclose(make_cxd(d), f1 @ make_czd(d) @ fd1, atol=1e-12)
    np.testing.assert_allclose(make_cxd(d), f1 @ tensor_embed(make_czd(d), [1, 0], 2, d) @ fd1,
                               atol=1e-12)


def test_shift_invariance_qubit():
    h0 = make_hadamard()[:, 0]
    np.testing.assert_array_equal(make_x(2) @ h0, h0)


@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_shift_invariance_qudit(d):
    chi = make_fourier(d)[:, 0]
    for k in range(d):
        np.testing.assert_allclose(gate_power("X", d, k) @ chi, chi, atol=1e-15)
