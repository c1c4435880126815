"""Named circuit identities, each checked independently of the rule code."""
from __future__ import annotations

import numpy as np

from ..core import Circuit, ControlledByRegister, Gate, Measure, check_dim, tolerance
from ..gates import canonical, fourier_pair, gate_matrix
from ..protocols import build_swap
from ..sim import circuit_unitary
from .checks import CheckReport, check_channel_equiv, check_equiv_on_inputs, check_unitary_equiv


def _c(d, n, *gates, **kw):
    return Circuit(d, n, [Gate(name, wires) for name, wires in gates], **kw)


def fig3(d):
    """cX(0,2) equals four couplings through an untouched middle wire."""
    left = _c(d, 3, ("CX", (0, 2)))
    right = _c(d, 3, ("CX", (0, 1)), ("CX", (1, 2)), (canonical("CXD", d), (0, 1)),
               (canonical("CXD", d), (1, 2)))
    return [("cx(0,2) via ancilla", check_unitary_equiv(left, right))]


def fig4(d):
    """Interchanging control and target with a basis change on the old target."""
    f, fd = fourier_pair(d)
    out = []
    for cx, cz in (("CX", "CZ"), ("CXD", "CZD")):
        cx, cz = canonical(cx, d), canonical(cz, d)
        left = _c(d, 2, (cx, (1, 0)))
        right = _c(d, 2, (fd, (0,)), (cz, (0, 1)), (f, (0,)))
        out.append((f"{cx}(1,0) = {f} {cz}(0,1) {fd}", check_unitary_equiv(left, right)))
    return out


def eq18(d):
    """cX_12 F_2 = F_2 cZ_12."""
    left = _c(d, 2, ("F", (1,)), ("CX", (0, 1)))
    right = _c(d, 2, ("CZ", (0, 1)), ("F", (1,)))
    return [("cX F = F cZ", check_unitary_equiv(left, right))]


def eq19(d):
    """cX^dag_12 = F_2 cZ^dag_12 F^dag_2 = F_2 cZ^dag_21 F^dag_2."""
    left = _c(d, 2, ("CXD", (0, 1)))
    mid = _c(d, 2, ("FD", (1,)), ("CZD", (0, 1)), ("F", (1,)))
    flipped = _c(d, 2, ("FD", (1,)), ("CZD", (1, 0)), ("F", (1,)))
    return [("cXdag = F cZdag Fdag", check_unitary_equiv(left, mid)),
            ("cZdag rerooted", check_unitary_equiv(left, flipped))]


def _state_report(lhs, rhs):
    dev = float(np.max(np.abs(lhs - rhs)))
    return CheckReport("state", dev <= tolerance(), dev)


def eq7(d):
    """X H|0> = H|0> (qubits only)."""
    if d != 2:
        raise ValueError("eq7 is the qubit identity; use eq14 for d > 2")
    h0 = gate_matrix("H", 2)[:, 0]
    return [("X H|0> = H|0>", _state_report(gate_matrix("X", 2) @ h0, h0))]


def eq14(d):
    """Every shift fixes F|0>, so a controlled shift onto F|0> is the identity."""
    chi = gate_matrix("F", d)[:, 0]
    out = []
    for k in range(d):
        xk = np.linalg.matrix_power(gate_matrix("X", d), k)
        out.append((f"X^{k} F|0> = F|0>", _state_report(xk @ chi, chi)))
    # circuit form: a shift controlled onto a wire prepared in F|0> does nothing
    with_gate = _c(d, 2, ("F", (1,)), ("CX", (0, 1)), inputs={1: 0})
    without = _c(d, 2, ("F", (1,)), inputs={1: 0})
    out.append(("cX (1 x F)|psi>|0> = |psi> F|0>", check_equiv_on_inputs(with_gate, without)))
    return out


def fig9_defer(d):
    """Measuring the control before or after a controlled gate gives the same channel."""
    out = []
    for u, cu in (("X", "CX"), ("Z", "CZ"), ("XD", "CXD"), ("ZD", "CZD")):
        before = Circuit(d, 2, [Measure(0, "r"), ControlledByRegister("r", u, 1)])
        after = Circuit(d, 2, [Gate(cu, (0, 1)), Measure(0, "r")])
        out.append((f"measure/c{u}", check_channel_equiv(before, after)))
    return out


def cz_symmetry(d):
    return [(name, check_unitary_equiv(_c(d, 2, (name, (0, 1))), _c(d, 2, (name, (1, 0)))))
            for name in ("CZ", "CZD")]


def swap(d):
    c = build_swap(d)
    perm = np.zeros((d * d, d * d), dtype=complex)
    for x in range(d):
        for y in range(d):
            perm[y * d + x, x * d + y] = 1
    dev = float(np.max(np.abs(circuit_unitary(c) - perm)))
    return [("swap permutation", CheckReport("unitary", dev <= tolerance(), dev))]


def bbc(d):
    from .derivation import verify_bbc
    return [("bbc vs half-swap", verify_bbc(d))]


IDENTITIES = {"fig3": fig3, "fig4": fig4, "eq18": eq18, "eq19": eq19, "eq7": eq7, "eq14": eq14,
              "fig9-defer": fig9_defer, "cz-symmetry": cz_symmetry, "swap": swap, "bbc": bbc}


def verify_identity(name: str, d: int) -> list[tuple[str, CheckReport]]:
    if name not in IDENTITIES:
        raise ValueError(f"unknown identity {name!r}; expected one of {', '.join(IDENTITIES)}")
    return IDENTITIES[name](check_dim(d))
