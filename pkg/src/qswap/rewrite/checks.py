"""Equivalence checkers that certify rewrite steps."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..core import Circuit, Measure, StateLabel, label_vector, tolerance
from ..sim import circuit_unitary, kraus_map


@dataclass(frozen=True)
class CheckReport:
    checker: str
    passed: bool
    max_deviation: float
    detail: str = ""
    frobenius: float | None = None

    def as_dict(self) -> dict:
        out = {"checker": self.checker, "passed": self.passed,
               "max_deviation": self.max_deviation, "detail": self.detail}
        if self.frobenius is not None:
            out["frobenius"] = self.frobenius
        return out


class StructureError(ValueError):
    """Circuits cannot be compared at all (shape, registers, measurements)."""


def _same_shape(c1: Circuit, c2: Circuit):
    if (c1.dim, c1.n_wires) != (c2.dim, c2.n_wires):
        raise StructureError(f"shape mismatch: d={c1.dim}, n={c1.n_wires} "
                             f"vs d={c2.dim}, n={c2.n_wires}")


def check_unitary_equiv(c1: Circuit, c2: Circuit, up_to_global_phase: bool = False,
                        tol: float | None = None) -> CheckReport:
    """Entrywise comparison of the two circuit unitaries.

    With ``up_to_global_phase`` both matrices are first divided by the phase of
    their largest-magnitude entry (taken at the same position in both).
    """
    tol = tolerance() if tol is None else tol
    _same_shape(c1, c2)
    if c1.has_measurements or c2.has_measurements:
        raise StructureError("check_unitary_equiv needs measurement-free circuits")
    u1, u2 = circuit_unitary(c1), circuit_unitary(c2)
    if up_to_global_phase:
        k = np.unravel_index(np.argmax(np.abs(u1)), u1.shape)
        if abs(u2[k]) > tol:
            u1 = u1 * (abs(u1[k]) / u1[k])
            u2 = u2 * (abs(u2[k]) / u2[k])
    diff = np.abs(u1 - u2)
    dev = float(diff.max())
    return CheckReport("unitary", dev <= tol, dev, frobenius=float(np.linalg.norm(u1 - u2)))


def check_channel_equiv(c1: Circuit, c2: Circuit, tol: float | None = None) -> CheckReport:
    """Per-outcome Kraus operators must agree entrywise; no outcome relabeling."""
    tol = tolerance() if tol is None else tol
    _same_shape(c1, c2)
    if set(c1.registers) != set(c2.registers):
        return CheckReport("channel", False, float("inf"),
                           f"register sets differ: {sorted(c1.registers)} vs {sorted(c2.registers)}")
    k1, k2 = kraus_map(c1), kraus_map(c2)
    order = [k2.registers.index(r) for r in k1.registers]
    dev = 0.0
    for m, op in k1.operators.items():
        m2 = [0] * len(m)
        for pos, v in zip(order, m):
            m2[pos] = v
        dev = max(dev, float(np.max(np.abs(op - k2.operators[tuple(m2)]))))
    return CheckReport("channel", dev <= tol, dev)


def _kron_all(factors):
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def reduced_map(c: Circuit, constraint: Mapping[int, StateLabel] | None = None):
    """Map from the free input wires to the free output wires of ``c``.

    Fixed declared inputs (or ``constraint``, which wins) are prepared, the
    circuit is run, and each fixed declared output is projected out. Returns
    ``(free_in, free_out, W, residual)`` where ``residual`` measures how far
    the output is from actually factoring as the declared states.
    """
    d, n = c.dim, c.n_wires
    inputs = dict(c.inputs)
    inputs.update(constraint or {})
    fixed_in = {w: v for w, v in inputs.items() if v != "psi"}
    fixed_out = {w: v for w, v in c.outputs.items() if v != "psi"}
    eye = np.eye(d, dtype=complex)
    prep = _kron_all(label_vector(d, fixed_in[w])[:, None] if w in fixed_in else eye
                     for w in range(n))
    out = circuit_unitary(c) @ prep
    bra = _kron_all(label_vector(d, fixed_out[w]).conj()[None, :] if w in fixed_out else eye
                    for w in range(n))
    w_map = bra @ out
    residual = float(np.max(np.abs(out - bra.conj().T @ w_map))) if out.size else 0.0
    free_in = tuple(w for w in range(n) if w not in fixed_in)
    free_out = tuple(w for w in range(n) if w not in fixed_out)
    return free_in, free_out, w_map, residual


def check_equiv_on_inputs(c1: Circuit, c2: Circuit,
                          constraint: Mapping[int, StateLabel] | None = None,
                          tol: float | None = None) -> CheckReport:
    """Compare two circuits on a restricted set of inputs.

    Each circuit's declared inputs fix some wires (``constraint`` overrides
    them for both). The remaining wires run over the computational basis and
    the output vectors are compared entrywise. Wires with a fixed declared
    output are first checked to really end in that state and then dropped, so
    circuits that park different junk on those wires can still be compared.
    """
    tol = tolerance() if tol is None else tol
    _same_shape(c1, c2)
    if c1.has_measurements or c2.has_measurements:
        raise StructureError("check_equiv_on_inputs needs measurement-free circuits")
    for w in (constraint or {}):
        if not 0 <= w < c1.n_wires:
            raise StructureError(f"constraint wire {w} out of range")
    in1, out1, w1, r1 = reduced_map(c1, constraint)
    in2, out2, w2, r2 = reduced_map(c2, constraint)
    if in1 != in2 or out1 != out2:
        return CheckReport("on_inputs", False, float("inf"),
                           f"free wires differ: in {in1} vs {in2}, out {out1} vs {out2}")
    dev = max(r1, r2, float(np.max(np.abs(w1 - w2))))
    detail = ""
    if max(r1, r2) > tol:
        detail = f"declared outputs violated (residual {max(r1, r2):.3g})"
    return CheckReport("on_inputs", dev <= tol, dev, detail)


def check_output_declarations(c: Circuit, tol: float | None = None) -> CheckReport:
    """Do the fixed declared outputs actually hold for the declared inputs?"""
    tol = tolerance() if tol is None else tol
    *_, residual = reduced_map(c)
    return CheckReport("declared_outputs", residual <= tol, residual)


def append_measurements(c: Circuit, pairs) -> Circuit:
    """``c`` followed by ideal measurements ``(wire, register)``."""
    return c.with_instructions(c.instructions + tuple(Measure(w, r) for w, r in pairs))
