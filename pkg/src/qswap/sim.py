"""State-vector execution and exact semantics (unitaries, Kraus maps).

Randomness comes from ``numpy.random.Generator`` (PCG64, 64-bit seed). Any
measurement can instead be forced to a chosen outcome, which is how the tests
walk every branch deterministically.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import (Circuit, ControlledByRegister, Gate, Measure, StateVector, apply_operator,
                   tensor_embed, tolerance)
from .gates import ARITY, gate_matrix, gate_power

# forced branches below this probability are treated as an internal error
MIN_BRANCH_PROBABILITY = 1e-24


class MeasurementError(RuntimeError):
    pass


class UnsetRegisterError(RuntimeError):
    pass


def make_rng(seed: int | None = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class OutcomeRecord:
    entries: tuple = ()  # (register, value, probability) in measurement order

    @property
    def values(self) -> tuple[int, ...]:
        return tuple(v for _, v, _ in self.entries)

    @property
    def probability(self) -> float:
        return float(np.prod([p for _, _, p in self.entries])) if self.entries else 1.0

    def as_dict(self) -> dict[str, int]:
        return {r: v for r, v, _ in self.entries}


def _check_gate(ins: Gate, d: int):
    if ins.name not in ARITY:
        raise ValueError(f"unknown gate {ins.name!r}")
    if ARITY[ins.name] != len(ins.wires):
        raise ValueError(f"{ins.name} takes {ARITY[ins.name]} wires, got {len(ins.wires)}")
    return gate_matrix(ins.name, d)


def apply_instruction(state: StateVector, ins, registers: Mapping[str, int]) -> StateVector:
    """Apply a gate or a register-controlled gate. Measurements go through :func:`measure_wire`."""
    d, n = state.dim, state.n_wires
    if isinstance(ins, Gate):
        u = _check_gate(ins, d)
        return StateVector(d, n, apply_operator(state.amplitudes, u, ins.wires, n, d))
    if isinstance(ins, ControlledByRegister):
        if ins.register not in registers:
            raise UnsetRegisterError(f"register {ins.register!r} has not been written")
        u = gate_power(ins.gate, d, registers[ins.register])
        return StateVector(d, n, apply_operator(state.amplitudes, u, ins.wires, n, d))
    if isinstance(ins, Measure):
        raise TypeError("use measure_wire for Measure instructions")
    raise TypeError(f"not an instruction: {ins!r}")


def outcome_probabilities(state: StateVector, wire: int) -> np.ndarray:
    d, n = state.dim, state.n_wires
    if not 0 <= wire < n:
        raise ValueError(f"wire {wire} out of range for {n} wires")
    t = np.abs(state.amplitudes.reshape((d,) * n)) ** 2
    return np.moveaxis(t, wire, 0).reshape(d, -1).sum(axis=1)


def measure_wire(state: StateVector, wire: int, rng: np.random.Generator | None = None,
                 outcome: int | None = None) -> tuple[int, StateVector, float]:
    """Computational-basis measurement of one wire.

    Samples with ``rng`` unless ``outcome`` forces the branch. Returns the
    outcome, the renormalized post-measurement state and the branch probability.
    """
    d, n = state.dim, state.n_wires
    probs = outcome_probabilities(state, wire)
    if outcome is None:
        rng = make_rng() if rng is None else rng
        outcome = int(rng.choice(d, p=probs / probs.sum()))
    elif not 0 <= outcome < d:
        raise ValueError(f"outcome {outcome} out of range for d={d}")
    p = float(probs[outcome])
    if p < MIN_BRANCH_PROBABILITY:
        raise MeasurementError(f"branch {outcome} on wire {wire} has negligible probability {p:g}")
    t = state.amplitudes.reshape((d,) * n).copy()
    keep = [slice(None)] * n
    for m in range(d):
        if m != outcome:
            keep[wire] = m
            t[tuple(keep)] = 0
    return outcome, StateVector(d, n, t.reshape(-1) / np.sqrt(p)), p


def run_circuit(c: Circuit, state: StateVector, rng: np.random.Generator | None = None,
                forced: Sequence[int] | None = None) -> tuple[StateVector, OutcomeRecord]:
    """Run ``c`` on ``state``. ``forced`` fixes measurement outcomes in order."""
    if (state.dim, state.n_wires) != (c.dim, c.n_wires):
        raise ValueError(f"input has d={state.dim}, n={state.n_wires}; "
                         f"circuit expects d={c.dim}, n={c.n_wires}")
    registers: dict[str, int] = {}
    entries = []
    forced = list(forced) if forced is not None else None
    for ins in c.instructions:
        if isinstance(ins, Measure):
            if ins.register in registers:
                raise ValueError(f"register {ins.register!r} written twice")
            want = None
            if forced is not None:
                if len(entries) >= len(forced):
                    raise ValueError("not enough forced outcomes for the circuit's measurements")
                want = forced[len(entries)]
            m, state, p = measure_wire(state, ins.wire, rng, want)
            registers[ins.register] = m
            entries.append((ins.register, m, p))
        else:
            state = apply_instruction(state, ins, registers)
    return state, OutcomeRecord(tuple(entries))


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Product of the embedded gate matrices; later instructions multiply on the left."""
    if c.has_measurements:
        raise ValueError("circuit_unitary needs a measurement-free circuit")
    total = c.dim**c.n_wires
    u = np.eye(total, dtype=complex)
    for ins in c.instructions:
        g = _check_gate(ins, c.dim)
        u = tensor_embed(g, ins.wires, c.n_wires, c.dim) @ u
    return u


@dataclass(frozen=True)
class KrausMap:
    """Unnormalized Kraus operators keyed by the tuple of measured values.

    ``registers`` names the tuple positions (measurement order). For an input
    ``psi`` the branch probability is ``||K_m psi||**2``.
    """

    dim_in: int
    dim_out: int
    registers: tuple[str, ...]
    operators: Mapping[tuple, np.ndarray] = field(repr=False)

    def completeness_error(self) -> float:
        acc = sum(k.conj().T @ k for k in self.operators.values())
        return float(np.max(np.abs(acc - np.eye(self.dim_in))))

    def probabilities(self, psi: np.ndarray) -> dict[tuple, float]:
        psi = np.asarray(psi, dtype=complex)
        return {m: float(np.linalg.norm(k @ psi) ** 2) for m, k in self.operators.items()}


def _projector(wire: int, m: int, n: int, d: int) -> np.ndarray:
    p = np.zeros((d, d), dtype=complex)
    p[m, m] = 1
    return tensor_embed(p, [wire], n, d)


def kraus_map(c: Circuit) -> KrausMap:
    """Enumerate every outcome string and multiply out its Kraus operator."""
    d, n = c.dim, c.n_wires
    total = d**n
    regs = c.registers
    embedded = []
    for ins in c.instructions:
        if isinstance(ins, Gate):
            embedded.append(tensor_embed(_check_gate(ins, d), ins.wires, n, d))
        else:
            embedded.append(None)
    ops = {}
    for outcome in itertools.product(range(d), repeat=len(regs)):
        values = dict(zip(regs, outcome))
        k = np.eye(total, dtype=complex)
        for ins, u in zip(c.instructions, embedded):
            if u is not None:
                k = u @ k
            elif isinstance(ins, Measure):
                k = _projector(ins.wire, values[ins.register], n, d) @ k
            else:
                g = gate_power(ins.gate, d, values[ins.register])
                k = tensor_embed(g, ins.wires, n, d) @ k
        ops[outcome] = k
    km = KrausMap(total, total, regs, ops)
    err = km.completeness_error()
    if err > tolerance():
        raise AssertionError(f"Kraus completeness violated by {err:g}")
    return km


def enumerate_branches(c: Circuit, state: StateVector, min_probability: float = 0.0):
    """Yield ``(final_state, record)`` for every outcome branch with nonzero weight."""
    n_meas = len(c.registers)
    for outcome in itertools.product(range(c.dim), repeat=n_meas):
        try:
            final, rec = run_circuit(c, state, forced=outcome)
        except MeasurementError:
            continue
        if rec.probability > min_probability:
            yield final, rec
