"""Shared types: states, instructions, circuits and the Kronecker embedding.

Basis convention: wire 0 is the top wire of a figure and the most significant
digit, so ``|x>|y>|z>`` on three wires is index ``x*d**2 + y*d + z``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

DEFAULT_TOL = 1e-10
MAX_DIM = 2048

# Declared wire states: an integer k means |k>, "chi" is F|0>, "psi" marks an unknown state.
StateLabel = Union[int, str]


def tolerance() -> float:
    """Comparison tolerance; ``QSWAP_TOLERANCE`` overrides the 1e-10 default."""
    raw = os.environ.get("QSWAP_TOLERANCE")
    if raw is None:
        return DEFAULT_TOL
    tol = float(raw)
    if not tol > 0:
        raise ValueError(f"QSWAP_TOLERANCE must be positive, got {raw!r}")
    return tol


def check_dim(d: int) -> int:
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)):
        raise TypeError(f"dimension must be an integer, got {d!r}")
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    return int(d)


def check_size(d: int, n_wires: int) -> int:
    check_dim(d)
    if n_wires < 1:
        raise ValueError(f"need at least one wire, got {n_wires}")
    total = d**n_wires
    if total > MAX_DIM:
        raise ValueError(f"d**n = {d}**{n_wires} = {total} exceeds the dense limit {MAX_DIM}")
    return total


def digits(index: int, d: int, n_wires: int) -> tuple[int, ...]:
    """Split a composite basis index into per-wire digits, wire 0 first."""
    out = []
    for _ in range(n_wires):
        index, r = divmod(index, d)
        out.append(r)
    if index:
        raise ValueError("index out of range")
    return tuple(reversed(out))


def compose(ds: Sequence[int], d: int) -> int:
    index = 0
    for x in ds:
        if not 0 <= x < d:
            raise ValueError(f"digit {x} out of range for d={d}")
        index = index * d + x
    return index


@dataclass(frozen=True, eq=False)
class StateVector:
    dim: int
    n_wires: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        total = check_size(self.dim, self.n_wires)
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (total,):
            raise ValueError(f"expected {total} amplitudes, got {amps.size}")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1) > tolerance():
            raise ValueError(f"state is not normalized (norm^2 = {norm})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, d: int, ks: Sequence[int]) -> "StateVector":
        amps = np.zeros(d ** len(ks), dtype=complex)
        amps[compose(ks, d)] = 1
        return cls(d, len(ks), amps)

    @classmethod
    def from_label(cls, d: int, label: StateLabel) -> "StateVector":
        return cls(d, 1, label_vector(d, label))

    def tensor(self, other: "StateVector") -> "StateVector":
        if other.dim != self.dim:
            raise ValueError("cannot tensor states of different dimension")
        return StateVector(self.dim, self.n_wires + other.n_wires,
                           np.kron(self.amplitudes, other.amplitudes))

    def probability(self, ks: Sequence[int]) -> float:
        return float(abs(self.amplitudes[compose(ks, self.dim)]) ** 2)


def product_state(states: Iterable[StateVector]) -> StateVector:
    states = list(states)
    out = states[0]
    for s in states[1:]:
        out = out.tensor(s)
    return out


def state_overlap(a: StateVector, b: StateVector) -> complex:
    """Return <a|b>."""
    if (a.dim, a.n_wires) != (b.dim, b.n_wires):
        raise ValueError(
            f"shape mismatch: d={a.dim}, n={a.n_wires} vs d={b.dim}, n={b.n_wires}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    return abs(state_overlap(a, b)) ** 2


def label_vector(d: int, label: StateLabel) -> np.ndarray:
    """Amplitudes of a declared state. ``chi`` is the uniform superposition."""
    if label == "chi":
        return np.full(d, 1 / np.sqrt(d), dtype=complex)
    if isinstance(label, (int, np.integer)) and not isinstance(label, bool) and 0 <= label < d:
        v = np.zeros(d, dtype=complex)
        v[label] = 1
        return v
    raise ValueError(f"not a fixed state for d={d}: {label!r}")


def parse_label(text: str | int) -> StateLabel:
    if isinstance(text, int):
        return text
    if text in ("chi", "psi"):
        return text
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"unknown state label {text!r}") from None


def is_unitary(u: np.ndarray, tol: float | None = None) -> bool:
    tol = tolerance() if tol is None else tol
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def _check_wires(wires: Sequence[int], n_wires: int) -> list[int]:
    wires = [int(w) for w in wires]
    if len(set(wires)) != len(wires):
        raise ValueError(f"duplicate wires {wires}")
    for w in wires:
        if not 0 <= w < n_wires:
            raise ValueError(f"wire {w} out of range for {n_wires} wires")
    return wires


def tensor_embed(u: np.ndarray, wires: Sequence[int], n_wires: int, d: int) -> np.ndarray:
    """Lift ``u`` (acting on ``wires`` in listed order) to the full ``n_wires`` space."""
    wires = _check_wires(wires, n_wires)
    k = len(wires)
    u = np.asarray(u, dtype=complex)
    if u.shape != (d**k, d**k):
        raise ValueError(f"operator of shape {u.shape} does not act on {k} wires of dimension {d}")
    total = check_size(d, n_wires)
    eye = np.eye(total, dtype=complex).reshape((d,) * n_wires + (total,))
    return _apply_tensor(u, eye, wires, d).reshape(total, total)


def apply_operator(amps: np.ndarray, u: np.ndarray, wires: Sequence[int], n_wires: int,
                   d: int) -> np.ndarray:
    """Apply a k-wire operator to a flat amplitude vector without forming the full matrix."""
    wires = _check_wires(wires, n_wires)
    t = np.asarray(amps, dtype=complex).reshape((d,) * n_wires)
    return _apply_tensor(np.asarray(u, dtype=complex), t, wires, d).reshape(-1)


def _apply_tensor(u, t, wires, d):
    k = len(wires)
    ut = u.reshape((d,) * (2 * k))
    out = np.tensordot(ut, t, axes=(list(range(k, 2 * k)), wires))
    return np.moveaxis(out, list(range(k)), wires)


# -- instructions -------------------------------------------------------------

@dataclass(frozen=True)
class Gate:
    name: str
    wires: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))
        if len(set(self.wires)) != len(self.wires):
            raise ValueError(f"gate {self.name} has duplicate wires {self.wires}")

    @property
    def support(self) -> frozenset:
        return frozenset(self.wires)


@dataclass(frozen=True)
class Measure:
    wire: int
    register: str

    @property
    def wires(self) -> tuple[int, ...]:
        return (self.wire,)

    @property
    def support(self) -> frozenset:
        return frozenset([self.wire, ("reg", self.register)])


@dataclass(frozen=True)
class ControlledByRegister:
    """Apply ``gate`` to ``wire`` raised to the value held in ``register``."""

    register: str
    gate: str
    wire: int

    @property
    def wires(self) -> tuple[int, ...]:
        return (self.wire,)

    @property
    def support(self) -> frozenset:
        return frozenset([self.wire, ("reg", self.register)])


Instruction = Union[Gate, Measure, ControlledByRegister]


@dataclass(frozen=True)
class Circuit:
    dim: int
    n_wires: int
    instructions: tuple = ()
    inputs: Mapping[int, StateLabel] = field(default_factory=dict)
    outputs: Mapping[int, StateLabel] = field(default_factory=dict)

    def __post_init__(self):
        check_size(self.dim, self.n_wires)
        object.__setattr__(self, "instructions", tuple(self.instructions))
        written: set[str] = set()
        for pos, ins in enumerate(self.instructions):
            _check_wires(ins.wires, self.n_wires)
            if isinstance(ins, Measure):
                if ins.register in written:
                    raise ValueError(f"register {ins.register!r} written twice (instruction {pos})")
                written.add(ins.register)
            elif isinstance(ins, ControlledByRegister):
                if ins.register not in written:
                    raise ValueError(
                        f"instruction {pos} reads register {ins.register!r} before it is written")
            elif not isinstance(ins, Gate):
                raise TypeError(f"not an instruction: {ins!r}")
        for io in ("inputs", "outputs"):
            decl = {int(w): parse_label(v) for w, v in getattr(self, io).items()}
            for w, v in decl.items():
                _check_wires([w], self.n_wires)
                if v != "psi":
                    label_vector(self.dim, v)
            object.__setattr__(self, io, dict(sorted(decl.items())))

    def __hash__(self):
        return hash((self.dim, self.n_wires, self.instructions,
                     tuple(self.inputs.items()), tuple(self.outputs.items())))

    @property
    def registers(self) -> tuple[str, ...]:
        return tuple(i.register for i in self.instructions if isinstance(i, Measure))

    @property
    def has_measurements(self) -> bool:
        return any(not isinstance(i, Gate) for i in self.instructions)

    def with_instructions(self, instructions) -> "Circuit":
        return replace(self, instructions=tuple(instructions))

    def declare(self, inputs=None, outputs=None) -> "Circuit":
        """Return a copy with the given wires' declared inputs/outputs replaced."""
        new_in = dict(self.inputs)
        new_out = dict(self.outputs)
        new_in.update(inputs or {})
        new_out.update(outputs or {})
        return replace(self, inputs=new_in, outputs=new_out)

    def then(self, other: "Circuit") -> "Circuit":
        if (other.dim, other.n_wires) != (self.dim, self.n_wires):
            raise ValueError("cannot concatenate circuits of different shape")
        return replace(self, instructions=self.instructions + other.instructions,
                       outputs=dict(other.outputs))

    def lift(self, n_wires: int, wire_map: Sequence[int]) -> "Circuit":
        """Relabel wire ``i`` as ``wire_map[i]`` inside a wider circuit."""
        wire_map = _check_wires(wire_map, n_wires)
        if len(wire_map) != self.n_wires:
            raise ValueError("wire map must name every wire")

        def move(ins):
            if isinstance(ins, Gate):
                return Gate(ins.name, tuple(wire_map[w] for w in ins.wires))
            if isinstance(ins, Measure):
                return Measure(wire_map[ins.wire], ins.register)
            return ControlledByRegister(ins.register, ins.gate, wire_map[ins.wire])

        return Circuit(self.dim, n_wires, tuple(move(i) for i in self.instructions),
                       {wire_map[w]: v for w, v in self.inputs.items()},
                       {wire_map[w]: v for w, v in self.outputs.items()})
