"""Named circuits: swap, half-swap, EPR preparation, BBC and teleportation.

Wires of the three-wire circuits: 0 = source (Alice), 1 = ancilla (Alice),
2 = destination (Bob).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (Circuit, ControlledByRegister, Gate, Measure, StateVector, check_dim,
                   fidelity, label_vector, tolerance)
from .gates import canonical, fourier_pair
from .sim import OutcomeRecord, make_rng, run_circuit

SOURCE, ANCILLA, DEST = 0, 1, 2
PROTOCOLS = ("swap", "half-swap", "epr", "bbc", "teleport")


def build_swap(d: int) -> Circuit:
    """Exchange two wires.

    For qubits this is the usual three CX gates. For d > 2 three shears
    CX(0,1) CXD(1,0) CX(0,1) give |x,y> -> |-y,x>; no three-gate product of
    CX/CXD can do better since each shear has determinant 1 over Z_d and the
    swap has determinant -1. Two F gates on wire 0 (F^2 |y> = |-y>) finish it.
    """
    d = check_dim(d)
    gates = [Gate("CX", (0, 1)), Gate(canonical("CXD", d), (1, 0)), Gate("CX", (0, 1))]
    if d > 2:
        gates += [Gate("F", (0,)), Gate("F", (0,))]
    return Circuit(d, 2, gates)


def build_half_swap(d: int) -> Circuit:
    """Swap specialized to a destination starting in |0>: |x>|0> -> |0>|x>."""
    d = check_dim(d)
    return Circuit(d, 2, [Gate("CX", (0, 1)), Gate(canonical("CXD", d), (1, 0))],
                   inputs={0: "psi", 1: 0}, outputs={0: 0, 1: "psi"})


def build_epr(d: int) -> tuple[Circuit, StateVector]:
    """Entangler on (ancilla, destination) from |0,0>, and the state it makes."""
    d = check_dim(d)
    f, _ = fourier_pair(d)
    c = Circuit(d, 2, [Gate(f, (0,)), Gate("CX", (0, 1))], inputs={0: 0, 1: 0})
    amps = np.zeros(d * d, dtype=complex)
    amps[[z * d + z for z in range(d)]] = 1 / np.sqrt(d)
    return c, StateVector(d, 2, amps)


def _alice_rotation(d: int):
    _, fd = fourier_pair(d)
    return [Gate(canonical("CXD", d), (SOURCE, ANCILLA)), Gate(fd, (SOURCE,))]


def build_bbc(d: int) -> Circuit:
    """Measurement-free reversible teleportation circuit."""
    d = check_dim(d)
    f, _ = fourier_pair(d)
    gates = [Gate(f, (ANCILLA,)), Gate("CX", (ANCILLA, DEST)), *_alice_rotation(d),
             Gate(canonical("CXD", d), (ANCILLA, DEST)), Gate(canonical("CZD", d), (SOURCE, DEST))]
    return Circuit(d, 3, gates, inputs={SOURCE: "psi", ANCILLA: 0, DEST: 0},
                   outputs={SOURCE: "chi", ANCILLA: "chi", DEST: "psi"})


def build_teleport(d: int) -> Circuit:
    """Teleportation with Alice's measurements and Bob's classical corrections.

    The instruction order is the one the derivation ends on: each measurement
    sits directly in front of the correction it controls.
    """
    d = check_dim(d)
    f, _ = fourier_pair(d)
    ins = [Gate(f, (ANCILLA,)), Gate("CX", (ANCILLA, DEST)), *_alice_rotation(d),
           Measure(ANCILLA, "a_m"), ControlledByRegister("a_m", canonical("XD", d), DEST),
           Measure(SOURCE, "a_t"), ControlledByRegister("a_t", canonical("ZD", d), DEST)]
    return Circuit(d, 3, ins, inputs={SOURCE: "psi", ANCILLA: 0, DEST: 0},
                   outputs={DEST: "psi"})


def build(name: str, d: int) -> Circuit:
    if name == "epr":
        return build_epr(d)[0]
    builders = {"swap": build_swap, "half-swap": build_half_swap, "bbc": build_bbc,
                "teleport": build_teleport}
    if name not in builders:
        raise ValueError(f"unknown protocol {name!r}; expected one of {', '.join(PROTOCOLS)}")
    return builders[name](d)


def haar_state(d: int, rng: np.random.Generator, n_wires: int = 1) -> StateVector:
    v = rng.normal(size=d**n_wires) + 1j * rng.normal(size=d**n_wires)
    return StateVector(d, n_wires, v / np.linalg.norm(v))


def teleport_input(psi: StateVector) -> StateVector:
    d = psi.dim
    zero = StateVector.from_label(d, 0)
    return psi.tensor(zero).tensor(zero)


def bob_state(final: StateVector, record: OutcomeRecord) -> StateVector:
    """Destination wire's state once Alice's wires have collapsed to the recorded digits."""
    d = final.dim
    vals = record.as_dict()
    block = final.amplitudes.reshape(d, d, d)[vals["a_t"], vals["a_m"], :]
    return StateVector(d, 1, block / np.linalg.norm(block))


def source_overlap(d: int, psi: StateVector) -> float:
    """<chi chi| rho_Alice |chi chi> after the measurement-free circuit.

    Equals 1 when the source has been wiped: both of Alice's wires end in chi
    whatever psi was.
    """
    final, _ = run_circuit(build_bbc(d), teleport_input(psi))
    chi = label_vector(d, "chi")
    bra = np.kron(chi, chi).conj()
    rest = bra @ final.amplitudes.reshape(d * d, d)
    return float(np.vdot(rest, rest).real)


@dataclass(frozen=True)
class TeleportOutcome:
    psi: StateVector
    record: OutcomeRecord
    bob: StateVector
    fidelity: float

    def as_dict(self) -> dict:
        return {"outcomes": self.record.as_dict(),
                "branch_probability": self.record.probability,
                "fidelity": self.fidelity}


def teleport_trial(d: int, psi: StateVector, seed: int | np.random.Generator | None = 0,
                   forced=None) -> TeleportOutcome:
    if psi.n_wires != 1 or psi.dim != d:
        raise ValueError("psi must be a single wire of the circuit's dimension")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    final, record = run_circuit(build_teleport(d), teleport_input(psi), rng, forced)
    bob = bob_state(final, record)
    fid = fidelity(psi, bob)
    if fid > 1 + tolerance():
        raise AssertionError(f"fidelity {fid} above 1")
    return TeleportOutcome(psi, record, bob, fid)

