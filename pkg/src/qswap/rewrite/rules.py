"""Single-site rewrite rules, one per circuit identity used in the derivation.

Every rule returns a new circuit and never certifies itself; :func:`certify`
runs the checker that matches the rule's validity kind.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from ..core import (Circuit, ControlledByRegister, Gate, Measure, StateLabel, label_vector,
                    tolerance)
from ..gates import ARITY, adjoint, canonical, fourier_pair, gate_matrix
from .checks import (CheckReport, append_measurements, check_channel_equiv,
                     check_equiv_on_inputs, check_output_declarations, check_unitary_equiv)


class RuleError(ValueError):
    """The rule does not match at the requested site or a side condition fails."""


@dataclass(frozen=True)
class Site:
    index: int | None = None
    roles: Mapping[str, int] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"index": self.index, "roles": dict(self.roles)}


@dataclass(frozen=True)
class RewriteRule:
    rule_id: str
    validity_kind: str
    summary: str
    apply: Callable[[Circuit, Site], Circuit]


def _gate_at(c: Circuit, site: Site, names) -> Gate:
    if site.index is None or not 0 <= site.index < len(c.instructions):
        raise RuleError(f"site index {site.index} out of range")
    ins = c.instructions[site.index]
    if not isinstance(ins, Gate) or ins.name not in names:
        raise RuleError(f"expected one of {sorted(names)} at {site.index}, found {ins}")
    return ins


def _touches(ins, wire: int) -> bool:
    return wire in ins.wires


def _splice(c: Circuit, index: int, new) -> Circuit:
    ins = list(c.instructions)
    ins[index:index + 1] = list(new)
    return c.with_instructions(ins)


def expand(c: Circuit, site: Site) -> Circuit:
    """Route a CX/CXD through an untouched ancilla with four couplings."""
    g = _gate_at(c, site, {"CX", "CXD"})
    ctl, tgt = g.wires
    anc = site.roles.get("ancilla")
    if anc is None or anc in g.wires or not 0 <= anc < c.n_wires:
        raise RuleError("R-EXPAND needs an ancilla wire distinct from control and target")
    d = c.dim
    seq = [Gate(canonical(g.name, d), (ctl, anc)),
           Gate(canonical("CX", d), (anc, tgt)),
           Gate(adjoint(g.name, d), (ctl, anc)),
           Gate(canonical("CXD", d), (anc, tgt))]
    return _splice(c, site.index, seq)


def conjugate(c: Circuit, site: Site) -> Circuit:
    """CX(c,t) -> F^-1(t) CZ(t,c) F(t); the controlled phase is re-rooted on the old target."""
    g = _gate_at(c, site, {"CX", "CXD"})
    ctl, tgt = g.wires
    d = c.dim
    f, fd = fourier_pair(d)
    phase = "CZ" if g.name == "CX" else "CZD"
    seq = [Gate(fd, (tgt,)), Gate(canonical(phase, d), (tgt, ctl)), Gate(f, (tgt,))]
    return _splice(c, site.index, seq)


def drop(c: Circuit, site: Site) -> Circuit:
    """Remove a shift (controlled or not) acting first on a wire declared to start in chi."""
    g = _gate_at(c, site, {"CX", "CXD", "X", "XD"})
    tgt = g.wires[-1]
    if c.inputs.get(tgt) != "chi":
        raise RuleError(f"R-DROP needs declared input chi on wire {tgt}")
    if any(_touches(i, tgt) for i in c.instructions[:site.index]):
        raise RuleError(f"wire {tgt} is used before instruction {site.index}")
    return _splice(c, site.index, [])


def _identify(vec: np.ndarray, d: int) -> StateLabel:
    for label in ["chi", *range(d)]:
        if np.max(np.abs(vec - label_vector(d, label))) <= tolerance():
            return label
    raise RuleError("resulting state is not in the declared-state vocabulary")


def _trailing_single(c: Circuit, site: Site) -> tuple[Gate, int]:
    g = _gate_at(c, site, {n for n, k in ARITY.items() if k == 1})
    (w,) = g.wires
    if any(_touches(i, w) for i in c.instructions[site.index + 1:]):
        raise RuleError(f"gate at {site.index} is not the last instruction on wire {w}")
    return g, w


def absorb(c: Circuit, site: Site) -> Circuit:
    """Delete a trailing one-wire gate G and declare G^dagger|out> as the wire's output."""
    g, w = _trailing_single(c, site)
    out = c.outputs.get(w)
    if out is None or out == "psi":
        raise RuleError(f"R-ABSORB needs a fixed declared output on wire {w}")
    new = _identify(gate_matrix(g.name, c.dim).conj().T @ label_vector(c.dim, out), c.dim)
    return _splice(c, site.index, []).declare(outputs={w: new})


def emit_trailing(c: Circuit, wire: int, name: str) -> Circuit:
    """Inverse of :func:`absorb`: append ``name`` on ``wire`` and update the declared output."""
    out = c.outputs.get(wire)
    if out is None or out == "psi":
        raise RuleError(f"no fixed declared output on wire {wire}")
    new = _identify(gate_matrix(name, c.dim) @ label_vector(c.dim, out), c.dim)
    return c.with_instructions(c.instructions + (Gate(name, (wire,)),)).declare(outputs={wire: new})


def commute(c: Circuit, site: Site) -> Circuit:
    """Swap instructions ``index`` and ``index + 1`` when they share no wire or register."""
    i = site.index
    if i is None or not 0 <= i < len(c.instructions) - 1:
        raise RuleError(f"R-COMMUTE needs two instructions at {i}, {i}+1")
    a, b = c.instructions[i], c.instructions[i + 1]
    if a.support & b.support:
        raise RuleError(f"instructions {i} and {i + 1} overlap")
    ins = list(c.instructions)
    ins[i], ins[i + 1] = b, a
    return c.with_instructions(ins)


def add_measurements(c: Circuit, site: Site) -> Circuit:
    """Append measurements on wires whose declared output is a fixed state.

    ``site.roles`` maps register name to wire, in the order they are measured.
    """
    if not site.roles:
        raise RuleError("R-ADDMEAS needs at least one register -> wire role")
    taken = set(c.registers)
    for reg, w in site.roles.items():
        if reg in taken:
            raise RuleError(f"register {reg!r} already written")
        if c.outputs.get(w) in (None, "psi"):
            raise RuleError(f"wire {w} has no fixed declared output")
    pairs = [(w, r) for r, w in site.roles.items()]
    out = append_measurements(c, pairs)
    outputs = {w: v for w, v in c.outputs.items() if w not in site.roles.values()}
    return Circuit(out.dim, out.n_wires, out.instructions, out.inputs, outputs)


_CLASSICAL = {"CX": "X", "CXD": "XD", "CZ": "Z", "CZD": "ZD"}


def defer(c: Circuit, site: Site) -> Circuit:
    """Pull the measurement of a control wire in front of the gate it controls.

    The gate at ``site.index`` must be followed, as the next instruction on its
    control wire, by a measurement of that wire. The gate becomes the single-
    wire correction raised to the measured value. Controlled phases are
    symmetric, so ``roles['control']`` may pick either of their wires.
    """
    g = _gate_at(c, site, set(_CLASSICAL))
    ctl = site.roles.get("control", g.wires[0])
    if ctl not in g.wires or (g.name in ("CX", "CXD") and ctl != g.wires[0]):
        raise RuleError(f"wire {ctl} is not a control of {g}")
    tgt = g.wires[1] if ctl == g.wires[0] else g.wires[0]
    later = c.instructions[site.index + 1:]
    j = next((k for k, ins in enumerate(later) if _touches(ins, ctl)), None)
    if j is None or not isinstance(later[j], Measure):
        raise RuleError(f"control wire {ctl} is not measured next after instruction {site.index}")
    meas = later[j]
    correction = ControlledByRegister(meas.register, canonical(_CLASSICAL[g.name], c.dim), tgt)
    head = c.instructions[:site.index]
    return c.with_instructions(head + (meas, correction) + later[:j] + later[j + 1:])


RULES = {
    "R-EXPAND": RewriteRule("R-EXPAND", "unconditional-unitary",
                            "cX(c,t) = cX(c,a) cX(a,t) cX^dag(c,a) cX^dag(a,t)", expand),
    "R-CONJ": RewriteRule("R-CONJ", "unconditional-unitary",
                          "cX(c,t) = F(t) cZ(t,c) F^dag(t)", conjugate),
    "R-DROP": RewriteRule("R-DROP", "input-conditional",
                          "X^k F|0> = F|0>: a shift on a chi wire is the identity", drop),
    "R-ABSORB": RewriteRule("R-ABSORB", "input-conditional",
                            "trailing G on a wire with output o -> output G^dag o", absorb),
    "R-COMMUTE": RewriteRule("R-COMMUTE", "unconditional-unitary",
                             "adjacent instructions on disjoint wires commute", commute),
    "R-ADDMEAS": RewriteRule("R-ADDMEAS", "output-extension",
                             "measuring a wire known to be in a fixed pure state", add_measurements),
    "R-DEFER": RewriteRule("R-DEFER", "channel",
                           "measure-then-classically-control = control-then-measure", defer),
}


def apply_rule(c: Circuit, rule_id: str, site: Site | int | None) -> Circuit:
    if rule_id not in RULES:
        raise RuleError(f"unknown rule {rule_id!r}")
    if not isinstance(site, Site):
        site = Site(site)
    return RULES[rule_id].apply(c, site)


def certify(rule_id: str, before: Circuit, after: Circuit) -> list[CheckReport]:
    """Run the checker(s) designated by the rule's validity kind."""
    kind = RULES[rule_id].validity_kind
    if kind == "unconditional-unitary":
        if before.has_measurements or after.has_measurements:
            return [check_channel_equiv(before, after)]
        return [check_unitary_equiv(before, after)]
    if kind == "input-conditional":
        return [check_equiv_on_inputs(before, after)]
    if kind == "output-extension":
        added = after.instructions[len(before.instructions):]
        pairs = [(m.wire, m.register) for m in added]
        return [check_output_declarations(before),
                check_channel_equiv(append_measurements(before, pairs), after)]
    return [check_channel_equiv(before, after)]
