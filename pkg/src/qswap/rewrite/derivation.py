"""Replay of the half-swap -> teleportation derivation as seven certified steps.

Both pipelines run the same step list on wires (source 0, ancilla 1,
destination 2). The qubit pipeline is the d = 2 case; the qudit pipeline works
for any d and, at d = 2, collapses to exactly the qubit circuits because the
adjoint gates are spelled as their self-inverse forms there.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..circuit_file import diagram, serialize_circuit
from ..core import Circuit, Gate, check_dim, tolerance
from ..gates import fourier_pair
from ..protocols import ANCILLA, DEST, SOURCE, build_bbc, build_half_swap, build_swap, build_teleport
from .checks import (CheckReport, check_channel_equiv, check_equiv_on_inputs,
                     check_output_declarations)
from .rules import RuleError, Site, apply_rule, certify

PIPELINES = ("qubit", "qudit")

# Read literally, the qudit invariance relation sends |psi>|0> to |psi>|0>;
# what holds (and what is used) is cX (1 x F)|psi>|0> = (1 x F)|psi>|0>.
EQ14_NOTE = ("qudit invariance identity implemented as cX (1 (x) F)|psi>|0> = |psi> (x) F|0>; "
             "the literal right-hand side |psi>|0> is not invariant and is not used")


class DerivationError(RuntimeError):
    def __init__(self, step: "DerivationStep", report: "DerivationReport | None" = None):
        super().__init__(f"step {step.number} ({step.rule_id}) failed: "
                         + "; ".join(f"{c.checker} dev={c.max_deviation:.3g} {c.detail}".strip()
                                     for c in step.checks if not c.passed))
        self.step = step
        self.report = report


@dataclass(frozen=True)
class DerivationStep:
    number: int
    title: str
    rule_id: str
    sites: tuple
    before: Circuit
    after: Circuit
    checks: tuple[CheckReport, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_deviation(self) -> float:
        return max(c.max_deviation for c in self.checks)

    def as_dict(self) -> dict:
        return {"step": self.number, "title": self.title, "rule_id": self.rule_id,
                "sites": [s.as_dict() for s in self.sites],
                "verdict": "pass" if self.passed else "fail",
                "max_deviation": self.max_deviation,
                "checks": [c.as_dict() for c in self.checks],
                "before": serialize_circuit(self.before),
                "after": serialize_circuit(self.after)}


@dataclass
class DerivationReport:
    pipeline: str
    d: int
    steps: list[DerivationStep] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    final_matches_builder: bool | None = None
    final_check: CheckReport | None = None

    @property
    def passed(self) -> bool:
        return (len(self.steps) == 7 and all(s.passed for s in self.steps)
                and self.final_check is not None and self.final_check.passed)

    @property
    def max_deviation(self) -> float:
        devs = [s.max_deviation for s in self.steps]
        if self.final_check is not None:
            devs.append(self.final_check.max_deviation)
        return max(devs) if devs else 0.0

    @property
    def final(self) -> Circuit:
        return self.steps[-1].after

    def as_dict(self) -> dict:
        return {"schema": "qswap.derivation/1", "pipeline": self.pipeline, "d": self.d,
                "tolerance": tolerance(), "passed": self.passed,
                "max_deviation": self.max_deviation,
                "final_matches_builder": self.final_matches_builder,
                "final_check": self.final_check.as_dict() if self.final_check else None,
                "notes": list(self.notes),
                "steps": [s.as_dict() for s in self.steps]}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"derivation pipeline={self.pipeline} d={self.d}",
                 f"result: {'PASS' if self.passed else 'FAIL'}  max deviation {self.max_deviation:.3e}", ""]
        for s in self.steps:
            sites = ", ".join(f"@{x.index}" if x.index is not None else str(dict(x.roles))
                              for x in s.sites)
            lines.append(f"[{s.number}] {s.title}  ({s.rule_id}{' ' + sites if sites else ''})")
            for c in s.checks:
                lines.append(f"    {c.checker:<16} {'pass' if c.passed else 'FAIL'}  "
                             f"dev {c.max_deviation:.3e} {c.detail}".rstrip())
            lines.append(diagram(s.after))
            lines.append("")
        if self.final_check is not None:
            lines.append(f"final vs build_teleport: channel {'pass' if self.final_check.passed else 'FAIL'}"
                         f" dev {self.final_check.max_deviation:.3e};"
                         f" structurally equal: {self.final_matches_builder}")
        for n in self.notes:
            lines.append(f"note: {n}")
        return "\n".join(lines) + "\n"


class _Recorder:
    def __init__(self, report: DerivationReport, fail_fast: bool):
        self.report = report
        self.fail_fast = fail_fast

    def add(self, title, rule_id, sites, before, after, checks):
        step = DerivationStep(len(self.report.steps) + 1, title, rule_id, tuple(sites),
                              before, after, tuple(checks))
        self.report.steps.append(step)
        if self.fail_fast and not step.passed:
            raise DerivationError(step, self.report)
        return after


def _rule(c, rule_id, site):
    after = apply_rule(c, rule_id, site)
    return after, certify(rule_id, c, after)


def start_circuit(d: int) -> Circuit:
    """Half-swap on (source, destination) with the ancilla idle in |0>."""
    return build_half_swap(d).lift(3, [SOURCE, DEST]).declare(inputs={ANCILLA: 0},
                                                               outputs={ANCILLA: 0})


def run_derivation(pipeline: str, d: int, fail_fast: bool = True) -> DerivationReport:
    if pipeline not in PIPELINES:
        raise ValueError(f"unknown pipeline {pipeline!r}; expected one of {PIPELINES}")
    d = check_dim(d)
    if pipeline == "qubit" and d != 2:
        raise ValueError("the qubit pipeline needs d = 2")
    report = DerivationReport(pipeline, d)
    if pipeline == "qudit":
        report.notes.append(EQ14_NOTE)
    rec = _Recorder(report, fail_fast)
    t, m, b = SOURCE, ANCILLA, DEST

    # 1. the full swap with the destination in |0> is the half-swap
    c1 = start_circuit(d)
    swap = build_swap(d).lift(3, [t, b]).declare(inputs={m: 0, b: 0}, outputs={t: 0, m: 0, b: "psi"})
    rec.add("half-swap from swap with destination |0>", "START", [], swap, c1,
            [check_equiv_on_inputs(swap, c1)])

    # 2. route the first coupling through the ancilla
    site = Site(0, {"ancilla": m})
    c2, checks = _rule(c1, "R-EXPAND", site)
    rec.add("expand first coupling through ancilla", "R-EXPAND", [site], c1, c2, checks)

    # 3. reverse the last coupling with a Fourier sandwich
    site = Site(len(c2.instructions) - 1)
    c3, checks = _rule(c2, "R-CONJ", site)
    rec.add("interchange control and target of last coupling", "R-CONJ", [site], c2, c3, checks)

    # 4. ancilla starts in chi, so the leading shift on it does nothing
    c3chi = c3.declare(inputs={m: "chi"}, outputs={m: "chi"})
    site = Site(0)
    c4, checks = _rule(c3chi, "R-DROP", site)
    rec.add("ancilla in chi; drop the source->ancilla coupling", "R-DROP", [site], c3chi, c4,
            [check_output_declarations(c3chi), *checks])

    # 5. prepare chi from |0>, absorb the trailing basis change, commute -> BBC
    f, _ = fourier_pair(d)
    c5a = c4.with_instructions((Gate(f, (m,)),) + c4.instructions).declare(inputs={m: 0})
    checks = [check_equiv_on_inputs(c4, c5a)]
    site_abs = Site(len(c5a.instructions) - 1)
    c5b, more = _rule(c5a, "R-ABSORB", site_abs)
    checks += more
    fd_pos = next(i for i, ins in enumerate(c5b.instructions)
                  if isinstance(ins, Gate) and ins.wires == (t,))
    site_com = Site(fd_pos - 1)
    c5, more = _rule(c5b, "R-COMMUTE", site_com)
    checks += more
    checks.append(check_equiv_on_inputs(c1, c5))
    rec.add("prepare chi, absorb final basis change, commute: BBC circuit",
            "PREPARE+R-ABSORB+R-COMMUTE", [Site(0, {"prepare": m}), site_abs, site_com],
            c4, c5, checks)

    # 6. Alice's wires end in chi: measuring them is harmless
    site = Site(None, {"a_m": m, "a_t": t})
    c6, checks = _rule(c5, "R-ADDMEAS", site)
    rec.add("measure Alice's two wires", "R-ADDMEAS", [site], c5, c6, checks)

    # 7. pull both measurements in front of the gates they control
    c = c6
    checks, sites = [], []
    for ctl in (m, t):
        # the last coupling from this wire onto the destination
        pos = max(i for i, ins in enumerate(c.instructions)
                  if isinstance(ins, Gate) and ins.wires == (ctl, b))
        site = Site(pos, {"control": ctl})
        c_next, more = _rule(c, "R-DEFER", site)
        checks += more
        sites.append(site)
        c = c_next
    rec.add("defer measurements: corrections become classical", "R-DEFER", sites, c6, c, checks)

    target = build_teleport(d)
    report.final_check = check_channel_equiv(c, target)
    report.final_matches_builder = (c.instructions == target.instructions)
    if fail_fast and not report.final_check.passed:
        raise DerivationError(report.steps[-1], report)
    return report


def verify_bbc(d: int) -> CheckReport:
    """build_bbc against the half-swap, destination fixed to |0>."""
    return check_equiv_on_inputs(start_circuit(d), build_bbc(d))


__all__ = ["DerivationError", "DerivationReport", "DerivationStep", "PIPELINES", "RuleError",
           "run_derivation", "start_circuit", "verify_bbc"]
