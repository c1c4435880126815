"""Line-oriented circuit text format.

::

    # comment
    dim 3
    wires 3
    input 1 chi            # optional declared states: k, chi or psi
    output 0 chi
    gate F 1
    gate CX 1 2            # control first
    measure 0 -> a
    cgate XD^a 2

``serialize`` emits the canonical form: header, sorted declarations, then
instructions, single spaces, trailing newline.
"""
from __future__ import annotations

import re

from .core import Circuit, ControlledByRegister, Gate, Measure, MAX_DIM, parse_label
from .gates import ARITY


class CircuitParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.message = message


_REGISTER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def _tokens(raw: str):
    """Split on whitespace, keeping 1-based column numbers."""
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", raw)]


def parse_circuit(text: str) -> Circuit:
    dim = n_wires = None
    instructions = []
    inputs, outputs = {}, {}
    written: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        raw = raw.split("#", 1)[0]
        toks = _tokens(raw)
        if not toks:
            continue
        words = [t for t, _ in toks]
        cols = [c for _, c in toks]

        def fail(msg, i=0):
            raise CircuitParseError(msg, lineno, cols[min(i, len(cols) - 1)])

        def integer(i):
            if i >= len(words):
                fail(f"'{words[0]}' is missing an argument", len(words) - 1)
            try:
                return int(words[i])
            except ValueError:
                fail(f"expected an integer, got {words[i]!r}", i)

        def wire(i):
            w = integer(i)
            if not 0 <= w < n_wires:
                fail(f"wire {w} out of range for {n_wires} wires", i)
            return w

        def arity(k):
            if len(words) != k:
                fail(f"'{words[0]}' takes {k - 1} argument(s), got {len(words) - 1}",
                     min(k, len(words) - 1))

        kw = words[0]
        if kw == "dim":
            arity(2)
            if dim is not None:
                fail("dim given twice")
            dim = integer(1)
            if dim < 2:
                fail(f"dimension must be >= 2, got {dim}", 1)
            continue
        if kw == "wires":
            arity(2)
            if n_wires is not None:
                fail("wires given twice")
            n_wires = integer(1)
            if n_wires < 1:
                fail("need at least one wire", 1)
            continue
        if dim is None or n_wires is None:
            fail("'dim' and 'wires' must come before anything else")
        if dim**n_wires > MAX_DIM:
            fail(f"d**n exceeds the dense limit {MAX_DIM}")

        if kw in ("input", "output"):
            arity(3)
            w = wire(1)
            try:
                label = parse_label(words[2])
            except ValueError as exc:
                fail(str(exc), 2)
            if isinstance(label, int) and not 0 <= label < dim:
                fail(f"basis state {label} out of range for d={dim}", 2)
            table = inputs if kw == "input" else outputs
            if w in table:
                fail(f"{kw} for wire {w} declared twice", 1)
            table[w] = label
        elif kw == "gate":
            if len(words) < 2:
                fail("gate needs a mnemonic")
            name = words[1]
            if name not in ARITY:
                fail(f"unknown gate mnemonic {name!r}", 1)
            if len(words) != 2 + ARITY[name]:
                fail(f"gate {name} takes {ARITY[name]} wire(s), got {len(words) - 2}",
                     min(2 + ARITY[name], len(words) - 1))
            ws = [wire(i) for i in range(2, len(words))]
            if len(set(ws)) != len(ws):
                fail(f"gate {name} has duplicate wires", 3)
            instructions.append(Gate(name, tuple(ws)))
        elif kw == "measure":
            arity(4)
            w = wire(1)
            if words[2] != "->":
                fail("expected '->'", 2)
            reg = words[3]
            if not _REGISTER.match(reg):
                fail(f"bad register name {reg!r}", 3)
            if reg in written:
                fail(f"register {reg!r} is written twice", 3)
            written.add(reg)
            instructions.append(Measure(w, reg))
        elif kw == "cgate":
            arity(3)
            name, caret, reg = words[1].partition("^")
            if not caret or not reg:
                fail("expected MNEMONIC^register", 1)
            if name not in ARITY:
                fail(f"unknown gate mnemonic {name!r}", 1)
            if ARITY[name] != 1:
                fail(f"only single-wire gates can be classically controlled, got {name}", 1)
            if reg not in written:
                fail(f"register {reg!r} is read before it is written", 1)
            instructions.append(ControlledByRegister(reg, name, wire(2)))
        else:
            fail(f"unknown statement {kw!r}")

    if dim is None or n_wires is None:
        raise CircuitParseError("missing 'dim' or 'wires' header", 1)
    return Circuit(dim, n_wires, tuple(instructions), inputs, outputs)


def serialize_instruction(ins) -> str:
    if isinstance(ins, Gate):
        return " ".join(["gate", ins.name, *map(str, ins.wires)])
    if isinstance(ins, Measure):
        return f"measure {ins.wire} -> {ins.register}"
    return f"cgate {ins.gate}^{ins.register} {ins.wire}"


def serialize_circuit(c: Circuit) -> str:
    lines = [f"dim {c.dim}", f"wires {c.n_wires}"]
    lines += [f"input {w} {v}" for w, v in sorted(c.inputs.items())]
    lines += [f"output {w} {v}" for w, v in sorted(c.outputs.items())]
    lines += [serialize_instruction(i) for i in c.instructions]
    return "\n".join(lines) + "\n"


def load_circuit(path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return parse_circuit(fh.read())


def diagram(c: Circuit) -> str:
    """ASCII rendering, one row per wire; '@' marks a control."""
    rows = [[] for _ in range(c.n_wires)]
    for ins in c.instructions:
        cells = {}
        if isinstance(ins, Gate):
            if len(ins.wires) == 2:
                cells[ins.wires[0]] = "@"
                cells[ins.wires[1]] = ins.name
            else:
                cells[ins.wires[0]] = ins.name
        elif isinstance(ins, Measure):
            cells[ins.wire] = f"M>{ins.register}"
        else:
            cells[ins.wire] = f"{ins.gate}^{ins.register}"
        width = max(len(s) for s in cells.values()) + 2
        for w in range(c.n_wires):
            rows[w].append(cells.get(w, "").center(width, "-"))
    out = []
    for w in range(c.n_wires):
        left = str(c.inputs.get(w, "")).rjust(4)
        right = str(c.outputs.get(w, ""))
        out.append(f"{left} {w}: -{'-'.join(rows[w])}- {right}".rstrip())
    return "\n".join(out)
