"""Command-line front end.

Exit codes: 0 every check passed, 1 a check failed, 2 usage or input error.
``--json`` switches every command to machine-readable output, which is
byte-identical across runs with the same arguments and seed.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from .circuit_file import CircuitParseError, diagram, load_circuit, serialize_circuit
from .core import StateVector, label_vector, product_state, tolerance
from .protocols import PROTOCOLS, build, haar_state, source_overlap, teleport_trial
from .rewrite import DerivationError, IDENTITIES, run_derivation, verify_identity
from .rewrite.derivation import PIPELINES
from .sim import circuit_unitary, make_rng, run_circuit

FIDELITY_FLOOR = 1 - 1e-9


class UsageError(ValueError):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def format_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


def format_matrix(u: np.ndarray) -> str:
    """One row per line, ``re+imi`` entries, comma separated, 17 significant digits."""
    return "\n".join(",".join(format_complex(z) for z in row) for row in u) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    rows = [[complex(tok.replace("i", "j")) for tok in line.split(",")]
            for line in text.strip().splitlines()]
    return np.array(rows, dtype=complex)


def _split_top(spec: str) -> list[str]:
    """Split on commas that are not inside square brackets."""
    parts, depth, cur = [], 0, ""
    for ch in spec:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return [p.strip() for p in parts]


def parse_wire_state(token: str, d: int) -> StateVector:
    """One wire: ``k``, ``chi``, ``psi:[a;b;...]`` (normalized for you) or ``haar:<seed>``."""
    if token == "chi":
        return StateVector(d, 1, label_vector(d, "chi"))
    if re.fullmatch(r"\d+", token):
        k = int(token)
        if k >= d:
            raise UsageError(f"basis state {k} out of range for d={d}")
        return StateVector.basis(d, [k])
    m = re.fullmatch(r"psi:\[(.*)\]", token)
    if m:
        try:
            amps = np.array([complex(a.strip().replace("i", "j"))
                             for a in re.split(r"[;,]", m.group(1))], dtype=complex)
        except ValueError:
            raise UsageError(f"bad amplitude list in {token!r}") from None
        if amps.size != d or not np.linalg.norm(amps) > 0:
            raise UsageError(f"psi needs {d} amplitudes, not all zero")
        return StateVector(d, 1, amps / np.linalg.norm(amps))
    m = re.fullmatch(r"haar:(\d+)", token)
    if m:
        return haar_state(d, make_rng(int(m.group(1))))
    raise UsageError(f"unknown state token {token!r}")


def parse_input_spec(spec: str, d: int, n_wires: int) -> StateVector:
    tokens = _split_top(spec)
    if len(tokens) != n_wires:
        raise UsageError(f"input spec names {len(tokens)} wires, circuit has {n_wires}")
    return product_state(parse_wire_state(t, d) for t in tokens)


def _dims(values) -> list[int]:
    out = []
    for v in values:
        for part in str(v).split(","):
            if not part.strip():
                continue
            try:
                d = int(part)
            except ValueError:
                raise UsageError(f"not an integer dimension: {part!r}") from None
            if d < 2:
                raise UsageError(f"dimension must be >= 2, got {d}")
            out.append(d)
    if not out:
        raise UsageError("no dimensions given")
    return out


# -- commands -------------------------------------------------------------------

def cmd_verify(identity: str, d_list, as_json: bool = False, out=None) -> int:
    out = out or sys.stdout
    if identity not in IDENTITIES:
        raise UsageError(f"unknown identity {identity!r}; choose from {', '.join(IDENTITIES)}")
    cases = []
    for d in _dims(d_list):
        try:
            results = verify_identity(identity, d)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        for name, rep in results:
            cases.append({"identity": identity, "d": d, "case": name, **rep.as_dict()})
    ok = all(c["passed"] for c in cases)
    if as_json:
        print(_dump({"schema": "qswap.verify/1", "tolerance": tolerance(), "passed": ok,
                     "cases": cases}), file=out)
    else:
        for c in cases:
            print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['identity']} d={c['d']} "
                  f"{c['case']}: max deviation {c['max_deviation']:.3e}", file=out)
    return 0 if ok else 1


def cmd_derive(pipeline: str, d: int, output_path=None, as_json: bool = False,
               out=None) -> int:
    out = out or sys.stdout
    if pipeline not in PIPELINES:
        raise UsageError(f"unknown pipeline {pipeline!r}")
    (d,) = _dims([d])
    try:
        report = run_derivation(pipeline, d)
    except DerivationError as exc:
        report = exc.report
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if output_path is not None:
        folder = Path(output_path)
        folder.mkdir(parents=True, exist_ok=True)
        stem = f"derive-{pipeline}-d{d}"
        (folder / f"{stem}.json").write_text(report.to_json(), encoding="utf-8")
        (folder / f"{stem}.txt").write_text(report.to_text(), encoding="utf-8")
    out.write(report.to_json() if as_json else report.to_text())
    return 0 if report.passed else 1


def cmd_teleport(d: int, psi_spec: str, trials: int, seed: int, as_json: bool = False,
                 out=None) -> int:
    out = out or sys.stdout
    (d,) = _dims([d])
    if trials < 1:
        raise UsageError("need at least one trial")
    rng = make_rng(seed)
    fixed = None if psi_spec == "haar" else parse_wire_state(psi_spec, d)
    rows = []
    for _ in range(trials):
        psi = fixed if fixed is not None else haar_state(d, rng)
        res = teleport_trial(d, psi, rng)
        rows.append({**res.as_dict(), "source_overlap": source_overlap(d, psi)})
    fids = [r["fidelity"] for r in rows]
    counts: dict[str, int] = {}
    for r in rows:
        key = f"{r['outcomes']['a_t']},{r['outcomes']['a_m']}"
        counts[key] = counts.get(key, 0) + 1
    summary = {"schema": "qswap.teleport/1", "d": d, "state": psi_spec, "trials": trials,
               "seed": seed, "min_fidelity": min(fids), "mean_fidelity": float(np.mean(fids)),
               "min_source_overlap": min(r["source_overlap"] for r in rows),
               "branch_probability_error": max(abs(r["branch_probability"] - 1 / d**2) for r in rows),
               "outcome_counts": dict(sorted(counts.items())),
               "passed": False}
    summary["passed"] = (summary["min_fidelity"] >= FIDELITY_FLOOR
                         and summary["min_source_overlap"] >= FIDELITY_FLOOR
                         and summary["branch_probability_error"] <= tolerance())
    if as_json:
        summary["trials_detail"] = rows
        print(_dump(summary), file=out)
    else:
        print(f"teleport d={d} state={psi_spec} trials={trials} seed={seed}", file=out)
        print(f"min fidelity {summary['min_fidelity']:.15f}  "
              f"mean {summary['mean_fidelity']:.15f}", file=out)
        print(f"min source overlap with chi x chi {summary['min_source_overlap']:.15f}", file=out)
        print(f"max |p(branch) - 1/d^2| {summary['branch_probability_error']:.3e}", file=out)
        print("outcomes (a_t,a_m): " + " ".join(f"{k}:{v}" for k, v in
                                                summary["outcome_counts"].items()), file=out)
        print("PASS" if summary["passed"] else "FAIL", file=out)
    return 0 if summary["passed"] else 1


def cmd_run(circuit_path, input_spec: str, seed: int, as_json: bool = False,
            out=None) -> int:
    out = out or sys.stdout
    c = load_circuit(circuit_path)
    state = parse_input_spec(input_spec, c.dim, c.n_wires)
    final, record = run_circuit(c, state, make_rng(seed))
    amps = final.amplitudes
    if as_json:
        print(_dump({"schema": "qswap.run/1", "seed": seed, "d": c.dim, "wires": c.n_wires,
                     "amplitudes": [[z.real, z.imag] for z in amps.tolist()],
                     "record": [{"register": r, "value": v, "probability": p}
                                for r, v, p in record.entries]}), file=out)
    else:
        print(f"seed {seed}", file=out)
        for r, v, p in record.entries:
            print(f"measure {r} = {v}  (p = {p:.17g})", file=out)
        for i, z in enumerate(amps):
            if abs(z) > 0:
                print(f"{i:>6}  {format_complex(z)}", file=out)
    return 0


def cmd_unitary(circuit_path, out=None) -> int:
    out = out or sys.stdout
    c = load_circuit(circuit_path)
    if c.has_measurements:
        raise UsageError("unitary needs a measurement-free circuit")
    out.write(format_matrix(circuit_unitary(c)))
    return 0


def cmd_build(protocol: str, d: int, out=None) -> int:
    out = out or sys.stdout
    (d,) = _dims([d])
    out.write(serialize_circuit(build(protocol, d)))
    return 0


def cmd_show(circuit_path, out=None) -> int:
    out = out or sys.stdout
    print(diagram(load_circuit(circuit_path)), file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    p = argparse.ArgumentParser(prog="qswap", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="check a named identity for several d")
    v.add_argument("--identity", required=True, choices=sorted(IDENTITIES))
    v.add_argument("--d", nargs="+", required=True, help="dimensions, e.g. 2,3,5 or 2 3 5")

    dv = sub.add_parser("derive", parents=[common], help="replay the derivation to teleportation")
    dv.add_argument("--pipeline", required=True, choices=PIPELINES)
    dv.add_argument("--d", type=int, required=True)
    dv.add_argument("--out", default=None, help="directory for .json/.txt reports")

    t = sub.add_parser("teleport", parents=[common], help="sampled teleportation trials")
    t.add_argument("--d", type=int, required=True)
    t.add_argument("--state", default="haar", help="haar, k, chi, psi:[...] or haar:<seed>")
    t.add_argument("--trials", type=int, default=1)
    t.add_argument("--seed", type=int, default=0)

    r = sub.add_parser("run", parents=[common], help="simulate a circuit file")
    r.add_argument("--circuit", required=True)
    r.add_argument("--input", required=True, help="comma-separated per-wire states")
    r.add_argument("--seed", type=int, default=0)

    u = sub.add_parser("unitary", parents=[common], help="dump the unitary of a circuit file")
    u.add_argument("--circuit", required=True)

    b = sub.add_parser("build", parents=[common], help="print a named protocol circuit")
    b.add_argument("--protocol", required=True, choices=PROTOCOLS)
    b.add_argument("--d", type=int, required=True)

    s = sub.add_parser("show", parents=[common], help="ASCII diagram of a circuit file")
    s.add_argument("--circuit", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.identity, args.d, args.json)
        if args.command == "derive":
            return cmd_derive(args.pipeline, args.d, args.out, args.json)
        if args.command == "teleport":
            return cmd_teleport(args.d, args.state, args.trials, args.seed, args.json)
        if args.command == "run":
            return cmd_run(args.circuit, args.input, args.seed, args.json)
        if args.command == "unitary":
            return cmd_unitary(args.circuit)
        if args.command == "build":
            return cmd_build(args.protocol, args.d)
        return cmd_show(args.circuit)
    except CircuitParseError as exc:
        print(f"{args.circuit}: {exc}", file=sys.stderr)
        return 2
    except (UsageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
