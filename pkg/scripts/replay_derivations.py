#!/usr/bin/env python3
"""Replay the swap-to-teleportation derivation for several pipelines and write reports.

Each run produces ``derive-<pipeline>-d<d>.json`` and ``.txt`` in the output
directory, plus an ``index.json`` with the per-step worst deviations.

    python3 scripts/replay_derivations.py --out reports/
"""
from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from qswap.rewrite import DerivationError, run_derivation


@dataclass
class ReplayConfig:
    runs: list[tuple[str, int]] = field(
        default_factory=lambda: [("qubit", 2), ("qudit", 2), ("qudit", 3), ("qudit", 5)])
    out: str = "reports"


def replay(cfg: ReplayConfig) -> dict:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    index = []
    for pipeline, d in cfg.runs:
        try:
            rep = run_derivation(pipeline, d)
        except DerivationError as exc:
            rep = exc.report
        stem = out / f"derive-{pipeline}-d{d}"
        stem.with_suffix(".json").write_text(rep.to_json(), encoding="utf-8")
        stem.with_suffix(".txt").write_text(rep.to_text(), encoding="utf-8")
        index.append({"pipeline": pipeline, "d": d, "passed": rep.passed,
                      "steps": [[s.number, s.rule_id, s.max_deviation] for s in rep.steps],
                      "final_matches_builder": rep.final_matches_builder})
    summary = {"config": asdict(cfg), "runs": index}
    (out / "index.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                                    encoding="utf-8")
    return summary


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="reports")
    ap.add_argument("--qudit-dims", type=int, nargs="+", default=[2, 3, 5])
    args = ap.parse_args(argv)
    runs = [("qubit", 2)] + [("qudit", d) for d in args.qudit_dims]
    summary = replay(ReplayConfig(runs, args.out))
    for r in summary["runs"]:
        worst = max(dev for _, _, dev in r["steps"])
        print(f"{r['pipeline']:>5} d={r['d']}: {'PASS' if r['passed'] else 'FAIL'} "
              f"({len(r['steps'])} steps, worst deviation {worst:.2e})")
    return 0 if all(r["passed"] for r in summary["runs"]) else 1


if __name__ == "__main__":
    raise SystemExit(main())
