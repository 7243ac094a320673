#!/usr/bin/env python3
"""Recompute per-(n, solver) aggregates from trials.csv and compare with summary.json."""

import argparse
import csv
import json
import math
import statistics
import sys
from collections import OrderedDict
from pathlib import Path


def recompute(rows):
    groups = OrderedDict()
    for r in rows:
        n = int(r["instance_id"][1:].split("_")[0])
        groups.setdefault((n, r["solver"]), []).append(r)
    out = {}
    for key, g in groups.items():
        solved = [r for r in g if r["outcome"] == "solved"]
        out[key] = {
            "trials": len(g),
            "solved": len(solved),
            "success_rate": len(solved) / len(g),
            "median_mp_calls": statistics.median(int(r["mp_calls"]) for r in g),
            "median_expansions": statistics.median(int(r["expansions"]) for r in g),
            "mean_buffers": sum(int(r["buffers"]) for r in solved) / len(solved) if solved else 0.0,
        }
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("dir", type=Path, help="bench output directory")
    args = ap.parse_args()

    with open(args.dir / "trials.csv", newline="") as f:
        expected = recompute(list(csv.DictReader(f)))
    with open(args.dir / "summary.json") as f:
        summary = {(e["n"], e["solver"]): e for e in json.load(f)}

    errors = []
    if set(expected) != set(summary):
        errors.append(f"groups differ: csv {sorted(expected)} vs summary {sorted(summary)}")
    for key in expected.keys() & summary.keys():
        for field, value in expected[key].items():
            got = summary[key][field]
            if not math.isclose(got, value, rel_tol=1e-12, abs_tol=1e-12):
                errors.append(f"{key} {field}: summary {got} != recomputed {value}")
    for e in errors:
        print(e, file=sys.stderr)
    print(f"{'OK' if not errors else 'MISMATCH'}: {len(expected)} groups checked")
    return 1 if errors else 0


if __name__ == "__main__":
    sys.exit(main())
