#!/usr/bin/env python3
"""Grade the bundled 12-item mini-corpus and print the aggregate report.

Usage:
    python scripts/grade_minicorpus.py [--out runs/minicorpus] [--config FILE]

Writes items.jsonl, report.txt, and config.json to the output directory, and
prints the per-model/topic/type breakdown plus the rank correlation between
the two bundled models' per-item scores.
"""

import argparse
import sys
from importlib import resources

from seedgrade.config import GradeConfig
from seedgrade.errors import DegenerateInput
from seedgrade.harness import grade_run, load_dataset, load_responses, render_report, spearman


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/minicorpus")
    ap.add_argument("--config", help="key = value config file")
    args = ap.parse_args()

    cfg = GradeConfig.load(args.config) if args.config else GradeConfig()
    data = resources.files("seedgrade.data")
    with resources.as_file(data.joinpath("minicorpus.jsonl")) as d, \
         resources.as_file(data.joinpath("minicorpus_responses.jsonl")) as r:
        items = load_dataset(d, cfg)
        responses = load_responses(r)

    report = grade_run(items, responses, cfg)
    report.write(args.out)
    print(render_report(report), end="")

    models = sorted({rec["model"] for rec in report.records})
    if len(models) == 2:
        a, b = models
        scores = {
            m: [rec["score"] for rec in report.records if rec["model"] == m]
            for m in models
        }
        try:
            rho = spearman(scores[a], scores[b])
            print(f"\nper-item rank correlation {a} vs {b}: {rho:.4f}")
        except DegenerateInput as exc:
            print(f"\nper-item rank correlation {a} vs {b}: undefined ({exc})")
    print(f"\nwrote {args.out}/items.jsonl")
    return 0


if __name__ == "__main__":
    sys.exit(main())
