#!/usr/bin/env python3
"""Run every deterministic verification suite and write reports.

Usage: python3 scripts/run_verifications.py [--outdir results]
"""

import argparse
import os
import sys

from hptri import harness


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args(argv)
    os.makedirs(args.outdir, exist_ok=True)
    reports = [
        harness.verify_enumeration(),
        harness.verify_law(),
        harness.quad_constants_report(),
    ]
    ok = True
    for rep in reports:
        base = os.path.join(args.outdir, rep.name)
        harness.export(rep, "json", base + ".json")
        harness.export(rep, "csv", base + ".csv")
        print("%-20s %s" % (rep.name, "PASS" if rep.passed else "FAIL"))
        ok = ok and rep.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
