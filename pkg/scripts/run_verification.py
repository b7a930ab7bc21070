#!/usr/bin/env python3
"""Run the full verification battery and write text + JSON reports.

Equivalent to `algebroids verify all`, but saves both report formats next
to each other and prints a one-line summary per suite.  Exit status is 0
when every check passes, 1 otherwise.
"""

from __future__ import annotations

import argparse
import pathlib
import sys

from algebroids.cli import SUITES, Context, make_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="verification-reports")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--samples", type=int, default=30)
    ap.add_argument("--tol-scale", type=float, default=1.0)
    args = ap.parse_args()

    ctx = Context(samples=args.samples, tol_scale=args.tol_scale)
    if args.seed is not None:
        ctx.seed = args.seed

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    all_ok = True
    for name, fn in SUITES.items():
        report = make_report(ctx)
        fn(ctx, report)
        npass = sum(r["verdict"] == "pass" for r in report.records)
        status = "ok " if report.passed else "FAIL"
        print(f"[{status}] {name:<14} {npass}/{len(report.records)}")
        (out / f"{name}.txt").write_text(report.as_text() + "\n")
        (out / f"{name}.json").write_text(report.as_json() + "\n")
        all_ok = all_ok and report.passed

    print(f"reports written to {out}/")
    sys.exit(0 if all_ok else 1)


if __name__ == "__main__":
    main()
