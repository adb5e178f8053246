"""Headline run: lift the 11a eigenclass at p = 3 and compare weights 2 and 6.

    python3 scripts/run_family.py --M 6 --out runs/family_M6.json
"""
import argparse
import sys

from ssw_lift.cli import RunConfig, cmd_family

ap = argparse.ArgumentParser()
ap.add_argument("--M", type=int, default=4)
ap.add_argument("--w1", type=int, default=6)
ap.add_argument("--window", type=int, default=90)
ap.add_argument("--out", default=None)
args = ap.parse_args()

cfg = RunConfig(M=args.M, window=args.window, output=args.out, timings=True)
rep = cmd_family(cfg, args.w1)
for name, chk in sorted(rep.checks.items()):
    extra = chk.get("min_depth") or chk.get("failures") or ""
    print(f"{name:24s} {chk['status']:13s} {extra}")
for k, v in sorted(rep.timings.items()):
    print(f"  {k:10s} {v:6.1f}s")
if args.out:
    import json
    with open(args.out, "w") as fh:
        json.dump(rep.to_json(), fh, indent=1, sort_keys=True)
sys.exit({"pass": 0, "inconclusive": 2}.get(rep.status, 1))
