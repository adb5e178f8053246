"""Classical lift of the level-11 weight-2 class at level 33 and its T(q^2) checks."""
import argparse

from ssw_lift.cli import RunConfig, cmd_classical

ap = argparse.ArgumentParser()
ap.add_argument("--window", type=int, default=200)
ap.add_argument("--primes", default="7,13")
ap.add_argument("--psi", default="3", help="primes of the quadratic character")
args = ap.parse_args()

cfg = RunConfig(window=args.window, psi_primes=tuple(int(x) for x in args.psi.split(",")))
rep = cmd_classical(cfg, [int(q) for q in args.primes.split(",")])
for name, chk in sorted(rep.checks.items()):
    print(name, chk["status"], {k: v for k, v in chk.items() if k not in ("status", "cocycle")})
