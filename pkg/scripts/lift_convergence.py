"""Refinement logs of the ordinary projector for several precisions.

Also prints how far U_p is from acting by the scalar alpha on the full measure
symbol (depth per moment degree) and whether it does on the weight-2 fiber.
"""
import sys
import time

from ssw_lift.dist import lift_ordinary
from ssw_lift.family import locate_member
from ssw_lift.groups import build_presentation

G11, G33 = build_presentation(11), build_presentation(33)
m = locate_member(11, 3, 2, -1, -1, G_N=G11, G_Np=G33)
for M in [int(x) for x in sys.argv[1:]] or [3, 4, 5]:
    P = 3 ** M
    phia = [int(x.c[0]) % P for x in m.stabilized_cochain()]
    t = time.perf_counter()
    Phi, rep = lift_ordinary(G33, phia, 0, 3, M, int(m.alpha.c[0]) % P)
    print(f"M={M} log={rep.log} clean={rep.t2_log} rho_ok={rep.rho_ok} fiber_fixed={rep.fiber_fixed} "
          f"measure_depths={rep.up_fixed_depth} ({time.perf_counter() - t:.1f}s)")
