"""Two-step preparation through the normal modes, scanning the tunnelling rate."""

import math
import sys
from dataclasses import replace

from optosqueeze import analytics as an
from optosqueeze.protocols import TwoStepSchedule, run_setup2
from optosqueeze.validation import EXAMPLE


def main(argv=None) -> int:
    couplings = [float(v) for v in (argv or sys.argv[1:] or ["3", "6", "12"])]
    r = an.squeeze_param(EXAMPLE.chi1, EXAMPLE.chi2)
    t_min = an.t_min(EXAMPLE.kappa, an.transfer_rate(EXAMPLE.chi1, EXAMPLE.chi2))
    print(f"target epr_min {2 * math.exp(-2 * r):.5f}, target r {r:.5f}, t_min {t_min:.1f}")
    print(f"{'j12':>6} {'epr_min':>9} {'b1 r':>9} {'b2 r':>9}")
    for j12 in couplings:
        p = replace(EXAMPLE, j12=j12)
        res = run_setup2(p, TwoStepSchedule.standard(p, t_switch=t_min), grid=3)
        step1 = res.diagnostics["after_step1"]
        print(f"{j12:6.1f} {res.epr_min_final:9.5f} {step1['b1_r']:9.5f} {step1['b2_r']:9.5f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
