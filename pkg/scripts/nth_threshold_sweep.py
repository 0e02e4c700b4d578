"""Steady-state epr_min against n_th for setup I, with the closed form alongside."""

import sys

import numpy as np

from optosqueeze import analytics as an
from optosqueeze.dynamics import SystemParams
from optosqueeze.protocols import sweep
from optosqueeze.validation import nth_root


def main(argv=None) -> int:
    n_points = int((argv or sys.argv[1:] or ["11"])[0])
    base = SystemParams(kappa=0.05, gamma_m=1e-4, n_th=0.0, chi1=0.01, chi2=0.03)
    rows = sweep(base, "n_th", np.linspace(0.0, 100.0, n_points), grid=2)
    print(f"{'n_th':>8} {'simulated':>12} {'closed form':>12}")
    for row in rows:
        print(f"{row.value:8.2f} {row.summary['epr_min_steady']:12.6f} {row.summary['epr_min_predicted']:12.6f}")
    r = an.squeeze_param(base.chi1, base.chi2)
    G = an.transfer_rate(base.chi1, base.chi2)
    print(f"simulated threshold      {nth_root(base):.4f}")
    print(f"exact threshold          {an.nth_max_setup1(r, an.d0(base.kappa, base.gamma_m, G)):.4f}")
    print(f"leading-order d0         {an.nth_max_setup1(r, an.d0_approx(base.kappa, base.gamma_m, G)):.4f}")
    print(f"approximate formula      {an.nth_max_setup1_approx(base.kappa, base.gamma_m, base.chi1, base.chi2):.4f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
