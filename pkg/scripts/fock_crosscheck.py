"""Truncated Fock-space master equation against the Gaussian steady state."""

import numpy as np

from optosqueeze.dynamics import CouplingProfile, build_rwa_model, steady_state
from optosqueeze.fock_oracle import FockConfig, convergence_check, evolve_dm, moments_from_dm


def main() -> int:
    prof = CouplingProfile(0.01, 0.03)
    cfg = FockConfig(12, 12)
    print(f"{'gamma_m':>8} {'n_th':>5} {'max |dV|':>10} {'N vs N+4':>10}")
    for gamma_m in (0.0, 1e-4):
        for n_th in (0.0, 1.0):
            ref = steady_state(build_rwa_model(prof, 0.05, gamma_m, n_th))
            _, cov = moments_from_dm(evolve_dm(prof, 0.05, gamma_m, n_th, cfg), cfg)
            rep = convergence_check(prof, 0.05, gamma_m, n_th, cfg, extra=4)
            print(f"{gamma_m:8.0e} {n_th:5.1f} {np.max(np.abs(cov - ref.cov)):10.2e} {rep.max_difference:10.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
