"""Convergence study for the scalar resolvent march on power-law kernels.

For the kernel k(t) = t^(beta-1)/Gamma(beta) the relaxation function has the
closed form s(t; lambda) = E_beta(-lambda t^beta), which makes the family an
exact yardstick for the product-integration march.  The script refines dt,
prints max errors over [0, T] and the observed order between successive
refinements, then spot-checks the uniform bound s(t) <= 1/(1 + lambda M(t))
across the completely positive catalog.

Run: python3 scripts/resolvent_convergence.py
"""

from __future__ import annotations

import numpy as np

from evoscalar import kernels, resolvent
from evoscalar.mlfun import MLParams, mittag_leffler

T = 5.0
LAM = 1.0
BETAS = [0.3, 0.5, 0.8, 1.0]
DTS = [4e-3, 2e-3, 1e-3, 5e-4]


def exact(beta: float, ts: np.ndarray) -> np.ndarray:
    return np.asarray(mittag_leffler(MLParams(beta), -LAM * ts**beta))


def main() -> None:
    print(f"resolvent march vs closed form, lambda = {LAM:g}, T = {T:g}")
    for beta in BETAS:
        kernel = kernels.PowerLaw(beta)
        errs = []
        for dt in DTS:
            sol = resolvent.resolvent_batch(kernel, [LAM], T, dt)[0]
            errs.append(float(np.max(np.abs(sol.values - exact(beta, sol.times)))))
        print(f"\nbeta = {beta:g}")
        print(f"{'dt':>8}  {'max error':>12}  {'order':>6}")
        for i, (dt, err) in enumerate(zip(DTS, errs)):
            order = "" if i == 0 else f"{np.log2(errs[i - 1] / err):6.2f}"
            print(f"{dt:8.0e}  {err:12.3e}  {order:>6}")

    print("\nuniform bound s(t) <= 1/(1 + lambda M(t)) across the CP catalog")
    print(f"{'kernel':<42}  {'max violation':>14}  {'pass':>5}")
    for kernel in kernels.pc_catalog():
        req = resolvent.ResolventRequest(kernel, 3.0, 4.0, 2e-3)
        chk = resolvent.resolvent_bound_check(req)
        print(f"{kernel!r:<42}  {chk['max_violation']:14.3e}  {str(chk['pass']):>5}")


if __name__ == "__main__":
    main()
