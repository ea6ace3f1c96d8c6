"""Measured L^p -> L^q decay on the torus against the spectral envelope B(t).

A random mean-zero field is evolved under heat-type propagators and the
ratio ||w(t)||_q / ||w0||_p is compared with the envelope
B(t) = sup_v N(v)^(1/p - 1/q) psi(t; v) built from the counting function.
In the pre-spectral-gap window the envelope decays like t^(-lambda (1/p-1/q))
for classical heat and t^(-beta lambda (1/p-1/q)) for order-beta propagators,
so the fitted log-log slope should track that exponent.  The fitted trace
exponent lambda_hat of the torus model is printed first for reference.

Run: python3 scripts/decay_envelope_study.py
"""

from __future__ import annotations

import numpy as np

from evoscalar import evolve, spectra

SEED = 20240817
DIM = 2
N_GRID = 64
P, Q = 1.5, 6.0
WINDOW = (0.02, 0.5)
N_TIMES = 16


def main() -> None:
    rng = np.random.default_rng(SEED)
    model = spectra.SpectralModel(spectra.TorusLaplacian(DIM))
    fit = spectra.fit_trace_exponent(model, 1e2, 1e4)
    lam_hat = fit["lambda_hat"]
    print(f"torus dimension {DIM}: fitted trace exponent lambda_hat = {lam_hat:.4f} "
          f"(r^2 = {fit['r_squared']:.6f}), Weyl value {DIM / 2:g}")

    w0 = evolve.random_mean_zero(DIM, N_GRID, rng)
    gap = 1.0  # smallest positive eigenvalue of the torus Laplacian
    print(f"\nfield: {DIM}-d torus, N = {N_GRID}, window = {WINDOW}, "
          f"pre-gap guidance t <= 1/lambda_1 = {1.0 / gap:g}")
    print(f"exponent pair (p, q) = ({P:g}, {Q:g}), 1/p - 1/q = {1 / P - 1 / Q:.4f}")

    print(f"\n{'kind':<22} {'slope':>8} {'reference':>10} {'envelope C':>11} "
          f"{'max ratio/B':>12}")
    for kind in (evolve.Heat(), evolve.HeatType(beta=0.5), evolve.HeatType(beta=0.8)):
        beta = 1.0 if isinstance(kind, evolve.Heat) else kind.beta
        ref = -beta * lam_hat * (1.0 / P - 1.0 / Q)
        out = evolve.decay_slope(model, kind, P, Q, w0, WINDOW, n_times=N_TIMES)
        worst = float(np.max(np.asarray(out["ratios"]) / np.asarray(out["bounds"])))
        print(f"{kind!r:<22} {out['slope']:8.4f} {ref:10.4f} "
              f"{out['envelope_constant']:11.4f} {worst:12.4f}")

    # contraction sanity: p = q = 2 must stay below 1 for all time
    out = evolve.decay_slope(model, evolve.Heat(), 2.0, 2.0, w0, (0.1, 5.0), n_times=12)
    print(f"\ncontraction check (p = q = 2): envelope constant "
          f"{out['envelope_constant']:.6f} (must be <= 1)")

    # trajectory table for the classical heat propagator
    out = evolve.decay_slope(model, evolve.Heat(), P, Q, w0, WINDOW, n_times=8)
    print(f"\nheat trajectory, ratio(t) = ||w(t)||_q / ||w0||_p vs B(t):")
    print(f"{'t':>8}  {'ratio':>10}  {'B(t)':>10}  {'ratio/B':>8}")
    for t, ratio, bound in zip(out["times"], out["ratios"], out["bounds"]):
        print(f"{t:8.4f}  {ratio:10.6f}  {bound:10.6f}  {ratio / bound:8.4f}")


if __name__ == "__main__":
    main()
