"""Text atlas of admissible exponent regions in the (1/q, 1/r) square.

For a trace exponent lambda and initial integrability p0 the admissible
triples (r, q, p0) occupy a corner of the unit square in the coordinates
(1/q, 1/r).  The script draws that region for heat-type and wave-type
propagators, shows how the region shrinks as lambda grows and vanishes at
the critical threshold lambda* = 2 p0 / (2 - p0), and prints the
constructive triple produced for subcritical nonlinearities.

Run: python3 scripts/admissible_region_atlas.py
"""

from __future__ import annotations

from evoscalar import admiss
from evoscalar.evolve import Heat, HeatType, WaveType

RESOLUTION = 24


def draw(p0: float, lam: float, kind) -> None:
    sample = admiss.region_sample(p0, lam, kind, resolution=RESOLUTION)
    flagged = {(iq, ir) for iq, ir, ok in sample["grid"] if ok}
    rows = sorted({ir for _, ir, _ in sample["grid"]}, reverse=True)
    cols = sorted({iq for iq, _, _ in sample["grid"]})
    print(f"\n{kind!r}, p0 = {p0:g}, lambda = {lam:g} "
          f"({len(sample['points'])} admissible nodes, empty = {sample['empty']})")
    print("  1/r axis down, 1/q axis right;  # admissible, . not")
    for ir in rows:
        line = "".join("#" if (iq, ir) in flagged else "." for iq in cols)
        print(f"  1/r={ir:5.3f}  {line}")
    print(f"  {'':>10} 1/q from {cols[0]:.3f} to {cols[-1]:.3f}")


def main() -> None:
    # heat: region shrinks with lambda and empties at lambda* = 2 p0/(2 - p0)
    p0 = 1.5
    lam_star = 2.0 * p0 / (2.0 - p0)
    print(f"p0 = {p0:g}: critical lambda* = {lam_star:g}")
    for lam in (1.0, 3.0, 5.5, lam_star):
        draw(p0, lam, Heat())

    # heat-type propagators rescale lambda by the order beta
    draw(p0, 8.0, HeatType(beta=0.5))

    # wave-type adds the dual constraint r < 2, cutting the region in half
    draw(2.0, 1.0, WaveType(beta=1.5))

    # constructive triples for subcritical nonlinearities w' = mu |w|^(eta-1) w
    print("\nconstructive admissible triples (rho, r, q):")
    print(f"{'kind':<22} {'p0':>4} {'lam':>5} {'eta':>4}   triple")
    for kind, p0c, lam, eta in [
        (Heat(), 2.0, 1.0, 2.0),
        (Heat(), 2.0, 0.5, 3.0),
        (HeatType(beta=0.5), 2.0, 1.0, 2.0),
        (HeatType(beta=0.5), 2.0, 0.5, 3.0),
        (Heat(), 1.8, 2.0, 1.5),
    ]:
        tri = admiss.subcritical_construct(p0c, lam, eta, kind)
        verdict = admiss.is_admissible(
            admiss.TripleSpec(tri["r"], tri["q"], p0c, kind), lam)
        print(f"{kind!r:<22} {p0c:4.1f} {lam:5.2f} {eta:4.1f}   "
              f"rho={tri['rho']:g} r={tri['r']:g} q={tri['q']:g} "
              f"(admissible: {verdict.ok})")


if __name__ == "__main__":
    main()
