"""Admissible triples, region geometry, and the subcritical constructor.

A triple (r, q, p) of exponents is admissible for an equation family when
the mixed-norm estimate L^r_t L^q_x <- L^p_x closes; for the heat family the
defining inequality is lambda (1/p - 1/q) < 1/r (strict), time-fractional
flows replace lambda by beta*lambda, and the wave family adds the dual
inequality 1 - beta*lambda*(1/p - 1/q) < 1/r together with r < 2.

`region_sample` scans the (1/q, 1/r) rectangle and cross-checks the observed
emptiness against the analytic threshold lambda* = 2 p0/(2 - p0);
`subcritical_construct` realizes the corollary system rho in the admissible
interval, r = eta rho, q = eta p0 for the nonlinearity exponent eta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .errors import SupercriticalError, ValidationError
from .evolve import Heat, HeatType, WaveType

__all__ = [
    "TripleSpec", "AdmissibilityResult", "is_admissible", "region_sample",
    "subcritical_construct",
]

TripleKind = Union[Heat, HeatType, WaveType]


@dataclass(frozen=True)
class TripleSpec:
    """An exponent triple: r in time, q as space target, p as data space.

    Exponent ranges are judged by is_admissible (malformed triples are
    inadmissible with a reason, never an exception), so construction only
    fixes the numbers and the equation family.
    """

    r: float
    q: float
    p: float
    kind: TripleKind

    def __post_init__(self) -> None:
        if not isinstance(self.kind, (Heat, HeatType, WaveType)):
            raise ValidationError(
                f"kind must be Heat, HeatType, or WaveType, got {self.kind!r}")
        for name in ("r", "q", "p"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and not isinstance(v, bool)):
                raise ValidationError(f"{name} must be a real number")
            object.__setattr__(self, name, float(v))


@dataclass(frozen=True)
class AdmissibilityResult:
    """Boolean verdict with a reason code; truthiness equals the verdict."""

    ok: bool
    reason: str

    def __bool__(self) -> bool:
        return self.ok


def _fail(reason: str) -> AdmissibilityResult:
    return AdmissibilityResult(False, reason)


def is_admissible(t: TripleSpec, lam: float) -> AdmissibilityResult:
    """Admissibility verdict for the triple under trace exponent lam > 0.

    Heat: lam (1/p - 1/q) < 1/r (strict), with 1 < p <= 2 <= q < inf and
    1 <= r < inf.  HeatType(beta): the same with beta*lam.  WaveType(beta):
    1 <= r < 2 and both beta*lam*(1/p-1/q) < 1/r and
    1 - beta*lam*(1/p-1/q) < 1/r.  Malformed triples come back false with a
    reason code; no exceptions.
    """
    if not (lam > 0.0):
        raise ValidationError(f"lam must be > 0, got {lam}")
    if not (1.0 < t.p <= 2.0):
        return _fail("p_out_of_range")
    if not (2.0 <= t.q < math.inf):
        return _fail("q_out_of_range")
    # the inequalities are compared in cross-multiplied form
    # eff*(q - p)*r < p*q so that boundary cases with exactly representable
    # exponents (e.g. p = 1.5, q = 2, r = 1, eff = 6) are decided exactly
    # rather than through rounded reciprocals
    if isinstance(t.kind, WaveType):
        if not (1.0 <= t.r < 2.0):
            return _fail("r_out_of_range")
        scaled_gap = t.kind.beta * lam * (t.q - t.p) * t.r
        target = t.p * t.q
        if not (scaled_gap < target):
            return _fail("scaling_inequality_fails")
        if not (t.r * target - scaled_gap < target):
            return _fail("dual_inequality_fails")
        return AdmissibilityResult(True, "admissible")
    if not (1.0 <= t.r < math.inf):
        return _fail("r_out_of_range")
    eff = lam if isinstance(t.kind, Heat) else t.kind.beta * lam
    if not (eff * (t.q - t.p) * t.r < t.p * t.q):
        return _fail("scaling_inequality_fails")
    return AdmissibilityResult(True, "admissible")


def _analytic_empty(p0: float, lam: float, kind: TripleKind) -> bool:
    """Closed-form emptiness of the admissible region at data exponent p0.

    The smallest reachable exponent gap is 1/p0 - 1/2 (at q = 2), and 1/r
    reaches at most 1, so a triple exists iff eff*(1/p0 - 1/2) < 1 — i.e.
    the region is empty iff eff >= 2 p0/(2 - p0).  At p0 = 2 the gap can
    vanish (heat) or be arbitrarily small (wave), so the region is never
    empty.
    """
    if p0 == 2.0:
        return False
    if isinstance(kind, Heat):
        eff = lam
    else:
        eff = kind.beta * lam
    # cross-multiplied form of eff >= 2 p0/(2 - p0), matching the exact
    # arithmetic of the pointwise check at the corner (q, r) = (2, 1)
    return eff * (2.0 - p0) * 1.0 >= p0 * 2.0


def region_sample(p0: float, lam: float, kind: TripleKind,
                  resolution: int = 64) -> dict:
    """Scan the (1/q, 1/r) rectangle (0, 1/2] x (0, 1] for admissible
    triples with data exponent p0.

    The grid has `resolution` points per axis and always contains the
    corner (1/2, 1) — the triple (r, q) = (1, 2) that witnesses
    non-emptiness near the threshold.  Returns the admissible points, the
    full scan (for CSV export), and the emptiness verdict, which requires
    the scan and the analytic threshold lambda* = 2 p0/(2 - p0) to concur.
    """
    if not (1.0 < p0 <= 2.0):
        raise ValidationError(f"p0 must lie in (1, 2], got {p0}")
    if not (lam > 0.0):
        raise ValidationError(f"lam must be > 0, got {lam}")
    if not (isinstance(resolution, int) and resolution >= 2):
        raise ValidationError("resolution must be an integer >= 2")
    points = []
    grid = []
    for i in range(1, resolution + 1):
        inv_q = 0.5 * i / resolution
        for j in range(1, resolution + 1):
            inv_r = j / resolution
            verdict = is_admissible(
                TripleSpec(1.0 / inv_r, 1.0 / inv_q, p0, kind), lam)
            grid.append((inv_q, inv_r, bool(verdict)))
            if verdict:
                points.append((inv_q, inv_r))
    scan_empty = not points
    analytic = _analytic_empty(p0, lam, kind)
    if not (isinstance(kind, WaveType) and p0 == 2.0):
        # the corner (q, r) = (2, 1) is an exact witness: the scan sees
        # every non-empty region, so the two verdicts cannot disagree
        # short of a logic error
        assert scan_empty == analytic, (scan_empty, analytic, p0, lam, kind)
    # wave at p0 = 2 survives in a thin sliver just right of q = 2 that a
    # coarse scan can miss, hence the conjunction rather than the scan alone
    return {"points": points, "grid": grid, "empty": scan_empty and analytic}


def subcritical_construct(p0: float, lam: float, eta: float,
                          kind: TripleKind) -> dict:
    """The corollary triple for the nonlinearity F(w) = mu |w|^(eta-1) w.

    Picks rho as the midpoint of the admissible interval — [1, L) for Heat,
    [1/beta, L) for HeatType, with L = p0/(eff (eta-1)) — and returns
    {rho, r = eta rho, q = eta p0}, guaranteed admissible.  Requires the
    subcritical condition eta < 1 + p0/lam (SupercriticalError at or above),
    q = eta p0 >= 2 (rejected with a distinct reason otherwise), and for
    p0 < 2 the non-empty-region condition lam < 2 p0/(2 - p0).
    """
    if isinstance(kind, WaveType):
        raise ValidationError(
            "the constructive corollary covers Heat and HeatType only")
    if not isinstance(kind, (Heat, HeatType)):
        raise ValidationError(f"unsupported kind {kind!r}")
    if not (1.0 < p0 <= 2.0):
        raise ValidationError(f"p0 must lie in (1, 2], got {p0}")
    if not (lam > 0.0):
        raise ValidationError(f"lam must be > 0, got {lam}")
    if not (eta > 1.0):
        raise ValidationError(f"eta must be > 1, got {eta}")
    if eta >= 1.0 + p0 / lam:
        raise SupercriticalError(
            f"eta = {eta} is not subcritical: requires eta < 1 + p0/lambda "
            f"= {1.0 + p0 / lam:.6g}")
    if p0 < 2.0 and lam * (2.0 - p0) >= p0 * 2.0:
        raise ValidationError(
            f"reason empty_region: lambda = {lam} >= 2 p0/(2-p0) = "
            f"{2.0 * p0 / (2.0 - p0):.6g}, no admissible triples at "
            f"p0 = {p0}")
    if eta * p0 < 2.0:
        raise ValidationError(
            f"reason q_below_2: q = eta p0 = {eta * p0:.6g} < 2; the "
            f"corollary needs eta >= 2/p0 = {2.0 / p0:.6g}")
    if isinstance(kind, Heat):
        lo = 1.0
        hi = p0 / (lam * (eta - 1.0))
    else:
        lo = 1.0 / kind.beta
        hi = p0 / (kind.beta * lam * (eta - 1.0))
    if not (lo < hi):
        raise ValidationError(
            f"reason empty_interval: rho interval [{lo:.6g}, {hi:.6g}) is "
            "empty")
    rho = 0.5 * (lo + hi)
    r = eta * rho
    q = eta * p0
    assert rho <= r
    verdict = is_admissible(TripleSpec(r, q, p0, kind), lam)
    assert verdict, verdict.reason
    return {"rho": rho, "r": r, "q": q}
