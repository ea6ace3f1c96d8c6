"""Discrete fractional integration and differentiation on uniform grids.

Both schemes are product-integration rules: the singular kernel factor is
integrated exactly over each cell while the data is approximated by a
piecewise polynomial.  This keeps the rules stable for all orders and makes
them exact on the constant (integral) and linear (derivative) data classes.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.signal

from .errors import ValidationError
from .mlfun import gamma
from .sampling import SampledSignal


def _toeplitz_weights(exponent: float, n: int) -> np.ndarray:
    """Cell moments c_m = m^e - (m-1)^e for m = 1..n (uniform grid, dt=1)."""
    m = np.arange(0, n + 1, dtype=float)
    powers = m**exponent
    return np.diff(powers)


def _require_from_origin(f: SampledSignal, what: str) -> None:
    if f.t0 != 0.0:
        raise ValidationError(
            f"{what} requires a signal sampled from t = 0, got t0 = {f.t0:g}")


def rl_integral(beta: float, f: SampledSignal) -> SampledSignal:
    """Riemann-Liouville fractional integral of order beta > 0.

    (I^beta f)(t) = (1/Gamma(beta)) int_0^t (t-s)^{beta-1} f(s) ds, evaluated
    at the grid nodes of `f` by the product-rectangle rule: f is frozen at
    the left endpoint of each cell and the kernel moment integrated exactly.
    First-order accurate; exact when f is constant.
    """
    if not (beta > 0 and np.isfinite(beta)):
        raise ValidationError(f"beta must be positive, got {beta}")
    if not isinstance(f, SampledSignal):
        raise ValidationError("f must be a SampledSignal")
    _require_from_origin(f, "rl_integral")

    n = len(f)
    c = _toeplitz_weights(beta, n - 1)
    scale = f.dt**beta / gamma(beta + 1.0)
    # out[k] = scale * sum_{m=1..k} c_m f[k-m]
    conv = scipy.signal.fftconvolve(f.values[:-1], c)[: n - 1]
    out = np.empty(n)
    out[0] = 0.0
    out[1:] = scale * conv
    return SampledSignal(dt=f.dt, values=out, t0=0.0,
                         meta={"operation": "rl_integral", "beta": beta,
                               "scheme": "product-rectangle", "order": 1})


def caputo_derivative(beta: float, f: SampledSignal,
                      init: Sequence[float]) -> SampledSignal:
    """Caputo fractional derivative of order beta in (0, 2).

    For 0 < beta < 1 the classical L1 scheme is used: cell slopes of f are
    frozen and the weakly singular weight integrated exactly.  For
    1 <= beta < 2 the derivative is computed as the order-(beta-1) Caputo
    derivative of a second-order discrete first derivative of f, seeded at
    t = 0 with init[1] when supplied.

    `init` must carry floor(beta) + 1 initial values: [f(0)] below order one,
    [f(0), f'(0)] at or above.  The scheme produces no value at t = 0; the
    first node is extrapolated from its neighbor and this is flagged in the
    output metadata.
    """
    if not (0.0 < beta < 2.0):
        raise ValidationError(f"beta must lie in (0, 2), got {beta}")
    if not isinstance(f, SampledSignal):
        raise ValidationError("f must be a SampledSignal")
    _require_from_origin(f, "caputo_derivative")
    init = [float(x) for x in init]
    need = int(np.floor(beta)) + 1
    if len(init) != need:
        raise ValidationError(
            f"init must carry {need} value(s) for order {beta:g}, "
            f"got {len(init)}")
    if len(f) < 3:
        raise ValidationError("caputo_derivative needs at least 3 samples")

    n = len(f)
    if beta < 1.0:
        slopes = np.diff(f.values) / f.dt
        frac = beta
    else:
        # discrete first derivative: one-sided start (or exact initial slope),
        # central interior, second-order backward at the right edge
        d = np.empty(n)
        d[0] = init[1]
        d[1:-1] = (f.values[2:] - f.values[:-2]) / (2.0 * f.dt)
        d[-1] = (3.0 * f.values[-1] - 4.0 * f.values[-2]
                 + f.values[-3]) / (2.0 * f.dt)
        frac = beta - 1.0
        if frac == 0.0:
            return SampledSignal(dt=f.dt, values=d, t0=0.0,
                                 meta={"operation": "caputo_derivative",
                                       "beta": beta, "scheme": "central"})
        slopes = np.diff(d) / f.dt
    c = _toeplitz_weights(1.0 - frac, n - 1)
    scale = f.dt ** (1.0 - frac) / gamma(2.0 - frac)
    conv = scipy.signal.fftconvolve(slopes, c)[: n - 1]
    out = np.empty(n)
    out[1:] = scale * conv
    out[0] = out[1]
    return SampledSignal(dt=f.dt, values=out, t0=0.0,
                         meta={"operation": "caputo_derivative", "beta": beta,
                               "scheme": "L1", "order": 2.0 - frac,
                               "t0_extrapolated": True})
