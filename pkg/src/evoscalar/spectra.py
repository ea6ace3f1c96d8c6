"""Spectral surrogates: eigenvalue streams with counting functions.

A SpectralModel is an immutable, enumerated stand-in for the spectrum of a
positive operator.  Its counting function

    N(s) = total multiplicity of eigenvalues strictly inside (0, s)

realizes the trace condition N(s) <= C s^lambda; the exponent lambda drives
every decay rate downstream.  The zero eigenvalue (constants on a compact
group) is never counted — the defining interval is open at 0.

Kinds:
  * TorusLaplacian(n): eigenvalues |k|^2, k in Z^n, on T^n = R^n/(2 pi Z)^n
    (integer eigenvalues, so brute-force counting is exact);
  * PrescribedExponent(lam): eigenvalues j^(1/lam), the tight realization of
    the trace condition with N(s) = ceil(s^lam) - 1 exactly;
  * GeometricSpectrum(rho, mu): eigenvalues rho^(mu j) with multiplicity
    (rho - 1) rho^(j-1), the lacunary model with exponent 1/mu;
  * Explicit: a user-supplied (eigenvalue, multiplicity) list.

Enumeration happens once at construction, up to a truncation horizon
(default 10^6 modes); queries beyond the horizon raise rather than
extrapolate.  `catalog_exponent` maps the named operator families to their
trace exponents; `fit_trace_exponent` recovers the exponent empirically from
log N vs log s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
import scipy.signal

from .errors import DegenerateWindowError, HorizonError, ValidationError

DEFAULT_TRUNCATION = 10**6


@dataclass(frozen=True)
class TorusLaplacian:
    """Laplacian on T^n with eigenvalues |k|^2, k in Z^n."""

    n: int

    def __post_init__(self) -> None:
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValidationError(f"dimension must be an integer >= 1, "
                                  f"got {self.n!r}")

    @property
    def default_lambda(self) -> float:
        return self.n / 2.0

    def enumerate(self, truncation: int) -> tuple[np.ndarray, np.ndarray]:
        if self.n == 1:
            k_max = (truncation - 1) // 2
            if k_max < 1:
                raise ValidationError("truncation too small for T^1")
            k = np.arange(1, k_max + 1, dtype=float)
            eigs = np.concatenate(([0.0], k * k))
            mults = np.concatenate(([1], np.full(k_max, 2, dtype=np.int64)))
            return eigs, mults
        # representation numbers r_n(m) = #{k in Z^n : |k|^2 = m} up to a
        # cutoff sized from the ball volume, via iterated theta-series
        # convolution (exact integer counts)
        vol = math.pi ** (self.n / 2.0) / math.gamma(self.n / 2.0 + 1.0)
        cutoff = int(1.15 * (truncation / vol) ** (2.0 / self.n)) + 16
        j = np.arange(1, math.isqrt(cutoff) + 1)
        r1 = np.zeros(cutoff + 1)
        r1[0] = 1.0
        r1[j * j] = 2.0
        rn = r1
        for _ in range(self.n - 1):
            rn = scipy.signal.fftconvolve(rn, r1)[:cutoff + 1]
        rn = np.rint(rn).astype(np.int64)
        cum = np.cumsum(rn)
        complete = np.nonzero(cum <= truncation)[0]
        if complete.size <= 1:
            raise ValidationError(f"truncation too small for T^{self.n}")
        top = complete[-1]
        m = np.nonzero(rn[:top + 1])[0]
        return m.astype(float), rn[m]


@dataclass(frozen=True)
class PrescribedExponent:
    """Eigenvalues j^(1/lam): the spectrum whose counting function is exactly
    N(s) = ceil(s^lam) - 1."""

    lam: float

    def __post_init__(self) -> None:
        if not (self.lam > 0.0):
            raise ValidationError(f"lam must be > 0, got {self.lam}")

    @property
    def default_lambda(self) -> float:
        return self.lam

    def enumerate(self, truncation: int) -> tuple[np.ndarray, np.ndarray]:
        j = np.arange(0, truncation + 1, dtype=float)
        eigs = j ** (1.0 / self.lam)
        return eigs, np.ones(truncation + 1, dtype=np.int64)


@dataclass(frozen=True)
class GeometricSpectrum:
    """Lacunary spectrum rho^(mu j) with multiplicity (rho-1) rho^(j-1)."""

    rho: int
    mu: float

    def __post_init__(self) -> None:
        if not (isinstance(self.rho, int) and self.rho >= 2):
            raise ValidationError(f"rho must be an integer >= 2, "
                                  f"got {self.rho!r}")
        if not (self.mu > 0.0):
            raise ValidationError(f"mu must be > 0, got {self.mu}")

    @property
    def default_lambda(self) -> float:
        return 1.0 / self.mu

    def enumerate(self, truncation: int) -> tuple[np.ndarray, np.ndarray]:
        # total multiplicity through level J is rho^J - 1 (plus the 0 mode)
        levels = int(math.floor(math.log(truncation) / math.log(self.rho)))
        if levels < 1:
            raise ValidationError("truncation too small for the first level")
        j = np.arange(1, levels + 1, dtype=float)
        eigs = np.concatenate(([0.0], float(self.rho) ** (self.mu * j)))
        mults = np.concatenate(
            ([1], (self.rho - 1) * self.rho ** (j.astype(np.int64) - 1)))
        return eigs, mults


@dataclass(frozen=True)
class Explicit:
    """A literal (eigenvalue, multiplicity) list."""

    pairs: tuple[tuple[float, int], ...]

    def __post_init__(self) -> None:
        pairs = tuple((float(e), int(m)) for e, m in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if not pairs:
            raise ValidationError("Explicit spectrum needs at least one pair")
        if any(e < 0 or not np.isfinite(e) for e, _ in pairs):
            raise ValidationError("eigenvalues must be finite and >= 0")
        if any(m < 1 for _, m in pairs):
            raise ValidationError("multiplicities must be >= 1")

    @property
    def default_lambda(self) -> Optional[float]:
        return None

    def enumerate(self, truncation: int) -> tuple[np.ndarray, np.ndarray]:
        eigs = np.array([e for e, _ in self.pairs])
        mults = np.array([m for _, m in self.pairs], dtype=np.int64)
        order = np.argsort(eigs, kind="stable")
        eigs, mults = eigs[order], mults[order]
        keep = np.nonzero(np.cumsum(mults) <= truncation)[0]
        if keep.size == 0:
            raise ValidationError("truncation smaller than the first level")
        return eigs[:keep[-1] + 1], mults[:keep[-1] + 1]


SpectralKind = Union[TorusLaplacian, PrescribedExponent, GeometricSpectrum,
                     Explicit]


@dataclass(frozen=True)
class SpectralModel:
    """An enumerated spectrum with its trace exponent.

    `nominal_lambda` defaults to the kind's own exponent (n/2, lam, 1/mu);
    Explicit spectra must state theirs.
    """

    kind: SpectralKind
    truncation: int = DEFAULT_TRUNCATION
    nominal_lambda: Optional[float] = None
    _table: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (isinstance(self.truncation, int) and self.truncation >= 8):
            raise ValidationError(
                f"truncation must be an integer >= 8, got {self.truncation!r}")
        if self.nominal_lambda is None:
            object.__setattr__(self, "nominal_lambda",
                               self.kind.default_lambda)
        if self.nominal_lambda is None:
            raise ValidationError(
                "Explicit spectra need an explicit nominal_lambda")
        if not (self.nominal_lambda > 0.0):
            raise ValidationError(
                f"nominal_lambda must be > 0, got {self.nominal_lambda}")
        eigs, mults = self.kind.enumerate(self.truncation)
        if np.any(np.diff(eigs) < 0):
            raise AssertionError("enumeration not sorted")
        pos = eigs > 0.0
        pos_eigs = eigs[pos]
        pos_cum = np.cumsum(mults[pos], dtype=np.int64)
        object.__setattr__(self, "_table", (eigs, mults, pos_eigs, pos_cum))

    @property
    def eigenvalues(self) -> np.ndarray:
        """Distinct enumerated eigenvalues, nondecreasing (zero included)."""
        return self._table[0]

    @property
    def multiplicities(self) -> np.ndarray:
        return self._table[1]

    @property
    def horizon(self) -> float:
        """Largest enumerated eigenvalue; queries beyond it raise."""
        return float(self._table[0][-1])

    @property
    def spectral_gap(self) -> float:
        """Smallest positive eigenvalue."""
        pos_eigs = self._table[2]
        if pos_eigs.size == 0:
            raise ValidationError("spectrum has no positive eigenvalues")
        return float(pos_eigs[0])


def counting_function(m: SpectralModel, s) -> float:
    """N(s): total multiplicity of eigenvalues strictly inside (0, s).

    Accepts a scalar or an array of thresholds; raises HorizonError when any
    threshold exceeds the enumerated range.
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0.0) or not np.all(np.isfinite(s_arr)):
        raise ValidationError("thresholds must be finite and >= 0")
    if np.any(s_arr > m.horizon):
        raise HorizonError(
            f"threshold {float(np.max(s_arr))} beyond the enumeration "
            f"horizon {m.horizon}; raise the truncation")
    if isinstance(m.kind, PrescribedExponent):
        out = np.maximum(np.ceil(s_arr ** m.kind.lam) - 1.0, 0.0)
        return float(out) if s_arr.ndim == 0 else out
    _, _, pos_eigs, pos_cum = m._table
    idx = np.searchsorted(pos_eigs, s_arr, side="left")
    cum = np.concatenate(([0], pos_cum))
    out = cum[idx].astype(float)
    return float(out) if s_arr.ndim == 0 else out


_CATALOG = {
    "euclidean_laplacian": (("n",), lambda p: p["n"] / 2.0),
    "compact_sublaplacian": (("Q",), lambda p: p["Q"] / 2.0),
    "heisenberg_sublaplacian": (("n",), lambda p: p["n"] + 1.0),
    "rockland": (("Q", "nu"), lambda p: p["Q"] / p["nu"]),
    "engel_D1": ((), lambda p: 3.0),
    "cartan_D2": ((), lambda p: 4.5),
    "subcoercive": (("Q_star", "m"), lambda p: p["Q_star"] / p["m"]),
    "vladimirov": (("mu",), lambda p: 1.0 / p["mu"]),
}


def catalog_exponent(operator_name: str, params: Optional[dict] = None
                     ) -> float:
    """Trace exponent of the named operator family.

    Entries: euclidean_laplacian(n) -> n/2, compact_sublaplacian(Q) -> Q/2,
    heisenberg_sublaplacian(n) -> n+1, rockland(Q, nu) -> Q/nu,
    engel_D1 -> 3, cartan_D2 -> 9/2, subcoercive(Q_star, m) -> Q_star/m,
    vladimirov(mu) -> 1/mu.
    """
    params = dict(params or {})
    if operator_name not in _CATALOG:
        raise ValidationError(
            f"unknown operator {operator_name!r}; catalog entries: "
            + ", ".join(sorted(_CATALOG)))
    required, rule = _CATALOG[operator_name]
    missing = [k for k in required if k not in params]
    extra = [k for k in params if k not in required]
    if missing or extra:
        raise ValidationError(
            f"{operator_name} takes parameters {list(required)}; "
            f"missing {missing}, unexpected {extra}")
    vals = {k: float(v) for k, v in params.items()}
    if any(v <= 0 for v in vals.values()):
        raise ValidationError("catalog parameters must be positive")
    return float(rule(vals))


def fit_trace_exponent(m: SpectralModel, s_min: float, s_max: float,
                       n_points: int = 16) -> dict:
    """Least-squares slope of log N(s) vs log s over log-spaced samples.

    Returns {"lambda_hat", "r_squared"}.  The window must start where the
    spectrum has already begun (N(s_min) > 0), else the fit is degenerate.
    """
    if not (0.0 < s_min < s_max):
        raise ValidationError(f"need 0 < s_min < s_max, got [{s_min}, "
                              f"{s_max}]")
    if n_points < 8:
        raise ValidationError(f"need n_points >= 8, got {n_points}")
    s = np.geomspace(s_min, s_max, int(n_points))
    counts = counting_function(m, s)
    if counts[0] == 0.0:
        raise DegenerateWindowError(
            f"N({s_min}) = 0: the fit window starts below the first "
            "eigenvalue")
    x = np.log(s)
    y = np.log(counts)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r_squared = 1.0 if ss_tot == 0.0 and ss_res < 1e-20 else \
        (0.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot)
    return {"lambda_hat": float(slope), "r_squared": float(r_squared)}


def load_explicit(path: str) -> Explicit:
    """Explicit spectrum from text: header `eigenvalue,multiplicity`, then
    comma-separated rows."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    stripped = [(i + 1, ln.strip()) for i, ln in enumerate(lines)
                if ln.strip()]
    if not stripped:
        raise ValidationError(f"{path}: empty spectrum file")
    header_no, header = stripped[0]
    if header.replace(" ", "") != "eigenvalue,multiplicity":
        raise ValidationError(
            f"{path}:{header_no}: expected header 'eigenvalue,multiplicity', "
            f"got {header!r}")
    pairs = []
    for line_no, line in stripped[1:]:
        fields = line.split(",")
        if len(fields) != 2:
            raise ValidationError(
                f"{path}:{line_no}: expected 'eigenvalue,multiplicity', "
                f"got {line!r}")
        try:
            eig = float(fields[0])
            mult = int(fields[1])
        except ValueError as exc:
            raise ValidationError(f"{path}:{line_no}: {exc}") from None
        pairs.append((eig, mult))
    return Explicit(tuple(pairs))
