"""Uniformly sampled signals: the carrier type for kernels, resolvents and
norm trajectories."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """A function sampled on the uniform grid ``t0, t0+dt, ..., t0+(n-1)*dt``.

    Values may be real or complex; the grid step must be positive and every
    sample finite.  ``meta`` carries scheme annotations (e.g. extrapolation
    flags) and never participates in numerical identity.
    """

    dt: float
    values: np.ndarray
    t0: float = 0.0
    meta: Mapping[str, object] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values))
        if not (self.dt > 0):
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.values.ndim != 1 or self.values.size < 2:
            raise ValidationError("values must be a 1-D array of length >= 2")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("all samples must be finite")

    def __len__(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.size)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (self.values.size - 1)

    @classmethod
    def from_function(
        cls,
        f: Callable[[np.ndarray], np.ndarray],
        T: float,
        dt: float,
        t0: float = 0.0,
    ) -> "SampledSignal":
        """Sample ``f`` on the grid covering ``[t0, t0+T]`` with step ``dt``."""
        n = int(round(T / dt)) + 1
        t = t0 + dt * np.arange(n)
        return cls(dt=dt, values=np.asarray(f(t), dtype=float), t0=t0)

    def with_meta(self, **entries: object) -> "SampledSignal":
        merged = dict(self.meta or {})
        merged.update(entries)
        return SampledSignal(self.dt, self.values, self.t0, merged)


def uniform_times(T: float, dt: float) -> np.ndarray:
    """Grid 0, dt, ..., n*dt with n = round(T/dt)."""
    if not (T > 0 and dt > 0):
        raise ValidationError("T and dt must be positive")
    n = int(round(T / dt))
    if n < 1:
        raise ValidationError("grid must contain at least one step")
    return dt * np.arange(n + 1)
