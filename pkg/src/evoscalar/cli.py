"""Command-line driver for the library.

Each subcommand maps onto one module: `ml`/`mlbound` onto the
Mittag-Leffler evaluator, `fracderiv` onto the fractional calculus
operators, `sonine`/`resolvent`/`catalog` onto the kernel and resolvent
machinery, `countfit` onto spectral counting, `decay`/`bound` onto the
L^p -> L^q envelopes, `region` onto admissible-triple geometry, and
`picard` onto the nonlinear fixed-point solver.

Conventions shared by every subcommand:

* parameters come from long flags, optionally seeded from a flat
  ``key = value`` config file (``--config``); explicit flags win;
* data artifacts (CSV or field text) go to ``--output`` and are written
  atomically (temp file + rename); a ``<output>.meta.json`` sidecar holds
  {"command", "config", "summary"} so the data files themselves stay
  byte-identical across reruns of the same configuration;
* one summary line is printed on success; failure reasons go to stderr;
* exit codes: 0 success, 1 validation error, 2 numerical failure
  (divergence or an accuracy target missed);
* ``--selftest`` runs the mapped module's built-in checks and ignores
  other flags.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import admiss, evolve, fraccalc, kernels, mlfun, resolvent, spectra
from .errors import AccuracyError, NumericsError, ValidationError
from .sampling import SampledSignal

__all__ = ["load_config", "main", "run"]


# ---------------------------------------------------------------------------
# Value parsers
# ---------------------------------------------------------------------------

def _parse_real(text: str) -> float:
    """Real number; fraction strings like '4/3' are accepted exactly."""
    t = text.strip()
    try:
        return float(Fraction(t))
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return float(t)
    except ValueError:
        raise ValidationError(f"cannot parse real number {text!r}") from None


def _parse_scalar(text: str):
    """Real or complex scalar, e.g. '2.5', '4/3', '1+2j'."""
    t = text.strip()
    try:
        return float(Fraction(t))
    except (ValueError, ZeroDivisionError):
        pass
    try:
        c = complex(t.replace(" ", ""))
    except ValueError:
        raise ValidationError(f"cannot parse scalar {text!r}") from None
    return c.real if c.imag == 0.0 else c


def _parse_count(text: str) -> int:
    t = text.strip()
    try:
        return int(t)
    except ValueError:
        pass
    try:
        f = float(t)
    except ValueError:
        raise ValidationError(f"cannot parse integer {text!r}") from None
    if not f.is_integer():
        raise ValidationError(f"expected an integer, got {text!r}")
    return int(f)


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"cannot parse boolean {text!r}")


def _split_params(text: str, n: int, what: str) -> list:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != n:
        raise ValidationError(
            f"{what} takes {n} parameter(s), got {text!r}")
    return [_parse_real(p) for p in parts]


def _parse_kind(text: str):
    """Propagator family: heat | heattype:BETA | wavetype:BETA |
    schrodingertype:BETA."""
    name, _, params = text.strip().partition(":")
    name = name.strip().lower().replace("-", "").replace("_", "")
    if name == "heat":
        if params:
            raise ValidationError("heat takes no parameter")
        return evolve.Heat()
    if name == "heattype":
        return evolve.HeatType(beta=_split_params(params, 1, "heattype")[0])
    if name == "wavetype":
        return evolve.WaveType(beta=_split_params(params, 1, "wavetype")[0])
    if name == "schrodingertype":
        return evolve.SchrodingerType(
            beta=_split_params(params, 1, "schrodingertype")[0])
    raise ValidationError(
        f"unknown propagator kind {text!r}; expected heat, heattype:BETA, "
        "wavetype:BETA, or schrodingertype:BETA")


def _parse_kernel(text: str):
    """Kernel literal: constant:C | powerlaw:BETA | caputodual:BETA |
    rayleighstokes:BETA,GAMMA | catalog:INDEX."""
    name, _, params = text.strip().partition(":")
    name = name.strip().lower().replace("-", "").replace("_", "")
    if name == "constant":
        return kernels.Constant(c=_split_params(params or "1", 1,
                                                "constant")[0])
    if name == "powerlaw":
        return kernels.PowerLaw(beta=_split_params(params, 1, "powerlaw")[0])
    if name == "caputodual":
        return kernels.CaputoDual(
            beta=_split_params(params, 1, "caputodual")[0])
    if name == "rayleighstokes":
        beta, gamma = _split_params(params, 2, "rayleighstokes")
        return kernels.RayleighStokes(beta=beta, gamma=gamma)
    if name == "catalog":
        idx = _parse_count(params or "?")
        cat = kernels.pc_catalog()
        if not (0 <= idx < len(cat)):
            raise ValidationError(
                f"catalog index {idx} out of range 0..{len(cat) - 1}")
        return cat[idx]
    raise ValidationError(
        f"unknown kernel {text!r}; expected constant:C, powerlaw:BETA, "
        "caputodual:BETA, rayleighstokes:BETA,GAMMA, or catalog:INDEX")


def _parse_model_kind(text: str):
    """Spectral model: torus:N | prescribed:LAMBDA | geometric:RHO,MU |
    explicit:PATH."""
    name, _, params = text.strip().partition(":")
    name = name.strip().lower()
    if name == "torus":
        return spectra.TorusLaplacian(n=_parse_count(params or "?"))
    if name == "prescribed":
        return spectra.PrescribedExponent(
            lam=_split_params(params, 1, "prescribed")[0])
    if name == "geometric":
        rho, mu = _split_params(params, 2, "geometric")
        if not float(rho).is_integer():
            raise ValidationError(
                f"geometric ratio must be an integer, got {rho}")
        return spectra.GeometricSpectrum(rho=int(rho), mu=mu)
    if name == "explicit":
        if not params:
            raise ValidationError("explicit model needs a CSV path")
        return spectra.load_explicit(params)
    raise ValidationError(
        f"unknown spectral model {text!r}; expected torus:N, "
        "prescribed:LAMBDA, geometric:RHO,MU, or explicit:PATH")


def _build_model(ns: dict) -> spectra.SpectralModel:
    return spectra.SpectralModel(kind=_parse_model_kind(ns["model"]),
                                 truncation=ns["truncation"],
                                 nominal_lambda=ns.get("nominal_lambda"))


# ---------------------------------------------------------------------------
# Deterministic artifact writing
# ---------------------------------------------------------------------------

def _format_cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (complex, np.complexfloating)) and v.imag != 0.0:
        return repr(complex(v))
    if isinstance(v, (complex, np.complexfloating)):
        return repr(float(v.real))
    return repr(float(v))


def _write_atomic(path: str, text: str) -> None:
    """Write text to path via a temp file + rename in the same directory."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".evoscalar-",
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _write_csv(path: str, header: list, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_format_cell(c) for c in row))
    _write_atomic(path, "\n".join(lines) + "\n")


def _json_safe(v):
    if v is None or isinstance(v, (bool, int, str)):
        return v
    if isinstance(v, float):
        return v
    return str(v)


def _write_sidecar(output: str, command: str, config: dict,
                   summary: str) -> None:
    payload = {
        "command": command,
        "config": {k: _json_safe(v) for k, v in sorted(config.items())},
        "summary": summary,
    }
    _write_atomic(output + ".meta.json",
                  json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------

def load_config(path: str, known_keys=None) -> dict:
    """Read a flat ``key = value`` config file.

    Dashes in keys are normalized to underscores.  Blank lines and lines
    starting with ``#`` are skipped.  A line without ``=``, a duplicate
    key, or (when `known_keys` is given) an unrecognized key raises a
    ValidationError naming the file, line number, and key.  Values are
    returned as raw strings; conversion happens against the option types
    of the consuming subcommand.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            raw_lines = fh.readlines()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path!r}: {exc}") from None
    values: dict = {}
    for line_no, raw in enumerate(raw_lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(
                f"{path}:{line_no}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if not key:
            raise ValidationError(f"{path}:{line_no}: empty key")
        if known_keys is not None and key not in known_keys:
            raise ValidationError(
                f"{path}:{line_no}: unknown key {key!r}")
        if key in values:
            raise ValidationError(
                f"{path}:{line_no}: duplicate key {key!r}")
        values[key] = value
    return values


# ---------------------------------------------------------------------------
# Option tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Opt:
    """One long option: conversion, default, and config-file key."""

    flag: str
    conv: Optional[Callable[[str], object]]
    default: object = None
    required: bool = False
    help: str = ""

    @property
    def dest(self) -> str:
        # `lambda` is a keyword, so the trace-exponent flag stores to `lam`
        name = self.flag.replace("-", "_")
        return "lam" if name == "lambda" else name


_COMMON = (
    _Opt("output", str, None,
         help="artifact path; a .meta.json sidecar is written next to it"),
    _Opt("config", str, None,
         help="flat 'key = value' file; explicit flags take precedence"),
    _Opt("selftest", None, False,
         help="run this subcommand's built-in checks and exit"),
)

_COMMANDS: dict = {
    "ml": ("evaluate the two-parameter Mittag-Leffler function", (
        _Opt("alpha", _parse_real, required=True, help="first parameter > 0"),
        _Opt("delta", _parse_real, 1.0, help="second parameter"),
        _Opt("z", _parse_scalar, required=True,
             help="argument (real or complex, e.g. -3 or 1+2j)"),
        _Opt("rtol", _parse_real, 1e-10, help="relative tolerance"),
    )),
    "mlbound": ("uniform algebraic-decay constant sup (1+t)|E_alpha(-t)|", (
        _Opt("alpha", _parse_real, required=True,
             help="order in (0, 2)"),
        _Opt("t-max", _parse_real, 1e4, help="right end of the scan"),
        _Opt("n-samples", _parse_count, 2000, help="scan resolution"),
    )),
    "fracderiv": ("fractional derivative/integral of a power function", (
        _Opt("order", _parse_real, required=True,
             help="fractional order (derivative: (0,2); integral: > 0)"),
        _Opt("power", _parse_real, 1.0,
             help="exponent k of the probe function t^k"),
        _Opt("mode", str, "caputo", help="'caputo' or 'integral'"),
        _Opt("t-end", _parse_real, 1.0, help="grid endpoint"),
        _Opt("dt", _parse_real, 1e-3, help="grid step"),
    )),
    "sonine": ("Sonine partner of a kernel and the round-trip defect", (
        _Opt("kernel", str, required=True,
             help="powerlaw:BETA, caputodual:BETA, ..."),
        _Opt("method", str, "analytic", help="'analytic' or 'solve'"),
        _Opt("t-end", _parse_real, 2.0, help="verification horizon"),
        _Opt("dt", _parse_real, 1e-3, help="collocation step"),
        _Opt("tol", _parse_real, 1e-4, help="tolerance on max |K*k - 1|"),
    )),
    "resolvent": ("scalar resolvent s(t; lambda) of a convolution kernel", (
        _Opt("kernel", str, required=True,
             help="constant:C, powerlaw:BETA, rayleighstokes:B,G, ..."),
        _Opt("lambda", _parse_real, required=True, help="spectral value"),
        _Opt("t-end", _parse_real, 5.0, help="horizon"),
        _Opt("dt", _parse_real, 1e-3, help="grid step"),
    )),
    "catalog": ("list the completely positive kernel catalog", ()),
    "countfit": ("fit the trace exponent of a spectral counting function", (
        _Opt("model", str, required=True,
             help="torus:N, prescribed:LAMBDA, geometric:RHO,MU, "
                  "explicit:PATH"),
        _Opt("truncation", _parse_count, spectra.DEFAULT_TRUNCATION,
             help="number of enumerated modes"),
        _Opt("nominal-lambda", _parse_real, None,
             help="stated exponent (required for explicit models)"),
        _Opt("s-min", _parse_real, required=True, help="fit window start"),
        _Opt("s-max", _parse_real, required=True, help="fit window end"),
        _Opt("n-points", _parse_count, 16, help="fit sample count"),
    )),
    "decay": ("evolve random mean-zero data and test the decay envelope", (
        _Opt("model", str, "torus:1", help="spectral model"),
        _Opt("truncation", _parse_count, 10**4,
             help="number of enumerated modes"),
        _Opt("nominal-lambda", _parse_real, None),
        _Opt("kind", str, "heat", help="propagator family"),
        _Opt("p", _parse_real, required=True, help="data exponent in (1, 2]"),
        _Opt("q", _parse_real, required=True,
             help="target exponent in [2, inf)"),
        _Opt("dim", _parse_count, None,
             help="field dimension (default: the torus dimension, else 1)"),
        _Opt("grid-n", _parse_count, 64, help="grid points per axis"),
        _Opt("seed", _parse_count, 0, help="RNG seed for the random field"),
        _Opt("t-min", _parse_real, required=True, help="window start > 0"),
        _Opt("t-max", _parse_real, required=True, help="window end"),
        _Opt("n-times", _parse_count, 24, help="sample times in the window"),
        _Opt("dt", _parse_real, None,
             help="resolvent step for kernel-driven kinds"),
    )),
    "bound": ("decay bound B(t) of a family on a log-spaced grid", (
        _Opt("model", str, required=True, help="spectral model"),
        _Opt("truncation", _parse_count, spectra.DEFAULT_TRUNCATION),
        _Opt("nominal-lambda", _parse_real, None),
        _Opt("kind", str, "heat", help="propagator family"),
        _Opt("p", _parse_real, required=True, help="data exponent in (1, 2]"),
        _Opt("q", _parse_real, required=True,
             help="target exponent in [2, inf)"),
        _Opt("t-min", _parse_real, 1e-2, help="grid start"),
        _Opt("t-max", _parse_real, 1e2, help="grid end"),
        _Opt("n-times", _parse_count, 33, help="grid size"),
    )),
    "region": ("scan the admissible (1/q, 1/r) region for data exponent p0", (
        _Opt("kind", str, "heat",
             help="heat, heattype:BETA, or wavetype:BETA"),
        _Opt("p0", _parse_real, required=True, help="data exponent in (1,2]"),
        _Opt("lambda", _parse_real, required=True, help="trace exponent"),
        _Opt("resolution", _parse_count, 64, help="grid points per axis"),
    )),
    "picard": ("fixed-point solve of the subcritical nonlinear problem", (
        _Opt("model", str, None,
             help="spectral model (default torus:DIM)"),
        _Opt("truncation", _parse_count, 10**4),
        _Opt("nominal-lambda", _parse_real, None),
        _Opt("kind", str, "heat",
             help="heat, heattype:BETA, or wavetype:BETA"),
        _Opt("eta", _parse_real, required=True,
             help="nonlinearity exponent > 1"),
        _Opt("mu", _parse_real, 1.0, help="sign of the nonlinearity, +1/-1"),
        _Opt("norm-w0", _parse_real, 1e-2, help="L^2 norm of the seed data"),
        _Opt("dim", _parse_count, 1, help="field dimension"),
        _Opt("grid-n", _parse_count, 128, help="grid points per axis"),
        _Opt("t-end", _parse_real, 0.5, help="time horizon"),
        _Opt("dt", _parse_real, 1e-3, help="time step"),
        _Opt("tol", _parse_real, 1e-10, help="fixed-point tolerance"),
        _Opt("max-iter", _parse_count, 50, help="iteration cap"),
        _Opt("seed", _parse_count, 0, help="RNG seed for the seed field"),
    )),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 1 through the ValidationError path
        raise ValidationError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="evoscalar",
                     description="numerical toolkit for scalar evolutionary "
                                 "integral equations")
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name, (help_text, opts) in _COMMANDS.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        for opt in opts + _COMMON:
            if opt.conv is None:
                sp.add_argument(f"--{opt.flag}", dest=opt.dest,
                                action="store_true", default=None,
                                help=opt.help)
            else:
                sp.add_argument(f"--{opt.flag}", dest=opt.dest,
                                metavar=opt.dest.upper(), default=None,
                                help=opt.help)
    return parser


def _resolve(cmd: str, raw: dict) -> dict:
    """Merge CLI values, config-file values, and defaults; convert types."""
    opts = {o.dest: o for o in _COMMANDS[cmd][1] + _COMMON}
    ns = {d: raw.get(d) for d in opts}
    key_map = {}
    for o in opts.values():
        key_map[o.flag.replace("-", "_")] = o.dest
        key_map[o.dest] = o.dest
    if ns["config"] is not None:
        entries = load_config(ns["config"], known_keys=set(key_map))
        for key, value in entries.items():
            dest = key_map[key]
            if ns[dest] is None:
                ns[dest] = value
    selftest = bool(ns["selftest"]) if not isinstance(ns["selftest"], str) \
        else _parse_bool(ns["selftest"])
    ns["selftest"] = selftest
    for dest, opt in opts.items():
        if dest == "selftest":
            continue
        value = ns[dest]
        if value is None:
            if opt.required and not selftest:
                raise ValidationError(f"missing required option --{opt.flag}")
            ns[dest] = opt.default
        elif isinstance(value, str) and opt.conv is not None \
                and opt.conv is not str:
            try:
                ns[dest] = opt.conv(value)
            except ValidationError as exc:
                raise ValidationError(f"--{opt.flag}: {exc}") from None
    return ns


# ---------------------------------------------------------------------------
# Subcommand handlers (each returns the one-line summary)
# ---------------------------------------------------------------------------

def _cmd_ml(ns: dict) -> str:
    params = mlfun.MLParams(alpha=ns["alpha"], delta=ns["delta"])
    val = mlfun.mittag_leffler(params, ns["z"], rtol=ns["rtol"])
    if ns["output"]:
        _write_csv(ns["output"], ["z", "value"], [[ns["z"], val]])
    return (f"E_{{{ns['alpha']:g},{ns['delta']:g}}}({ns['z']}) = "
            f"{_format_cell(val)}")


def _cmd_mlbound(ns: dict) -> str:
    params = mlfun.MLParams(alpha=ns["alpha"])
    c = mlfun.ml_bound_constant(params, ns["t_max"], ns["n_samples"])
    if ns["output"]:
        ts = np.concatenate(([0.0], np.geomspace(
            min(1e-8, ns["t_max"] * 1e-10), ns["t_max"],
            min(ns["n_samples"], 512))))
        vals = mlfun.mittag_leffler(params, -ts)
        rows = [[t, v, (1.0 + t) * abs(v)] for t, v in zip(ts, vals)]
        _write_csv(ns["output"], ["t", "ml_value", "weighted"], rows)
    return (f"sup (1+t)|E_{{{ns['alpha']:g}}}(-t)| = {c!r} "
            f"over [0, {ns['t_max']:g}]")


def _cmd_fracderiv(ns: dict) -> str:
    order, k = ns["order"], ns["power"]
    mode = ns["mode"].strip().lower()
    if mode not in ("caputo", "integral"):
        raise ValidationError(f"mode must be 'caputo' or 'integral', "
                              f"got {ns['mode']!r}")
    if not (ns["t_end"] > ns["dt"] > 0):
        raise ValidationError("need t-end > dt > 0")
    n = int(round(ns["t_end"] / ns["dt"]))
    ts = ns["dt"] * np.arange(n + 1)
    f = SampledSignal(dt=ns["dt"], values=ts**k if k != 0 else
                      np.ones_like(ts))
    if mode == "integral":
        out = fraccalc.rl_integral(order, f)
        exact = (mlfun.gamma(k + 1.0) / mlfun.gamma(k + 1.0 + order)
                 * ts ** (k + order))
        label = f"I^{order:g} t^{k:g}"
    else:
        if k < 1.0:
            raise ValidationError(
                "the Caputo probe needs power >= 1 so the initial data "
                "[f(0), f'(0)] are finite")
        init = [0.0] if order < 1.0 else [0.0, 1.0 if k == 1.0 else 0.0]
        out = fraccalc.caputo_derivative(order, f, init)
        exact = (mlfun.gamma(k + 1.0) / mlfun.gamma(k + 1.0 - order)
                 * ts ** (k - order))
        label = f"D^{order:g} t^{k:g}"
    skip = min(10, len(ts) - 1)
    err = float(np.max(np.abs(out.values[skip:] - exact[skip:])))
    if ns["output"]:
        rows = list(zip(ts, out.values, exact))
        _write_csv(ns["output"], ["t", "value", "reference"], rows)
    return (f"{label} on [0, {ns['t_end']:g}]: max |error| vs closed form "
            f"= {err!r} (dt = {ns['dt']:g})")


def _cmd_sonine(ns: dict) -> str:
    k = _parse_kernel(ns["kernel"])
    method = ns["method"].strip().lower()
    if method == "analytic":
        partner = kernels.analytic_sonine_partner(k)
    elif method == "solve":
        partner = kernels.Tabulated(
            kernels.sonine_solve(k, (ns["t_end"], ns["dt"])))
    else:
        raise ValidationError(f"method must be 'analytic' or 'solve', "
                              f"got {ns['method']!r}")
    pair = kernels.SoninePair(k=k, partner=partner)
    res = kernels.sonine_verify(pair, ns["t_end"], ns["dt"], tol=ns["tol"])
    dev = res["max_deviation"]
    if ns["output"]:
        ts = ns["dt"] * np.arange(1, int(round(ns["t_end"] / ns["dt"])) + 1)
        rows = list(zip(ts, kernels.kernel_eval(k, ts),
                        kernels.kernel_eval(partner, ts)))
        _write_csv(ns["output"], ["t", "kernel", "partner"], rows)
    summary = (f"max |(K*k)(t) - 1| = {dev!r} on (0, {ns['t_end']:g}] "
               f"[{method}]")
    if not res["pass"]:
        raise AccuracyError(f"{summary}; exceeds tol = {ns['tol']:g}")
    return summary


def _cmd_resolvent(ns: dict) -> str:
    k = _parse_kernel(ns["kernel"])
    req = resolvent.ResolventRequest(kernel=k, lam=ns["lam"],
                                     T=ns["t_end"], dt=ns["dt"])
    sol = resolvent.resolvent_scalar(req)
    upper = 1.0 / (1.0 + ns["lam"] * kernels.cumulative_integral(k,
                                                                 sol.times))
    summary = (f"s({ns['t_end']:g}; lambda={ns['lam']:g}) = "
               f"{sol.values[-1]!r}")
    if kernels.is_completely_positive(k):
        viol = float(np.max(sol.values - upper))
        summary += f"; sup (s - comparison bound) = {viol!r}"
        if viol > 1e-6:
            raise AccuracyError(
                f"resolvent exceeds the comparison bound by {viol!r}")
    if ns["output"]:
        rows = list(zip(sol.times, sol.values, upper))
        _write_csv(ns["output"], ["t", "s", "upper_bound"], rows)
    return summary


def _cmd_catalog(ns: dict) -> str:
    cat = kernels.pc_catalog()
    rows = []
    for i, k in enumerate(cat):
        rows.append([i, repr(k).replace(",", ";"),
                     kernels.singular_exponent(k),
                     kernels.is_completely_positive(k)])
    if ns["output"]:
        _write_csv(ns["output"],
                   ["index", "kernel", "singular_exponent",
                    "completely_positive"], rows)
    return f"{len(cat)} kernels in the completely positive catalog"


def _cmd_countfit(ns: dict) -> str:
    m = _build_model(ns)
    fit = spectra.fit_trace_exponent(m, ns["s_min"], ns["s_max"],
                                     n_points=ns["n_points"])
    if ns["output"]:
        ss = np.geomspace(ns["s_min"], ns["s_max"], ns["n_points"])
        counts = m.counting_function(ss)
        _write_csv(ns["output"], ["s", "count"], list(zip(ss, counts)))
    return (f"lambda_hat = {fit['lambda_hat']!r} (r^2 = "
            f"{fit['r_squared']:.6f}) over [{ns['s_min']:g}, "
            f"{ns['s_max']:g}]; nominal = {m.nominal_lambda:g}")


def _cmd_decay(ns: dict) -> str:
    m = _build_model(ns)
    kind = _parse_kind(ns["kind"])
    dim = ns["dim"]
    if dim is None:
        dim = m.kind.n if isinstance(m.kind, spectra.TorusLaplacian) else 1
    rng = np.random.default_rng(ns["seed"])
    w0 = evolve.random_mean_zero(dim, ns["grid_n"], rng)
    out = evolve.decay_slope(m, kind, ns["p"], ns["q"], w0,
                             (ns["t_min"], ns["t_max"]),
                             n_times=ns["n_times"], dt=ns["dt"])
    p_norm = evolve.lp_norm(w0, ns["p"])
    if ns["output"]:
        rows = [[t, r * p_norm, b, r / b]
                for t, r, b in zip(out["times"], out["ratios"],
                                   out["bounds"])]
        _write_csv(ns["output"], ["t", "Lq_norm", "bound_B", "ratio"], rows)
    return (f"slope = {out['slope']!r}; envelope constant C = "
            f"{out['envelope_constant']!r}; window within pre-gap: "
            f"{out['window_within_pre_gap']}")


def _cmd_bound(ns: dict) -> str:
    m = _build_model(ns)
    kind = _parse_kind(ns["kind"])
    if not (0.0 < ns["t_min"] < ns["t_max"]):
        raise ValidationError("need 0 < t-min < t-max")
    if ns["n_times"] < 4:
        raise ValidationError("need n-times >= 4")
    ts = np.geomspace(ns["t_min"], ns["t_max"], ns["n_times"])
    bs = np.array([evolve.bound_function(m, kind, ns["p"], ns["q"], t)
                   for t in ts])
    slope = float(np.polyfit(np.log(ts), np.log(bs), 1)[0])
    if isinstance(kind, evolve.Heat):
        eff = m.nominal_lambda
    else:
        eff = kind.beta * m.nominal_lambda
    ref = -eff * (1.0 / ns["p"] - 1.0 / ns["q"])
    if ns["output"]:
        _write_csv(ns["output"], ["t", "bound_B"], list(zip(ts, bs)))
    return (f"log-log slope = {slope!r} over [{ns['t_min']:g}, "
            f"{ns['t_max']:g}]; reference -eff*(1/p-1/q) = {ref!r}")


def _cmd_region(ns: dict) -> str:
    kind = _parse_kind(ns["kind"])
    if isinstance(kind, evolve.SchrodingerType):
        raise ValidationError(
            "region scans cover heat, heattype, and wavetype")
    out = admiss.region_sample(ns["p0"], ns["lam"], kind,
                               resolution=ns["resolution"])
    if ns["output"]:
        _write_csv(ns["output"], ["inv_q", "inv_r", "admissible"],
                   out["grid"])
    n_grid = len(out["grid"])
    if out["empty"]:
        return f"region empty (0 of {n_grid} grid points admissible)"
    return (f"region has {len(out['points'])} of {n_grid} grid points "
            f"admissible")


def _cmd_picard(ns: dict) -> str:
    dim, n_grid = ns["dim"], ns["grid_n"]
    model_text = ns["model"] if ns["model"] is not None else f"torus:{dim}"
    m = spectra.SpectralModel(kind=_parse_model_kind(model_text),
                              truncation=ns["truncation"],
                              nominal_lambda=ns.get("nominal_lambda"))
    kind = _parse_kind(ns["kind"])
    rng = np.random.default_rng(ns["seed"])
    raw = evolve.random_mean_zero(dim, n_grid, rng)
    l2 = evolve.lp_norm(raw, 2.0)
    w0 = evolve.FieldOnTorus(dim, n_grid,
                             raw.values * (ns["norm_w0"] / l2))
    out = evolve.picard_solve(m, kind, ns["eta"], ns["mu"], w0,
                              ns["t_end"], ns["dt"], tol=ns["tol"],
                              max_iter=ns["max_iter"])
    ratios = out["contraction_ratios"]
    worst = max(ratios) if ratios else 0.0
    if ns["output"]:
        _write_atomic(ns["output"], evolve.field_to_text(
            out["trajectory"][-1]))
    return (f"converged in {out['iterations']} iteration(s); residual = "
            f"{out['residual']!r}; max contraction ratio = {worst!r}")


_HANDLERS = {
    "ml": _cmd_ml,
    "mlbound": _cmd_mlbound,
    "fracderiv": _cmd_fracderiv,
    "sonine": _cmd_sonine,
    "resolvent": _cmd_resolvent,
    "catalog": _cmd_catalog,
    "countfit": _cmd_countfit,
    "decay": _cmd_decay,
    "bound": _cmd_bound,
    "region": _cmd_region,
    "picard": _cmd_picard,
}


# ---------------------------------------------------------------------------
# Selftests: quick closed-form checks for each mapped module
# ---------------------------------------------------------------------------

def _selftest_ml() -> list:
    checks = []
    v = mlfun.mittag_leffler(mlfun.MLParams(1.0), 1.0)
    checks.append(("E_{1,1}(1) = e", abs(v - math.e) <= 1e-12 * math.e,
                   f"value {v!r}"))
    v = mlfun.mittag_leffler(mlfun.MLParams(2.0), -4.0)
    checks.append(("E_{2,1}(-x^2) = cos x at x = 2",
                   abs(v - math.cos(2.0)) <= 1e-12, f"value {v!r}"))
    v = mlfun.mittag_leffler(mlfun.MLParams(0.7, 1.3), 0.0)
    target = 1.0 / mlfun.gamma(1.3)
    checks.append(("E_{0.7,1.3}(0) Gamma(1.3) = 1",
                   abs(v - target) <= 1e-12, f"value {v!r}"))
    return checks


def _selftest_mlbound() -> list:
    c = mlfun.ml_bound_constant(mlfun.MLParams(0.5), 100.0, 400)
    return [("sup (1+t)|E_{0.5}(-t)| finite and >= value at t = 0",
             math.isfinite(c) and 1.0 <= c < 5.0, f"constant {c!r}")]


def _selftest_fracderiv() -> list:
    dt = 1e-3
    ts = dt * np.arange(1001)
    f = SampledSignal(dt=dt, values=ts)
    out = fraccalc.caputo_derivative(0.5, f, [0.0])
    exact = ts**0.5 / mlfun.gamma(1.5)
    err_c = float(np.max(np.abs(out.values[10:] - exact[10:])))
    g = SampledSignal(dt=dt, values=np.ones_like(ts))
    out_i = fraccalc.rl_integral(0.5, g)
    exact_i = ts**0.5 / mlfun.gamma(1.5)
    err_i = float(np.max(np.abs(out_i.values - exact_i)))
    return [
        ("Caputo D^0.5 t matches t^0.5/Gamma(1.5)", err_c < 1e-3,
         f"max err {err_c!r}"),
        ("RL I^0.5 1 matches t^0.5/Gamma(1.5)", err_i < 1e-10,
         f"max err {err_i!r}"),
    ]


def _selftest_sonine() -> list:
    k = kernels.PowerLaw(beta=0.5)
    pair = kernels.SoninePair(k=k, partner=kernels.analytic_sonine_partner(k))
    res = kernels.sonine_verify(pair, 1.0, 1e-2, tol=1e-4)
    return [("PowerLaw(0.5) and CaputoDual(0.5) convolve to 1",
             res["pass"], f"max deviation {res['max_deviation']!r}")]


def _selftest_resolvent() -> list:
    req = resolvent.ResolventRequest(kernel=kernels.Constant(c=1.0),
                                     lam=1.0, T=2.0, dt=1e-3)
    sol = resolvent.resolvent_scalar(req)
    err = float(np.max(np.abs(sol.values - np.exp(-sol.times))))
    chk = resolvent.resolvent_bound_check(req)
    return [
        ("constant kernel: s(t; 1) = exp(-t)", err < 1e-3,
         f"max err {err!r}"),
        ("comparison bound holds", chk["pass"],
         f"max violation {chk['max_violation']!r}"),
    ]


def _selftest_catalog() -> list:
    cat = kernels.pc_catalog()
    flags = [kernels.is_completely_positive(k) for k in cat]
    return [("catalog is nonempty and all flagged completely positive",
             len(cat) >= 10 and all(flags), f"{len(cat)} kernels")]


def _selftest_countfit() -> list:
    m = spectra.SpectralModel(kind=spectra.TorusLaplacian(n=1),
                              truncation=10**6)
    fit = spectra.fit_trace_exponent(m, 1e2, 1e4)
    ok = abs(fit["lambda_hat"] - 0.5) <= 0.05
    return [("circle Laplacian counting fits lambda = 1/2", ok,
             f"lambda_hat {fit['lambda_hat']!r}")]


def _selftest_decay() -> list:
    m = spectra.SpectralModel(kind=spectra.TorusLaplacian(n=1),
                              truncation=10**4)
    rng = np.random.default_rng(7)
    w0 = evolve.random_mean_zero(1, 32, rng)
    out = evolve.decay_slope(m, evolve.Heat(), 2.0, 2.0, w0, (0.05, 0.5),
                             n_times=8)
    c = out["envelope_constant"]
    return [("p = q = 2 heat flow is a contraction (C <= 1)",
             0.0 < c <= 1.0 + 1e-9, f"envelope constant {c!r}")]


def _selftest_bound() -> list:
    m = spectra.SpectralModel(kind=spectra.PrescribedExponent(lam=1.0),
                              truncation=10**6)
    b = evolve.bound_function(m, evolve.Heat(), 4.0 / 3.0, 4.0, 1.0)
    exact = 0.5**0.5 * math.exp(-0.5)  # sup_v v^{1/2} e^{-v} at v = 1/2
    ok = abs(b - exact) <= 1e-5 * exact
    return [("B(1) matches the exact supremum for N(v) = v", ok,
             f"value {b!r} vs {exact!r}")]


def _selftest_region() -> list:
    checks = []
    v = admiss.is_admissible(
        admiss.TripleSpec(2.0, 4.0, 2.0, evolve.Heat()), 2.0)
    checks.append(("boundary triple (2,4,2) rejected at lambda = 2",
                   not v, f"reason {v.reason}"))
    v = admiss.is_admissible(
        admiss.TripleSpec(1.0, 2.0, 2.0, evolve.Heat()), 2.0)
    checks.append(("interior triple (1,2,2) accepted", bool(v), v.reason))
    out = admiss.region_sample(1.5, 6.0, evolve.Heat(), resolution=16)
    checks.append(("region empty at the threshold lambda = 6, p0 = 1.5",
                   out["empty"], f"{len(out['points'])} points"))
    out = admiss.region_sample(2.0, 10.0, evolve.Heat(), resolution=16)
    checks.append(("region nonempty at p0 = 2", not out["empty"],
                   f"{len(out['points'])} points"))
    return checks


def _selftest_picard() -> list:
    m = spectra.SpectralModel(kind=spectra.TorusLaplacian(n=1),
                              truncation=10**4)
    rng = np.random.default_rng(3)
    raw = evolve.random_mean_zero(1, 16, rng)
    w0 = evolve.FieldOnTorus(1, 16, raw.values * (
        1e-2 / evolve.lp_norm(raw, 2.0)))
    out = evolve.picard_solve(m, evolve.Heat(), 3.0, -1.0, w0, 0.1, 5e-3)
    ok = out["residual"] < 1e-8 and out["iterations"] <= 20
    return [("small-data heat fixed point converges", ok,
             f"{out['iterations']} iterations, residual "
             f"{out['residual']!r}")]


_SELFTESTS = {
    "ml": _selftest_ml,
    "mlbound": _selftest_mlbound,
    "fracderiv": _selftest_fracderiv,
    "sonine": _selftest_sonine,
    "resolvent": _selftest_resolvent,
    "catalog": _selftest_catalog,
    "countfit": _selftest_countfit,
    "decay": _selftest_decay,
    "bound": _selftest_bound,
    "region": _selftest_region,
    "picard": _selftest_picard,
}


def _run_selftest(cmd: str) -> int:
    checks = _SELFTESTS[cmd]()
    n_pass = 0
    for name, ok, detail in checks:
        n_pass += bool(ok)
        print(f"selftest {cmd}: {name}: {'PASS' if ok else 'FAIL'} "
              f"({detail})")
    print(f"selftest {cmd}: {n_pass}/{len(checks)} passed")
    return 0 if n_pass == len(checks) else 2


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def run(argv=None) -> int:
    """Execute one subcommand; returns the process exit code."""
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
        cmd = getattr(ns, "command", None)
        if cmd is None:
            raise ValidationError(
                "a subcommand is required (one of: "
                + ", ".join(sorted(_COMMANDS)) + ")")
        resolved = _resolve(cmd, vars(ns))
        if resolved["selftest"]:
            return _run_selftest(cmd)
        summary = _HANDLERS[cmd](resolved)
        print(summary)
        if resolved.get("output"):
            config = {k: v for k, v in resolved.items()
                      if k not in ("output", "config", "selftest")}
            _write_sidecar(resolved["output"], cmd, config, summary)
        return 0
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except ValidationError as exc:
        print(f"evoscalar: error: {exc}", file=sys.stderr)
        return 1
    except NumericsError as exc:
        print(f"evoscalar: numerical failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
