"""Command-line front end: emits plot-ready datasets and boundary reports.

Exit codes: 0 success, 2 configuration error, 3 computational failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import __version__, dissipation, floquet_analytic, phases, work
from .floquet_numeric import extract_floquet, fourier_components, integrate_propagator, two_spin_system
from .model import BATH_COUPLING, ModelParams, PERIOD

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 2, 3

COMMANDS = ("quasienergies", "work", "ness", "phase-diagram", "boundary-report", "propagator", "rates")
AXES = ("lambda", "f", "diag")


class ConfigError(ValueError):
    pass


class ComputeError(RuntimeError):
    pass


@dataclass(frozen=True)
class Sweep:
    axis: str
    lo: float
    hi: float
    steps: int

    @classmethod
    def parse(cls, text: str) -> Sweep:
        parts = text.split(":")
        if len(parts) != 4:
            raise ConfigError(f"sweep must be axis:lo:hi:steps, got {text!r}")
        axis = parts[0]
        if axis not in AXES:
            raise ConfigError(f"sweep axis must be one of {AXES}, got {axis!r}")
        try:
            lo, hi, steps = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as exc:
            raise ConfigError(f"bad sweep {text!r}: {exc}") from None
        if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
            raise ConfigError(f"sweep range must be nonempty, got [{lo}, {hi}]")
        if steps < 2:
            raise ConfigError("sweep steps must be >= 2")
        return cls(axis, lo, hi, steps)

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)

    def __str__(self) -> str:
        return f"{self.axis}:{self.lo!r}:{self.hi!r}:{self.steps}"


@dataclass
class RunConfig:
    command: str
    lam: float = 1.0
    f: float = 0.5
    beta: list = field(default_factory=lambda: [1.0])
    beta_bath: float = 1.0
    j0: float = 1.0
    sweep: list = field(default_factory=list)
    format: str = "csv"
    out: str | None = None
    tol_integrator: float = 1e-10
    tol_boundary: float = 1e-9
    lmax: int = 1
    threads: int | None = None
    which: str | None = None
    offsets: list = field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    bracket: list | None = None
    resolution: int = 200
    t_steps: int = 65
    route: str = "analytic"

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        for name in ("tol_integrator", "tol_boundary", "j0", "beta_bath"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name.replace('_', '-')} must be positive")
        if any(b < 0 for b in self.beta):
            raise ConfigError("beta must be >= 0")
        if self.lmax < 1:
            raise ConfigError("lmax must be >= 1")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.resolution < 2 or self.t_steps < 2:
            raise ConfigError("resolution and t-steps must be >= 2")
        if self.route not in ("analytic", "numeric"):
            raise ConfigError("route must be analytic or numeric")
        if self.which is not None and self.which not in phases.BOUNDARY_NAMES:
            raise ConfigError(f"boundary must be one of {phases.BOUNDARY_NAMES}")
        if any(not d > 0 for d in self.offsets) or any(a <= b for a, b in zip(self.offsets, self.offsets[1:])):
            raise ConfigError("offsets must be positive and strictly decreasing")
        if self.bracket is not None and (len(self.bracket) != 2 or self.bracket[0] >= self.bracket[1]):
            raise ConfigError("bracket must be lo,hi with lo < hi")

    def resolved(self) -> dict:
        d = asdict(self)
        d["sweep"] = [str(s) for s in self.sweep]
        return d


# -- argument handling ---------------------------------------------------------

def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with default values for the flags")
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--f", type=float)
    common.add_argument("--beta", type=_floats, help="initial inverse temperature(s), comma separated")
    common.add_argument("--beta-bath", dest="beta_bath", type=float)
    common.add_argument("--j0", type=float)
    common.add_argument("--sweep", action="append", help="axis:lo:hi:steps with axis lambda, f or diag")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--out")
    common.add_argument("--tol-integrator", dest="tol_integrator", type=float)
    common.add_argument("--tol-boundary", dest="tol_boundary", type=float)
    common.add_argument("--lmax", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--which", help="boundary name b0..b4 (boundary-report)")
    common.add_argument("--offsets", type=_floats)
    common.add_argument("--bracket", type=_floats)
    common.add_argument("--resolution", type=int)
    common.add_argument("--t-steps", dest="t_steps", type=int)
    common.add_argument("--route", choices=("analytic", "numeric"))

    parser = _Parser(prog="twospin", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def resolve_config(argv) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    values = {}
    if args.get("config"):
        try:
            values.update(json.loads(Path(args["config"]).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        if "lambda" in values:
            values["lam"] = values.pop("lambda")
        values = {k.replace("-", "_"): v for k, v in values.items()}
    for key, val in args.items():
        if key != "config" and val is not None:
            values[key] = val
    if isinstance(values.get("beta"), (int, float)):
        values["beta"] = [values["beta"]]
    if isinstance(values.get("sweep"), str):
        values["sweep"] = [values["sweep"]]
    values["sweep"] = [Sweep.parse(s) for s in values.get("sweep", [])]
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    cfg.validate()
    return cfg


# -- output --------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return ""
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


@dataclass
class Dataset:
    columns: list
    rows: list
    extra: dict = field(default_factory=dict)
    sidecars: dict = field(default_factory=dict)  # suffix -> Dataset
    errors: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_json(self, cfg: RunConfig) -> str:
        doc = {
            "version": __version__,
            "config": cfg.resolved(),
            "columns": self.columns,
            "rows": self.rows,
        }
        doc.update(self.extra)
        for suffix, side in self.sidecars.items():
            doc[suffix] = {"columns": side.columns, "rows": side.rows}
        if self.errors:
            doc["errors"] = self.errors
        return json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n"


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _sidecar_path(out: str, suffix: str) -> str:
    p = Path(out)
    return str(p.with_name(f"{p.stem}.{suffix}{p.suffix}"))


def emit(ds: Dataset, cfg: RunConfig) -> None:
    if cfg.format == "json":
        _write(ds.to_json(cfg), cfg.out)
    else:
        _write(ds.to_csv(), cfg.out)
        for suffix, side in ds.sidecars.items():
            if cfg.out is not None:
                _write(side.to_csv(), _sidecar_path(cfg.out, suffix))
    if ds.errors:
        text = json.dumps(_jsonable({"version": __version__, "config": cfg.resolved(), "errors": ds.errors}),
                          indent=1, sort_keys=True) + "\n"
        if cfg.out is not None:
            _write(text, cfg.out + ".errors.json")
        else:
            sys.stderr.write(text)


def _pmap(fn, items, threads):
    if threads == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads or os.cpu_count()) as pool:
        return list(pool.map(fn, items))


def _params(cfg: RunConfig, lam=None, f=None, beta=None) -> ModelParams:
    try:
        return ModelParams(
            lam=cfg.lam if lam is None else float(lam),
            f=cfg.f if f is None else float(f),
            beta_init=cfg.beta[0] if beta is None else float(beta),
            beta_bath=cfg.beta_bath,
            j0=cfg.j0,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _line_points(cfg: RunConfig) -> tuple[str, list[tuple[float, float]]]:
    """A 1-D sweep as (axis, [(lam, f), ...])."""
    if len(cfg.sweep) != 1:
        raise ConfigError(f"{cfg.command} needs exactly one --sweep")
    s = cfg.sweep[0]
    v = s.values()
    if s.axis == "lambda":
        pts = [(x, cfg.f) for x in v]
    elif s.axis == "f":
        pts = [(cfg.lam, x) for x in v]
    else:
        pts = [(x, x) for x in v]
    for lam, f in pts:
        _params(cfg, lam, f)
    return s.axis, pts


# -- commands ------------------------------------------------------------------

def cmd_quasienergies(cfg: RunConfig) -> Dataset:
    _, pts = _line_points(cfg)
    cols = ["lambda", "f", "eps1", "eps2", "eps3", "eps4", *phases.BOUNDARY_NAMES, "phase", "crossing"]
    rows = []
    prev = None
    for lam, f in pts:
        eps = floquet_analytic.quasienergies(_params(cfg, lam, f))
        if f > 0:
            b = phases.boundary_values(lam, f)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                label = str(phases.classify(lam, f, cfg.tol_boundary))
        else:
            b = (math.nan,) * 5
            label = ""
        crossing = ""
        if prev is not None:
            crossing = ";".join(
                n for n, x, y in zip(phases.BOUNDARY_NAMES, prev, b)
                if (x >= 0) != (y >= 0) and math.isfinite(x) and math.isfinite(y)
            )
        prev = b
        rows.append([lam, f, *eps, *b, label, crossing])
    return Dataset(cols, rows)


def cmd_work(cfg: RunConfig) -> Dataset:
    axes = {s.axis: s for s in cfg.sweep}
    if len(axes) != len(cfg.sweep):
        raise ConfigError("duplicate sweep axis")
    if "diag" in axes:
        if len(axes) != 1:
            raise ConfigError("diag sweep cannot be combined with other axes")
        cols = ["f", "beta", "mean_work", "asymptote", "jarzynski_residual"]
        pts = [(x, x, b) for b in cfg.beta for x in axes["diag"].values()]
    else:
        lams = axes["lambda"].values() if "lambda" in axes else [cfg.lam]
        fs = axes["f"].values() if "f" in axes else [cfg.f]
        cols = ["lambda", "f", "beta", "mean_work", "jarzynski_residual"]
        pts = [(lam, f, b) for b in cfg.beta for f in fs for lam in lams]
    for lam, f, b in pts:
        _params(cfg, lam, f, b)

    def one(pt):
        lam, f, b = pt
        dist = work.work_distribution(_params(cfg, lam, f, b))
        return dist.mean(), abs(work.jarzynski_moment(dist) - 1.0)

    res = _pmap(one, pts, cfg.threads)
    rows = []
    for (lam, f, b), (w, jr) in zip(pts, res):
        if "diag" in axes:
            rows.append([f, b, w, float(work.mean_work_asymptote(f)), jr])
        else:
            rows.append([lam, f, b, w, jr])
    return Dataset(cols, rows)


def cmd_ness(cfg: RunConfig) -> Dataset:
    axis, pts = _line_points(cfg)

    def one(pt):
        lam, f = pt
        return phases.ness_point(lam, f, cfg.beta_bath, cfg.j0)

    res = _pmap(one, pts, cfg.threads)
    cols = ["lambda", "f", "phase", "p1", "p2", "p3", "p4", "residual"]
    rows, errors = [], []
    for (lam, f), row in zip(pts, res):
        p = row.p if row.p is not None else [None] * 4
        rows.append([lam, f, str(row.phase), *p, row.residual])
        if row.error:
            errors.append({"lambda": lam, "f": f, "error": row.error})
    ds = Dataset(cols, rows, errors=errors)
    ds.extra["segments"] = [list(s) for s in phases.segments(res)]
    return ds


def cmd_phase_diagram(cfg: RunConfig) -> Dataset:
    axes = {s.axis: s for s in cfg.sweep}
    lr = (axes["lambda"].lo, axes["lambda"].hi) if "lambda" in axes else (0.0, 3.0)
    fr = (axes["f"].lo, axes["f"].hi) if "f" in axes else (0.0, 3.0)
    if lr[0] < 0 or fr[0] < 0:
        raise ConfigError("phase-diagram ranges must be positive")
    res = (
        axes["lambda"].steps if "lambda" in axes else cfg.resolution,
        axes["f"].steps if "f" in axes else cfg.resolution,
    )
    diag = phases.phase_diagram(lr, fr, res, cfg.tol_boundary)
    rows = [[lam, f, diag.labels[i, j]] for i, f in enumerate(diag.fs) for j, lam in enumerate(diag.lams)]
    curve_rows = [
        [name, lam, f] for name, (ls, fs) in diag.curves.items() for lam, f in zip(ls, fs)
    ]
    ds = Dataset(["lambda", "f", "phase"], rows)
    ds.sidecars["curves"] = Dataset(["boundary", "lambda", "f"], curve_rows)
    ds.extra["letters"] = sorted(diag.letters())
    return ds


GAP_FLOOR = 1e-14


def _decreasing(seq) -> bool:
    """Strictly decreasing, where values below GAP_FLOOR count as already zero."""
    return all(b < GAP_FLOOR or a > b for a, b in zip(seq, seq[1:]))


def cmd_boundary_report(cfg: RunConfig) -> dict:
    if cfg.which is None:
        raise ConfigError("boundary-report needs --which")
    try:
        rep = phases.boundary_behavior(
            cfg.f, cfg.which, cfg.beta_bath, cfg.offsets,
            bracket=tuple(cfg.bracket) if cfg.bracket else None, j0=cfg.j0,
        )
    except phases.BracketError as exc:
        raise ComputeError(str(exc)) from None
    d = rep.to_dict()
    d["pair_gap_decreasing"] = _decreasing(rep.pair_gap_plus) and _decreasing(rep.pair_gap_minus)
    d["continuity_decreasing"] = bool(all(a > b for a, b in zip(rep.continuity, rep.continuity[1:])))
    d["kink_change"] = rep.kink_change
    return d


def cmd_propagator(cfg: RunConfig) -> Dataset:
    params = _params(cfg)
    if params.f == 0 and params.lam == 0:
        raise ConfigError("lam = f = 0 is not supported")
    ts = np.linspace(0.0, PERIOD, cfg.t_steps)
    dec = floquet_analytic.floquet_decomposition(params)
    traj = integrate_propagator(two_spin_system(params), PERIOD, tol=cfg.tol_integrator, t_eval=ts)
    cols = ["t"]
    for i in range(4):
        for j in range(4):
            cols += [f"re_{i + 1}{j + 1}", f"im_{i + 1}{j + 1}"]
    cols.append("numeric_deviation")
    rows = []
    for t, un in zip(ts, traj.propagators):
        ua = dec.propagator(t)
        row = [t]
        for z in ua.ravel():
            row += [z.real, z.imag]
        row.append(float(np.max(np.abs(ua - un))))
        rows.append(row)
    return Dataset(cols, rows)


def cmd_rates(cfg: RunConfig) -> Dataset:
    params = _params(cfg)
    try:
        if cfg.route == "analytic":
            eps = floquet_analytic.quasienergies(params)
            fc = dissipation.coupling_fourier_analytic(params)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                nf = extract_floquet(two_spin_system(params), tol=cfg.tol_integrator)
            nf = nf.relabel(floquet_analytic.quasienergies(params))
            eps = nf.quasienergies
            fc = fourier_components(nf, BATH_COUPLING, floor=max(1e-12, 10 * cfg.tol_integrator))
        rates = dissipation.transition_rates(eps, fc, cfg.beta_bath, cfg.j0, lmax=cfg.lmax)
    except ValueError as exc:
        raise ComputeError(str(exc)) from None
    gt = dissipation.effective_generator(rates)
    rows = []
    for name, m in (("gamma", rates.gamma), ("generator", gt)):
        for i in range(m.shape[0]):
            for j in range(m.shape[1]):
                rows.append([name, i + 1, j + 1, m[i, j]])
    ds = Dataset(["matrix", "row", "col", "value"], rows)
    ds.extra["quasienergies"] = list(eps)
    ds.extra["truncation_defect"] = rates.truncation_defect
    return ds


HANDLERS = {
    "quasienergies": cmd_quasienergies,
    "work": cmd_work,
    "ness": cmd_ness,
    "phase-diagram": cmd_phase_diagram,
    "boundary-report": cmd_boundary_report,
    "propagator": cmd_propagator,
    "rates": cmd_rates,
}


def run(cfg: RunConfig) -> int:
    result = HANDLERS[cfg.command](cfg)
    if isinstance(result, dict):
        doc = {"version": __version__, "config": cfg.resolved(), "report": result}
        _write(json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n", cfg.out)
        return EXIT_OK
    emit(result, cfg)
    if cfg.command == "ness" and result.rows:
        ok = sum(1 for r in result.rows if r[3] is not None)
        if ok < 0.9 * len(result.rows):
            return EXIT_COMPUTE
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = resolve_config(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        sys.stderr.write(f"twospin: configuration error: {exc}\n")
        return EXIT_CONFIG
    try:
        return run(cfg)
    except ConfigError as exc:
        sys.stderr.write(f"twospin: configuration error: {exc}\n")
        return EXIT_CONFIG
    except (ComputeError, ArithmeticError, ValueError, RuntimeError) as exc:
        sys.stderr.write(f"twospin: computation failed: {exc}\n")
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
