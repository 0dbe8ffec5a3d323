"""Command-line front end.

    qpath eval      one point (numeric or closed-form method)
    qpath sweep     Cartesian product of --axis grids
    qpath figure N  pinned grids behind figures 1-4
    qpath dispersion  energy / frequency / group velocity at given k
    qpath validate  production quadrature against both brute-force oracles

Exit codes: 0 ok, 1 usage, 2 numerical failure, 3 domain error.  Every
failure also prints one ``qpath: ...`` line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import closedform as cf
from . import dispersion as disp
from . import hausdorff as hd
from . import oracle
from .packet import Dim, QuadratureConfig, QuadratureError
from .packet import moments as packet_moments
from .scales import DimensionlessGroup, DomainError, PhysicalScales

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_DOMAIN = 0, 1, 2, 3


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


# -- configuration ---------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    command: str
    figure: Optional[int] = None
    deltax: float = 1.0
    vs: float = 0.0
    dt: float = 1.0
    mass: float = 1.0
    hbar: float = 1.0
    total_time: Optional[float] = None
    D: float = 2.0
    definition: str = "a"
    dim: int = 3
    method: str = "numeric"
    prefactor: str = "dxD1"
    k_convention: str = "reciprocal"
    time_scaling: str = "diffusive"
    reltol: float = 1e-8
    axis: tuple = ()
    k: tuple = ()
    kind: str = "bogoliubov"
    out: Optional[str] = None
    format: str = "csv"
    workers: int = 1


# flag name -> (RunConfig field, converter); also the accepted config-file keys
_OPTIONS = {
    "deltax": ("deltax", float),
    "vs": ("vs", float),
    "dt": ("dt", float),
    "mass": ("mass", float),
    "hbar": ("hbar", float),
    "total-time": ("total_time", float),
    "D": ("D", float),
    "def": ("definition", str),
    "dim": ("dim", int),
    "method": ("method", str),
    "prefactor": ("prefactor", str),
    "k-convention": ("k_convention", str),
    "time-scaling": ("time_scaling", str),
    "reltol": ("reltol", float),
    "axis": ("axis", list),
    "k": ("k", list),
    "kind": ("kind", str),
    "out": ("out", str),
    "format": ("format", str),
    "workers": ("workers", int),
}
_CHOICES = {
    "def": ("a", "b"),
    "dim": (1, 3),
    "method": ("numeric", "debroglie", "aw-a", "aw-b"),
    "prefactor": ("dxD1", "dxD", "xbarD"),
    "k-convention": ("reciprocal", "twopi"),
    "time-scaling": ("diffusive", "fixed-dt"),
    "kind": ("bogoliubov", "free", "sound"),
    "format": ("csv", "json"),
}
_HELP = {
    "deltax": "probing resolution dx (default 1)",
    "vs": "sound speed v_s (default 0)",
    "dt": "time step; 0 evaluates the unevolved packet (default 1)",
    "mass": "particle mass M (default 1)",
    "hbar": "reduced Planck constant (default 1)",
    "total-time": "total time T; lengths are multiplied by N = T/dt",
    "D": "dimension parameter of the Hausdorff length (default 2)",
    "def": "segment length: a = <|y|>, b = rms (default a)",
    "dim": "packet dimension for numeric methods (default 3)",
    "method": "length model (default numeric)",
    "prefactor": "prefactor convention for numeric rows (default dxD1)",
    "k-convention": "probed wavenumber 1/dx or 2 pi/dx (default reciprocal)",
    "time-scaling": "refinement path for the dimension estimate (default diffusive)",
    "reltol": "relative quadrature tolerance (default 1e-8)",
    "axis": "sweep axis, e.g. D=1:2:0.1, deltax=log:0.1:5:25, vs=0,2,4; repeatable",
    "k": "wavenumbers for the dispersion command, comma separated; repeatable",
    "kind": "dispersion law (default bogoliubov)",
    "out": "output file (default stdout)",
    "format": "output format (default csv)",
    "workers": "worker processes for sweeps and figures (default 1)",
}
# options that do not influence the numbers and are left out of the re-run line
_NOT_REPLAYED = {"out", "workers"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    for flag, (dest, conv) in _OPTIONS.items():
        kwargs = {"dest": dest, "default": None, "help": _HELP[flag]}
        if conv is list:
            kwargs["action"] = "append"
        else:
            kwargs["type"] = conv
        if flag in _CHOICES:
            kwargs["choices"] = _CHOICES[flag]
        common.add_argument(f"--{flag}", **kwargs)
    common.add_argument("--config", default=None, help="JSON file whose keys mirror the flags")

    parser = _Parser(prog="qpath", description="Hausdorff lengths of condensate quantum paths")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("eval", parents=[common], help="single point")
    sub.add_parser("sweep", parents=[common], help="grid over --axis specs")
    fig = sub.add_parser("figure", parents=[common], help="data behind figure 1-4")
    fig.add_argument("figure", type=int, choices=(1, 2, 3, 4))
    sub.add_parser("dispersion", parents=[common], help="dispersion law at --k values")
    sub.add_parser("validate", parents=[common], help="oracle agreement suite")
    return parser


def _load_config_file(path: str) -> Dict[str, object]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    out = {}
    for key, value in data.items():
        flag = key.replace("_", "-") if key.replace("_", "-") in _OPTIONS else key
        if flag not in _OPTIONS:
            raise UsageError(f"unknown config key {key!r}")
        dest, conv = _OPTIONS[flag]
        if conv is list:
            value = [value] if isinstance(value, (str, int, float)) else list(value)
        elif value is not None:
            try:
                value = conv(value)
            except (TypeError, ValueError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from exc
        if flag in _CHOICES and value not in _CHOICES[flag]:
            raise UsageError(f"config key {key!r} must be one of {_CHOICES[flag]}")
        out[dest] = value
    return out


def parse_config(argv: Sequence[str]) -> RunConfig:
    """Flags override the ``--config`` file, which overrides the defaults."""
    ns = _build_parser().parse_args(list(argv))
    values: Dict[str, object] = {}
    if ns.config:
        values.update(_load_config_file(ns.config))
    for dest, _ in _OPTIONS.values():
        v = getattr(ns, dest)
        if v is not None:
            values[dest] = v
    for key in ("axis", "k"):
        if key in values:
            values[key] = tuple(str(v) for v in values[key])
    cfg = RunConfig(command=ns.command, figure=getattr(ns, "figure", None), **values)
    if cfg.workers < 1:
        raise UsageError("--workers must be >= 1")
    return cfg


def replay_line(cfg: RunConfig) -> str:
    """A command line reproducing ``cfg`` (output path and worker count aside)."""
    parts = ["qpath", cfg.command]
    if cfg.figure is not None:
        parts.append(str(cfg.figure))
    for flag, (dest, conv) in _OPTIONS.items():
        if flag in _NOT_REPLAYED:
            continue
        value = getattr(cfg, dest)
        if value is None:
            continue
        if conv is list:
            parts += [f"--{flag}={v}" for v in value]
        else:
            parts.append(f"--{flag}={value!r}" if conv is float else f"--{flag}={value}")
    return " ".join(parts)


# -- axis syntax -------------------------------------------------------------------

_AXIS_ALIASES = {"D": "D", "deltax": "deltax", "vs": "vs", "dt": "deltat", "deltat": "deltat"}


def _clean(v: float) -> float:
    # 1 + 3*0.1 -> 1.3 rather than 1.3000000000000003
    return float(f"{v:.12g}")


def parse_axis(spec: str):
    """``name=a:b:step`` | ``name=log:a:b:n`` | ``name=v1,v2,...``."""
    if "=" not in spec:
        raise UsageError(f"axis {spec!r}: expected name=values")
    name, body = spec.split("=", 1)
    if name not in _AXIS_ALIASES:
        raise UsageError(f"axis {spec!r}: unknown name {name!r}")
    try:
        if body.startswith("log:"):
            a, b, n = body[4:].split(":")
            a, b, n = float(a), float(b), int(n)
            if not (a > 0 and b > 0 and n >= 1):
                raise ValueError("log axis needs positive bounds and n >= 1")
            vals = [float(v) for v in np.geomspace(a, b, n)]
        elif ":" in body:
            a, b, step = (float(x) for x in body.split(":"))
            if not step > 0 or b < a:
                raise ValueError("range axis needs step > 0 and stop >= start")
            n = int(math.floor((b - a) / step + 1e-9)) + 1
            vals = [_clean(a + i * step) for i in range(n)]
        elif body == "":
            vals = []
        else:
            vals = [float(x) for x in body.split(",")]
    except ValueError as exc:
        raise UsageError(f"axis {spec!r}: {exc}") from exc
    return _AXIS_ALIASES[name], vals


# -- serialization -------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_table(table: hd.SweepTable, fmt: str = "csv", destination=None) -> str:
    """Serialize ``table``; write to ``destination`` (path or file) if given."""
    if fmt == "csv":
        buf = io.StringIO()
        for key, value in table.metadata.items():
            buf.write(f"# {key}: {value}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(hd.FIELDS)
        for row in table.rows:
            writer.writerow([_fmt(v) for v in row.as_row()])
        text = buf.getvalue()
    elif fmt == "json":
        def enc(v):
            if isinstance(v, float) and not math.isfinite(v):
                return repr(v)
            return v

        doc = {
            "metadata": table.metadata,
            "axes": table.axes,
            "columns": list(hd.FIELDS),
            "rows": [{f: enc(v) for f, v in zip(hd.FIELDS, r.as_row())} for r in table.rows],
        }
        text = json.dumps(doc, indent=1, allow_nan=False) + "\n"
    else:
        raise UsageError(f"unknown format {fmt!r}")
    if destination is not None:
        if hasattr(destination, "write"):
            destination.write(text)
        else:
            with open(destination, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    return text


def _row_from_strings(values: Dict[str, object]) -> hd.HausdorffResult:
    kw = {}
    for f in hd.FIELDS:
        v = values[f]
        kw[f] = str(v) if f in ("method", "flags") else float(v)
    return hd.HausdorffResult(**kw)


def _axes_from_metadata(meta: Dict[str, str]) -> Dict[str, List[float]]:
    axes: Dict[str, List[float]] = {}
    for part in meta.get("axes", "").split():
        name, vals = part.split("=", 1)
        axes[name] = [float(v) for v in vals.split(",")] if vals else []
    return axes


def parse_table(text: str, fmt: str = "csv") -> hd.SweepTable:
    """Inverse of :func:`emit_table`."""
    if fmt == "json":
        doc = json.loads(text)
        rows = [_row_from_strings(r) for r in doc["rows"]]
        axes = {k: [float(v) for v in vals] for k, vals in doc["axes"].items()}
        return hd.SweepTable(axes=axes, rows=rows, metadata=dict(doc["metadata"]))
    meta: Dict[str, str] = {}
    body = []
    for line in text.splitlines(keepends=True):
        if line.startswith("# "):
            key, _, value = line[2:].rstrip("\n").partition(": ")
            meta[key] = value
        else:
            body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    if tuple(header) != hd.FIELDS:
        raise ValueError("unexpected CSV header")
    rows = [_row_from_strings(dict(zip(header, rec))) for rec in reader]
    return hd.SweepTable(axes=_axes_from_metadata(meta), rows=rows, metadata=meta)


def _write_text(text: str, cfg: RunConfig):
    if cfg.out is None:
        sys.stdout.write(text)
        return
    tmp = cfg.out + ".part"
    try:
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, cfg.out)
    except OSError as exc:
        raise NumericalFailure(f"cannot write {cfg.out}: {exc.strerror}") from exc


# -- commands ------------------------------------------------------------------------

def _settings(cfg: RunConfig) -> hd.NumericSettings:
    return hd.NumericSettings(dim=Dim(cfg.dim), quad=QuadratureConfig(rel_tol=cfg.reltol),
                              time_scaling=hd.TimeScaling(cfg.time_scaling))


def _method(cfg: RunConfig) -> hd.Method:
    if cfg.method == "numeric":
        return hd.Method.numeric(cf.LengthDefinition(cfg.definition))
    return hd.Method(cfg.method)


def _scales(cfg: RunConfig) -> PhysicalScales:
    return PhysicalScales(delta_x=cfg.deltax, sound_speed=cfg.vs, delta_t=cfg.dt,
                          mass=cfg.mass, hbar=cfg.hbar, total_time=cfg.total_time)


def _sweep_table(cfg: RunConfig, axes) -> hd.SweepTable:
    base = _scales(cfg)
    meta = {"rerun": replay_line(cfg)}
    return hd.sweep(axes, _method(cfg), cf.LengthDefinition(cfg.definition),
                    hd.PrefactorConvention(cfg.prefactor), _settings(cfg), base, cfg.workers, meta)


def _cmd_eval(cfg: RunConfig) -> hd.SweepTable:
    table = _sweep_table(cfg, {"D": [cfg.D]})
    table.metadata.pop("axes", None)
    table.axes = {}
    return table


def _cmd_sweep(cfg: RunConfig) -> hd.SweepTable:
    if not cfg.axis:
        raise UsageError("sweep needs at least one --axis")
    axes = {}
    for spec in cfg.axis:
        name, vals = parse_axis(spec)
        if name in axes:
            raise UsageError(f"axis {name} given twice")
        axes[name] = vals
    return _sweep_table(cfg, axes)


def _cmd_figure(cfg: RunConfig) -> hd.SweepTable:
    table = hd.figure_data(cfg.figure, _settings(cfg), hd.PrefactorConvention(cfg.prefactor),
                           cfg.workers)
    table.metadata["rerun"] = replay_line(cfg)
    return table


def _cmd_dispersion(cfg: RunConfig) -> str:
    spec = disp.DispersionSpec(disp.Kind(cfg.kind), cfg.vs, cfg.mass, cfg.hbar)
    ks = []
    for item in cfg.k or ("1",):
        try:
            ks += [float(v) for v in item.split(",")]
        except ValueError as exc:
            raise UsageError(f"--k {item!r}: {exc}") from exc
    conv = disp.ProbeConvention(cfg.k_convention)
    rows = []
    for k in ks:
        rows.append({
            "kind": cfg.kind, "k": k, "energy": float(disp.energy(cfg.hbar * k, spec)),
            "omega": float(disp.omega(k, spec)),
            "group_velocity": float(disp.omega_derivative(k, spec)),
        })
    probe = {}
    if cfg.kind == "bogoliubov" and cfg.vs > 0:
        probe = {"probe_delta_x": repr(cfg.deltax), "probe_convention": conv.value,
                 "probe_group_velocity": repr(disp.group_velocity(cfg.deltax, spec, conv))}
    meta = {"rerun": replay_line(cfg), "v_s": repr(cfg.vs), "mass": repr(cfg.mass),
            "hbar": repr(cfg.hbar), **probe}
    return _emit_records(meta, ["kind", "k", "energy", "omega", "group_velocity"], rows, cfg.format)


def _emit_records(meta, columns, rows, fmt) -> str:
    if fmt == "json":
        return json.dumps({"metadata": meta, "columns": columns, "rows": rows}, indent=1,
                          allow_nan=False) + "\n"
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def validation_records(dims=(1, 3), points=None):
    """Pairwise relative deviations of the three moment routes."""
    points = oracle.VALIDATION_SET if points is None else points
    records = []
    for d in dims:
        dim = Dim(d)
        tol = 1e-4 if dim is Dim.ONE else 1e-3
        for s, theta in points:
            g = DimensionlessGroup.from_phase_parameters(s, theta)
            grid = oracle.validation_grid(dim, s)
            routes = {
                "packet": packet_moments(g, dim=dim),
                "cartesian": oracle.cartesian_moments(g, dim=dim, grid=grid),
                "spectral": oracle.spectral_moments(g, dim=dim, grid=grid),
            }
            for q in ("mean_abs", "rms"):
                vals = {k: getattr(m, q) for k, m in routes.items()}
                names = list(vals)
                dev = max(abs(vals[a] - vals[b]) / abs(vals[b])
                          for i, a in enumerate(names) for b in names[i + 1:])
                records.append({"dim": d, "s": float(s), "theta": float(theta), "quantity": q,
                                **vals, "max_rel_dev": dev, "tolerance": tol,
                                "pass": "yes" if dev <= tol else "no"})
    return records


def _cmd_validate(cfg: RunConfig):
    dims = (cfg.dim,) if cfg.dim == 1 else (1, 3)
    records = validation_records(dims)
    cols = ["dim", "s", "theta", "quantity", "packet", "cartesian", "spectral",
            "max_rel_dev", "tolerance", "pass"]
    text = _emit_records({"rerun": replay_line(cfg)}, cols, records, cfg.format)
    ok = all(r["pass"] == "yes" for r in records)
    return text, ok


def run(argv: Sequence[str]) -> int:
    try:
        cfg = parse_config(argv)
        if cfg.command == "dispersion":
            _write_text(_cmd_dispersion(cfg), cfg)
            return EXIT_OK
        if cfg.command == "validate":
            text, ok = _cmd_validate(cfg)
            _write_text(text, cfg)
            if not ok:
                raise NumericalFailure("validation tolerances not met")
            return EXIT_OK
        handler = {"eval": _cmd_eval, "sweep": _cmd_sweep, "figure": _cmd_figure}[cfg.command]
        table = handler(cfg)
        if cfg.command == "eval" and table.rows[0].failed:
            # a single point has nothing else to report: surface the cause
            row = table.rows[0]
            kind = row.flags.split(":", 1)[1]
            if kind == "DomainError":
                raise DomainError(f"domain error at the requested point ({row.flags})")
            raise NumericalFailure(f"evaluation failed ({row.flags})")
        _write_text(emit_table(table, cfg.format), cfg)
        if table.failures:
            raise NumericalFailure(f"{table.failures} of {len(table.rows)} rows failed")
        return EXIT_OK
    except UsageError as exc:
        print(f"qpath: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"qpath: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (NumericalFailure, QuadratureError, oracle.ResolutionError,
            oracle.AliasingError) as exc:
        print(f"qpath: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)
