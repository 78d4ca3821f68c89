"""Command-line entry point: ``cgl-lab {ode,simulate,check,sweep}``.

Exit codes: 0 for any completed command (a detected blowup is a result),
2 for usage or config errors, 3 for initial data that cannot be resolved.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import core, criteria, functionals, monitors, ode, solver
from .core import SERIES_COLUMNS, DiagnosticsRecord, Field, Grid, Params, TimeSeries

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 2, 3


class ConfigError(ValueError):
    pass


class InitialDataError(ValueError):
    pass


def fmt(x: float) -> str:
    """Shortest round-trip decimal."""
    return repr(float(x))


def parse_complex(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError(f"not a complex number: {text!r}") from None


# config files -------------------------------------------------------------

PARAM_KEYS = ("theta", "alpha", "gamma", "dim")
CONTROL_KEYS = tuple(f.name for f in dataclasses.fields(solver.StepControls))
INITIAL_KEYS = ("kind", "amplitude", "width", "center", "radius", "seed", "modes", "value",
                "path")
INITIAL_KINDS = ("gaussian", "ring", "random", "constant", "zero", "file")
KNOWN_KEYS = ({f"params.{k}" for k in PARAM_KEYS} | {"grid.half_width", "grid.n"}
              | {f"controls.{k}" for k in CONTROL_KEYS}
              | {f"initial.{k}" for k in INITIAL_KEYS} | {"outputs", "monitors"})


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment; bare param names are accepted."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[_canonical_key(key, lineno)] = value
    return out


def _canonical_key(key: str, lineno: int | None = None) -> str:
    if key in PARAM_KEYS:
        key = f"params.{key}"
    if key not in KNOWN_KEYS:
        where = f"line {lineno}: " if lineno else ""
        raise ConfigError(f"{where}unknown key {key!r}")
    return key


def apply_overrides(cfg: dict[str, str], sets: list[str]) -> dict[str, str]:
    cfg = dict(cfg)
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = (s.strip() for s in item.split("=", 1))
        cfg[_canonical_key(k)] = v
    return cfg


@dataclass
class RunConfig:
    params: Params
    grid: Grid
    controls: solver.StepControls
    initial: dict
    outputs: Path = Path(".")
    monitors: tuple[str, ...] = ()
    raw: dict = field(default_factory=dict)


def _num(cfg, key, default, kind=float):
    if key not in cfg:
        return default
    try:
        return kind(cfg[key])
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {cfg[key]!r}") from None


def build_config(cfg: dict[str, str]) -> RunConfig:
    try:
        params = Params(theta=_num(cfg, "params.theta", 0.0),
                        alpha=_num(cfg, "params.alpha", 2.0),
                        gamma=_num(cfg, "params.gamma", 0.0),
                        dim=_num(cfg, "params.dim", 1, int))
        ref = core.default_grid(params.dim)
        grid = Grid(_num(cfg, "grid.half_width", ref.half_width),
                    _num(cfg, "grid.n", ref.n, int), params.dim)
        ctl = {}
        for f in dataclasses.fields(solver.StepControls):
            key = f"controls.{f.name}"
            if key in cfg:
                ctl[f.name] = _num(cfg, key, None, int if f.type in ("int", int) else float)
        controls = solver.StepControls(**ctl)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    initial = {k.split(".", 1)[1]: v for k, v in cfg.items() if k.startswith("initial.")}
    initial.setdefault("kind", "gaussian")
    if initial["kind"] not in INITIAL_KINDS:
        raise ConfigError(f"initial.kind must be one of {', '.join(INITIAL_KINDS)}")
    names = tuple(m.strip() for m in cfg.get("monitors", "").split(",") if m.strip())
    for m in names:
        if m not in monitors.MONITORS:
            raise ConfigError(f"unknown monitor {m!r}; choose from {', '.join(monitors.MONITORS)}")
    return RunConfig(params, grid, controls, initial, Path(cfg.get("outputs", ".")), names, cfg)


def load_config(path: str, sets: list[str] | None = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return build_config(apply_overrides(parse_config_text(text), sets or []))


def resolve_initial(rc: RunConfig) -> Field:
    """Materialize the initial descriptor; raises InitialDataError on failure."""
    d, g = rc.initial, rc.grid
    kind = d["kind"]
    try:
        amp = parse_complex(d.get("amplitude", "1"))
        width = float(d.get("width", "1"))
        if kind == "gaussian":
            center = [float(c) for c in d.get("center", "0").split(",")]
            if len(center) not in (1, g.dim):
                raise InitialDataError("initial.center needs 1 or dim entries")
            u = core.gaussian(g, amp, width, center if len(center) > 1 else center[0])
        elif kind == "ring":
            u = core.ring(g, amp, float(d.get("radius", "3")), width)
        elif kind == "random":
            u = core.random_bandlimited(g, int(d.get("seed", "0")), int(d.get("modes", "8")),
                                        abs(amp))
        elif kind == "constant":
            u = core.constant(g, parse_complex(d.get("value", d.get("amplitude", "1"))))
        elif kind == "zero":
            return core.constant(g, 0.0)
        else:
            u = Field(g, _read_field_file(d.get("path"), g))
    except (InitialDataError, ConfigError):
        raise
    except (ValueError, OSError) as exc:
        raise InitialDataError(f"initial data: {exc}") from None
    if u.sup_norm == 0:
        raise InitialDataError("initial data is zero; use initial.kind = zero")
    return u


def _read_field_file(path, g: Grid) -> np.ndarray:
    """``.npy`` complex array or a text file with columns ``re im`` (row-major)."""
    if not path:
        raise InitialDataError("initial.kind = file needs initial.path")
    if str(path).endswith(".npy"):
        arr = np.load(path)
    else:
        cols = np.loadtxt(path, ndmin=2)
        if cols.shape[1] != 2:
            raise InitialDataError("text field files need two columns: re im")
        arr = cols[:, 0] + 1j * cols[:, 1]
    if arr.size != g.size:
        raise InitialDataError(f"field file has {arr.size} samples, grid needs {g.size}")
    return np.asarray(arr, dtype=np.complex128).reshape(g.shape)


# series files -------------------------------------------------------------

def series_to_csv(s: TimeSeries) -> str:
    lines = [",".join(SERIES_COLUMNS)]
    for r in s.records:
        row = (r.t, r.mass, r.energy, r.variational, r.grad_sq, r.sup_norm, r.ut_sq,
               r.inner_uut.real, r.inner_uut.imag)
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def series_from_csv(text: str, params: Params) -> TimeSeries:
    rows = text.strip().splitlines()
    if not rows or tuple(rows[0].split(",")) != SERIES_COLUMNS:
        raise ValueError("unexpected series header")
    s = TimeSeries(params)
    for line in rows[1:]:
        v = [float(x) for x in line.split(",")]
        s.append(DiagnosticsRecord(v[0], v[1], v[2], v[3], v[4], v[5], v[6], complex(v[7], v[8])))
    return s


# subcommands --------------------------------------------------------------

def cmd_ode(args) -> int:
    p = Params(args.theta, args.alpha, args.gamma)
    v0 = parse_complex(args.v0)
    verdict = ode.ode_classify(v0, p)
    print(verdict)
    ts = sorted(args.t or [])
    if ts:
        print("t,re,im,abs")
    for t in ts:
        if t < 0:
            raise ConfigError("times must be non-negative")
        if t >= verdict.t_star:
            print(f"{fmt(t)},nan,nan,inf")
            continue
        v = complex(ode.ode_exact(v0, p, t))
        print(f"{fmt(t)},{fmt(v.real)},{fmt(v.imag)},{fmt(abs(v))}")
    return EXIT_OK


def _bound_lines(rc: RunConfig, u0: Field, out: solver.SimOutcome) -> list[str]:
    p = rc.params
    lines = []
    if rc.initial["kind"] == "constant" and u0.sup_norm > 0:
        v0 = complex(u0.values.reshape(-1)[0])
        t_ode = ode.ode_blowup_time(v0, p)
        lines.append(f"ode_t_star: {fmt(t_ode)}")
        if out.blowup and math.isfinite(t_ode):
            lines.append(f"t_star_rel_diff_vs_ode: {fmt(abs(out.t_star - t_ode) / t_ode)}")
    if u0.sup_norm == 0:
        return lines
    if p.gamma > 0:
        rep = criteria.check_thm_pos(u0, p)
        lines.append(f"negative_energy_check: {rep.notes}")
        if "t_bound" in rep.extra:
            tb = rep.extra["t_bound"]
            lines.append(f"t_bound: {fmt(tb)}")
            if out.blowup:
                lines.append(f"t_star_le_t_bound: {out.t_star <= tb}")
    elif p.gamma < 0:
        rep = criteria.check_thm_neg(u0, p)
        lines.append(f"shifted_energy_check: {rep.notes}")
        if 0 < p.dim * p.alpha < 4:
            est = functionals.gn_constant_estimate(p.alpha, p.dim, rc.grid)
            thr = criteria.global_threshold(p, est)
            norm = math.sqrt(functionals.mass(u0))
            lines.append(f"small_data_threshold: {fmt(thr.value)} (indicative)")
            lines.append(f"l2_norm_below_threshold: {norm <= thr.value}")
    return lines


def cmd_simulate(args) -> int:
    rc = load_config(args.config, args.set)
    if args.out:
        rc.outputs = Path(args.out)
    u0 = resolve_initial(rc)
    try:
        out = solver.simulate(u0, rc.params, rc.controls)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rc.outputs.mkdir(parents=True, exist_ok=True)
    (rc.outputs / "series.csv").write_text(series_to_csv(out.series))
    lines = [f"kind: {out.kind}",
             f"t_star: {fmt(out.t_star)}",
             f"t_final: {fmt(out.t_final)}",
             f"sup_norm_final: {fmt(out.sup_norm_final)}",
             f"accepted_steps: {out.accepted_steps}",
             f"rejected_steps: {out.rejected_steps}"]
    if out.kind == "Decayed":
        lines.append(f"decay_level: {fmt(out.decay_level)}")
    lines += _bound_lines(rc, u0, out)
    (rc.outputs / "outcome.txt").write_text("\n".join(lines) + "\n")
    for name in rc.monitors:
        fn = monitors.MONITORS[name]
        try:
            text = fn(out.series, rc.params).text()
        except ValueError as exc:
            text = f"monitor: {name}\nnot applicable: {exc}\n"
        (rc.outputs / f"monitor_{name}.txt").write_text(text)
    print(out.describe())
    return EXIT_OK


def check_lines(rc: RunConfig, u0: Field) -> list[str]:
    p = rc.params
    lines = []
    if p.gamma > 0:
        rep = criteria.check_thm_pos(u0, p)
        head = rep.notes
        if "t_bound" in rep.extra:
            head += f"; Tbound={fmt(rep.extra['t_bound'])}"
        lines += [head, "  " + rep.summary()]
    elif p.gamma < 0:
        rep = criteria.check_thm_neg(u0, p)
        lines += [rep.notes, "  " + rep.summary()]
    else:
        lines.append("gamma = 0: blowup checks need gamma != 0; no conclusion")
    lines.append(criteria.check_structural(p).summary())
    lines.append(criteria.check_mz(p).summary())
    if p.gamma < 0 and 0 < p.dim * p.alpha < 4:
        est = functionals.gn_constant_estimate(p.alpha, p.dim, rc.grid)
        thr = criteria.global_threshold(p, est)
        norm = math.sqrt(functionals.mass(u0))
        lines.append(f"small-data global threshold: {fmt(thr.value)} [indicative]; "
                     f"||u0||={fmt(norm)}; below={norm <= thr.value}; "
                     f"gn_constant={fmt(est.constant)}")
    return lines


def cmd_check(args) -> int:
    rc = load_config(args.config, args.set)
    u0 = resolve_initial(rc)
    print("\n".join(check_lines(rc, u0)))
    return EXIT_OK


def _workers() -> int:
    env = os.environ.get("CGL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("CGL_THREADS must be an integer") from None
    return min(8, os.cpu_count() or 1)


GNUPLOT = """\
# Region map; render with: gnuplot {script}
set datafile separator ","
set xlabel "alpha"
set ylabel "theta"
set palette defined (0 "#1b9e77", 1 "#d95f02", 2 "#7570b3", 3 "#bbbbbb")
set cbrange [-0.5:3.5]
set cbtics ("both" 0, "only-cos-squared" 1, "only-structural" 2, "neither" 3)
set terminal pngcairo size 900,700
set output "regions.png"
code(s) = (s eq "both") ? 0 : (s eq "only-cos-squared") ? 1 : (s eq "only-structural") ? 2 : 3
plot "regions.csv" using 1:2:(code(strcol(5))) skip 1 with image notitle
"""


def cmd_sweep(args) -> int:
    a0, a1 = args.alpha_range
    t0, t1 = args.theta_range
    if not (a1 > a0 and t1 > t0):
        raise ConfigError("empty range")
    res = (args.resolution, args.resolution_theta or args.resolution)
    try:
        rg = criteria.compare_conditions((a0, a1), (t0, t1), res, workers=_workers())
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = rg.label_names()
    lines = ["alpha,theta,s_1_8,s_1_14,label"]
    for i, a in enumerate(rg.alphas):
        for j, t in enumerate(rg.thetas):
            lines.append(f"{fmt(a)},{fmt(t)},{fmt(rg.s_1_8[i, j])},{fmt(rg.s_1_14[i, j])},"
                         f"{names[i, j]}")
    (out / "regions.csv").write_text("\n".join(lines) + "\n")
    (out / "regions.gp").write_text(GNUPLOT.format(script="regions.gp"))
    print(" ".join(f"{k}={v}" for k, v in rg.counts().items()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cgl-lab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    o = sub.add_parser("ode", help="classify and evaluate the spatially constant solution")
    o.add_argument("--v0", required=True, help="complex initial value, e.g. 1+0.5j")
    o.add_argument("--theta", type=float, required=True)
    o.add_argument("--alpha", type=float, required=True)
    o.add_argument("--gamma", type=float, required=True)
    o.add_argument("--t", type=float, nargs="*", help="times at which to print v(t)")
    o.set_defaults(func=cmd_ode)

    for name, func, helptext in (("simulate", cmd_simulate, "run a simulation from a config"),
                                 ("check", cmd_check, "evaluate blowup/global criteria")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("config")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key, e.g. --set controls.tol=1e-10")
        if name == "simulate":
            sp.add_argument("--out", help="output directory (overrides `outputs`)")
        sp.set_defaults(func=func)

    sw = sub.add_parser("sweep", help="classify a (alpha, theta) grid")
    sw.add_argument("--alpha-range", type=float, nargs=2, default=(0.0, 10.0))
    sw.add_argument("--theta-range", type=float, nargs=2,
                    default=(-math.pi / 4, math.pi / 4))
    sw.add_argument("--resolution", type=int, default=200)
    sw.add_argument("--resolution-theta", type=int)
    sw.add_argument("--out", default=".")
    sw.set_defaults(func=cmd_sweep)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InitialDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
