"""Command-line front end: rotation numbers, sweeps, traces, bridges,
Bessel residual scans and slow curves, each written as CSV with a JSON
run manifest alongside.

Exit codes: 0 success, 1 usage error, 2 numeric failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

from . import __version__
from .asymptotics import bessel_j, boundary_asymptote, residual_scan
from .errors import NumericFailure
from .integrator import IntegratorConfig
from .model import Params
from .poincare import rotation_number
from .slowfast import slow_curve
from .tongues import TraceConfig, find_bridges, trace_boundary

log = logging.getLogger("jtongues")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3
THREADS_ENV = "JT_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


@dataclass(frozen=True)
class SweepJob:
    a_range: tuple
    b_range: tuple
    grid: tuple
    mu: float
    method: str = "mobius"

    def __post_init__(self):
        object.__setattr__(self, "a_range", tuple(float(v) for v in self.a_range))
        object.__setattr__(self, "b_range", tuple(float(v) for v in self.b_range))
        object.__setattr__(self, "grid", tuple(int(v) for v in self.grid))
        if len(self.a_range) != 2 or len(self.b_range) != 2 or len(self.grid) != 2:
            raise UsageError("a_range, b_range and grid need two entries each")
        if not (self.a_range[0] < self.a_range[1] and self.b_range[0] < self.b_range[1]):
            raise UsageError("sweep ranges must be non-degenerate (lo < hi)")
        if min(self.grid) < 2:
            raise UsageError("grid counts must be >= 2")
        if not self.mu > 0:
            raise UsageError("mu must be positive")

    def cells(self):
        (a0, a1), (b0, b1), (na, nb) = self.a_range, self.b_range, self.grid
        out = []
        for i in range(na):
            a = a0 + (a1 - a0) * i / (na - 1)
            for j in range(nb):
                out.append((a, b0 + (b1 - b0) * j / (nb - 1)))
        return out


def worker_count(flag: int | None) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    elif flag is not None:
        n = flag
    else:
        n = os.cpu_count() or 1
    if n < 1:
        raise UsageError("worker count must be >= 1")
    return n


def fan_out(fn, tasks, n_workers):
    """Apply ``fn`` to ``tasks`` with contiguous static chunks; results in task order."""
    tasks = list(tasks)
    if n_workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    n = min(n_workers, len(tasks))
    size = math.ceil(len(tasks) / n)
    chunks = [(fn, tasks[i:i + size]) for i in range(0, len(tasks), size)]
    with ProcessPoolExecutor(max_workers=n) as ex:
        parts = list(ex.map(_run_chunk, chunks))
    return [r for part in parts for r in part]


def _run_chunk(arg):
    fn, chunk = arg
    return [fn(t) for t in chunk]


def _integrator_cfg(args) -> IntegratorConfig:
    return IntegratorConfig(rel_tol=args.rtol, abs_tol=args.atol,
                            max_step=args.max_step, min_step=args.min_step)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _write_output(path, text, manifest):
    tmp = f"{path}.partial"
    data = text.encode("utf-8")
    try:
        with open(tmp, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
        manifest = dict(manifest, output=os.path.abspath(path),
                        sha256=hashlib.sha256(data).hexdigest())
        with open(f"{path}.manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    return manifest


def _manifest(command, args, started, **extra):
    params = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    return {
        "tool": "jtongues",
        "version": __version__,
        "command": command,
        "params": params,
        "integrator": asdict(_integrator_cfg(args)),
        "wall_time_s": time.perf_counter() - started,
        **extra,
    }


# -- rotnum ------------------------------------------------------------------

def cmd_rotnum(args):
    cfg = _integrator_cfg(args)
    res = rotation_number(Params(args.a, args.b, args.mu), method=args.method,
                          n_periods=args.periods, cfg=cfg)
    out = {
        "rho": res.rho,
        "method": res.method,
        "class": res.map_class.value if res.map_class else None,
        "error_bound": res.error_bound,
    }
    if args.json:
        print(json.dumps(out))
    else:
        for k, v in out.items():
            print(f"{k} = {fmt(v) if v is not None else '-'}")
    return EXIT_OK


# -- sweep -------------------------------------------------------------------

def _sweep_cell(task):
    a, b, mu, method, cfg = task
    res = rotation_number(Params(a, b, mu), method=method, cfg=cfg)
    cls = res.map_class.value if res.map_class else ""
    fit = res.mobius.fit_residual if res.mobius is not None else ""
    return (a, b, res.rho, cls, fit)


def _sweep_job(args) -> SweepJob:
    fields = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                fields.update(json.load(fh))
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad config {args.config}: {exc}") from None
        fields.pop("outputs", None)
    for name in ("a_range", "b_range", "grid", "mu", "method"):
        v = getattr(args, name)
        if v is not None:
            fields[name] = v
    missing = {"a_range", "b_range", "grid", "mu"} - fields.keys()
    if missing:
        raise UsageError(f"sweep needs {sorted(missing)} (flags or --config)")
    try:
        return SweepJob(**fields)
    except TypeError as exc:
        raise UsageError(str(exc)) from None


def cmd_sweep(args):
    started = time.perf_counter()
    job = _sweep_job(args)
    cfg = _integrator_cfg(args)
    n = worker_count(args.threads)
    tasks = [(a, b, job.mu, job.method, cfg) for a, b in job.cells()]
    rows = fan_out(_sweep_cell, tasks, n)
    text = _csv_text(["a", "b", "rho", "class", "fit_residual"], rows)
    _write_output(args.out, text, _manifest("sweep", args, started, job=asdict(job)))
    return EXIT_OK


# -- trace -------------------------------------------------------------------

def _parse_k(values):
    ks = []
    for v in values:
        if "-" in v[1:]:
            lo, hi = v.split("-", 1) if not v.startswith("-") else (v, v)
            ks.extend(range(int(lo), int(hi) + 1))
        else:
            ks.append(int(v))
    if any(k < 0 for k in ks):
        raise UsageError("tongue index k must be >= 0")
    return ks


def _sides(side):
    return {"0": [0.0], "pi": [math.pi], "both": [0.0, math.pi]}[side]


def _trace_task(task):
    k, side, mu, b_max, tcfg = task
    return trace_boundary(k, side, mu, b_max, tcfg)


def _trace_cfg(args):
    return TraceConfig(h=args.h, newton_tol=args.newton_tol, time_direction=args.direction,
                       integrator=_integrator_cfg(args))


def cmd_trace(args):
    started = time.perf_counter()
    tcfg = _trace_cfg(args)
    tasks = [(k, s, args.mu, args.b_max, tcfg) for k in _parse_k(args.k) for s in _sides(args.side)]
    curves = fan_out(_trace_task, tasks, worker_count(args.threads))
    rows = []
    for c in curves:
        side = "0" if c.side == 0.0 else "pi"
        for s in c.samples:
            rows.append((c.k, side, s.b, s.a, s.residual, s.method, s.direction))
    text = _csv_text(["k", "side", "b", "a", "residual", "method", "direction"], rows)
    _write_output(args.out, text, _manifest("trace", args, started, trace=asdict(tcfg)))
    return EXIT_OK


# -- bridges -----------------------------------------------------------------

def _bridge_task(task):
    k, mu, b_max, tcfg = task
    return find_bridges(k, mu, b_max, tcfg)


def cmd_bridges(args):
    started = time.perf_counter()
    tcfg = _trace_cfg(args)
    tasks = [(k, args.mu, args.b_max, tcfg) for k in _parse_k(args.k)]
    found = fan_out(_bridge_task, tasks, worker_count(args.threads))
    rows = [(br.k, br.b_star, br.a_star, br.residual_0, br.residual_pi)
            for group in found for br in group]
    text = _csv_text(["k", "b_star", "a_star", "residual_0", "residual_pi"], rows)
    _write_output(args.out, text, _manifest("bridges", args, started))
    return EXIT_OK


# -- bessel ------------------------------------------------------------------

def cmd_bessel(args):
    started = time.perf_counter()
    tcfg = _trace_cfg(args)
    scan = residual_scan(args.k, args.mu, tuple(args.b_range) if args.b_range else None,
                         args.n_points, tcfg)
    rows = []
    for i, b in enumerate(scan.b):
        z = float(b) / args.mu
        jp = bessel_j(args.k, z).value
        jm = bessel_j(args.k, -z).value
        rows.append((float(b), float(scan.a_0[i]), float(scan.a_pi[i]),
                     boundary_asymptote(args.k, args.mu, b, 0.0),
                     boundary_asymptote(args.k, args.mu, b, math.pi),
                     float(scan.residual_0[i]), float(scan.residual_pi[i]),
                     abs(jm - (-1) ** args.k * jp)))
    header = ["b", "a_0", "a_pi", "asymptote_0", "asymptote_pi",
              "residual_0", "residual_pi", "parity_defect"]
    _write_output(args.out, _csv_text(header, rows),
                  _manifest("bessel", args, started, exponent_0=scan.exponent_0,
                            exponent_pi=scan.exponent_pi, exponent=scan.exponent))
    return EXIT_OK


# -- slowcurve ---------------------------------------------------------------

def cmd_slowcurve(args):
    started = time.perf_counter()
    sc = slow_curve(args.a, args.b, args.n_samples)
    region = sc.region.value
    rows = []
    for i, (pts, contractible) in enumerate(zip(sc.components, sc.contractible)):
        for t, x in pts:
            t, x = float(t), float(x)
            rows.append((region, "component", i, t, x,
                         abs(math.cos(x) + args.a + args.b * math.cos(t)), contractible))
    for j, (t, x) in enumerate(sc.folds):
        rows.append((region, "fold", j, t, x, abs(math.cos(x) + args.a + args.b * math.cos(t)), ""))
    header = ["region", "kind", "index", "t", "x", "residual", "contractible"]
    _write_output(args.out, _csv_text(header, rows),
                  _manifest("slowcurve", args, started, windings=sc.windings,
                            n_components=len(sc.components), n_folds=len(sc.folds)))
    return EXIT_OK


# -- rerun -------------------------------------------------------------------

def cmd_rerun(args):
    with open(args.manifest, encoding="utf-8") as fh:
        man = json.load(fh)
    if man.get("command") not in COMMANDS or man["command"] == "rerun":
        raise UsageError(f"{args.manifest}: not a run manifest")
    ns = argparse.Namespace(**man["params"])
    ns.out = args.out or man["output"]
    ns.func = COMMANDS[man["command"]]
    _validate(ns)
    rc = ns.func(ns)
    with open(ns.out, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    same = digest == man.get("sha256")
    print(f"{'identical' if same else 'DIFFERS'}: {ns.out}")
    return rc if same else EXIT_NUMERIC


COMMANDS = {
    "rotnum": cmd_rotnum,
    "sweep": cmd_sweep,
    "trace": cmd_trace,
    "bridges": cmd_bridges,
    "bessel": cmd_bessel,
    "slowcurve": cmd_slowcurve,
    "rerun": cmd_rerun,
}


def _add_numeric(p):
    g = p.add_argument_group("integrator")
    g.add_argument("--rtol", type=float, default=1e-10)
    g.add_argument("--atol", type=float, default=1e-10)
    g.add_argument("--max-step", type=float, default=0.1)
    g.add_argument("--min-step", type=float, default=1e-12)
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker processes (env {THREADS_ENV} overrides)")


def _add_trace_opts(p, need_out=True):
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--b-max", type=float, default=None)
    p.add_argument("--h", type=float, default=0.01)
    p.add_argument("--newton-tol", type=float, default=1e-10)
    p.add_argument("--direction", choices=["auto", "forward", "backward"], default="auto")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jtongues", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rotnum", help="rotation number at one parameter point")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--method", choices=["mobius", "direct"], default="mobius")
    p.add_argument("--periods", type=int, default=1000, help="periods for --method direct")
    p.add_argument("--json", action="store_true")
    _add_numeric(p)

    p = sub.add_parser("sweep", help="rotation number and map class on an (a, b) grid")
    p.add_argument("--a-range", type=float, nargs=2, default=None)
    p.add_argument("--b-range", type=float, nargs=2, default=None)
    p.add_argument("--grid", type=int, nargs=2, default=None, metavar=("NA", "NB"))
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--method", choices=["mobius", "direct"], default=None)
    p.add_argument("--config", default=None, help="JSON file with SweepJob fields")
    p.add_argument("--out", required=True)
    _add_numeric(p)

    p = sub.add_parser("trace", help="trace tongue boundaries a(b)")
    p.add_argument("--k", nargs="+", default=["1"], help="indices, e.g. 0 1 2 or 1-10")
    p.add_argument("--side", choices=["0", "pi", "both"], default="both")
    _add_trace_opts(p)
    p.add_argument("--out", required=True)
    _add_numeric(p)

    p = sub.add_parser("bridges", help="locate bridges of tongues")
    p.add_argument("--k", nargs="+", default=["1"])
    _add_trace_opts(p)
    p.add_argument("--out", required=True)
    _add_numeric(p)

    p = sub.add_parser("bessel", help="boundary vs Bessel asymptote residual scan")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--b-range", type=float, nargs=2, default=None)
    p.add_argument("--n-points", type=int, default=41)
    _add_trace_opts(p)
    p.add_argument("--out", required=True)
    _add_numeric(p)

    p = sub.add_parser("slowcurve", help="slow curve components, folds and region")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--n-samples", type=int, default=400)
    p.add_argument("--out", required=True)
    _add_numeric(p)

    p = sub.add_parser("rerun", help="re-execute a run from its manifest and compare")
    p.add_argument("manifest")
    p.add_argument("--out", default=None)

    for name, sp in sub.choices.items():
        sp.set_defaults(func=COMMANDS[name])
    return parser


def _validate(args):
    if args.command in ("trace", "bridges"):
        if args.b_max is None or not args.b_max > 0:
            raise UsageError("--b-max must be given and positive")
    if getattr(args, "mu", None) is not None and not args.mu > 0:
        raise UsageError("--mu must be positive")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _validate(args)
        return args.func(args)
    except UsageError as exc:
        print(f"jtongues: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"jtongues: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericFailure as exc:
        print(f"jtongues: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"jtongues: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
