"""
Batch experiment runner.

Every command takes roots either from a measure (``--measure``, ``--n`` and
seeds) or from a roots CSV (``--roots-file``), runs one cell per seed and
writes one record per cell, in seed order. Point clouds go to CSV, metrics to
JSONL.

Exit status: 0 on success, 2 on invalid input, 3 on numerical failure.
"""

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy

from . import clumps as clumps_mod
from .critical import SolverOptions, nearest_cp, predict, solve
from .errors import ConditioningError, ConvergenceError, PoleError, RootPairError
from .measures import measure_from_dict
from .polynomial import RootSet, as_points
from .statistics import (CubicBump, companion_trace_residual, fluct_sample,
                         heavy_tail_variance, linear_statistic_gap)
from .transport import augment, greedy_pair, wasserstein1

__all__ = [
    "ExperimentConfig",
    "RootFileError",
    "ingest_roots",
    "export_roots",
    "emit_plot_data",
    "run",
    "main",
    "COMMANDS",
]

COMMANDS = ("sample", "solve", "pair", "wasserstein", "clumps", "fluctuate",
            "locallaw", "trace-check", "heavytail")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERIC = 3


class RootFileError(RootPairError, ValueError):
    """Unreadable or malformed roots CSV; ``row`` is the 1-based file line."""

    def __init__(self, path, row, reason):
        self.path = path
        self.row = row
        where = f"row {row}" if row is not None else "file"
        super().__init__(f"{path}: {where}: {reason}")


# ----------------------------------------------------------------------------
# CSV I/O
# ----------------------------------------------------------------------------

def format_float(x):
    """Shortest text that parses back to the same double; ``0.0`` prints ``0``."""
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def ingest_roots(path):
    """
    Read a roots CSV: header ``re,im``, one root per row.

    Raises
    ------
    RootFileError
        Missing file, bad header, a malformed or non-finite row (the error
        cites the 1-based line number), or fewer than two roots.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            lines = list(csv.reader(fh))
    except OSError as exc:
        raise RootFileError(path, None, f"cannot read ({exc.strerror})") from exc
    if not lines or [c.strip() for c in lines[0]] != ["re", "im"]:
        raise RootFileError(path, 1, "header must be 're,im'")
    pts = []
    for row, cells in enumerate(lines[1:], start=2):
        if not cells or all(not c.strip() for c in cells):
            continue
        if len(cells) != 2:
            raise RootFileError(path, row, f"expected 2 columns, got {len(cells)}")
        try:
            re_, im_ = float(cells[0]), float(cells[1])
        except ValueError:
            raise RootFileError(path, row, f"cannot parse {','.join(cells)!r}") from None
        if not (math.isfinite(re_) and math.isfinite(im_)):
            raise RootFileError(path, row, "NaN/Inf not allowed")
        pts.append(complex(re_, im_))
    if len(pts) < 2:
        raise RootFileError(path, None, f"need at least 2 roots, got {len(pts)}")
    return RootSet(numpy.array(pts))


def _points_csv(points):
    buf = io.StringIO()
    buf.write("re,im\n")
    for z in as_points(points):
        buf.write(f"{format_float(z.real)},{format_float(z.imag)}\n")
    return buf.getvalue()


def export_roots(points, path):
    """Write points in the roots CSV format (round-trips bit-exactly)."""
    pts = points.points if isinstance(points, RootSet) else points
    _write_text(path, _points_csv(pts))


def _plot_csv(points_sets):
    buf = io.StringIO()
    buf.write("series,re,im\n")
    for name, pts in points_sets.items():
        pts = getattr(pts, "points", pts)
        for z in numpy.asarray(pts, dtype=numpy.complex128).reshape(-1):
            buf.write(f"{name},{format_float(z.real)},{format_float(z.imag)}\n")
    return buf.getvalue()


def emit_plot_data(points_sets, path):
    """
    Write ``series,re,im`` rows for plotting.

    Parameters
    ----------
    points_sets : dict
        Series name (``roots``, ``cps``, ``predicted``, a clump id...) to points.
        Empty series produce no rows.
    path : str or file
    """
    _write_text(path, _plot_csv(points_sets))


def _write_text(path, text):
    if hasattr(path, "write"):
        path.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ----------------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    command: str
    measure: object = None
    n: int = None
    seeds: list = field(default_factory=lambda: [0])
    xi: list = field(default_factory=list)
    roots_file: str = None
    out: str = None
    format: str = "jsonl"
    trials: int = 16
    tol: float = 1e-13
    max_iter: int = 200
    jobs: int = 1
    regime: str = "inside"
    phi: list = field(default_factory=lambda: [0.4, 0.0, 0.3, 1.0])
    t: float = 1.0
    timing: bool = False

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "jsonl"):
            raise ValueError("format must be 'csv' or 'jsonl'")
        has_measure = self.measure is not None and self.n is not None
        if self.command in ("fluctuate", "heavytail"):
            if self.roots_file is not None or not has_measure:
                raise ValueError(f"{self.command} needs --measure and --n (no roots file)")
            if not self.xi:
                raise ValueError(f"{self.command} needs --xi")
        elif has_measure == (self.roots_file is not None):
            raise ValueError("give exactly one of (--measure and --n) or --roots-file")
        if self.roots_file is None and not self.seeds:
            raise ValueError("seeds must be nonempty")
        if self.n is not None and int(self.n) < 2:
            raise ValueError("--n must be at least 2")
        if self.command in ("clumps",) and self.measure is None:
            raise ValueError("clumps needs --measure for the ball radii")
        if self.regime not in ("inside", "outside"):
            raise ValueError("regime must be 'inside' or 'outside'")
        if self.jobs < 1:
            raise ValueError("--jobs must be >= 1")
        if len(self.phi) not in (3, 4):
            raise ValueError("--phi takes re,im,radius[,amplitude]")
        if self.format == "csv" and self.command in ("sample", "solve") and len(self.cells()) != 1:
            raise ValueError("csv output of points needs a single seed or a roots file")
        return self

    def cells(self):
        return [None] if (self.roots_file is not None and self.command != "heavytail") \
            else list(self.seeds)

    def params(self):
        """Echo of the inputs that determine the output."""
        keep = ("measure", "n", "xi", "roots_file", "tol", "max_iter")
        out = {k: getattr(self, k) for k in keep}
        out["xi"] = [[z.real, z.imag] for z in self.xi]
        if self.command in ("fluctuate",):
            out["regime"] = self.regime
        if self.command == "locallaw":
            out["phi"] = list(self.phi)
        if self.command == "heavytail":
            out["t"] = self.t
            out["seeds"] = list(self.seeds)
        if self.command == "trace-check":
            out["trials"] = self.trials
        return out


def parse_seeds(text):
    """``"3"``, ``"0,2,5"`` or ``"0-19"`` (inclusive) to a list of ints."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            a, b = part.split("-", 1) if not part.startswith("-") else part[1:].split("-", 1)
            lo = int(a) if not part.startswith("-") else -int(a)
            out.extend(range(lo, int(b) + 1))
        else:
            out.append(int(part))
    return out


def parse_point(text):
    a, b = str(text).split(",")
    z = complex(float(a), float(b))
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite point {text!r}")
    return z


def _parse_measure(text):
    if isinstance(text, dict):
        return text
    text = str(text).strip()
    if text.startswith("{"):
        return json.loads(text)
    return {"kind": text}


def build_parser():
    p = argparse.ArgumentParser(prog="rootpair", description="Root / critical-point experiments.")
    p.add_argument("command", choices=COMMANDS)
    d = argparse.SUPPRESS
    p.add_argument("--config", default=None, help="JSON file mirroring the flags")
    p.add_argument("--measure", default=d, help="kind name or JSON spec")
    p.add_argument("--n", type=int, default=d)
    p.add_argument("--seed", type=int, action="append", default=d)
    p.add_argument("--seeds", default=d, help="list like 0,1,2 or range 0-19")
    p.add_argument("--xi", action="append", default=d, help="deterministic root 're,im' (repeatable)")
    p.add_argument("--roots-file", dest="roots_file", default=d)
    p.add_argument("--out", default=d)
    p.add_argument("--format", choices=("csv", "jsonl"), default=d)
    p.add_argument("--trials", type=int, default=d, help="contour points for trace-check")
    p.add_argument("--tol", type=float, default=d)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=d)
    p.add_argument("--jobs", type=int, default=d)
    p.add_argument("--regime", choices=("inside", "outside"), default=d)
    p.add_argument("--phi", default=d, help="test bump 're,im,radius[,amplitude]'")
    p.add_argument("--t", type=float, default=d, help="weight for heavytail")
    p.add_argument("--timing", action="store_true", default=d, help="add wall_time_ms to records")
    return p


def config_from_args(argv):
    """Merge defaults, the optional JSON config file and the flags (flags win)."""
    ns = vars(build_parser().parse_args(argv))
    merged = {}
    if ns.get("config"):
        with open(ns["config"], encoding="utf-8") as fh:
            merged.update({k.replace("-", "_"): v for k, v in json.load(fh).items()})
    merged.pop("command", None)
    merged.pop("config", None)
    flags = {k: v for k, v in ns.items() if k not in ("config",)}
    if "seed" in flags:
        flags["seeds"] = flags.pop("seed")
    merged.update(flags)
    if "seed" in merged:
        s = merged.pop("seed")
        merged.setdefault("seeds", s if isinstance(s, list) else [s])

    cfg = ExperimentConfig(command=merged.pop("command"))
    names = {f.name for f in fields(ExperimentConfig)}
    unknown = set(merged) - names
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for k, v in merged.items():
        setattr(cfg, k, v)
    if cfg.measure is not None:
        cfg.measure = _parse_measure(cfg.measure)
        measure_from_dict(cfg.measure)
    if not isinstance(cfg.seeds, list):
        cfg.seeds = parse_seeds(cfg.seeds)
    else:
        cfg.seeds = [int(s) for s in cfg.seeds]
    cfg.xi = [z if isinstance(z, complex) else
              (complex(*z) if isinstance(z, (list, tuple)) else parse_point(z)) for z in cfg.xi]
    if isinstance(cfg.phi, str):
        cfg.phi = [float(v) for v in cfg.phi.split(",")]
    cfg.n = None if cfg.n is None else int(cfg.n)
    return cfg.validate()


# ----------------------------------------------------------------------------
# one cell
# ----------------------------------------------------------------------------

def _pairs(points):
    return [[float(z.real), float(z.imag)] for z in numpy.asarray(points).reshape(-1)]


def _cell_roots(cfg, seed):
    if cfg.roots_file is not None:
        roots = ingest_roots(cfg.roots_file)
    else:
        roots = measure_from_dict(cfg.measure).sample(cfg.n, seed)
    if cfg.xi and cfg.command not in ("fluctuate", "heavytail"):
        roots = roots.with_roots(cfg.xi)
    return roots


def _options(cfg):
    return SolverOptions(tol=float(cfg.tol), max_iter=int(cfg.max_iter))


def _run_cell(cfg, seed):
    """Compute one record: ``(metrics, points_for_csv)``."""
    measure = measure_from_dict(cfg.measure) if cfg.measure is not None else None
    cmd = cfg.command
    opts = _options(cfg)

    if cmd == "heavytail":
        rep = heavy_tail_variance(measure, cfg.xi[0], cfg.t, cfg.n, cfg.seeds)
        metrics = {k: getattr(rep, k) for k in (
            "target", "raw_re_var", "raw_im_var", "trunc_re_var", "trunc_im_var",
            "ratio_re", "ratio_im", "raw_ratio_re", "raw_ratio_im", "eps")}
        rows = [(s, r, t) for s, r, t in zip(cfg.seeds, rep.raw, rep.truncated)]
        return metrics, rows

    if cmd == "fluctuate":
        s = fluct_sample(measure, cfg.xi[0], cfg.n, seed, cfg.regime, opts)
        metrics = {"value": [s.value.real, s.value.imag], "flagged": s.flagged,
                   "distance": s.distance, "w": [s.w.real, s.w.imag]}
        return metrics, s

    roots = _cell_roots(cfg, seed)
    if cmd == "sample":
        return {"n": roots.n, "mean": [roots.mean.real, roots.mean.imag], "eta": roots.eta,
                "roots": _pairs(roots.points)}, roots.points

    cps = solve(roots, opts)
    if cmd == "solve":
        vieta = abs(complex(numpy.sum(cps.points)) - (roots.n - 1) / roots.n * complex(numpy.sum(roots.points)))
        return {"n": roots.n, "iterations": cps.iterations,
                "max_residual": float(numpy.max(cps.residuals)) if len(cps) else 0.0,
                "vieta_error": vieta, "cps": _pairs(cps.points)}, cps.points

    if cmd == "pair":
        preds = []
        within = []
        dists = []
        for i in range(roots.n):
            try:
                preds.append(predict(roots, i).w_hat)
            except PoleError:
                preds.append(complex(roots.points[i]))
            near = nearest_cp(roots, cps, i, measure)
            dists.append(near.distance)
            if near.within_bound is not None:
                within.append(near.within_bound)
        preds = numpy.array(preds)
        ok = numpy.isfinite(preds)
        metrics = {"n": roots.n, "median_distance": float(numpy.median(dists)),
                   "within_bound_fraction": (float(numpy.mean(within)) if within else None),
                   "predicted": _pairs(preds[ok])}
        return metrics, {"roots": roots.points, "cps": cps.points, "predicted": preds[ok]}

    if cmd == "wasserstein":
        target = augment(cps, roots)
        rep = wasserstein1(roots, target, augmented=True)
        greedy = greedy_pair(roots, target, augmented=True)
        n = roots.n
        return {"n": n, "w1": rep.w1, "greedy_w1": greedy.w1, "eta": roots.eta,
                "normalized": n * rep.w1 / (roots.eta * math.log(n) ** 9)}, None

    if cmd == "clumps":
        cs = clumps_mod.build(roots, cps, measure)
        rep = clumps_mod.count_report(cs)
        metrics = {"n": roots.n, "clumps": len(cs), "eligible": rep.n_eligible,
                   "matched_fraction": rep.matched_fraction, "flagged": list(rep.flagged),
                   "unassigned": rep.unassigned, "max_distance_ratio": rep.max_distance_ratio,
                   "per_clump": [c.to_dict() for c in rep.clumps]}
        series = {}
        for k, c in enumerate(cs.components):
            series[f"clump_{k}"] = roots.points[list(c.root_indices)]
        series["cps"] = cps.points
        return metrics, series

    if cmd == "locallaw":
        phi = CubicBump(complex(cfg.phi[0], cfg.phi[1]), cfg.phi[2],
                        cfg.phi[3] if len(cfg.phi) > 3 else 1.0)
        gap, budget = linear_statistic_gap(roots, cps, phi)
        return {"n": roots.n, "gap": gap, "budget": budget, "ratio": gap / budget}, None

    if cmd == "trace-check":
        k = numpy.arange(cfg.trials)
        zs = 2 * max(roots.eta, 1e-300) * numpy.exp(2j * math.pi * k / cfg.trials)
        res = [companion_trace_residual(roots, cps, z) for z in zs]
        return {"n": roots.n, "max_residual": float(max(res)), "residuals": res}, None

    raise ValueError(f"unhandled command {cmd!r}")


def _timed_cell(cfg, seed):
    t0 = time.perf_counter()
    metrics, payload = _run_cell(cfg, seed)
    return metrics, payload, (time.perf_counter() - t0) * 1e3


# ----------------------------------------------------------------------------
# output
# ----------------------------------------------------------------------------

def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, numpy.generic):
        return o.item()
    raise TypeError(f"not serialisable: {type(o)}")


def _records_text(cfg, results):
    lines = []
    params = cfg.params()
    for seed, (metrics, _, ms) in results:
        rec = {"command": cfg.command, "params": params, "seed": seed, "metrics": metrics}
        if cfg.timing:
            rec["wall_time_ms"] = ms
        lines.append(json.dumps(rec, sort_keys=True, default=_json_default))
    return "".join(line + "\n" for line in lines)


def _csv_text(cfg, results):
    cmd = cfg.command
    if cmd in ("sample", "solve"):
        return _points_csv(results[0][1][1])
    if cmd in ("pair", "clumps"):
        buf = io.StringIO()
        buf.write("seed,series,re,im\n" if len(results) > 1 else "series,re,im\n")
        for seed, (_, series, _) in results:
            body = _plot_csv(series).split("\n", 1)[1]
            if len(results) > 1:
                body = "".join(f"{seed},{line}\n" for line in body.splitlines())
            buf.write(body)
        return buf.getvalue()
    if cmd == "wasserstein":
        buf = io.StringIO()
        buf.write("n,seed,w1,eta,normalized\n")
        for seed, (m, _, _) in results:
            buf.write(f"{m['n']},{'' if seed is None else seed},{format_float(m['w1'])},"
                      f"{format_float(m['eta'])},{format_float(m['normalized'])}\n")
        return buf.getvalue()
    if cmd == "fluctuate":
        buf = io.StringIO()
        buf.write("seed,re,im,flagged\n")
        for seed, (_, s, _) in results:
            buf.write(f"{seed},{format_float(s.value.real)},{format_float(s.value.imag)},"
                      f"{int(s.flagged)}\n")
        return buf.getvalue()
    if cmd == "heavytail":
        buf = io.StringIO()
        buf.write("seed,raw_re,raw_im,trunc_re,trunc_im\n")
        for s, r, t in results[0][1][1]:
            buf.write(f"{s},{format_float(r.real)},{format_float(r.imag)},"
                      f"{format_float(t.real)},{format_float(t.imag)}\n")
        return buf.getvalue()
    if cmd == "locallaw":
        buf = io.StringIO()
        buf.write("seed,n,gap,budget\n")
        for seed, (m, _, _) in results:
            buf.write(f"{'' if seed is None else seed},{m['n']},{format_float(m['gap'])},"
                      f"{format_float(m['budget'])}\n")
        return buf.getvalue()
    if cmd == "trace-check":
        buf = io.StringIO()
        buf.write("seed,n,max_residual\n")
        for seed, (m, _, _) in results:
            buf.write(f"{'' if seed is None else seed},{m['n']},{format_float(m['max_residual'])}\n")
        return buf.getvalue()
    raise ValueError(f"no csv layout for {cmd!r}")


def run(cfg, stdout=None):
    """
    Execute a validated config and write its output.

    Cells run in a process pool when ``cfg.jobs > 1``; results are written in
    seed order regardless of completion order.

    Returns
    -------
    int
        Exit status.
    """
    stdout = stdout or sys.stdout
    cells = [cfg.seeds[0]] if cfg.command == "heavytail" else cfg.cells()
    if cfg.jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [pool.submit(_timed_cell, cfg, s) for s in cells]
            outs = [f.result() for f in futures]
    else:
        outs = [_timed_cell(cfg, s) for s in cells]
    if cfg.command == "heavytail":
        cells = [None]
    results = list(zip(cells, outs))
    text = _csv_text(cfg, results) if cfg.format == "csv" else _records_text(cfg, results)
    if cfg.out:
        _write_text(cfg.out, text)
    else:
        stdout.write(text)
    return EXIT_OK


def main(argv=None):
    try:
        cfg = config_from_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        return run(cfg)
    except (ConvergenceError, ConditioningError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (RootFileError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
