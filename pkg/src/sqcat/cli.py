"""Command-line front end: ``sqcat --experiment {herald-surface,wigner,entropy,kerr-demo,minus-convert}``.

Every run writes one table.  CSV output starts with a ``#``-prefixed JSON
metadata line followed by a header row; JSON output holds the same metadata,
column names and rows.  The metadata embeds the full resolved configuration
and no timestamps, so identical configurations give byte-identical files.

Exit codes: 0 success, 2 usage error, 3 numerical-validity failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .entanglement import cutoff_for_leakage, entropy_crossover, entropy_curves
from .fock import (
    FockVector,
    ModeLayout,
    TruncationError,
    TruncationWarning,
    coherent_cat,
    coherent_state,
    squeezed_cat,
    squeezed_vacuum,
    vacuum,
)
from .protocols import (
    analytic_transmittance,
    convert_to_minus,
    cross_kerr_evolve,
    cross_kerr_herald,
    fidelity,
    run_plus_scheme,
    scan_transmittance,
    solve_displacements,
)
from .wigner import axis_points, wigner_grid, wigner_value

EXPERIMENTS = ("herald-surface", "wigner", "entropy", "kerr-demo", "minus-convert")
STATES = (
    "squeezed-cat-plus",
    "squeezed-cat-minus",
    "squeezed-vacuum",
    "coherent-cat-plus",
    "coherent-cat-minus",
    "coherent",
    "vacuum",
)
MIN_CUTOFF = {"herald-surface": 5, "wigner": 10, "entropy": 10, "kerr-demo": 10, "minus-convert": 4}
DEFAULT_CUTOFF = {"herald-surface": 5, "wigner": 40, "entropy": None, "kerr-demo": 40, "minus-convert": 40}
DEFAULT_R = {
    "herald-surface": (0.2675, 0.9197, 0.02),
    "wigner": (1.0, 1.0, 1.0),
    "entropy": (0.0, 1.5, 0.01),
    "kerr-demo": (0.5, 0.5, 0.1),
    "minus-convert": (0.2675, 0.9197, 0.05),
}
DEFAULT_Q = (0.1, 0.9, 0.1)
HERALD_R_WINDOW = (0.26, 0.92)
ENTROPY_CUTOFF_FLOOR = 24
TARGET_CUTOFF = 40


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    r_range: tuple[float, float, float]
    q_range: tuple[float, float, float]
    cutoff: int
    displacement_mode: str = "series6"
    calibration: str = "published"
    grid_step: float = 0.02
    grid_extent: float = 3.0
    state: str = "squeezed-cat-plus"
    a: float = 1.0
    alphas: tuple[float, ...] = (3.0,)
    max_leakage: float = 1e-6
    transmittance_step: float = 1e-3
    output_format: str = "csv"
    out: str | None = None
    threads: int | None = None
    extra: dict = field(default_factory=dict)

    def payload(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("threads")  # results do not depend on the worker count
        return d


def sweep(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive grid ``lo, lo+step, ...``; ``hi`` is appended when the step overshoots it."""
    pts = axis_points(lo, hi, step)
    if hi - pts[-1] > 1e-9 * max(1.0, abs(hi)):
        pts = np.append(pts, hi)
    return pts


def _check_range(name: str, rng: tuple[float, float, float]):
    lo, hi, step = rng
    if not all(math.isfinite(v) for v in rng):
        raise UsageError(f"{name} range must be finite")
    if not step > 0:
        raise UsageError(f"{name} step must be > 0")
    if hi < lo:
        raise UsageError(f"empty {name} range [{lo}, {hi}]")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sqcat", description=__doc__.split("\n\n")[0])
    p.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    p.add_argument("--r-min", type=float)
    p.add_argument("--r-max", type=float)
    p.add_argument("--r-step", type=float)
    p.add_argument("--q-min", type=float, default=DEFAULT_Q[0])
    p.add_argument("--q-max", type=float, default=DEFAULT_Q[1])
    p.add_argument("--q-step", type=float, default=DEFAULT_Q[2])
    p.add_argument("--cutoff", type=int, help="photon-number cutoff per mode (experiment-specific default)")
    p.add_argument("--displacement-mode", choices=("exact", "series6"), default="series6")
    p.add_argument(
        "--calibration",
        choices=("published", "exact"),
        default="published",
        help="displacement scale of the four-detector scheme",
    )
    p.add_argument("--grid-step", type=float, default=0.02)
    p.add_argument("--grid-extent", type=float, default=3.0, help="Wigner grid covers [-E, E]^2")
    p.add_argument("--state", choices=STATES, default="squeezed-cat-plus")
    p.add_argument("--r", type=float, help="squeezing of the Wigner state (shorthand for --r-min=--r-max)")
    p.add_argument("--a", type=float, default=1.0, help="coherent amplitude for coherent/cat states")
    p.add_argument("--alpha", type=float, nargs="+", default=[3.0], help="probe amplitudes (kerr-demo)")
    p.add_argument("--max-leakage", type=float, default=1e-6)
    p.add_argument("--transmittance-step", type=float, default=1e-3)
    p.add_argument("--format", dest="output_format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output file (stdout when omitted)")
    p.add_argument("--threads", type=int, help="maximum worker threads")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def build_config(args: argparse.Namespace) -> RunConfig:
    exp = args.experiment
    r_lo, r_hi, r_step = DEFAULT_R[exp]
    if args.r is not None:
        r_lo = r_hi = args.r
    r_range = (
        args.r_min if args.r_min is not None else r_lo,
        args.r_max if args.r_max is not None else r_hi,
        args.r_step if args.r_step is not None else r_step,
    )
    q_range = (args.q_min, args.q_max, args.q_step)
    _check_range("r", r_range)
    _check_range("q", q_range)
    if exp == "herald-surface":
        if r_range[0] < HERALD_R_WINDOW[0] or r_range[1] > HERALD_R_WINDOW[1]:
            raise UsageError(f"r range must lie within {list(HERALD_R_WINDOW)}")
        if q_range[0] <= 0 or q_range[1] > 0.9:
            raise UsageError("q range must lie within (0, 0.9]")
    if exp in ("entropy",) and (r_range[0] < 0 or r_range[1] > 1.5):
        raise UsageError("r range must lie within [0, 1.5]")
    if exp in ("kerr-demo", "minus-convert", "wigner") and r_range[0] < 0:
        raise UsageError("r must be >= 0")
    if exp == "minus-convert" and r_range[0] <= 0:
        raise UsageError("minus-convert needs r > 0")
    if exp == "kerr-demo" and any(not a > 0 for a in args.alpha):
        raise UsageError("probe amplitudes must be > 0 (alpha = 0 makes the branches indistinguishable)")
    if exp == "wigner":
        if not args.grid_step > 0 or not args.grid_extent > 0:
            raise UsageError("grid step and extent must be > 0")
        if args.state == "squeezed-cat-minus" and r_range[0] == 0:
            raise UsageError("|r;-> is undefined at r = 0")
    if not args.max_leakage > 0:
        raise UsageError("--max-leakage must be > 0")
    if not 0 < args.transmittance_step < 0.5:
        raise UsageError("--transmittance-step must lie in (0, 0.5)")
    if args.threads is not None and args.threads < 1:
        raise UsageError("--threads must be >= 1")

    extra = {}
    cutoff = args.cutoff if args.cutoff is not None else DEFAULT_CUTOFF[exp]
    if exp == "entropy" and cutoff is None:
        cutoff = cutoff_for_leakage(r_range[1], args.max_leakage, start=ENTROPY_CUTOFF_FLOOR)
        extra["cutoff_rule"] = f"smallest cutoff >= {ENTROPY_CUTOFF_FLOOR} with leakage <= max_leakage at r_max"
    if cutoff < MIN_CUTOFF[exp]:
        raise UsageError(f"{exp} needs --cutoff >= {MIN_CUTOFF[exp]}")
    return RunConfig(
        experiment=exp,
        r_range=tuple(float(v) for v in r_range),
        q_range=tuple(float(v) for v in q_range),
        cutoff=int(cutoff),
        displacement_mode=args.displacement_mode,
        calibration=args.calibration,
        grid_step=args.grid_step,
        grid_extent=args.grid_extent,
        state=args.state,
        a=args.a,
        alphas=tuple(args.alpha),
        max_leakage=args.max_leakage,
        transmittance_step=args.transmittance_step,
        output_format=args.output_format,
        out=args.out,
        threads=args.threads,
        extra=extra,
    )


# ---------------------------------------------------------------------------
# experiments: each returns (columns, rows, summary)
# ---------------------------------------------------------------------------


def _pmap(fn: Callable, items: Sequence, threads: int | None) -> list:
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_herald_surface(cfg: RunConfig):
    cells = [(r, q) for r in sweep(*cfg.r_range) for q in sweep(*cfg.q_range)]
    targets = {r: squeezed_cat(r, 1, TARGET_CUTOFF, mode_id="A") for r, _ in cells}

    def cell(rq):
        r, q = rq
        params = solve_displacements(r, q, cfg.calibration)
        res = run_plus_scheme(params, cfg.cutoff, cfg.displacement_mode)
        if not res.possible:
            return [r, q, 0.0, float("nan"), res.diagnostics["source_leakage"]]
        return [r, q, res.probability, fidelity(res, targets[r]), res.diagnostics["source_leakage"]]

    rows = _pmap(cell, cells, cfg.threads)
    p = np.array([row[2] for row in rows])
    f = np.array([row[3] for row in rows])
    summary = {"P_min": float(p.min()), "P_max": float(p.max()), "F_min": float(np.nanmin(f)), "F_max": float(np.nanmax(f))}
    return ["r", "q", "P", "F", "leakage"], rows, summary


def wigner_state(name: str, r: float, a: float, cutoff: int):
    if name == "squeezed-cat-plus":
        return squeezed_cat(r, 1, cutoff), f"|r;+> r={r}"
    if name == "squeezed-cat-minus":
        return squeezed_cat(r, -1, cutoff), f"|r;-> r={r}"
    if name == "squeezed-vacuum":
        return squeezed_vacuum(r, 0.0, cutoff), f"|r> r={r}"
    if name == "coherent-cat-plus":
        return coherent_cat(a, 1, cutoff), f"|a>+|-a> a={a}"
    if name == "coherent-cat-minus":
        return coherent_cat(a, -1, cutoff), f"|a>-|-a> a={a}"
    if name == "coherent":
        return coherent_state(a, cutoff), f"|a> a={a}"
    if name == "vacuum":
        return vacuum(ModeLayout.of(("a", cutoff))), "|0>"
    raise UsageError(f"unknown state {name!r}")


def run_wigner(cfg: RunConfig):
    state, descriptor = wigner_state(cfg.state, cfg.r_range[0], cfg.a, cfg.cutoff)
    e = cfg.grid_extent
    rng = (-e, e, cfg.grid_step)
    grid = wigner_grid(state, rng, rng, descriptor, cfg.threads)
    re, im = grid.re_axis, grid.im_axis
    rows = [[float(x), float(y), float(grid.values[i, j])] for i, y in enumerate(im) for j, x in enumerate(re)]
    summary = {
        "state_descriptor": descriptor,
        "W0": wigner_value(state, 0.0),
        "W_min": float(grid.values.min()),
        "W_max": float(grid.values.max()),
        "integral": grid.integral(),
        "leakage": state.leakage,
    }
    return ["re_alpha", "im_alpha", "W"], rows, summary


def run_entropy(cfg: RunConfig):
    r = sweep(*cfg.r_range)
    curve = entropy_curves(r, cfg.cutoff, max_leakage=cfg.max_leakage, workers=cfg.threads)
    rows = [
        [float(x), float(sm), float(sp), float(st), float(lk)]
        for x, sm, sp, st, lk in zip(curve.r_values, curve.s_minus, curve.s_plus, curve.s_tmsv, curve.leakage)
    ]
    gap = curve.s_minus - curve.s_tmsv
    crossover = None
    for k in range(1, len(r)):
        if gap[k - 1] > 0 >= gap[k]:
            crossover = entropy_crossover(cfg.cutoff, (float(r[k - 1]), float(r[k])))
            break
    summary = {"crossover_r": crossover, "mapping_note": curve.mapping_note, "max_leakage_seen": float(curve.leakage.max())}
    return ["r", "S_minus", "S_plus", "S_tmsv", "leakage"], rows, summary


def run_kerr_demo(cfg: RunConfig):
    cells = [(r, a) for r in sweep(*cfg.r_range) for a in cfg.alphas]

    def cell(ra):
        r, alpha = ra
        psi = squeezed_vacuum(r, 0.0, cfg.cutoff, mode_id="1")
        out = cross_kerr_evolve(psi, alpha, math.pi / 2)
        row = [r, alpha]
        probs, fids = [], []
        for s in (1, -1):
            h = cross_kerr_herald(out, alpha, s)
            probs.append(h.probability)
            fids.append(fidelity(h, squeezed_cat(r, s, cfg.cutoff, mode_id="1")) if (s == 1 or r > 0) else float("nan"))
        return row + probs + [sum(probs)] + fids + [math.exp(-2 * alpha * alpha), out.leakage]

    rows = _pmap(cell, cells, cfg.threads)
    cols = ["r", "alpha", "P_plus", "P_minus", "P_sum", "F_plus", "F_minus", "non_orthogonality", "leakage"]
    return cols, rows, {}


def run_minus_convert(cfg: RunConfig):
    T_exact = analytic_transmittance(coefficient="exact")
    T_pub = analytic_transmittance(coefficient="published")

    def cell(r):
        plus = squeezed_cat(r, 1, cfg.cutoff)
        src = np.zeros(5, dtype=complex)
        src[0], src[4] = plus.amplitudes[0], plus.amplitudes[4]
        src_state = FockVector(ModeLayout.of(("a", 4)), src / np.linalg.norm(src))
        target = squeezed_cat(r, -1, cfg.cutoff)
        res = convert_to_minus(src_state, T_exact)
        pub = convert_to_minus(src_state, T_pub)
        t_scan, f_scan, _, _ = scan_transmittance(src_state, target, cfg.transmittance_step)
        return [float(r), T_exact, fidelity(res, target), res.probability, fidelity(pub, target), t_scan, f_scan]

    rows = _pmap(cell, list(sweep(*cfg.r_range)), cfg.threads)
    cols = ["r", "T_analytic", "F_analytic", "P_analytic", "F_published_T", "T_scan", "F_scan"]
    summary = {
        "T_analytic": T_exact,
        "T_published": T_pub,
        "input": "c0|0> + c4|4> taken from |r;+>",
    }
    return cols, rows, summary


RUNNERS = {
    "herald-surface": run_herald_surface,
    "wigner": run_wigner,
    "entropy": run_entropy,
    "kerr-demo": run_kerr_demo,
    "minus-convert": run_minus_convert,
}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _clean(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def render(cfg: RunConfig, columns: list[str], rows: list[list], summary: dict) -> str:
    meta = _clean(
        {
            "experiment": cfg.experiment,
            "version": __version__,
            "config": cfg.payload(),
            "columns": columns,
            "summary": summary,
        }
    )
    rows = _clean(rows)
    if cfg.output_format == "json":
        return json.dumps({"metadata": meta, "columns": columns, "rows": rows}, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(["nan" if v is None else v for v in row] for row in rows)
    return buf.getvalue()


def write_atomic(path: str, text: str):
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        if cfg.out is not None and not Path(cfg.out).parent.resolve().is_dir():
            raise UsageError(f"output directory of {cfg.out} does not exist")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            columns, rows, summary = RUNNERS[cfg.experiment](cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sqcat: error: {exc}", file=sys.stderr)
        return 2
    except (TruncationError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"sqcat: numerical failure: {exc}", file=sys.stderr)
        return 3
    text = render(cfg, columns, rows, summary)
    if cfg.out is None:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader went away (e.g. piped into head); not an error
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    else:
        write_atomic(cfg.out, text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
