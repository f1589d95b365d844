"""Batch experiment driver.

Loads or synthesizes one problem, runs the requested solvers sequentially,
and writes plot-ready CSV artifacts:

* ``history_<solver>.csv`` — iter, true_rr, quasi_rr, wall_ms
* ``summary.csv``          — solver, IT, CPU, RR, termination, seed
* deblur runs additionally write ``metrics.csv`` (solver, PSNR, SSIM, CPU,
  RR) and the restored images.

Exit codes: 0 when every requested run completed (converged, hit the
iteration cap, or broke down — breakdowns are recorded, not fatal);
2 on configuration errors; 3 on I/O errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from .mmio import read_matrix_market, MatrixMarketError
from .images import (ColorImage, read_ppm, read_qimg4, write_ppm, write_qimg4,
                     bundled_image_path)
from .problems import (Problem, gen_example1, chen_rk4, build_filter_system,
                       blur_problem, psnr, ssim, rel_error, EXAMPLE1_COEFFS)
from .solvers import SOLVERS, SolveOptions

__all__ = ["main", "run", "RunConfig"]

DEFAULT_SEED = 1234
_FMT = "{:.17e}"


@dataclass
class RunConfig:
    problem: str
    mtx: str | None = None
    coeffs: tuple = EXAMPLE1_COEFFS
    chen: tuple = (1.0, 1e-3, 50, 50, 0.01)
    blur: tuple = ("rings32.ppm", "single", 1.0, 10, 7)
    solvers: tuple = ("qbicg", "qqmr3", "qqmr2")
    tol: float = 1e-7
    max_iter: int = 5000
    seed: int = DEFAULT_SEED
    out: str = "runs"
    history: bool = True
    gnuplot: bool = False


class ConfigError(ValueError):
    pass


def _parse_tuple(text, types, name, defaults=None):
    parts = [p.strip() for p in text.split(",")]
    if defaults is not None and len(parts) < len(types):
        parts = parts + [None] * (len(types) - len(parts))
    if len(parts) != len(types):
        raise ConfigError(f"--{name} needs {len(types)} comma-separated values")
    out = []
    for i, (p, ty) in enumerate(zip(parts, types)):
        if p is None or p == "":
            if defaults is None:
                raise ConfigError(f"--{name}: missing value #{i + 1}")
            out.append(defaults[i])
            continue
        try:
            out.append(ty(p))
        except ValueError:
            raise ConfigError(f"--{name}: cannot parse '{p}'") from None
    return tuple(out)


def _load_image(spec: str) -> ColorImage:
    path = Path(spec)
    if not path.exists():
        try:
            path = bundled_image_path(spec)
        except FileNotFoundError:
            raise FileNotFoundError(f"image '{spec}' not found on disk or bundled")
    if path.suffix == ".qimg4":
        return read_qimg4(path)
    return read_ppm(path)


def _build_problem(cfg: RunConfig) -> Problem:
    if cfg.problem == "mtx":
        if not cfg.mtx:
            raise ConfigError("--problem mtx requires --mtx PATH")
        A0 = read_matrix_market(cfg.mtx)
        if A0.shape[0] != A0.shape[1]:
            raise ConfigError(f"matrix must be square, got {A0.shape}")
        return gen_example1(A0, coeffs=cfg.coeffs, seed=cfg.seed,
                            label=f"mtx {Path(cfg.mtx).name}")
    if cfg.problem == "chen":
        T, h, p, q, noise = cfg.chen
        traj = chen_rk4(T, h)
        return build_filter_system(traj, int(p), int(q), noise_amp=noise,
                                   seed=cfg.seed)
    if cfg.problem == "blur":
        img_spec, mode, sigma, r, s = cfg.blur
        image = _load_image(img_spec)
        return blur_problem(image, mode=mode, sigma=sigma, r=int(r), s=int(s))
    raise ConfigError(f"unknown problem '{cfg.problem}'")


def _write_history(path: Path, report):
    with open(path, "wt", encoding="ascii") as fh:
        fh.write("iter,true_rr,quasi_rr,wall_ms\n")
        hist = report.true_history or []
        quasi = report.quasi_history or []
        times = report.time_history or []
        for i in range(len(hist)):
            q = quasi[i] if i < len(quasi) else float("nan")
            t = times[i] if i < len(times) else float("nan")
            fh.write(f"{i + 1},{_FMT.format(hist[i])},{_FMT.format(q)},"
                     f"{t:.3f}\n")


def _write_gnuplot(outdir: Path, solver_names):
    lines = [
        "set logscale y",
        "set xlabel 'iteration'",
        "set ylabel 'relative residual'",
        "set datafile separator ','",
        "set key top right",
    ]
    plots = ", ".join(
        f"'history_{name}.csv' using 1:2 every ::1 with lines title '{name}'"
        for name in solver_names)
    lines.append("plot " + plots)
    (outdir / "plot_history.gp").write_text("\n".join(lines) + "\n",
                                            encoding="ascii")


def run(cfg: RunConfig) -> int:
    """Execute one configuration; returns the process exit code."""
    for name in cfg.solvers:
        if name not in SOLVERS:
            raise ConfigError(
                f"unknown solver '{name}' (choose from {sorted(SOLVERS)})")
    if not cfg.solvers:
        raise ConfigError("at least one solver is required")
    if cfg.tol <= 0:
        raise ConfigError("tol must be positive")
    problem = _build_problem(cfg)
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)

    opts = SolveOptions(tol=cfg.tol, max_iter=cfg.max_iter,
                        record_history=cfg.history)
    summary_rows = []
    metric_rows = []
    for name in cfg.solvers:
        report = SOLVERS[name](problem.operator, problem.b, opts=opts)
        summary_rows.append((name, report.iterations, report.wall_time,
                             report.true_final_rr, report.termination))
        if cfg.history:
            _write_history(outdir / f"history_{name}.csv", report)
        if cfg.problem == "blur":
            truth = problem.truth
            restored = report.x
            channels = 4 if cfg.blur[1] == "multi" else 3
            rest_img = ColorImage.from_qvector(restored, channels=channels)
            if channels == 4:
                write_qimg4(outdir / f"restored_{name}.qimg4", rest_img.clipped())
            else:
                write_ppm(outdir / f"restored_{name}.ppm", rest_img.clipped())
            metric_rows.append((name, psnr(truth, restored), ssim(truth, restored),
                                report.wall_time, rel_error(truth, restored)))

    with open(outdir / "summary.csv", "wt", encoding="ascii") as fh:
        fh.write("solver,IT,CPU,RR,termination,seed\n")
        for name, it, cpu, rr, term in summary_rows:
            fh.write(f"{name},{it},{cpu:.3f},{_FMT.format(rr)},{term},"
                     f"{cfg.seed}\n")
    if metric_rows:
        with open(outdir / "metrics.csv", "wt", encoding="ascii") as fh:
            fh.write("solver,PSNR,SSIM,CPU,RR\n")
            for name, p_db, s_idx, cpu, rr in metric_rows:
                fh.write(f"{name},{_FMT.format(p_db)},{_FMT.format(s_idx)},"
                         f"{cpu:.3f},{_FMT.format(rr)}\n")
    if cfg.gnuplot and cfg.history:
        _write_gnuplot(outdir, cfg.solvers)
    return 0


def _parse_args(argv) -> RunConfig:
    ap = argparse.ArgumentParser(
        prog="qkrylov-bench",
        description="Run quaternion Krylov solvers on benchmark problems "
                    "and emit CSV convergence artifacts.")
    ap.add_argument("--problem", required=True, choices=["mtx", "chen", "blur"])
    ap.add_argument("--mtx", help="Matrix Market file for --problem mtx")
    ap.add_argument("--coeffs", default="1,2,-1.5,0.5",
                    help="channel coefficients c0,c1,c2,c3")
    ap.add_argument("--chen", default="1.0,0.001,50,50,0.01",
                    help="T,h,p,q,noise for --problem chen")
    ap.add_argument("--blur", default="rings32.ppm,single,1,10,7",
                    help="img,mode,sigma,r,s for --problem blur")
    ap.add_argument("--solvers", default="qbicg,qqmr3,qqmr2",
                    help="comma-separated subset of "
                         "qbicg,qqmr3,qqmr2,pqqmr3,pqqmr2")
    ap.add_argument("--tol", type=float, default=1e-7)
    ap.add_argument("--max-iter", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--out", default="runs")
    ap.add_argument("--history", action=argparse.BooleanOptionalAction,
                    default=True, help="write per-iteration history CSVs")
    ap.add_argument("--gnuplot", action="store_true",
                    help="also emit a gnuplot script for the histories")
    ns = ap.parse_args(argv)
    return RunConfig(
        problem=ns.problem,
        mtx=ns.mtx,
        coeffs=_parse_tuple(ns.coeffs, [float] * 4, "coeffs"),
        chen=_parse_tuple(ns.chen, [float, float, int, int, float], "chen"),
        blur=_parse_tuple(ns.blur, [str, str, float, int, int], "blur"),
        solvers=tuple(s.strip() for s in ns.solvers.split(",") if s.strip()),
        tol=ns.tol,
        max_iter=ns.max_iter,
        seed=ns.seed,
        out=ns.out,
        history=ns.history,
        gnuplot=ns.gnuplot,
    )


def main(argv=None) -> int:
    try:
        cfg = _parse_args(argv)
        return run(cfg)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, MatrixMarketError, FileNotFoundError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
