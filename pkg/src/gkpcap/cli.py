"""Command-line front end emitting reproducible CSV/JSON artifacts.

Every command writes delimited data (CSV or JSON), renders a matching
PNG figure next to it, and drops a ``run.json`` manifest recording the
command, its full parameter map, the seed, the tool version, and the
produced files, so a run can be reproduced from its artifacts alone.

Exit codes: 0 success, 2 usage/precondition, 3 numeric guard
(truncation), 4 solver failure (partial artifacts are still written).

Relative output paths are resolved against the ``GKPCAP_OUTDIR``
environment variable when it is set.
"""

from __future__ import annotations

import argparse
import importlib.metadata
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import biconvex, capacity, fock, gkp, plotting, verify
from .choi import ChoiMatrix, average_output_state

_FLOAT_FMT = "%.12g"


def _version() -> str:
    try:
        return importlib.metadata.version("artifact")
    except importlib.metadata.PackageNotFoundError:
        return "0+unknown"


def _resolve(path: str) -> Path:
    p = Path(path)
    if not p.is_absolute():
        base = os.environ.get("GKPCAP_OUTDIR")
        if base:
            p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _fmt(value) -> str:
    if value is None:
        return ""
    return _FLOAT_FMT % value


def _write_manifest(directory: Path, command: str, params: dict,
                    seed: int | None, outputs: list[Path]) -> Path:
    manifest = {
        "command": command,
        "parameters": params,
        "seed": seed,
        "version": _version(),
        "outputs": sorted(p.name for p in outputs),
    }
    path = directory / "run.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _write_wigner_csv(path: Path, qs: np.ndarray, ps: np.ndarray,
                      W: np.ndarray) -> None:
    lines = ["q,p,W"]
    for i, q in enumerate(qs):
        for j, p in enumerate(ps):
            lines.append(f"{_fmt(q)},{_fmt(p)},{_fmt(W[i, j])}")
    path.write_text("\n".join(lines) + "\n")


def _lattice(code: str, d: int) -> gkp.GkpLattice:
    if code == "square":
        return gkp.square_lattice(d)
    if code == "hex":
        return gkp.hexagonal_lattice(d)
    raise ValueError(f"unknown code family {code!r}")


# ---------------------------------------------------------------------------
# bounds

def cmd_bounds(args: argparse.Namespace) -> int:
    if not 0.0 <= args.eta_min < args.eta_max <= 1.0:
        raise ValueError("need 0 <= eta-min < eta-max <= 1")
    if args.steps < 2:
        raise ValueError("need at least 2 grid points")
    if args.nth < 0:
        raise ValueError("thermal occupation must be >= 0")
    nbar = math.inf if args.nbar.lower() == "inf" else float(args.nbar)
    if nbar <= 0:
        raise ValueError("mean photon number must be > 0 (or 'inf')")

    out = _resolve(args.out)
    etas = np.linspace(args.eta_min, args.eta_max, args.steps)
    rows = []
    for eta in etas:
        bp = capacity.bound_point(float(eta), args.nth, nbar)
        rows.append({"eta": bp.eta, "lower_ci": bp.lower_ci, "hw": bp.hw,
                     "dp": bp.dp, "idp": bp.idp, "odp": bp.odp,
                     "gkp_rate": bp.gkp_rate})
    header = "eta,lower_ci,hw,dp,idp,odp,gkp_rate"
    lines = [header]
    for r in rows:
        lines.append(",".join(_fmt(r[k]) for k in header.split(",")))
    out.write_text("\n".join(lines) + "\n")

    png = out.with_suffix(".png")
    plotting.plot_bounds(rows, png,
                         title=f"nth={_fmt(args.nth)}, nbar={args.nbar}")
    _write_manifest(out.parent, "bounds", {
        "eta_min": args.eta_min, "eta_max": args.eta_max, "steps": args.steps,
        "nth": args.nth, "nbar": args.nbar, "out": str(args.out),
    }, None, [out, png])
    print(f"wrote {out} ({len(rows)} rows) and {png}")
    return 0


# ---------------------------------------------------------------------------
# wigner

def cmd_wigner(args: argparse.Namespace) -> int:
    if args.grid_n % 2 == 0 or args.grid_n < 3:
        raise ValueError("grid-n must be odd and >= 3 (center sample at the origin)")
    if args.range <= 0:
        raise ValueError("range must be > 0")
    if args.d < 1:
        raise ValueError("code dimension must be >= 1")
    if args.delta is None and args.nbar is None:
        raise ValueError("give either --nbar or --delta")

    out = _resolve(args.out)
    lattice = _lattice(args.code, args.d)
    if args.delta is not None:
        delta = args.delta
    else:
        delta = gkp.delta_for_mean_photon(lattice, args.d, args.nbar,
                                          args.fock_dim)
    fe = gkp.finite_energy_codewords(lattice, args.d, delta, args.fock_dim)
    rho = gkp.code_mixed_state(fe)
    qs = np.linspace(-args.range, args.range, args.grid_n)
    ps = np.linspace(-args.range, args.range, args.grid_n)
    W = fock.wigner(rho, qs, ps)
    _write_wigner_csv(out, qs, ps, W)

    png = out.with_suffix(".png")
    plotting.plot_wigner(qs, ps, W, png,
                         title=f"{args.code} d={args.d} delta={_fmt(delta)}")
    _write_manifest(out.parent, "wigner", {
        "code": args.code, "d": args.d, "nbar": args.nbar, "delta": args.delta,
        "grid_n": args.grid_n, "range": args.range, "fock_dim": args.fock_dim,
        "out": str(args.out),
    }, None, [out, png])
    print(f"wrote {out} ({args.grid_n}x{args.grid_n} grid) and {png}")
    return 0


# ---------------------------------------------------------------------------
# logical-error

def cmd_logical_error(args: argparse.Namespace) -> int:
    if args.trials < 10_000:
        raise ValueError("need at least 10^4 trials")
    if args.d < 1:
        raise ValueError("code dimension must be >= 1")
    sweep = args.eta_min is not None or args.eta_max is not None
    if sweep == bool(args.sigma2):
        raise ValueError("give either --sigma2 values or an --eta-min/--eta-max sweep")

    out = _resolve(args.out)
    lattice = _lattice(args.code, args.d)
    points = []
    if sweep:
        if args.eta_min is None or args.eta_max is None:
            raise ValueError("an eta sweep needs both --eta-min and --eta-max")
        if not 0.0 < args.eta_min < args.eta_max < 1.0:
            raise ValueError("need 0 < eta-min < eta-max < 1")
        grid = np.linspace(args.eta_min, args.eta_max, args.eta_steps)
        for k, eta in enumerate(grid):
            sigma2 = (1.0 - float(eta)) / float(eta)
            mc = gkp.mc_logical_error(lattice, args.d, sigma2, args.trials,
                                      seed=args.seed + 1_000_003 * k)
            points.append({
                "eta": float(eta), "sigma2": sigma2,
                "estimate": mc.estimate, "stderr": mc.stderr,
                "closed_form_exponent":
                    gkp.closest_point_error_exponent(lattice, args.d, sigma2),
            })
    else:
        for k, sigma2 in enumerate(args.sigma2):
            if sigma2 < 0:
                raise ValueError("displacement variance must be >= 0")
            if sigma2 == 0.0:
                points.append({"sigma2": 0.0, "estimate": 0.0, "stderr": 0.0,
                               "closed_form_exponent": -math.inf})
                continue
            mc = gkp.mc_logical_error(lattice, args.d, sigma2, args.trials,
                                      seed=args.seed + 1_000_003 * k)
            points.append({
                "sigma2": sigma2, "estimate": mc.estimate, "stderr": mc.stderr,
                "closed_form_exponent":
                    gkp.closest_point_error_exponent(lattice, args.d, sigma2),
            })

    payload = {"code": args.code, "d": args.d, "trials": args.trials,
               "seed": args.seed, "points": points}
    out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    png = out.with_suffix(".png")
    plotting.plot_logical_error(points, png,
                                x_key="eta" if sweep else "sigma2",
                                title=f"{args.code} d={args.d}")
    _write_manifest(out.parent, "logical-error", {
        "code": args.code, "d": args.d, "sigma2": args.sigma2,
        "eta_min": args.eta_min, "eta_max": args.eta_max,
        "eta_steps": args.eta_steps, "trials": args.trials,
        "out": str(args.out),
    }, args.seed, [out, png])
    print(f"wrote {out} ({len(points)} points) and {png}")
    return 0


# ---------------------------------------------------------------------------
# optimize

_CHECKPOINT_SCHEDULE = (1, 50, 250, 500, 800)


def _choi_csv(path: Path, choi: ChoiMatrix, what: str) -> None:
    lines = [
        f"# {what} process matrix: X[[i j],[i' j']] = <j|A(|i><i'|)|j'>,"
        f" composite [i j] = i*dim_out + j",
        f"# dim_in={choi.dim_in},dim_out={choi.dim_out}",
        "row,col,real,imag",
    ]
    m = choi.X.shape[0]
    for r in range(m):
        for c in range(m):
            lines.append(f"{r},{c},{_fmt(choi.X[r, c].real)},"
                         f"{_fmt(choi.X[r, c].imag)}")
    path.write_text("\n".join(lines) + "\n")


def read_choi_csv(path: str | Path) -> ChoiMatrix:
    """Load a process matrix written by the optimize command."""
    dims = None
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            if "dim_in=" in line:
                parts = dict(kv.split("=") for kv in
                             line.lstrip("# ").split(","))
                dims = (int(parts["dim_in"]), int(parts["dim_out"]))
            continue
        if line.startswith("row,"):
            continue
        r, c, re_part, im_part = line.split(",")
        rows.append((int(r), int(c), float(re_part), float(im_part)))
    if dims is None:
        raise ValueError(f"{path} lacks the dimension header")
    m = dims[0] * dims[1]
    X = np.zeros((m, m), dtype=complex)
    for r, c, re_part, im_part in rows:
        X[r, c] = re_part + 1j * im_part
    return ChoiMatrix(X, *dims)


def _trace_payload(cfg: biconvex.OptimizationConfig,
                   records, infidelity: float, seed: int,
                   converged: bool, top_pop: float) -> dict:
    return {
        "config": {
            "eta": cfg.eta, "fock_dim": cfg.fock_dim, "code_dim": cfg.code_dim,
            "energy_bound": cfg.energy_bound, "max_iters": cfg.max_iters,
            "fidelity_tol": cfg.fidelity_tol, "seed": seed,
        },
        "iterations": [{"iter": r.iteration, "phase": r.phase,
                        "fidelity": r.fidelity} for r in records],
        "best": {"infidelity": infidelity, "seed": seed},
        "converged": converged,
        "top_level_population": top_pop,
    }


def cmd_optimize(args: argparse.Namespace) -> int:
    if args.seeds < 1:
        raise ValueError("need at least one seed")
    out_dir = _resolve(str(Path(args.out_dir) / "x")).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    checkpoints = tuple(c for c in _CHECKPOINT_SCHEDULE if c <= args.iters)

    outputs: list[Path] = []
    traces: dict[int, biconvex.OptimizationTrace] = {}
    trace_dicts: dict[int, list[dict]] = {}
    failure: biconvex.SolverFailure | None = None
    for i in range(args.seeds):
        seed = args.seed + i
        cfg = biconvex.OptimizationConfig(
            eta=args.eta, fock_dim=args.fock_dim, code_dim=args.code_dim,
            energy_bound=args.nbar, max_iters=args.iters, seed=seed)
        try:
            trace = biconvex.alternate_optimize(cfg, checkpoint_iters=checkpoints)
        except biconvex.SolverFailure as exc:
            failure = exc
            trace = exc.trace
            if trace is None:
                break
        traces[seed] = trace
        payload = _trace_payload(cfg, trace.records, trace.infidelity, seed,
                                 trace.converged, trace.top_level_population)
        trace_dicts[seed] = payload["iterations"]
        tpath = out_dir / f"trace_seed{seed}.json"
        tpath.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        outputs.append(tpath)
        if failure is not None:
            break

    if traces:
        best_seed = min(traces, key=lambda s: traces[s].infidelity)
        best = traces[best_seed]

        summary = {
            "config": {"eta": args.eta, "fock_dim": args.fock_dim,
                       "code_dim": args.code_dim, "energy_bound": args.nbar,
                       "max_iters": args.iters, "seeds": sorted(traces)},
            "best": {"infidelity": best.infidelity, "seed": best_seed},
            "per_seed_infidelity": {str(s): traces[s].infidelity
                                    for s in sorted(traces)},
            "solver_failure": str(failure) if failure else None,
        }
        spath = out_dir / "summary.json"
        spath.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        outputs.append(spath)

        for what, choi_m in (("encoder", best.X_E), ("decoder", best.X_D)):
            if choi_m is None:
                continue
            cpath = out_dir / f"{what}_choi.csv"
            _choi_csv(cpath, choi_m, what)
            outputs.append(cpath)

        qs = np.linspace(-args.wigner_range, args.wigner_range,
                         args.wigner_grid_n)
        for it, choi_m in sorted(best.checkpoints.items()):
            rho = average_output_state(choi_m)
            W = fock.wigner(rho, qs, qs)
            wpath = out_dir / f"wigner_iter{it:03d}.csv"
            _write_wigner_csv(wpath, qs, qs, W)
            outputs.append(wpath)
            outputs.append(plotting.plot_wigner(
                qs, qs, W, wpath.with_suffix(".png"),
                title=f"encoder output, iteration {it} (seed {best_seed})"))

        tpng = out_dir / "trace.png"
        plotting.plot_optimization_trace(trace_dicts, tpng,
                                         title=f"eta={_fmt(args.eta)}, "
                                               f"Ebar={_fmt(args.nbar)}")
        outputs.append(tpng)

    _write_manifest(out_dir, "optimize", {
        "eta": args.eta, "fock_dim": args.fock_dim, "code_dim": args.code_dim,
        "nbar": args.nbar, "iters": args.iters, "seeds": args.seeds,
        "wigner_grid_n": args.wigner_grid_n, "wigner_range": args.wigner_range,
        "out_dir": str(args.out_dir),
    }, args.seed, outputs)

    if failure is not None:
        print(f"solver failure: {failure}", file=sys.stderr)
        print(f"partial artifacts in {out_dir}", file=sys.stderr)
        return 4
    print(f"wrote {len(outputs) + 1} files to {out_dir} "
          f"(best infidelity {_fmt(best.infidelity)}, seed {best_seed})")
    return 0


# ---------------------------------------------------------------------------
# verify

def cmd_verify(args: argparse.Namespace) -> int:
    results = verify.run_checks(tol_scale=args.tol_scale)
    print(verify.format_report(results))
    return 0 if verify.all_passed(results) else 1


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gkpcap",
        description="Capacity bounds, grid-code studies, and encoder/decoder "
                    "optimization for one-mode Gaussian loss channels.")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="capacity bound curves over a "
                                      "transmissivity grid (CSV + PNG)")
    b.add_argument("--eta-min", type=float, default=0.0)
    b.add_argument("--eta-max", type=float, default=1.0)
    b.add_argument("--steps", type=int, default=101)
    b.add_argument("--nth", type=float, default=0.0,
                   help="environment thermal occupation")
    b.add_argument("--nbar", default="inf",
                   help="input mean photon number, or 'inf'")
    b.add_argument("--out", required=True, help="output CSV path")
    b.set_defaults(func=cmd_bounds)

    w = sub.add_parser("wigner", help="phase-space grid of a code mixture "
                                      "(CSV + PNG)")
    w.add_argument("--code", choices=("square", "hex"), required=True)
    w.add_argument("--d", type=int, default=2, help="logical dimension")
    w.add_argument("--nbar", type=float, default=None,
                   help="target mean photon number of the code mixture")
    w.add_argument("--delta", type=float, default=None,
                   help="envelope width; overrides --nbar calibration")
    w.add_argument("--grid-n", type=int, default=201,
                   help="odd number of samples per axis")
    w.add_argument("--range", type=float, default=6.0,
                   help="half-width of the (q, p) window")
    w.add_argument("--fock-dim", type=int, default=140)
    w.add_argument("--out", required=True, help="output CSV path")
    w.set_defaults(func=cmd_wigner)

    le = sub.add_parser("logical-error",
                        help="Monte-Carlo logical-error rates (JSON + PNG)")
    le.add_argument("--code", choices=("square", "hex"), required=True)
    le.add_argument("--d", type=int, default=2)
    le.add_argument("--sigma2", type=float, nargs="*", default=[],
                    help="displacement variances to sample")
    le.add_argument("--eta-min", type=float, default=None,
                    help="sweep start (loss transmissivity)")
    le.add_argument("--eta-max", type=float, default=None)
    le.add_argument("--eta-steps", type=int, default=5)
    le.add_argument("--trials", type=int, default=1_000_000)
    le.add_argument("--seed", type=int, default=0)
    le.add_argument("--out", required=True, help="output JSON path")
    le.set_defaults(func=cmd_logical_error)

    o = sub.add_parser("optimize",
                       help="alternating-SDP encoder/decoder search "
                            "(JSON traces, process-matrix CSVs, Wigner "
                            "checkpoints, PNGs)")
    o.add_argument("--eta", type=float, required=True)
    o.add_argument("--fock-dim", type=int, default=20)
    o.add_argument("--code-dim", type=int, default=2)
    o.add_argument("--nbar", type=float, default=3.0,
                   help="mean-photon bound on the encoder output")
    o.add_argument("--iters", type=int, default=800)
    o.add_argument("--seeds", type=int, default=3,
                   help="number of random restarts")
    o.add_argument("--seed", type=int, default=0, help="first restart seed")
    o.add_argument("--wigner-grid-n", type=int, default=121)
    o.add_argument("--wigner-range", type=float, default=6.0)
    o.add_argument("--out-dir", required=True)
    o.set_defaults(func=cmd_optimize)

    v = sub.add_parser("verify", help="run the cross-module consistency "
                                      "suite (one line per check)")
    v.add_argument("--tol-scale", type=float, default=1.0,
                   help="multiply every tolerance (test hook)")
    v.set_defaults(func=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code = args.func(args)
    except fock.TruncationError as exc:
        print(f"truncation guard: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
