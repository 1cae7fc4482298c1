"""Command line front end.

    coltrans solve --config run.ini --out results/
    coltrans verify --config run.ini
    coltrans compare-danckwerts --config run.ini
    coltrans chain --config chain.ini

Exit codes: 0 on success (verify FAILURE lines still exit 0; they are
reported, not fatal), 1 for usage mistakes, 2 for config defects, 3 when
the numerics refuse (bracketing, quadrature, overflow, bad parameters).

All outputs are deterministic: no timestamps, sorted JSON keys, floats
printed with %.17g, LF line endings.  Running the same config twice gives
byte-identical files.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .errors import (
    BracketingError,
    ConfigError,
    FluxTransformError,
    NumericOverflowError,
    ParameterError,
    QuadratureError,
)
from .eigensystem import danckwerts_eigenpair, robin_eigenpair
from .exitflux import HalfLineProblem, exit_concentration, resolve_exit
from .model import ProblemData
from .series import build_solution, eval_C
from .verification import (
    FdGrid,
    danckwerts_comparison,
    danckwerts_solve,
    fd_convergence_order,
    fd_solve,
    mass_balance,
    mass_balance_fd,
)

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage trouble is exit code 1, not argparse's default 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class _Float(float):
    """float whose json form is %.17g, for reproducible manifests."""

    def __repr__(self):
        return f"{float(self):.17g}"


def _jsonify(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return _Float(obj)
    if isinstance(obj, np.floating):
        return _Float(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonify(v) for v in obj]
    return str(obj)


def _write_json(path: Path, payload: dict):
    text = json.dumps(_jsonify(payload), sort_keys=True, indent=2)
    with open(path, "w", newline="\n") as fh:
        fh.write(text + "\n")


def _write_csv(path: Path, header: str, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{float(c):.17g}" for c in row) + "\n")


def _say(quiet: bool, msg: str):
    if not quiet:
        print(msg)


def _resolved(cfg: RunConfig, *, n_grid=None) -> ProblemData:
    if cfg.data.exit is not None:
        return cfg.data
    return resolve_exit(cfg.data, cfg.t_end, n_grid=n_grid or cfg.exit_n_grid)


def _params_dict(p):
    return {"R": p.R, "D": p.D, "v": p.v, "mu": p.mu, "gamma": p.gamma,
            "ell": p.ell}


def _cmd_solve(cfg: RunConfig, out: Path, quiet: bool) -> int:
    data = _resolved(cfg)
    sol = build_solution(data, cfg.policy, cfg.t_end)
    ts = np.linspace(data.t0, cfg.t_end, cfg.nt)
    xs = np.linspace(0.0, data.params.ell, cfg.nx)

    rows = []
    for t in ts:
        c = eval_C(sol, xs, t)
        rows.extend((t, x, ci) for x, ci in zip(xs, c))
    _write_csv(out / "profile.csv", "t,x,C", rows)

    cE = data.require_exit()
    bt = [(t, float(eval_C(sol, np.array([data.params.ell]), t)[0]),
           float(cE.eval(t))) for t in ts]
    _write_csv(out / "breakthrough.csv", "t,C_exit,C_flux_exit", bt)

    _write_json(out / "manifest.json", {
        "command": "solve",
        "version": __version__,
        "config": cfg.source,
        "params": _params_dict(data.params),
        "grid": {"t0": data.t0, "t_end": cfg.t_end, "nx": cfg.nx, "nt": cfg.nt},
        "exit_n_grid": cfg.exit_n_grid,
        "policy": {"n_max": cfg.policy.n_max, "tail_tol": cfg.policy.tail_tol,
                   "time_quad_tol": cfg.policy.time_quad_tol},
        "series": {"kind": sol.kind, "n_used": sol.n_used,
                   "reported_tail": sol.reported_tail,
                   "exit_computed": data.exit_computed,
                   "notes": list(sol.notes)},
        "outputs": ["breakthrough.csv", "manifest.json", "profile.csv"],
    })
    _say(quiet, f"kept modes through n = {sol.n_used}; "
                f"reported tail bound {sol.reported_tail:.3g}")
    _say(quiet, f"wrote profile.csv, breakthrough.csv, manifest.json to {out}")
    return 0


def _cmd_verify(cfg: RunConfig, out: Path, quiet: bool) -> int:
    vo = cfg.verify
    data = _resolved(cfg)
    sol = build_solution(data, cfg.policy, cfg.t_end)
    fd = fd_solve(data, cfg.t_end, FdGrid(nx=vo.fd_nx, nt=vo.fd_nt))

    # pointwise comparison on the FD grid at a spread of time levels
    levels = np.unique(np.linspace(1, fd.t.size - 1, 17).astype(int))
    sup = 0.0
    sq = 0.0
    cnt = 0
    for k in levels:
        diff = eval_C(sol, fd.x, fd.t[k]) - fd.C[k]
        sup = max(sup, float(np.max(np.abs(diff))))
        sq += float(np.sum(diff * diff))
        cnt += diff.size
    rms = np.sqrt(sq / cnt)

    series_bal = mass_balance(lambda xs, t: eval_C(sol, xs, t), data,
                              cfg.t_end, nx=257, n_times=vo.n_times)
    fd_bal = mass_balance_fd(fd)
    order, e1, e2 = fd_convergence_order(data, cfg.t_end)

    _write_csv(out / "balance.csv", "t,residual,relative",
               zip(series_bal.times, series_bal.residual, series_bal.relative))

    checks = [
        ("series vs finite differences (max)", sup, vo.compare_tol),
        ("series vs finite differences (rms)", rms, vo.compare_tol),
        ("series mass balance (max relative)", series_bal.max_rel, vo.balance_tol),
        ("fd mass balance (max relative)", fd_bal.max_rel, vo.balance_tol * 10),
    ]
    lines = []
    for label, value, tol in checks:
        verdict = "PASS" if value <= tol else "FAIL"
        lines.append(f"{verdict}  {label}: {value:.6g} (tol {tol:.3g})")
    lines.append(f"info  fd refinement order: {order:.3f} "
                 f"(gaps {e1:.3g} -> {e2:.3g})")
    lines.append(f"info  kept modes through n = {sol.n_used}, "
                 f"reported tail bound {sol.reported_tail:.3g}")
    text = "\n".join(lines) + "\n"
    with open(out / "verify_summary.txt", "w", newline="\n") as fh:
        fh.write(text)
    _say(quiet, text.rstrip())
    _say(quiet, f"wrote balance.csv, verify_summary.txt to {out}")
    return 0


def _cmd_compare(cfg: RunConfig, out: Path, quiet: bool) -> int:
    data = _resolved(cfg)
    robin = build_solution(data, cfg.policy, cfg.t_end)
    danck = danckwerts_solve(data, cfg.policy, cfg.t_end)
    report = danckwerts_comparison(robin, danck)

    cE = data.require_exit()
    ell = data.params.ell
    rows = []
    for t in np.linspace(data.t0, cfg.t_end, cfg.nt):
        cr = float(eval_C(robin, np.array([ell]), t)[0])
        cd = float(eval_C(danck, np.array([ell]), t)[0])
        rows.append((t, cr, cd, float(cE.eval(t)), abs(cr - cd)))
    _write_csv(out / "exit_comparison.csv",
               "t,C_exit,C_exit_danckwerts,C_flux_exit,exit_gap", rows)

    n_pairs = min(robin.n_used, danck.n_used)
    eig_rows = [(0, robin_eigenpair(0, data.params).lam, float("nan"))]
    eig_rows += [(n, robin_eigenpair(n, data.params).lam,
                  danckwerts_eigenpair(n, data.params).lam)
                 for n in range(1, n_pairs + 1)]
    _write_csv(out / "eigenvalues.csv", "n,lambda,lambda_danckwerts", eig_rows)

    gm = f"{report.gamma_over_mu:.6g}" if report.gamma_over_mu is not None else "n/a"
    _say(quiet, f"max sup-norm gap {report.max_sup:.6g}, "
                f"final {report.final_sup:.6g}, gamma/mu {gm}")
    _say(quiet, f"wrote exit_comparison.csv, eigenvalues.csv to {out}")
    return 0


def _cmd_chain(cfg: RunConfig, out: Path, quiet: bool) -> int:
    if cfg.chain is None:
        raise ConfigError("the chain command needs a [chain] section")
    base = cfg.data
    g_in = base.g
    reports = []
    last = None
    for i, L in enumerate(cfg.chain.lengths, start=1):
        params_i = dataclasses.replace(base.params, ell=float(L))
        data_i = ProblemData(params=params_i, phi=base.phi, g=g_in, t0=base.t0)
        resolved = resolve_exit(data_i, cfg.t_end, n_grid=cfg.chain.n_grid)
        sol = build_solution(resolved, cfg.policy, cfg.t_end)
        seg_dir = out / f"segment_{i}"
        seg_dir.mkdir(parents=True, exist_ok=True)
        ts = np.linspace(base.t0, cfg.t_end, cfg.nt)
        cE = resolved.require_exit()
        bt = [(t, float(eval_C(sol, np.array([params_i.ell]), t)[0]),
               float(cE.eval(t))) for t in ts]
        _write_csv(seg_dir / "breakthrough.csv", "t,C_exit,C_flux_exit", bt)

        # interpolation defect of the memoized inlet-for-next-segment curve
        hp = HalfLineProblem.from_data(data_i)
        knots = cE.knots
        probes = 0.5 * (np.asarray(knots[:-1]) + np.asarray(knots[1:]))
        probes = probes[:: max(1, probes.size // 16)]
        defect = max(abs(float(cE.eval(tp)) - exit_concentration(hp, tp))
                     for tp in probes) if probes.size else 0.0
        reports.append((i, float(L), sol.n_used, defect))
        _say(quiet, f"segment {i}: ell = {L:g}, modes through n = {sol.n_used}, "
                    f"exit-curve interpolation defect {defect:.3g}")
        g_in = cE
        last = bt

    _write_csv(out / "breakthrough.csv", "t,C_exit,C_flux_exit", last)
    with open(out / "chain_report.txt", "w", newline="\n") as fh:
        for i, L, n_used, defect in reports:
            fh.write(f"segment {i}: ell = {L:.17g}, modes through n = {n_used}, "
                     f"exit interpolation defect = {defect:.17g}\n")
        fh.write(f"segments = {len(reports)}, combined exit written from "
                 f"segment {len(reports)}\n")
    _say(quiet, f"wrote per-segment outputs, breakthrough.csv, "
                f"chain_report.txt to {out}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="coltrans",
                     description="finite-column solute transport solver")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("solve", "concentration profiles and breakthrough curves"),
        ("verify", "finite-difference and mass-balance audits"),
        ("compare-danckwerts", "gap against the zero-gradient outlet closure"),
        ("chain", "linked column segments, exit feeding the next inlet"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="INI run file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--nx", type=int, default=None, help="output x samples")
        p.add_argument("--nt", type=int, default=None, help="output t samples")
        p.add_argument("--modes", type=int, default=None,
                       help="override the mode cap")
        p.add_argument("--tail-tol", type=float, default=None,
                       help="override the tail tolerance")
        p.add_argument("--quiet", action="store_true",
                       help="suppress progress output")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.nx is not None or args.nt is not None:
            cfg = dataclasses.replace(cfg, nx=args.nx or cfg.nx,
                                      nt=args.nt or cfg.nt)
        if args.modes is not None or args.tail_tol is not None:
            pol = dataclasses.replace(
                cfg.policy,
                n_max=args.modes or cfg.policy.n_max,
                tail_tol=args.tail_tol or cfg.policy.tail_tol,
            )
            cfg = dataclasses.replace(cfg, policy=pol)
        if cfg.nx < 2 or cfg.nt < 2:
            raise ConfigError("nx and nt must be at least 2")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out = Path(args.out) if args.out else Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"config error: cannot create {out}: {exc}", file=sys.stderr)
        return 2

    handlers = {
        "solve": _cmd_solve,
        "verify": _cmd_verify,
        "compare-danckwerts": _cmd_compare,
        "chain": _cmd_chain,
    }
    try:
        return handlers[args.command](cfg, out, args.quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ParameterError, QuadratureError, BracketingError,
            FluxTransformError, NumericOverflowError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
