"""Command-line front end.

Every command writes a machine-readable artifact (CSV or JSON) with a
metadata header. Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from datetime import datetime, timezone

from . import __version__
from . import classical, io
from .eigen import DEFAULT_TOL, ConvergenceError, full_spectrum
from .entanglement import find_mu_qc, ground_state_of, sweep
from .model import ModelParams, build_hamiltonian
from .phasespace import q_cross_section, wehrl_sweep
from .spin import DimensionError, SpinJ

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_mu(text: str) -> list[float]:
    """``"0.5"`` or inclusive ``"lo:hi:step"``."""
    parts = text.split(":")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"cannot parse mu specification {text!r}") from None
    if any(not math.isfinite(v) for v in values):
        raise UsageError("mu values must be finite")
    if len(values) == 1:
        return values
    if len(values) != 3:
        raise UsageError("mu range must look like lo:hi:step")
    lo, hi, step = values
    if step <= 0 or hi < lo:
        raise UsageError(f"empty mu range {text!r}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [float(round(lo + i * step, 12)) for i in range(n)]


def _twice_j_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"--twice-j expects integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise UsageError("--twice-j values must be positive integers")
    return vals


def _metadata(args, command: str, **extra) -> dict:
    meta = {"command": command, "code_version": __version__}
    meta.update(extra)
    if getattr(args, "timestamp", False):
        meta["timestamp"] = datetime.now(timezone.utc).isoformat()
    return meta


def _emit(args, text: str):
    out = io.write_text(text, args.out)
    if out is not None:
        sys.stdout.write(out)


def _fmt_name(args) -> str:
    return args.format or getattr(args, "default_format", "csv")


# ---------------------------------------------------------------------------

def cmd_entanglement_sweep(args):
    (twice_j,) = _twice_j_list(args.twice_j)[:1]
    grid = parse_mu(args.mu)
    rows = sweep(SpinJ(twice_j), grid, tol=args.tol, threads=args.threads)
    meta = _metadata(
        args,
        "entanglement-sweep",
        twice_j=twice_j,
        mu=args.mu,
        tol=args.tol,
        degenerate_member="SWAP-symmetric",
        negative_coupling=any(r.mu < 0 for r in rows),
        failed_rows=[r.mu for r in rows if r.failed],
    )
    header = ["mu", "entropy_bits", "ground_energy", "gap", "degenerate_flag"]
    if _fmt_name(args) == "json":
        _emit(args, io.format_json(meta, [r.as_dict() for r in rows]))
    else:
        _emit(args, io.format_csv(meta, header, ([r.mu, r.entropy_bits, r.ground_energy, r.gap, r.degenerate_flag] for r in rows)))
    if rows and all(r.failed for r in rows):
        raise NumericalFailure("every row of the sweep failed")


def cmd_critical_point(args):
    window = tuple(float(x) for x in args.window.split(":"))
    if len(window) != 2 or not window[0] < window[1]:
        raise UsageError("--window must look like lo:hi with lo < hi")
    records = []
    for twice_j in _twice_j_list(args.twice_j):
        try:
            rec = find_mu_qc(SpinJ(twice_j), coarse_step=args.coarse_step, refine_tol=args.refine_tol, window=window, tol=args.tol)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        records.append(rec.as_dict())
    meta = _metadata(args, "critical-point", coarse_step=args.coarse_step, refine_tol=args.refine_tol, tol=args.tol, window=list(window))
    if _fmt_name(args) == "csv":
        header = ["twice_j", "status", "mu_qc", "S_max", "bracket_lo", "bracket_hi"]
        rows = ([r["twice_j"], r["status"], r["mu_qc"], r["S_max"], *(r["bracket"] or [None, None])] for r in records)
        _emit(args, io.format_csv(meta, header, rows))
    else:
        _emit(args, io.format_json(meta, records))


def cmd_qfunction(args):
    (twice_j,) = _twice_j_list(args.twice_j)[:1]
    if args.resolution < 16:
        raise UsageError("--resolution must be at least 16")
    mus = parse_mu(args.mu)
    if len(mus) != 1:
        raise UsageError("qfunction takes a single --mu value")
    state, res = ground_state_of(SpinJ(twice_j), mus[0], args.tol)
    grid = q_cross_section(state, args.phi1, args.phi2, args.resolution)
    meta = _metadata(
        args, "qfunction", twice_j=twice_j, mu=mus[0], phi1=args.phi1, phi2=args.phi2,
        resolution=args.resolution, tol=args.tol, residual=res.residual_norm,
    )
    if _fmt_name(args) == "json":
        _emit(args, io.format_json(meta, [{"theta1": list(grid.axis1), "theta2": list(grid.axis2), "q": grid.values.tolist()}]))
    else:
        _emit(args, io.format_qgrid(meta, grid.axis1, grid.axis2, grid.values))


def _initial_state(args) -> classical.ClassicalState:
    spec = args.start
    fixed = {rec.branch: rec.coords for rec in classical.enumerate_fixed_points(max(args.mu_value, 0.0))}
    aliases = {"ll": "←←", "rr": "→→", "rl": "→←", "lr": "←→"}
    key = aliases.get(spec, spec)
    if key in fixed:
        return fixed[key]
    parts = spec.split(",")
    if len(parts) == 6:
        return classical.ClassicalState.from_array([float(p) for p in parts]).normalized()
    if len(parts) == 4:
        t1, p1, t2, p2 = (float(p) for p in parts)
        return classical.ClassicalState.from_angles(t1, p1, t2, p2)
    raise UsageError(f"unknown start {spec!r}: use a branch label, 6 components or 4 angles")


def cmd_classical(args):
    fmt = _fmt_name(args)
    if args.classical_cmd == "fixed-points":
        mus = parse_mu(args.mu)
        if len(mus) != 1:
            raise UsageError("fixed-points takes a single --mu value")
        if mus[0] < 0:
            raise UsageError("fixed-points needs mu >= 0")
        records = [r.as_dict() for r in classical.enumerate_fixed_points(mus[0])]
        meta = _metadata(args, "classical fixed-points", mu=mus[0])
        if fmt == "csv":
            header = ["mu", "branch", "stability", "energy", "Lx1", "Ly1", "Lz1", "Lx2", "Ly2", "Lz2"]
            rows = ([r["mu"], r["branch"], r["stability"], r["energy"], *r["L1"], *r["L2"]] for r in records)
            _emit(args, io.format_csv(meta, header, rows))
        else:
            _emit(args, io.format_json(meta, records))
    elif args.classical_cmd == "bifurcation":
        mus = parse_mu(args.mu)
        if len(mus) < 2:
            raise UsageError("bifurcation needs a mu range lo:hi:step")
        if mus[0] < 0:
            raise UsageError("bifurcation needs mu >= 0")
        rows = classical.bifurcation_diagram(mus[0], mus[-1], len(mus), side=args.side)
        meta = _metadata(args, "classical bifurcation", mu=args.mu, side=args.side)
        header = ["mu", "branch", "Lz1", "Lx1", "stability"]
        if fmt == "csv":
            _emit(args, io.format_csv(meta, header, ([r[h] for h in header] for r in rows)))
        else:
            _emit(args, io.format_json(meta, rows))
    elif args.classical_cmd == "evolve":
        mus = parse_mu(args.mu)
        if len(mus) != 1:
            raise UsageError("evolve takes a single --mu value")
        args.mu_value = mus[0]
        s0 = _initial_state(args)
        traj = classical.integrate(s0, mus[0], args.dt, args.steps)
        stride = max(1, args.stride)
        meta = _metadata(
            args, "classical evolve", mu=mus[0], dt=args.dt, steps=args.steps, stride=stride, start=args.start,
            energy_drift=traj.energy_drift, constraint_drift=traj.constraint_drift,
        )
        header = ["t", "Lx1", "Ly1", "Lz1", "Lx2", "Ly2", "Lz2"]
        idx = range(0, len(traj.times), stride)
        if fmt == "csv":
            _emit(args, io.format_csv(meta, header, ([traj.times[i], *traj.states[i]] for i in idx)))
        else:
            _emit(args, io.format_json(meta, [dict(zip(header, [traj.times[i], *traj.states[i]])) for i in idx]))


def cmd_spectrum(args):
    (twice_j,) = _twice_j_list(args.twice_j)[:1]
    mus = parse_mu(args.mu)
    if len(mus) != 1:
        raise UsageError("spectrum takes a single --mu value")
    h = build_hamiltonian(ModelParams(SpinJ(twice_j), mus[0]))
    res = full_spectrum(h)
    meta = _metadata(args, "spectrum", twice_j=twice_j, mu=mus[0], method="householder+ql")
    if _fmt_name(args) == "json":
        _emit(args, io.format_json(meta, [{"index": i, "energy": float(e)} for i, e in enumerate(res.eigenvalues)]))
    else:
        _emit(args, io.format_csv(meta, ["index", "energy"], enumerate(res.eigenvalues)))


def cmd_wehrl_sweep(args):
    (twice_j,) = _twice_j_list(args.twice_j)[:1]
    rows = wehrl_sweep(SpinJ(twice_j), parse_mu(args.mu), n_theta=args.n_theta, n_phi=args.n_phi, order=args.order, tol=args.tol)
    meta = _metadata(args, "wehrl-sweep", twice_j=twice_j, mu=args.mu, n_theta=args.n_theta, n_phi=args.n_phi, order=args.order)
    header = ["mu", "wehrl_nats", "wehrl_bits", "norm"]
    if _fmt_name(args) == "json":
        _emit(args, io.format_json(meta, rows))
    else:
        _emit(args, io.format_csv(meta, header, ([r[h] for h in header] for r in rows)))


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="Lanczos residual tolerance")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--timestamp", action="store_true", help="add a UTC timestamp to the metadata")

    parser = _Parser(prog="coupled-tops", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("entanglement-sweep", parents=[common], help="ground-state entropy versus mu")
    p.add_argument("--twice-j", required=True)
    p.add_argument("--mu", required=True, help="lo:hi:step (inclusive) or a single value")
    p.set_defaults(func=cmd_entanglement_sweep)

    p = sub.add_parser("critical-point", parents=[common], help="mu of maximal entanglement for each j")
    p.add_argument("--twice-j", required=True, help="comma-separated list")
    p.add_argument("--coarse-step", type=float, default=0.01)
    p.add_argument("--refine-tol", type=float, default=1e-5)
    p.add_argument("--window", default="0.5:3.0")
    p.set_defaults(func=cmd_critical_point, default_format="json")

    p = sub.add_parser("qfunction", parents=[common], help="Husimi cross-section of the ground state")
    p.add_argument("--twice-j", required=True)
    p.add_argument("--mu", required=True)
    p.add_argument("--phi1", type=float, default=math.pi)
    p.add_argument("--phi2", type=float, default=math.pi)
    p.add_argument("--resolution", type=int, default=129)
    p.set_defaults(func=cmd_qfunction)

    p = sub.add_parser("classical", help="fixed points, bifurcation diagram, trajectories")
    csub = p.add_subparsers(dest="classical_cmd", required=True, parser_class=_Parser)
    q = csub.add_parser("fixed-points", parents=[common])
    q.add_argument("--mu", required=True)
    q.set_defaults(func=cmd_classical)
    q = csub.add_parser("bifurcation", parents=[common])
    q.add_argument("--mu", required=True, help="lo:hi:step")
    q.add_argument("--side", choices=("left", "right", "all"), default="left")
    q.set_defaults(func=cmd_classical)
    q = csub.add_parser("evolve", parents=[common])
    q.add_argument("--mu", required=True)
    q.add_argument("--start", default="A", help="branch label (A-D, ll, rr, rl, lr), 6 components, or 4 angles")
    q.add_argument("--dt", type=float, default=0.01)
    q.add_argument("--steps", type=int, default=10000)
    q.add_argument("--stride", type=int, default=1, help="write every n-th sample")
    q.set_defaults(func=cmd_classical)

    p = sub.add_parser("spectrum", parents=[common], help="full spectrum of the dense Hamiltonian")
    p.add_argument("--twice-j", required=True)
    p.add_argument("--mu", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("wehrl-sweep", parents=[common], help="Wehrl entropy of the ground state versus mu")
    p.add_argument("--twice-j", required=True)
    p.add_argument("--mu", required=True)
    p.add_argument("--n-theta", type=int, default=128)
    p.add_argument("--n-phi", type=int, default=128)
    p.add_argument("--order", type=float, default=1.0)
    p.set_defaults(func=cmd_wehrl_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"coupled-tops: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, ConvergenceError, DimensionError, classical.ChartSingularityError) as exc:
        print(f"coupled-tops: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"coupled-tops: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
