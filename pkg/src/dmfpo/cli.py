"""Command-line interface: ``dmfpo validate|optimize|fit|dynamics|period``.

Exit codes: 0 success, 1 bad input or I/O failure, 2 fidelity threshold
not met, 3 optimisation left nodes unconverged.
"""

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import dynamics, fitting, fpo, seqio, svg
from .core import gate_fidelity, singlet
from .exceptions import DMFPOError
from .model import REFERENCE_PERIOD_POLY, dm_propagator, find_period, period_fit_eval
from .sequence import (compile, decomposition_a, decomposition_b, decomposition_full,
                       structure_a)

EXIT_OK, EXIT_INPUT, EXIT_THRESHOLD, EXIT_UNCONVERGED = 0, 1, 2, 3


class InputError(Exception):
    pass


def _grid(text):
    try:
        a, b = text.lower().split("x")
        ng, nt = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 31x31, got {text!r}") from None
    if ng < 1 or nt < 1:
        raise argparse.ArgumentTypeError("grid sizes must be >= 1")
    return ng, nt


def _span(text):
    """``lo:hi`` or a single value."""
    try:
        parts = [float(p) for p in text.split(":")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi or a number, got {text!r}") from None
    if len(parts) == 1:
        parts *= 2
    if len(parts) != 2 or parts[0] > parts[1]:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    return tuple(parts)


def _floats(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _axes(grid, gamma, tau):
    ng, nt = grid
    if (ng == 1) != (gamma[0] == gamma[1]) or (nt == 1) != (tau[0] == tau[1]):
        raise InputError("a grid size of 1 needs a single value and vice versa")
    return fpo.grid_axes(ng, nt, gamma, tau)


def _write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])


def _write_json(path, data):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump({"schema": 1, **data}, fh, indent=2)
        fh.write("\n")


def _ensure_parent(path):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


# -- validate -----------------------------------------------------------------

def _full_profile(gamma_axis, tau_axis):
    g, t = np.meshgrid(gamma_axis, tau_axis, indexing="ij")
    u = np.array([compile(decomposition_full(a, b)) for a, b in zip(g.ravel(), t.ravel())])
    v = dm_propagator(g.ravel(), t.ravel(), units="spin")
    return fpo.FidelityProfile(gamma_axis, tau_axis, gate_fidelity(u, v).reshape(g.shape))


def cmd_validate(args):
    gamma_axis, tau_axis = _axes(args.grid, args.gamma, args.tau)
    if args.decomp == "A":
        prof = fpo.profile(decomposition_a(), gamma_axis, tau_axis, "dm_xy")
    elif args.decomp == "B":
        prof = fpo.profile(decomposition_b(), gamma_axis, tau_axis, "dm_xy_primed")
    else:
        prof = _full_profile(gamma_axis, tau_axis)
    _ensure_parent(args.out)
    _write_rows(args.out + ".csv", ["gamma", "tau", "fidelity"], prof.rows())
    with open(args.out + ".svg", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg.heatmap(prof, args.vmin, 1.0, f"decomposition {args.decomp}"))
    g, t = prof.argmin
    print(f"decomposition {args.decomp}: min fidelity {prof.min:.8f} at gamma={g:.4g}, "
          f"tau={t:.4g}; mean {prof.mean:.8f}")
    if prof.min < args.threshold:
        print(f"FAIL: below threshold {args.threshold}", file=sys.stderr)
        return EXIT_THRESHOLD
    return EXIT_OK


# -- optimize -----------------------------------------------------------------

def _read_nodes(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not {"gamma", "tau"} <= set(reader.fieldnames or ()):
            raise InputError(f"node file {path} needs gamma,tau columns")
        return [(float(r["gamma"]), float(r["tau"])) for r in reader]


def _load_config(path):
    if path is None:
        return fpo.GAConfig()
    with open(path, encoding="utf-8") as fh:
        return fpo.GAConfig.from_json(fh.read())


def cmd_optimize(args):
    config = _load_config(args.config)
    if args.nodes:
        nodes = _read_nodes(args.nodes)
        gammas = sorted({g for g, _ in nodes})
        taus = sorted({t for _, t in nodes})
    else:
        gammas, taus = _axes(args.grid, args.gamma, args.tau)
        nodes = [(g, t) for g in gammas for t in taus]
    _ensure_parent(args.out)
    if args.mode == "pointwise":
        skel = fpo.skeleton_a() if args.skeleton == "A" else fpo.skeleton_b()
        results = fpo.optimize_pointwise(skel, nodes, config, workers=args.workers)
        fitting.write_angle_table(args.out, results, skel)
        worst = min(results, key=lambda r: r.fidelity)
        bad = [r for r in results if not r.converged]
        print(f"{len(results)} nodes, min fidelity {worst.fidelity:.10f} at "
              f"gamma={worst.gamma:.4g}, tau={worst.tau:.4g}; {len(bad)} unconverged")
    else:
        if args.skeleton != "A":
            raise InputError("surface mode is available for skeleton A only")
        skel = fpo.surface_skeleton_a()
        res = fpo.optimize_surface(skel, gammas, taus, config)
        c = [float(v) for v in res.best]
        _write_rows(args.out, ["slot", "form", "c1", "c2", "c3", "c4", "rms"],
                    [["theta1", "trig_gamma*tau", *c[:4], ""],
                     ["theta2", "exp2", *c[4:], ""]])
        prof = fpo.profile(skel, gammas, taus, genes=res.best)
        bad = [] if res.converged else [res]
        print(f"surface GA: fitness {res.best_fitness:.10f}, node min fidelity {prof.min:.10f}, "
              f"{res.generations} generations ({res.stop_reason})")
    return EXIT_UNCONVERGED if bad else EXIT_OK


# -- fit ----------------------------------------------------------------------

def cmd_fit(args):
    table = fitting.read_angle_table(args.table)
    fits = fitting.fit_angle_surfaces(table)
    _ensure_parent(args.out)
    fitting.write_surface_table(args.out, fits)
    for slot, f in fits.items():
        print(f"{slot} = {f.expression.to_text()}   (rms {f.rms:.3g})")
    seq = structure_a(fits["theta1"].expression, fits["theta2"].expression,
                      name="decomposition_A_fit", source="ga-derived")
    if args.sequence:
        _ensure_parent(args.sequence)
        seqio.dump(seq, args.sequence)
    if args.grid is None:
        return EXIT_OK
    prof = fpo.profile(seq, *_axes(args.grid, args.gamma, args.tau))
    print(f"fitted surfaces: min fidelity {prof.min:.8f} over {args.grid[0]}x{args.grid[1]} grid")
    return EXIT_THRESHOLD if prof.min < args.threshold else EXIT_OK


# -- dynamics -----------------------------------------------------------------

def _tau_axis(gamma, n, t_max, j_hz):
    if t_max is None:
        t_end = find_period(gamma)        # one concurrence period by default
    elif j_hz is not None:
        t_end = 2 * math.pi * j_hz * t_max
    else:
        t_end = t_max
    return np.linspace(0.0, t_end, n) if n > 1 else np.array([0.0])


def cmd_dynamics(args):
    methods = list(dynamics.METHODS) if args.method == "both" else [args.method]
    os.makedirs(args.out, exist_ok=True)
    psi0 = singlet()
    report = {"dynamics": [], "preservation": []}
    for g in args.gamma:
        taus = _tau_axis(g, args.n, args.t_max, args.j_hz)
        trs = {m: dynamics.concurrence_trajectory(psi0, g, taus, m) for m in methods}
        dynamics.write_trajectories(os.path.join(args.out, f"trajectory_gamma{g:g}.csv"),
                                    trs.values())
        line = f"gamma={g:g}: min concurrence {trs[methods[0]].concurrences.min():.6f}"
        if len(trs) == 2:
            res = dynamics.aed(trs["decomposition"].concurrences, trs["exact"].concurrences)
            report["dynamics"].append({"gamma": g, "n": res.n, "value_percent": res.value_percent,
                                       "per_point": list(res.per_point)})
            line += f", AED {res.value_percent:.4f}%"
        if args.preserve == "on":
            seg = args.seg_tau if args.j_hz is None else 2 * math.pi * args.j_hz * args.seg_tau
            prs = {m: dynamics.preservation_trajectory(psi0, g, seg, args.cycles, m) for m in methods}
            dynamics.write_trajectories(os.path.join(args.out, f"preservation_gamma{g:g}.csv"),
                                        prs.values())
            full = prs[methods[0]].concurrences[::2]
            line += f"; preserved full-cycle concurrence deviation {np.abs(full - 1).max():.2e}"
            if len(prs) == 2:
                res = dynamics.aed(prs["decomposition"].concurrences, prs["exact"].concurrences)
                report["preservation"].append({"gamma": g, "n": res.n,
                                               "value_percent": res.value_percent,
                                               "per_point": list(res.per_point)})
        print(line)
    if len(methods) == 2:
        _write_json(os.path.join(args.out, "aed.json"), report)
    return EXIT_OK


# -- period -------------------------------------------------------------------

def cmd_period(args):
    if args.gamma is not None:
        gammas = np.array(args.gamma)
    else:
        gammas = np.linspace(*args.range, args.n)
    periods = np.array([find_period(g) for g in gammas])
    ref = np.array([period_fit_eval(REFERENCE_PERIOD_POLY, g) for g in gammas])
    rel = np.abs(4 * periods - ref) / ref
    rows = [(float(g), float(p), float(4 * p), float(q), float(r))
            for g, p, q, r in zip(gammas, periods, ref, rel)]
    print("gamma      period    4*period  reference  rel.diff")
    for r in rows:
        print(f"{r[0]:<9.4g} {r[1]:9.6f} {r[2]:9.5f} {r[3]:9.5f}  {r[4]:.2e}")
    if args.out:
        _ensure_parent(args.out)
        _write_rows(args.out, ["gamma", "period", "period_x4", "reference_fit", "rel_diff"], rows)
    if args.fit:
        poly, res = fitting.fit_period_cubic(gammas, 4 * periods)
        print("cubic fit to 4*period: " + ", ".join(f"{c:.5g}" for c in poly.coefficients)
              + f"  (rms {res.rms_residual:.3g})")
        _ensure_parent(args.fit)
        _write_json(args.fit, {"coefficients": list(poly.coefficients),
                               "rms": res.rms_residual, "n": len(gammas)})
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="dmfpo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="fidelity profile of a reference decomposition")
    v.add_argument("--decomp", choices=("A", "B", "full"), default="A")
    v.add_argument("--grid", type=_grid, default=(31, 31), help="NGAMMAxNTAU (default 31x31)")
    v.add_argument("--gamma", type=_span, default=(0.0, 1.0), help="lo:hi or a single value")
    v.add_argument("--tau", type=_span, default=(0.0, 15.0),
                   help="lo:hi or a single value, spin-1/2 time units")
    v.add_argument("--threshold", type=float, default=0.999)
    v.add_argument("--vmin", type=float, default=0.999, help="lower end of the colour scale")
    v.add_argument("--out", default="profile", help="output prefix for .csv and .svg")
    v.set_defaults(func=cmd_validate)

    o = sub.add_parser("optimize", help="genetic search for decomposition angles")
    o.add_argument("--mode", choices=("pointwise", "surface"), default="pointwise")
    o.add_argument("--skeleton", choices=("A", "B"), default="A")
    o.add_argument("--config", help="GA config JSON (unknown fields are rejected)")
    o.add_argument("--nodes", help="CSV with gamma,tau columns; overrides --grid")
    o.add_argument("--grid", type=_grid, default=(5, 5))
    o.add_argument("--gamma", type=_span, default=(0.0, 1.0))
    o.add_argument("--tau", type=_span, default=(0.0, 15.0))
    o.add_argument("--workers", type=int, default=1)
    o.add_argument("--out", default="angles.csv")
    o.set_defaults(func=cmd_optimize)

    f = sub.add_parser("fit", help="fit closed-form surfaces to a pointwise angle table")
    f.add_argument("--table", required=True, help="angle CSV written by 'optimize'")
    f.add_argument("--out", default="surfaces.csv")
    f.add_argument("--sequence", help="also write the fitted sequence text here")
    f.add_argument("--grid", type=_grid, help="check the fitted sequence on this grid")
    f.add_argument("--gamma", type=_span, default=(0.0, 1.0))
    f.add_argument("--tau", type=_span, default=(0.0, 15.0))
    f.add_argument("--threshold", type=float, default=0.9999)
    f.set_defaults(func=cmd_fit)

    d = sub.add_parser("dynamics", help="singlet concurrence dynamics and preservation",
                       description="Times are J*t with the Hamiltonian in Pauli form. "
                                   "With --j-hz, --t-max and --seg-tau are seconds and "
                                   "tau = 2*pi*J*t.")
    d.add_argument("--gamma", type=_floats, default=[0.33, 0.66, 0.99])
    d.add_argument("--n", type=int, default=16, help="samples per trajectory")
    d.add_argument("--method", choices=("exact", "decomposition", "both"), default="both")
    d.add_argument("--t-max", type=float,
                   help="end of the time axis (default: one period, an arbitrary choice)")
    d.add_argument("--j-hz", type=float, help="coupling in Hz; time flags become seconds")
    d.add_argument("--preserve", choices=("on", "off"), default="off")
    d.add_argument("--seg-tau", type=float, default=1.0, help="segment length between O pulses")
    d.add_argument("--cycles", type=int, default=4, help="number of O U O U cycles")
    d.add_argument("--out", default="dynamics", help="output directory")
    d.set_defaults(func=cmd_dynamics)

    pr = sub.add_parser("period", help="propagator period against the reference cubic")
    pr.add_argument("--gamma", type=_floats)
    pr.add_argument("--range", type=_span, default=(0.0, 1.0))
    pr.add_argument("--n", type=int, default=21)
    pr.add_argument("--out", help="CSV of periods")
    pr.add_argument("--fit", help="fit a cubic to 4*period and write it here as JSON")
    pr.set_defaults(func=cmd_period)
    return p


def _check(args):
    for name in ("n", "cycles", "workers"):
        v = getattr(args, name, None)
        if v is not None and v < 1 and not (name == "cycles" and v == 0):
            raise InputError(f"--{name} must be >= 1")
    if args.command == "dynamics" and any(g < 0 for g in args.gamma):
        raise InputError("gamma must be >= 0")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        _check(args)
        return args.func(args)
    except (InputError, DMFPOError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
