"""Command-line interface: network reports, lifting, simulation and diagrams.

Subcommands emit JSON for structured results and CSV for curves and
trajectories. Exit codes: 0 success, 1 numeric failure, 2 parse error,
3 invalid lift.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import bifurcation, dynamics, kinetics, lifting, network

EXIT_NUMERIC = 1
EXIT_PARSE = 2
EXIT_LIFT = 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read_network(path: str) -> network.CRN:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise CliError(f"cannot read {path}: {err}", EXIT_PARSE)
    try:
        net = network.parse_network(text)
    except network.NetworkError as err:
        raise CliError(f"{path}: {err}", EXIT_PARSE)
    if net.n_species == 0 or net.n_reactions == 0:
        raise CliError(f"{path}: network has no reactions", EXIT_PARSE)
    return net


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(Fraction(part.strip())) for part in text.split(",") if part.strip()]
    except (ValueError, ZeroDivisionError) as err:
        raise CliError(f"bad {what} {text!r}: {err}", EXIT_PARSE)


def _parse_fractions(text: str, what: str) -> list[Fraction]:
    try:
        return [Fraction(part.strip()) for part in text.split(",") if part.strip()]
    except (ValueError, ZeroDivisionError) as err:
        raise CliError(f"bad {what} {text!r}: {err}", EXIT_PARSE)


def _build_model(net: network.CRN, args) -> kinetics.KineticModel:
    kappa = _parse_floats(args.k, "--k") if args.k else None
    if kappa is not None and len(kappa) != net.n_reactions:
        raise CliError(
            f"--k gives {len(kappa)} rate constants for {net.n_reactions} reactions",
            EXIT_PARSE,
        )
    try:
        model = kinetics.model_from_network(net, kappa)
    except ValueError as err:
        raise CliError(str(err), EXIT_PARSE)
    if args.lift_json:
        model, _ = _apply_lift_scaling(model, args)
    return model


def _apply_lift_scaling(model, args):
    """Scale kappa by eps**alpha using a lift sidecar; returns (model, class levels)."""
    sidecar = json.loads(Path(args.lift_json).read_text(encoding="utf-8"))
    alpha = np.array(sidecar["alpha"], dtype=float)
    if args.eps is None:
        raise CliError("--lift-json requires --eps", EXIT_PARSE)
    kappa = lifting.scaled_rate_constants(model.kappa, alpha, args.eps)
    model = model.with_kappa(kappa)
    c = [Fraction(v) for v in sidecar["c"]]
    levels = _lifted_levels(model.net, c, args.eps)
    return model, levels


def _lifted_levels(net: network.CRN, c: list[Fraction], eps: float) -> list[float]:
    """Conservation-law values selecting the class y = 1/eps + c.x of a lifted net."""
    basis = network.conservation_laws(net)
    n = net.n_species - 1
    levels = []
    for w in basis:
        beta = w[n]
        residual = [w[j] + beta * c[j] for j in range(n)]
        if any(v != 0 for v in residual):
            raise CliError(
                "lifted network has conservation laws beyond the lift; pass --class",
                EXIT_PARSE,
            )
        levels.append(float(beta) / eps)
    return levels


def _class_levels(net: network.CRN, args, model=None) -> list[float]:
    n_laws = len(network.conservation_laws(net))
    if args.lift_json:
        sidecar = json.loads(Path(args.lift_json).read_text(encoding="utf-8"))
        return _lifted_levels(net, [Fraction(v) for v in sidecar["c"]], args.eps)
    if getattr(args, "class_levels", None):
        levels = _parse_floats(args.class_levels, "--class")
        if len(levels) != n_laws:
            raise CliError(
                f"--class gives {len(levels)} levels for {n_laws} conservation laws",
                EXIT_PARSE,
            )
        return levels
    if n_laws:
        raise CliError(f"network has {n_laws} conservation laws; pass --class", EXIT_PARSE)
    return []


def _reduced_system(net, model, args) -> dynamics.ReducedSystem:
    levels = _class_levels(net, args)
    try:
        return dynamics.reduce_to_class(model, levels)
    except ValueError as err:
        raise CliError(str(err), EXIT_NUMERIC)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    raise TypeError(f"cannot serialise {type(obj)}")


def _emit_json(payload: dict, args, filename: str):
    text = json.dumps(payload, indent=2, default=_json_default, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / filename).write_text(text, encoding="utf-8")


def _write_csv(path: Path, header: list[str], rows):
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                             for v in row])


def _equilibrium_payload(rec: dynamics.EquilibriumRecord) -> dict:
    return {
        "point": [float(v) for v in rec.point],
        "reduced": [float(v) for v in rec.reduced],
        "reduced_eigenvalues": [{"re": z.real, "im": z.imag} for z in rec.reduced_eigenvalues],
        "classification": rec.classification,
        "residual": rec.residual,
    }


def _orbit_payload(rec: dynamics.PeriodicOrbitRecord) -> dict:
    return {
        "anchor": [float(v) for v in rec.anchor],
        "period": rec.period,
        "floquet": [{"re": z.real, "im": z.imag} for z in rec.floquet],
        "stability": rec.stability,
        "residual": rec.residual,
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_info(args) -> int:
    net = _read_network(args.network)
    gamma = network.stoichiometric_matrix(net)
    payload = {
        "species": list(net.species),
        "reactions": [
            {
                "reactant": {net.species[i]: str(c) for i, c in r.reactant.items},
                "product": {net.species[i]: str(c) for i, c in r.product.items},
                "rate": r.rate,
            }
            for r in net.reactions
        ],
        "stoichiometric_matrix": [[str(v) for v in row] for row in gamma.rows],
        "rank": network.network_rank(net),
        "conservation_laws": [[str(v) for v in w] for w in network.conservation_laws(net)],
        "is_homogeneous": network.is_homogeneous(net),
    }
    _emit_json(payload, args, "info.json")
    return 0


def cmd_lift(args) -> int:
    net = _read_network(args.network)
    model = _build_model(net, args)
    c = _parse_fractions(args.c_vector, "--c-vector")
    if len(c) != net.n_species:
        raise CliError(f"--c-vector needs {net.n_species} entries", EXIT_LIFT)
    r = _parse_fractions(args.r, "--r") if args.r else None
    try:
        family = lifting.lift_species(model, c, args.name, r=r)
    except (lifting.LiftError, network.NetworkError) as err:
        raise CliError(str(err), EXIT_LIFT)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    lifted_path = out / f"{Path(args.network).stem}_lifted.crn"
    # carry the base rate constants so the written file is self-contained
    carried = network.CRN(
        family.lifted_net.species,
        tuple(rxn.with_metadata(rate=float(k), exponents=rxn.exponents)
              for rxn, k in zip(family.lifted_net.reactions, model.kappa)),
    )
    lifted_path.write_text(network.format_network(carried), encoding="utf-8")
    sidecar = {
        "base_network": str(args.network),
        "new_species": args.name,
        "c": [str(v) for v in family.spec.c],
        "alpha": [float(v) for v in family.spec.alpha],
        "r": [str(v) for v in family.spec.reactant_coeffs],
        "kappa": [float(v) for v in model.kappa],
        "kappa_scaling": "kappa_j(eps) = eps**alpha_j * kappa_j",
        "selected_class": "y = 1/eps + c.x",
    }
    _emit_json(sidecar, args, f"{Path(args.network).stem}_lift.json")
    sys.stdout.write(f"lifted network written to {lifted_path}\n")
    return 0


def cmd_homogenise(args) -> int:
    net = _read_network(args.network)
    padding = _parse_fractions(args.padding, "--padding") if args.padding else 0
    try:
        result = network.homogenise(net, args.species, padding)
    except network.NetworkError as err:
        raise CliError(str(err), EXIT_LIFT)
    text = network.format_network(result)
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{Path(args.network).stem}_homogenised.crn").write_text(text, encoding="utf-8")
    return 0


def cmd_equilibria(args) -> int:
    net = _read_network(args.network)
    model = _build_model(net, args)
    sys_red = _reduced_system(net, model, args)
    box = _parse_floats(args.box, "--box")
    if len(box) == 2:
        pairs = [(box[0], box[1])] * sys_red.dimension
    elif len(box) == 2 * sys_red.dimension:
        pairs = [(box[2 * i], box[2 * i + 1]) for i in range(sys_red.dimension)]
    else:
        raise CliError("--box needs lo,hi or one pair per reduced coordinate", EXIT_PARSE)
    records = dynamics.find_all_equilibria(
        sys_red, pairs, grid=args.grid, tol=args.tol_newton
    )
    payload = {
        "network": args.network,
        "kappa": [float(v) for v in model.kappa],
        "class_levels": list(sys_red.class_levels),
        "free_species": [sys_red.species[i] for i in sys_red.free_indices],
        "grid": args.grid,
        "seed": args.seed,
        "equilibria": [_equilibrium_payload(r) for r in records],
    }
    _emit_json(payload, args, "equilibria.json")
    return 0


def cmd_simulate(args) -> int:
    net = _read_network(args.network)
    model = _build_model(net, args)
    x0_full = np.array(_parse_floats(args.x0, "--x0"))
    if x0_full.size != net.n_species:
        raise CliError(f"--x0 needs {net.n_species} coordinates", EXIT_PARSE)
    basis = network.conservation_laws(net)
    if getattr(args, "class_levels", None) or args.lift_json:
        levels = _class_levels(net, args)
    else:
        basis_float = np.array([[float(v) for v in w] for w in basis]) if basis else \
            np.zeros((0, net.n_species))
        levels = list(basis_float @ x0_full)
    try:
        sys_red = dynamics.reduce_to_class(model, levels, interior_point=x0_full)
    except ValueError as err:
        raise CliError(str(err), EXIT_NUMERIC)
    traj = dynamics.integrate(sys_red, sys_red.project(x0_full), args.t_end, tol=args.tol_ode)
    if not traj.success:
        raise CliError(f"integration failed: {traj.message}", EXIT_NUMERIC)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "trajectory.csv"
    header = ["t"] + [f"x{i + 1}" for i in range(sys_red.dimension)]
    _write_csv(csv_path, header, ([t] + list(state) for t, state in zip(traj.t, traj.states)))
    meta = {
        "network": args.network,
        "kappa": [float(v) for v in model.kappa],
        "class_levels": list(sys_red.class_levels),
        "free_species": [sys_red.species[i] for i in sys_red.free_indices],
        "t_end": args.t_end,
        "tol_ode": args.tol_ode,
        "samples": int(traj.t.size),
    }
    _emit_json(meta, args, "trajectory.json")
    sys.stdout.write(f"trajectory written to {csv_path}\n")
    return 0


def cmd_orbit(args) -> int:
    net = _read_network(args.network)
    model = _build_model(net, args)
    sys_red = _reduced_system(net, model, args)
    x0_full = np.array(_parse_floats(args.x0, "--x0"))
    if x0_full.size != net.n_species:
        raise CliError(f"--x0 needs {net.n_species} coordinates", EXIT_PARSE)
    seed = sys_red.project(x0_full)
    try:
        if args.t_transient > 0:
            traj = dynamics.integrate(sys_red, seed, args.t_transient, tol=args.tol_ode)
            if not traj.success:
                raise CliError(f"transient integration failed: {traj.message}", EXIT_NUMERIC)
            seed = traj.states[-1]
        orbit = dynamics.find_periodic_orbit(sys_red, seed, t_guess=args.t_guess)
    except (dynamics.ConvergenceError, ValueError) as err:
        raise CliError(f"orbit search failed: {err}", EXIT_NUMERIC)
    payload = {
        "network": args.network,
        "kappa": [float(v) for v in model.kappa],
        "class_levels": list(sys_red.class_levels),
        "orbit": _orbit_payload(orbit),
    }
    _emit_json(payload, args, "orbit.json")
    return 0


def _scan_command(args, kind: str) -> int:
    net = _read_network(args.network)
    kappa = _parse_floats(args.k, "--k")
    if len(kappa) != net.n_reactions:
        raise CliError(f"--k gives {len(kappa)} values for {net.n_reactions} reactions",
                       EXIT_PARSE)
    index = args.param_index - 1
    if not 0 <= index < net.n_reactions:
        raise CliError(f"--param-index out of range 1..{net.n_reactions}", EXIT_PARSE)
    lo, hi = _parse_floats(args.range, "--range")
    base_levels = _class_levels(net, args) if (getattr(args, "class_levels", None)) else None
    n_laws = len(network.conservation_laws(net))
    if base_levels is None and n_laws:
        raise CliError(f"network has {n_laws} conservation laws; pass --class", EXIT_PARSE)

    def make_system(p):
        k = list(kappa)
        k[index] = p
        model = kinetics.mass_action_model(net, k)
        return dynamics.reduce_to_class(model, base_levels or [], check_feasible=False)

    seed = np.array(_parse_floats(args.seed_state, "--seed-state"))
    values = np.linspace(lo, hi, args.samples)
    scan = bifurcation.fold_scan if kind == "fold" else bifurcation.hopf_scan
    try:
        points = scan(make_system, values, seed, param_name=f"k{args.param_index}",
                      newton_tol=args.tol_newton)
    except (bifurcation.BranchLostError, dynamics.ConvergenceError, ValueError) as err:
        raise CliError(f"{kind} scan failed: {err}", EXIT_NUMERIC)
    payload = {
        "network": args.network,
        "kind": kind,
        "parameter": f"k{args.param_index}",
        "range": [lo, hi],
        "samples": args.samples,
        "points": [
            {
                "parameters": p.parameters,
                "state": [float(v) for v in p.state],
                "diagnostics": {k: float(v) for k, v in p.diagnostics.items()},
            }
            for p in points
        ],
    }
    _emit_json(payload, args, f"{kind}_scan.json")
    return 0


def cmd_hopf_scan(args) -> int:
    return _scan_command(args, "hopf")


def cmd_fold_scan(args) -> int:
    return _scan_command(args, "fold")


def cmd_brusselator_diagram(args) -> int:
    diagram = bifurcation.brusselator_bifurcation_sets(
        args.k1, args.k2, args.c,
        k3_range=tuple(_parse_floats(args.k3_range, "--k3-range")) if args.k3_range else None,
        samples=args.samples,
    )
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)

    rows = [(k3, k4, "T") for k3, k4 in diagram.fold_curve]
    rows += [(k3, k4, "H") for k3, k4 in diagram.hopf_curve]
    _write_csv(out / "fig2.csv", ["k3", "k4", "curve_id"], rows)

    a_grid = np.linspace(args.a_max / args.grid, args.a_max, args.grid)
    b_grid = np.linspace(args.b_max / args.grid, args.b_max, args.grid)
    sign_rows = bifurcation.focal_sign_grid(a_grid, b_grid)
    _write_csv(out / "fig1.csv", ["a", "b", "sign_P", "on_H_boundary"],
               [(a, b, s, flag) for a, b, s, flag in sign_rows])

    payload = {
        "k1": args.k1,
        "k2": args.k2,
        "c": args.c,
        "BT": diagram.bt_point,
        "GH": diagram.gh_points,
        "notes": list(diagram.notes),
        "files": ["fig1.csv", "fig2.csv"],
    }
    _emit_json(payload, args, "brusselator_diagram.json")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(parser, *, model=False, classy=False, box=False):
    parser.add_argument("--out", default=None, help="directory for output files")
    parser.add_argument("--tol-newton", type=float, default=1e-12)
    parser.add_argument("--tol-ode", type=float, default=1e-10)
    parser.add_argument("--seed", type=int, default=0, help="RNG seed for randomised grids")
    if model:
        parser.add_argument("--k", default=None, help="rate constants, e.g. '6,11,6,1'")
        parser.add_argument("--lift-json", default=None,
                            help="lift sidecar; scales kappa by eps**alpha")
        parser.add_argument("--eps", type=float, default=None,
                            help="perturbation parameter for --lift-json")
    if classy:
        parser.add_argument("--class", dest="class_levels", default=None,
                            help="conservation-law values, e.g. '100'")
    if box:
        parser.add_argument("--box", default="0.05,10", help="search box 'lo,hi[,lo,hi...]'")
        parser.add_argument("--grid", type=int, default=20, help="seeds per dimension")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crn",
        description="reaction network analysis: stoichiometry, lifting, dynamics, bifurcations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", help="stoichiometric report of a network file")
    p.add_argument("network")
    _add_common(p)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("lift", help="add a linearly dependent species")
    p.add_argument("network")
    p.add_argument("--c-vector", required=True, help="dependency coefficients, e.g. '-1,-1'")
    p.add_argument("--name", required=True, help="name of the new species")
    p.add_argument("--r", default=None, help="reactant coefficients of the new species")
    _add_common(p, model=True)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("homogenise", help="balance molecularities with a new species")
    p.add_argument("network")
    p.add_argument("--species", required=True, help="name of the new species")
    p.add_argument("--padding", default=None, help="per-reaction extra coefficient")
    _add_common(p)
    p.set_defaults(func=cmd_homogenise)

    p = sub.add_parser("equilibria", help="locate equilibria on a stoichiometric class")
    p.add_argument("network")
    _add_common(p, model=True, classy=True, box=True)
    p.set_defaults(func=cmd_equilibria)

    p = sub.add_parser("simulate", help="integrate the reduced dynamics")
    p.add_argument("network")
    p.add_argument("--x0", required=True, help="full initial state, e.g. '2,2'")
    p.add_argument("--t-end", type=float, default=100.0)
    _add_common(p, model=True, classy=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("orbit", help="locate a periodic orbit by shooting")
    p.add_argument("network")
    p.add_argument("--x0", required=True, help="full starting state")
    p.add_argument("--t-transient", type=float, default=50.0)
    p.add_argument("--t-guess", type=float, default=10.0, help="rough period guess")
    _add_common(p, model=True, classy=True)
    p.set_defaults(func=cmd_orbit)

    for name, func in (("hopf-scan", cmd_hopf_scan), ("fold-scan", cmd_fold_scan)):
        p = sub.add_parser(name, help=f"{name.replace('-', ' ')} along one rate constant")
        p.add_argument("network")
        p.add_argument("--k", required=True, help="base rate constants")
        p.add_argument("--param-index", type=int, required=True,
                       help="1-based index of the varied rate constant")
        p.add_argument("--range", required=True, help="'lo,hi' for the varied constant")
        p.add_argument("--samples", type=int, default=21)
        p.add_argument("--seed-state", required=True,
                       help="reduced coordinates of the tracked equilibrium at lo")
        _add_common(p, classy=True)
        p.set_defaults(func=func)

    p = sub.add_parser("brusselator-diagram",
                       help="fold/Hopf curves and BT/GH points of the homogenised Brusselator")
    p.add_argument("--k1", type=float, required=True)
    p.add_argument("--k2", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--k3-range", default=None, help="'lo,hi' for the fold/Hopf curves")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--grid", type=int, default=100, help="focal-sign grid resolution")
    p.add_argument("--a-max", type=float, default=4.0)
    p.add_argument("--b-max", type=float, default=25.0)
    _add_common(p)
    p.set_defaults(func=cmd_brusselator_diagram)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.code
    except (dynamics.ConvergenceError, bifurcation.BranchLostError, kinetics.DomainError) as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
