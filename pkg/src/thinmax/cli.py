"""Command-line interface: ``thinmax <subcommand> [options]``.

Every subcommand writes CSV (spectra) or JSON (reports) to ``--out``
(default: stdout).  Exit status is 0 on success, 1 on a module error and
2 on a usage error.  Nothing is randomised, so repeated runs are
byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments as exp
from . import oracles, spectrum
from . import surface as surf
from .eigen import EigenError, SolveOptions
from .maxwell import maxwell_csv, solve_maxwell
from .mesh import MeshError, Sphere, generate_builtin, load_off, refine, topology
from .spectrum import SCHEMA_VERSION, SpectrumError
from .tube import TubeParams, box_mesh, extrude, load_tetmesh, save_tetmesh, volume

SURFACES = ("icosphere", "flat-torus", "rectangle", "square-with-hole", "dumbbell-chain")
_DEFAULT_N = {"flat_torus": 16, "rectangle": 12, "square_with_hole": 3, "dumbbell_chain": 16}


# -- helpers ----------------------------------------------------------------

def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _add_geometry(p, default="icosphere"):
    g = p.add_argument_group("geometry")
    g.add_argument("--surface", default=default, choices=SURFACES, help="builtin surface")
    g.add_argument("--off", type=Path, help="read the surface from an OFF file instead")
    g.add_argument("--subdiv", type=int, default=3, help="icosphere subdivision level")
    g.add_argument("--radius", type=float, default=1.0, help="icosphere radius")
    g.add_argument("--n", type=int, help="resolution (default depends on the surface)")
    g.add_argument("--a", type=float, default=1.0, help="rectangle / torus side a")
    g.add_argument("--b", type=float, default=1.0, help="rectangle / torus side b")
    g.add_argument("--side", type=float, default=1.0, help="square side (square-with-hole)")
    g.add_argument("--delta", type=float, default=0.2, help="hole radius (square-with-hole)")
    g.add_argument("--bulbs", type=int, default=2, help="number of dumbbell bulbs")
    g.add_argument("--bulb-radius", type=float, default=1.0)
    g.add_argument("--neck-radius", type=float, default=0.1)
    g.add_argument("--neck-len", type=float, default=0.5)
    g.add_argument("--refine", type=int, default=0, help="midpoint refinement rounds")


def _geometry(args):
    if args.off is not None:
        mesh = load_off(args.off)
    else:
        kind = args.surface.replace("-", "_")
        n = args.n if args.n is not None else _DEFAULT_N.get(kind)
        params = {
            "icosphere": dict(subdiv=args.subdiv, radius=args.radius),
            "flat_torus": dict(n=n, a=args.a, b=args.b),
            "rectangle": dict(a=args.a, b=args.b, n=n),
            "square_with_hole": dict(side=args.side, hole_radius=args.delta, n=n),
            "dumbbell_chain": dict(num_bulbs=args.bulbs, bulb_radius=args.bulb_radius,
                                   neck_radius=args.neck_radius, neck_len=args.neck_len, n=n),
        }[kind]
        mesh = generate_builtin(kind, **params)
    if args.refine:
        sphere = Sphere(args.radius) if args.off is None and args.surface == "icosphere" else None
        mesh = refine(mesh, args.refine, sphere)
    return mesh


def _analytic_inputs(args, cutoff):
    """Closed-form surface spectra for the builtin geometry, or None when no oracle exists."""
    if args.off is not None or args.refine:
        return None
    if args.surface == "flat-torus":
        return oracles.flat_torus_spectrum(args.a, args.b, cutoff)
    if args.surface == "icosphere":
        return oracles.sphere_spectrum(args.radius, cutoff)
    if args.surface == "rectangle":
        return {"dirichlet": oracles.rect_spectrum(args.a, args.b, "dirichlet", cutoff),
                "neumann": oracles.rect_spectrum(args.a, args.b, "neumann", cutoff)}
    return None


def _fem_inputs(mesh, cutoff, consistent_mass=False):
    c = max(cutoff, 0.0)
    if mesh.is_closed:
        return surf.solve(mesh, "closed", count=mesh.n_vertices, cutoff=c, consistent_mass=consistent_mass)
    return {"dirichlet": surf.solve(mesh, "dirichlet", count=mesh.n_vertices, cutoff=c,
                                    consistent_mass=consistent_mass),
            "neumann": surf.solve(mesh, "neumann", count=mesh.n_vertices, cutoff=c,
                                  consistent_mass=consistent_mass)}


def _surface_inputs(args, mesh, cutoff):
    if args.source in ("auto", "analytic"):
        inputs = _analytic_inputs(args, cutoff)
        if inputs is not None:
            return inputs, "analytic"
        if args.source == "analytic":
            raise SpectrumError(f"no closed-form spectrum for surface {args.surface!r}; use --source fem")
    return _fem_inputs(mesh, cutoff, getattr(args, "consistent_mass", False)), "fem"


def _emit(args, text):
    if args.out is None or str(args.out) == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)


def _emit_json(args, obj):
    _emit(args, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _opts(args):
    mode = args.mode.replace("-", "_")
    return SolveOptions(mode=mode, sigma=args.sigma)


def _add_solver(p):
    p.add_argument("--mode", default="dense", choices=("dense", "shift-invert"))
    p.add_argument("--sigma", type=float, help="shift for shift-invert mode (above the zero cluster)")


# -- subcommands ------------------------------------------------------------

def cmd_surface_eigs(args):
    mesh = _geometry(args)
    bc = args.bc or ("closed" if mesh.is_closed else "dirichlet")
    count = args.count
    if count is None and args.cutoff is not None:
        count = mesh.n_vertices
    sp = surf.solve(mesh, bc, count=count, cutoff=args.cutoff, consistent_mass=args.consistent_mass)
    _emit(args, surf.spectrum_csv(sp))


def cmd_assemble(args):
    mesh = _geometry(args)
    inputs, source = _surface_inputs(args, mesh, args.cutoff)
    topo = topology(mesh)
    fn = {"coclosed": spectrum.assemble_coclosed, "full-hodge": spectrum.assemble_full_hodge,
          "absolute-2form": spectrum.assemble_absolute_two_forms}[args.kind]
    spec = fn(inputs, topo, args.h, args.cutoff)
    if args.format == "json":
        d = spec.to_dict()
        d["source"] = source
        _emit_json(args, d)
    else:
        _emit(args, spec.to_csv())


def cmd_oracle(args):
    c = args.cutoff
    if args.sphere is not None:
        spec = oracles.sphere_spectrum(args.sphere, c)
    elif args.rect is not None:
        spec = oracles.rect_spectrum(args.rect[0], args.rect[1], args.bc, c)
    elif args.flat_torus is not None:
        spec = oracles.flat_torus_spectrum(args.flat_torus[0], args.flat_torus[1], c)
    elif args.disk is not None:
        spec = oracles.disk_spectrum(args.disk, args.bc, c)
    elif args.cube is not None:
        spec = oracles.cube_maxwell_spectrum(*args.cube, c)
    else:  # flat cylinder over the selected planar domain
        if args.surface not in ("rectangle", "square-with-hole"):
            raise MeshError("--flat-cylinder needs --surface rectangle or square-with-hole")
        mesh = _geometry(args)
        inputs = _analytic_inputs(args, c) if args.surface == "rectangle" else None
        if inputs is None:
            inputs = _fem_inputs(mesh, c)
        D = topology(mesh).boundary_component_count
        spec = oracles.flat_cylinder_spectrum(inputs["dirichlet"], inputs["neumann"], D, args.h, c)
    _emit(args, oracles.oracle_csv(spec))


def cmd_tube_mesh(args):
    mesh = _geometry(args)
    tube = extrude(mesh, TubeParams(args.h, args.layers))
    if args.tetmesh is not None:
        save_tetmesh(tube, args.tetmesh)
    _emit_json(args, {
        "schema_version": SCHEMA_VERSION,
        "n_vertices": tube.n_vertices, "n_tets": tube.n_tets, "n_edges": tube.n_edges,
        "boundary_faces": tube.boundary_face_count, "interior_vertices": int(len(tube.interior_vertices)),
        "volume": volume(tube), "h": args.h, "layers": args.layers,
        "surface_area": mesh.area(),
    })


def cmd_maxwell3d(args):
    if args.box is not None:
        mesh = box_mesh(args.box, tuple(args.size))
    elif args.tetmesh is not None:
        mesh = load_tetmesh(args.tetmesh)
    else:
        if args.h is None:
            raise ValueError("give --box, --tetmesh, or a surface with --h")
        mesh = extrude(_geometry(args), TubeParams(args.h, args.layers))
    res = solve_maxwell(mesh, args.count, _opts(args))
    vol = volume(mesh)
    if args.rescale_unit_volume:
        res.eigenvalues = exp.unit_volume_rescale(res.eigenvalues, vol)
    _emit(args, maxwell_csv(res))
    if args.json is not None:
        Path(args.json).write_text(json.dumps({
            "schema_version": SCHEMA_VERSION,
            "kernel_dim": res.kernel_dim, "n_dofs": res.n_dofs,
            "interior_vertices": int(len(mesh.interior_vertices)),
            "zero_cutoff": res.zero_cutoff, "volume": vol,
            "rescaled_unit_volume": bool(args.rescale_unit_volume),
            "eigenvalues": [float(x) for x in res.eigenvalues],
            "max_residual": float(np.max(res.residuals)), "max_div_residual": float(np.max(res.div_residuals)),
        }, indent=2, sort_keys=True) + "\n")


def cmd_converge(args):
    mesh = _geometry(args)
    rep = exp.converge_tube(mesh, args.hs, layers=args.layers, count=args.count,
                            consistent_mass=args.consistent_mass, opts=_opts(args))
    if args.csv is not None:
        lines = ["h,index,lambda,reference,error"]
        for h, lam, err in zip(rep.hs, rep.eigenvalues, rep.errors):
            for i, (l, r, e) in enumerate(zip(lam, rep.reference, err), start=1):
                lines.append(f"{h:.12g},{i},{l:.12g},{r:.12g},{e:.12g}")
        Path(args.csv).write_text("\n".join(lines) + "\n")
    d = rep.to_dict()
    d["monotone"] = rep.monotone
    _emit_json(args, d)


def cmd_eigfun_dist(args):
    mesh = _geometry(args)
    rep = exp.eigenfunction_distance(mesh, args.hs, layers=args.layers, target=args.target,
                                     sign=-1.0 if args.flip_sign else 1.0, opts=_opts(args))
    _emit_json(args, rep.to_dict())


def cmd_dumbbell(args):
    rep = exp.dumbbell_small_eigs(num_bulbs=args.bulbs, eps=args.eps, neck_radii=args.neck_radii, h=args.h,
                                  bulb_radius=args.bulb_radius, neck_len=args.neck_len, n=args.n,
                                  extend=args.extend)
    _emit_json(args, rep.to_dict())


def cmd_instability(args):
    rep = exp.tem_instability(side=args.side, deltas=args.deltas, h=args.h, cutoff=args.cutoff,
                              n=args.n, square_n=args.square_n)
    _emit_json(args, rep.to_dict())


def cmd_duality_check(args):
    mesh = _geometry(args)
    if not mesh.is_closed:
        raise SpectrumError("duality-check is acceptance-tested for closed surfaces only")
    inputs, source = _surface_inputs(args, mesh, args.cutoff)
    topo = topology(mesh)
    co = spectrum.assemble_coclosed(inputs, topo, args.h, args.cutoff)
    full = spectrum.assemble_full_hodge(inputs, topo, args.h, args.cutoff)
    absolute = spectrum.assemble_absolute_two_forms(inputs, topo, args.h, args.cutoff)
    dual = spectrum.relative_absolute_duality_check(full, absolute)
    incl = spectrum.multiset_includes(co, full, rtol=0.0)
    prov = spectrum.provenance_includes(co, full)
    _emit_json(args, {
        "schema_version": SCHEMA_VERSION, "source": source, "h": args.h, "cutoff": args.cutoff,
        "coclosed_count": len(co), "full_count": len(full), "absolute_count": len(absolute),
        "duality": dual, "inclusion": incl, "provenance_inclusion": prov,
    })
    return 0 if (dual and incl and prov) else 1


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thinmax", description="Maxwell spectra of thin tubes around surfaces.")
    sub = p.add_subparsers(dest="command", metavar="subcommand")

    def add(name, fn, help_, geometry=None):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.set_defaults(func=fn)
        sp.add_argument("--out", type=Path, help="output file (default: stdout)")
        if geometry:
            _add_geometry(sp, geometry)
        return sp

    sp = add("surface-eigs", cmd_surface_eigs, "Laplace-Beltrami eigenvalues of a surface (CSV).", "icosphere")
    sp.add_argument("--bc", choices=surf.BOUNDARY_CONDITIONS)
    sp.add_argument("--count", type=int)
    sp.add_argument("--cutoff", type=float)
    sp.add_argument("--consistent-mass", action="store_true")

    sp = add("assemble", cmd_assemble, "Product-manifold spectrum of Sigma x (0, h) (CSV or JSON).", "flat-torus")
    sp.add_argument("--h", type=float, required=True)
    sp.add_argument("--cutoff", type=float, required=True)
    sp.add_argument("--source", default="auto", choices=("auto", "analytic", "fem"))
    sp.add_argument("--kind", default="coclosed", choices=("coclosed", "full-hodge", "absolute-2form"))
    sp.add_argument("--format", default="csv", choices=("csv", "json"))
    sp.add_argument("--consistent-mass", action="store_true")

    sp = add("oracle", cmd_oracle, "Closed-form reference spectra (CSV).", "rectangle")
    which = sp.add_mutually_exclusive_group(required=True)
    which.add_argument("--sphere", type=float, metavar="R")
    which.add_argument("--rect", type=float, nargs=2, metavar=("A", "B"))
    which.add_argument("--flat-torus", type=float, nargs=2, metavar=("A", "B"))
    which.add_argument("--disk", type=float, metavar="R")
    which.add_argument("--cube", type=float, nargs=3, metavar=("A", "B", "C"))
    which.add_argument("--flat-cylinder", action="store_true",
                       help="cylinder over --surface rectangle | square-with-hole, thickness --h")
    sp.add_argument("--bc", default="dirichlet", choices=("dirichlet", "neumann"))
    sp.add_argument("--h", type=float, default=1.0)
    sp.add_argument("--cutoff", type=float, required=True)

    sp = add("tube-mesh", cmd_tube_mesh, "Extrude a surface into a tetrahedral tube (JSON summary).", "icosphere")
    sp.add_argument("--h", type=float, required=True)
    sp.add_argument("--layers", type=int, default=1)
    sp.add_argument("--tetmesh", type=Path, help="write the mesh in tetmesh format")

    sp = add("maxwell3d", cmd_maxwell3d, "Edge-element Maxwell eigenvalues (CSV).", "icosphere")
    sp.add_argument("--box", type=int, metavar="N", help="structured box mesh with N cells per side")
    sp.add_argument("--size", type=float, nargs=3, default=(1.0, 1.0, 1.0), metavar=("A", "B", "C"))
    sp.add_argument("--tetmesh", type=Path, help="read a tetmesh file")
    sp.add_argument("--h", type=float, help="tube thickness (surface input)")
    sp.add_argument("--layers", type=int, default=1)
    sp.add_argument("--count", type=int, default=6)
    sp.add_argument("--rescale-unit-volume", action="store_true", help="multiply by volume^(2/3)")
    sp.add_argument("--json", type=Path, help="also write a JSON report (kernel_dim, residuals)")
    _add_solver(sp)

    sp = add("converge", cmd_converge, "Thin-limit convergence study (JSON).", "icosphere")
    sp.add_argument("--hs", type=_floats, default=[0.2, 0.1, 0.05], help="comma-separated, decreasing")
    sp.add_argument("--layers", type=int, default=1)
    sp.add_argument("--count", type=int, default=3)
    sp.add_argument("--consistent-mass", action="store_true")
    sp.add_argument("--csv", type=Path, help="per-run eigenvalue dump")
    _add_solver(sp)

    sp = add("eigfun-dist", cmd_eigfun_dist, "Eigenfunction distance to h^(-1/2) w dt (JSON).", "icosphere")
    sp.add_argument("--hs", type=_floats, default=[0.2, 0.1, 0.05])
    sp.add_argument("--layers", type=int, default=1)
    sp.add_argument("--target", type=int, default=1)
    sp.add_argument("--flip-sign", action="store_true")
    _add_solver(sp)

    sp = add("dumbbell", cmd_dumbbell, "Small eigenvalues of tubes over dumbbell chains (JSON).")
    sp.add_argument("--bulbs", type=int, default=2)
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--neck-radii", type=_floats, default=[0.3, 0.1, 0.05])
    sp.add_argument("--h", type=float, default=0.01)
    sp.add_argument("--bulb-radius", type=float, default=1.0)
    sp.add_argument("--neck-len", type=float, default=0.5)
    sp.add_argument("--n", type=int, default=16)
    sp.add_argument("--extend", action="store_true", help="halve the radius until eps is reached")

    sp = add("instability", cmd_instability, "TEM branch created by a small hole (JSON).")
    sp.add_argument("--side", type=float, default=1.0)
    sp.add_argument("--deltas", type=_floats, default=[0.2, 0.1, 0.05])
    sp.add_argument("--h", type=float, default=1.0)
    sp.add_argument("--cutoff", type=float, default=100.0)
    sp.add_argument("--n", type=int, default=6)
    sp.add_argument("--square-n", type=int, default=24)

    sp = add("duality-check", cmd_duality_check,
             "Co-closed vs full Hodge inclusion and relative/absolute duality (JSON).", "flat-torus")
    sp.add_argument("--h", type=float, required=True)
    sp.add_argument("--cutoff", type=float, required=True)
    sp.add_argument("--source", default="auto", choices=("auto", "analytic", "fem"))
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        rc = args.func(args)
    except (MeshError, SpectrumError, EigenError, oracles.OracleError, ValueError, OSError) as exc:
        print(f"thinmax {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0 if rc is None else int(rc)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
