"""Command-line entry point.

Exit codes: 0 success, 2 invalid input, 3 solver failure (or a failed
``verify`` suite).
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io, plotting, verify
from .arrangement_escape import (
    HyperplaneArrangement,
    SubspaceArrangement,
    enumerate_chambers,
    lift_to_hyperplanes,
    solve_arrangement,
)
from .cone_geometry import PolyhedralCone, equidistant_cross_section, escape_rate
from .errors import SolverError
from .jm_metric import diameter_certificate, escape_to_boundary, path_profile, two_body_radial_distance
from .nbody_core import MassSystem, as_configuration
from .quadrature import RTOL

log = logging.getLogger("jmescape")

COMMANDS = ("cone-rate", "arrangement-rate", "nbody-certificate", "escape-demo", "appendix-b", "verify")


def _positive(text):
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return x


def build_parser():
    p = argparse.ArgumentParser(prog="jmescape", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", type=Path)
    p.add_argument("--output", type=Path, help="report path (stdout if omitted)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol-proj", type=_positive, default=1e-10)
    p.add_argument("--tol-quad", type=_positive, default=RTOL, help="relative tolerance of JM quadratures")
    p.add_argument("--lift-rule", choices=("first-axis", "custom"), default="first-axis")
    p.add_argument("--max-hyperplanes", type=int, default=20)
    p.add_argument("--no-figure", action="store_true", help="skip the PNG written next to the report")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _require_input(args):
    if args.input is None:
        raise io.SchemaError(f"{args.command} needs --input")
    return args.input


def _system(data):
    return MassSystem(tuple(data["masses"]), data.get("dim", 3), data.get("G", 1.0))


def _lift_axes(args, data):
    axes = data.get("lift_axes")
    if args.lift_rule == "custom" and axes is None:
        raise io.SchemaError("--lift-rule custom needs a 'lift_axes' field in the input")
    if args.lift_rule == "first-axis" and axes is not None:
        raise io.SchemaError("'lift_axes' given but --lift-rule is first-axis")
    return axes


def cmd_cone_rate(args):
    data = io.load_json(_require_input(args), io.CONE_SCHEMA)
    cert = escape_rate(PolyhedralCone(data["normals"]), tol=args.tol_proj)
    return cert.to_dict()


def cmd_arrangement_rate(args):
    data = io.load_json(_require_input(args), io.ARRANGEMENT_SCHEMA)
    if "normals" in data:
        arr = HyperplaneArrangement(data["normals"])
    else:
        arr = lift_to_hyperplanes(SubspaceArrangement(data["complement_bases"]))
    chambers = enumerate_chambers(arr, k_max=args.max_hyperplanes)
    table = solve_arrangement(arr, tol=args.tol_proj, chambers=chambers)
    return {"normals": arr.normals.tolist(), "chambers": table.rows(), "global_rate": table.rate}


def cmd_nbody_certificate(args):
    data = io.load_json(_require_input(args), io.SYSTEM_SCHEMA)
    sys_ = _system(data)
    cert = diameter_certificate(sys_, lift_rule=args.lift_rule, axes=_lift_axes(args, data),
                                tol=args.tol_proj, k_max=args.max_hyperplanes)
    out = cert.to_dict()
    if sys_.n_bodies == 2:
        oracle = two_body_radial_distance(sys_)
        out["two_body_oracle"] = oracle
        out["slack_factor"] = cert.bound_diameter / (2.0 * oracle)
    return out


def cmd_escape_demo(args):
    data = io.load_json(_require_input(args), io.ESCAPE_DEMO_SCHEMA)
    sys_ = _system(data["system"])
    q = as_configuration(io.configuration_from_dict(data["configuration"], sys_), sys_)
    cert = diameter_certificate(sys_, lift_rule=args.lift_rule, axes=_lift_axes(args, data["system"]),
                                tol=args.tol_proj, k_max=args.max_hyperplanes)
    path, jm_len = escape_to_boundary(q, sys_, cert, rtol=args.tol_quad)
    rows = path_profile(path, sys_, rtol=args.tol_quad)
    report = {
        "certificate": cert.to_dict(),
        "start": q.tolist(),
        "exit": path.vertices[-1].tolist(),
        "jm_length": jm_len,
        "within_bound": bool(jm_len <= cert.bound_single),
    }
    if args.output is not None:
        csv_path = args.output.with_suffix(".csv")
        coord_names = [f"q{a}_{k}" for a in range(sys_.n_bodies) for k in range(sys_.dim)]
        io.write_csv(csv_path, ["t", *coord_names, "U", "dist_to_Delta", "jm_cumlen"], rows)
        report["profile_csv"] = csv_path.name
        if not args.no_figure:
            arr = np.array(rows)
            fig = plotting.plot_escape_profile(arr[:, 0], arr[:, -3], arr[:, -1], cert.k,
                                               cert.bound_single, args.output.with_suffix(".png"))
            report["figure"] = Path(fig).name
    return report


def cmd_cross_sections(args):
    data = {} if args.input is None else io.load_json(args.input, io.CROSS_SECTION_SCHEMA)
    a, b = data.get("a", 1.0), data.get("b", 0.5)
    z = np.linspace(data.get("z_min", 2.0), data.get("z_max", 100.0), data.get("n", 99))
    x_half, y_half, aspect = equidistant_cross_section(a, b, z)
    rows = list(zip(z, x_half, y_half, aspect))
    header = ["z", "x_halfwidth", "y_halfwidth", "aspect_ratio"]
    if args.output is None:
        print(",".join(header))
        for row in rows:
            print(",".join(repr(float(x)) for x in row))
        return None
    io.write_csv(args.output, header, rows)
    if not args.no_figure:
        plotting.plot_cross_sections(z, x_half, y_half, aspect, b, args.output.with_suffix(".png"))
    return None


def cmd_verify(args):
    return verify.run_all(args.seed)


HANDLERS = {
    "cone-rate": cmd_cone_rate,
    "arrangement-rate": cmd_arrangement_rate,
    "nbody-certificate": cmd_nbody_certificate,
    "escape-demo": cmd_escape_demo,
    "appendix-b": cmd_cross_sections,
    "verify": cmd_verify,
}


def run(args):
    """Execute one parsed command; returns the process exit status."""
    try:
        report = HANDLERS[args.command](args)
    except SolverError as exc:
        log.error("solver failure: %s", exc)
        return 3
    except (ValueError, KeyError, TypeError) as exc:
        log.error("invalid input: %s", exc)
        return 2
    if report is not None:
        io.write_json(report, args.output)
    if args.command == "verify" and not report["all_passed"]:
        return 3
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
