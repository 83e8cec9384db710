"""Seeded property suites behind ``jmescape verify``.

Every suite returns a plain dict; the whole report depends only on the
seed, so repeated runs serialise to identical bytes.
"""

import math

import numpy as np

from . import sampling
from .arrangement_escape import HyperplaneArrangement, escaper_from_point, solve_arrangement
from .cone_geometry import (
    PolyhedralCone,
    rectangle_cone,
    equidistant_cross_section,
    escape_rate,
    project_origin_enumerate,
    project_origin_K1,
)
from .jm_metric import diameter_certificate, escape_to_boundary, newton_integrate, two_body_radial_distance
from .nbody_core import (
    MassSystem,
    dist_to_pair_collision,
    mass_norm,
    pair_collision_projection,
    potential_U,
    potential_U_batch,
    sandwich_bounds,
)


def _suite(name, errors, tol, **extra):
    worst = max(errors) if errors else 0.0
    return {"name": name, "n": len(errors), "max_error": worst, "tol": tol,
            "passed": bool(worst <= tol), **extra}


def closed_form_rates():
    errs = [abs(escape_rate(PolyhedralCone([[1.0, 0.0, 0.0]])).rate - 1.0)]
    for n in range(2, 7):
        errs.append(abs(escape_rate(PolyhedralCone(np.eye(n))).rate - 1 / math.sqrt(n)))
    for th in (math.pi / 6, math.pi / 4, math.pi / 3):
        K = PolyhedralCone([[0.0, 1.0], [math.sin(th), -math.cos(th)]])
        errs.append(abs(escape_rate(K).rate - math.sin(th / 2)))
    return _suite("closed_form_rates", errs, 1e-9)


def projection_oracle(rng, n=100):
    errs = []
    for _ in range(n):
        D, m = int(rng.integers(2, 5)), int(rng.integers(1, 7))
        K = PolyhedralCone(sampling.random_cone_normals(rng, D, m))
        a = np.linalg.norm(project_origin_K1(K))
        b = np.linalg.norm(project_origin_enumerate(K))
        errs.append(abs(a - b))
    return _suite("projection_oracle", errs, 1e-8)


def rectangle_cone_suite(rng, n=2000):
    a, b = 1.0, 0.5
    K = rectangle_cone(a, b)
    sa, sb = math.sqrt(a * a + 1), math.sqrt(b * b + 1)
    # points of K_1 written in the rectangle parametrisation
    z = math.sqrt(2) + rng.exponential(5.0, n)
    x = rng.uniform(-1, 1, n) * (z - sa) / a
    y = rng.uniform(-1, 1, n) * np.maximum(z - sb, 0) / b
    pts = np.column_stack([x, y, z])
    inside = np.all(K.levels(pts) >= 1.0 - 1e-12, axis=1)
    errs = [max(0.0, math.sqrt(2) - zz) for zz in z[inside]]
    witness = np.array([0.0, (math.sqrt(2) - math.sqrt(1.25)) / 0.5, math.sqrt(2)])
    witness_ok = K.in_equidistant(witness, 1.0, tol=1e-12) and not K.in_equidistant(0.5 * witness, 1.0)
    zs = np.linspace(2.0, 100.0, 99)
    _, _, aspect = equidistant_cross_section(a, b, zs)
    gap = np.abs(aspect - 1 / b)
    monotone = bool(np.all(np.diff(gap) < 0))
    out = _suite("rectangle_cone", errs, 1e-12, witness=bool(witness_ok), monotone=monotone)
    out["passed"] = out["passed"] and witness_ok and monotone and bool(inside.all())
    return out


def distance_formula(rng, n=300):
    errs, violations = [], 0
    for _ in range(n):
        sys = MassSystem(tuple(rng.uniform(0.1, 5.0, int(rng.integers(2, 5)))), int(rng.integers(1, 4)))
        q = sampling.random_configuration(rng, sys)
        for a, b in sys.pairs:
            d = dist_to_pair_collision(q, a, b, sys)
            ref = mass_norm(q - pair_collision_projection(q, a, b, sys), sys)
            errs.append(abs(d - ref) / ref)
        lo, hi = sandwich_bounds(q, sys)
        u = potential_U(q, sys)
        # N = 2 makes both bounds equal to U; allow round-off there
        violations += not (lo * (1 - 1e-13) <= u <= hi * (1 + 1e-13))
    out = _suite("distance_formula", errs, 1e-12, sandwich_violations=violations)
    out["passed"] = out["passed"] and violations == 0
    return out


def chamber_partition(rng, n=500):
    arr = HyperplaneArrangement([sampling.random_unit(rng, 3) for _ in range(4)])
    table = solve_arrangement(arr)
    signs = {ch.signs for ch in table.chambers}
    pts = rng.standard_normal((n, 3))
    missing = sum(arr.sign_vector(p) not in signs for p in pts)
    # the escaper from each point never meets a hyperplane again
    errs = []
    for p in pts[:50]:
        esc = escaper_from_point(p, arr, 1.0, table=table)
        s = np.linspace(0.0, 2.0 * max(esc.s_exit, 1.0), 41)
        d = arr.dist(esc.point(s))
        errs.append(float(np.max(esc.guaranteed_dist(s) - d)))
    out = _suite("chamber_partition", [max(e, 0.0) for e in errs], 1e-9,
                 chambers=len(table.chambers), missing=missing)
    out["passed"] = out["passed"] and missing == 0
    return out


def escape_certificate(rng, n=40):
    sys = MassSystem((1.0, 1.0, 1.0), 2)
    cert = diameter_certificate(sys)
    errs, env = [], []
    for _ in range(n):
        q = sampling.random_hill_point(rng, sys)
        path, L = escape_to_boundary(q, sys, cert)
        errs.append(max(0.0, L - cert.bound_single))
        p0, p1 = path.vertices
        s = np.linspace(0.0, 1.0, 65)[1:] * mass_norm(p1 - p0, sys)
        direction = (p1 - p0) / mass_norm(p1 - p0, sys)
        U = potential_U_batch(p0 + s[:, None, None] * direction, sys)
        env.append(float(np.max(U * cert.k * s)))
    out = _suite("escape_certificate", errs, 0.0, bound_single=cert.bound_single,
                 max_envelope_product=max(env))
    out["passed"] = out["passed"] and max(env) <= 1.0 + 1e-6
    return out


def jm_consistency(rng, n=4):
    errs, drift = [], []
    for i in range(n):
        sys = MassSystem((1.0,) * (2 + i % 2), 2)
        q, v = sampling.random_energy_state(rng, sys)
        tr = newton_integrate(q, v, sys, 1.0)
        a, b = tr.jm_length(), tr.twice_kinetic_integral()
        errs.append(abs(a - b) / b)
        drift.append(tr.energy_drift)
    out = _suite("jm_consistency", errs, 1e-6, max_energy_drift=max(drift))
    out["passed"] = out["passed"] and max(drift) <= 1e-7
    return out


def two_body_sharpness():
    sys = MassSystem((1.0, 1.0), 3)
    cert = diameter_certificate(sys)
    oracle = two_body_radial_distance(sys)
    slack = cert.bound_diameter / (2.0 * oracle)
    err = max(0.0, oracle - cert.bound_single) / oracle
    return _suite("two_body_sharpness", [err], 1e-12, oracle=oracle,
                  bound_single=cert.bound_single, slack_factor=slack)


def run_all(seed=0):
    rng = np.random.default_rng(seed)
    suites = [
        closed_form_rates(),
        projection_oracle(rng),
        rectangle_cone_suite(rng),
        distance_formula(rng),
        chamber_partition(rng),
        escape_certificate(rng),
        jm_consistency(rng),
        two_body_sharpness(),
    ]
    return {"seed": seed, "suites": suites, "all_passed": all(s["passed"] for s in suites)}
