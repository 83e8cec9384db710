"""Seeded random instances used by the verify suite and the tests."""

import math

import numpy as np

from .nbody_core import potential_U


def random_unit(rng, D):
    v = rng.standard_normal(D)
    return v / np.linalg.norm(v)


def random_cone_normals(rng, D, m, margin=0.05):
    """``m`` unit normals all making an acute angle with a common axis, so
    the cone they define has nonempty interior."""
    axis = random_unit(rng, D)
    normals = []
    while len(normals) < m:
        n = random_unit(rng, D)
        if n @ axis > margin:
            normals.append(n)
    return np.array(normals)


def random_orthogonal(rng, D):
    Q, R = np.linalg.qr(rng.standard_normal((D, D)))
    return Q * np.sign(np.diag(R))


def random_configuration(rng, sys, scale=1.0):
    return scale * rng.standard_normal((sys.n_bodies, sys.dim))


def random_hill_point(rng, sys, max_tries=10_000):
    """Configuration with U > 1 at a log-uniform random size."""
    for _ in range(max_tries):
        q = random_configuration(rng, sys, math.exp(rng.uniform(math.log(0.01), math.log(3.0))))
        if potential_U(q, sys) > 1.0:
            return q
    raise RuntimeError("could not sample a Hill-region point")


def random_energy_state(rng, sys, E=-1.0, u_min=1.2):
    """(q, v) with energy exactly E up to rounding and U(q) >= u_min."""
    while True:
        q = random_configuration(rng, sys)
        u = potential_U(q, sys)
        if u >= u_min and math.isfinite(u):
            break
    v = rng.standard_normal(q.shape)
    v -= np.average(v, axis=0, weights=sys.m)  # zero total momentum
    kin = u + E
    v *= math.sqrt(2.0 * kin / np.einsum("a,ak,ak->", sys.m, v, v))
    return q, v
