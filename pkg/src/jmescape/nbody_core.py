"""Configuration space of the N-body problem with the mass inner product.

Configurations are numpy arrays of shape ``(N, d)``: row ``a`` holds the
position of body ``a``. All distances, normals and gradients are taken in the
mass metric ``<u, v> = sum_a m_a u_a . v_a``.

The map ``x = sqrt(m_a) * q_a`` (flattened) is an isometry from the mass
metric onto the standard Euclidean ``R^(N d)``; the cone and arrangement
modules work in those coordinates.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
import math

import numpy as np

from .errors import CollisionError, DomainError, ShapeError

HILL_TOL = 1e-9

INTERIOR = "interior"
BOUNDARY = "boundary"
EXTERIOR = "exterior"


@dataclass(frozen=True)
class MassSystem:
    """N point masses in R^d with gravitational constant G."""

    masses: tuple
    dim: int = 3
    G: float = 1.0
    _m: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        masses = tuple(float(m) for m in self.masses)
        if len(masses) < 2:
            raise DomainError("need at least two bodies")
        if not all(m > 0 and math.isfinite(m) for m in masses):
            raise DomainError(f"masses must be positive and finite, got {masses}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"spatial dimension must be a positive integer, got {self.dim}")
        if not self.G > 0:
            raise DomainError(f"G must be positive, got {self.G}")
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "G", float(self.G))
        m = np.array(masses)
        m.setflags(write=False)
        object.__setattr__(self, "_m", m)

    @property
    def n_bodies(self):
        return len(self.masses)

    @property
    def m(self):
        """Masses as a read-only array."""
        return self._m

    @property
    def ambient_dim(self):
        return self.n_bodies * self.dim

    @cached_property
    def pairs(self):
        return tuple(combinations(range(self.n_bodies), 2))

    def k(self, a, b):
        """Reduced-mass factor sqrt(m_a m_b / (m_a + m_b))."""
        ma, mb = self.masses[a], self.masses[b]
        return math.sqrt(ma * mb / (ma + mb))

    def lam(self, a, b):
        """Pair constant G m_a m_b k_ab."""
        return self.G * self.masses[a] * self.masses[b] * self.k(a, b)

    @cached_property
    def lambda_min(self):
        return min(self.lam(a, b) for a, b in self.pairs)

    @cached_property
    def lambda_sum(self):
        return math.fsum(self.lam(a, b) for a, b in self.pairs)

    @property
    def c1(self):
        """Lower Lipschitz constant: 1/U >= c1 * dist(q, collisions)."""
        return 1.0 / self.lambda_sum

    @property
    def C(self):
        """Upper Lipschitz constant: 1/U <= C * dist(q, collisions)."""
        return 1.0 / self.lambda_min

    def to_dict(self):
        return {"masses": list(self.masses), "dim": self.dim, "G": self.G}

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(data["masses"]), data.get("dim", 3), data.get("G", 1.0))


def as_configuration(q, sys):
    """Validate ``q`` against ``sys`` and return it as a float array (N, d)."""
    q = np.asarray(q, dtype=float)
    if q.ndim == 1 and q.size == sys.ambient_dim:
        q = q.reshape(sys.n_bodies, sys.dim)
    if q.shape != (sys.n_bodies, sys.dim):
        raise ShapeError(f"expected configuration of shape {(sys.n_bodies, sys.dim)}, got {q.shape}")
    return q


def to_mass_coords(q, sys):
    """Flatten ``q`` into coordinates where the mass metric is Euclidean."""
    q = as_configuration(q, sys)
    return (np.sqrt(sys.m)[:, None] * q).ravel()


def from_mass_coords(x, sys):
    """Inverse of :func:`to_mass_coords`; leading batch axes are kept."""
    x = np.asarray(x, dtype=float)
    x = x.reshape(x.shape[:-1] + (sys.n_bodies, sys.dim))
    return x / np.sqrt(sys.m)[:, None]


def mass_inner(u, v, sys):
    u = as_configuration(u, sys)
    v = as_configuration(v, sys)
    return float(np.einsum("a,ak,ak->", sys.m, u, v))


def mass_norm(u, sys):
    return math.sqrt(mass_inner(u, u, sys))


def pair_separations(q):
    """Matrix of pairwise distances r_ab."""
    diff = q[:, None, :] - q[None, :, :]
    return np.sqrt(np.einsum("abk,abk->ab", diff, diff))


def potential_U(q, sys):
    """Newtonian potential U = G sum m_a m_b / r_ab; ``inf`` at a collision."""
    q = as_configuration(q, sys)
    r = pair_separations(q)
    iu = np.triu_indices(sys.n_bodies, 1)
    r = r[iu]
    if np.any(r == 0.0):
        return math.inf
    mm = np.outer(sys.m, sys.m)[iu]
    return float(sys.G * np.sum(mm / r))


def potential_U_batch(qs, sys):
    """U for a stack of configurations of shape (n, N, d); ``inf`` at collisions."""
    qs = np.asarray(qs, dtype=float)
    i, j = np.triu_indices(sys.n_bodies, 1)
    r = np.linalg.norm(qs[:, i, :] - qs[:, j, :], axis=-1)
    mm = sys.m[i] * sys.m[j]
    with np.errstate(divide="ignore"):
        return sys.G * np.sum(mm / r, axis=-1)


def dist_to_pair_collision(q, a, b, sys):
    """Mass-metric distance from ``q`` to the subspace {q_a = q_b}."""
    q = as_configuration(q, sys)
    n = sys.n_bodies
    if a == b:
        raise DomainError("a pair collision needs two distinct bodies")
    if not (0 <= a < n and 0 <= b < n):
        raise DomainError(f"body index out of range for N={n}: ({a}, {b})")
    return sys.k(a, b) * float(np.linalg.norm(q[a] - q[b]))


def pair_collision_projection(q, a, b, sys):
    """Nearest point of {q_a = q_b}: both bodies moved to their centre of mass."""
    q = as_configuration(q, sys).copy()
    ma, mb = sys.masses[a], sys.masses[b]
    cm = (ma * q[a] + mb * q[b]) / (ma + mb)
    q[a] = cm
    q[b] = cm
    return q


def dist_to_collision_locus(q, sys):
    q = as_configuration(q, sys)
    return min(dist_to_pair_collision(q, a, b, sys) for a, b in sys.pairs)


def sandwich_bounds(q, sys):
    """Return (lambda_min/dist, lambda_sum/dist); U(q) lies between them."""
    d = dist_to_collision_locus(q, sys)
    if d == 0.0:
        raise CollisionError("potential bounds are undefined on the collision locus")
    return sys.lambda_min / d, sys.lambda_sum / d


def hill_membership(q, sys, tol=HILL_TOL):
    """Classify ``q`` against the E = -1 Hill region {U >= 1}."""
    u = potential_U(q, sys)
    if abs(u - 1.0) <= tol:
        return BOUNDARY
    return INTERIOR if u > 1.0 else EXTERIOR


def newton_rhs(q, sys):
    """Mass-metric gradient of U, i.e. the accelerations of Newton's equations."""
    q = as_configuration(q, sys)
    diff = q[None, :, :] - q[:, None, :]  # diff[a, b] = q_b - q_a
    r = pair_separations(q)
    off = ~np.eye(sys.n_bodies, dtype=bool)
    if np.any(r[off] == 0.0):
        raise CollisionError("force is singular at a collision")
    inv_r3 = np.zeros_like(r)
    inv_r3[off] = r[off] ** -3
    return sys.G * np.einsum("b,ab,abk->ak", sys.m, inv_r3, diff)


def scale_configuration(q, lam):
    if not lam > 0:
        raise DomainError(f"scale factor must be positive, got {lam}")
    return lam * np.asarray(q, dtype=float)


def energy(q, v, sys):
    """Total energy K - U with K = <v, v>/2."""
    return 0.5 * mass_inner(v, v, sys) - potential_U(q, sys)
