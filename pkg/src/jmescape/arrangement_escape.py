"""Escaping unions of linear subspaces and hyperplanes.

A subspace arrangement is enlarged to a hyperplane arrangement (each
subspace replaced by a hyperplane containing it); the complement of the
hyperplanes splits into open polyhedral cones (chambers), and the global
escape rate is the minimum of the chambers' cone escape rates.

All vectors live in a Euclidean R^D. For the N-body collision locus use the
mass coordinates of :mod:`jmescape.nbody_core`.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np

from .cone_geometry import (
    OUTSIDE_TOL,
    PROJ_TOL,
    EscapeCertificate,
    PolyhedralCone,
    escape_rate,
    interior_margin,
    make_escaper,
)
from .errors import DegenerateLiftError, DomainError, EnumerationLimitError, ShapeError

K_MAX = 20
FEASIBLE_TOL = 1e-9
ORTHO_TOL = 1e-9
SAME_HYPERPLANE_COS = 1.0 - 1e-12


class SubspaceArrangement:
    """Finite family of proper linear subspaces, none containing another.

    Each subspace L_i is described by an orthonormal basis of its orthogonal
    complement, given as the rows of ``complement_bases[i]``.
    """

    def __init__(self, complement_bases, dim=None):
        bases = [np.atleast_2d(np.asarray(B, dtype=float)) for B in complement_bases]
        if not bases:
            raise ShapeError("arrangement needs at least one subspace")
        D = bases[0].shape[1] if dim is None else int(dim)
        for i, B in enumerate(bases):
            if B.ndim != 2 or B.shape[1] != D or B.shape[0] == 0:
                raise ShapeError(f"complement basis {i} has shape {B.shape}, expected (c, {D}) with c >= 1")
            if B.shape[0] > D:
                raise DomainError(f"complement basis {i} has more rows than the ambient dimension")
            if np.max(np.abs(B @ B.T - np.eye(B.shape[0]))) > ORTHO_TOL:
                raise DomainError(f"complement basis {i} is not orthonormal")
        for i, Bi in enumerate(bases):
            for j, Bj in enumerate(bases):
                # L_i subset L_j  <=>  L_j^perp subset L_i^perp
                if i != j and np.max(np.abs(Bj - Bj @ Bi.T @ Bi)) < 1e-9:
                    raise DomainError(f"subspace {i} is contained in subspace {j}")
        self.bases = bases
        self.dim = D

    def __len__(self):
        return len(self.bases)

    def distances(self, q):
        q = np.asarray(q, dtype=float)
        return np.array([np.linalg.norm(B @ q) for B in self.bases])

    def dist(self, q):
        return float(self.distances(q).min())

    def to_dict(self):
        return {"complement_bases": [B.tolist() for B in self.bases]}


class HyperplaneArrangement:
    """Linear hyperplanes {<n_i, q> = 0} given by unit normals."""

    def __init__(self, normals):
        n = np.atleast_2d(np.asarray(normals, dtype=float))
        if n.ndim != 2 or n.shape[0] == 0:
            raise ShapeError(f"normals must be a nonempty (k, D) array, got shape {n.shape}")
        norms = np.linalg.norm(n, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise DomainError(f"normals must have unit length, got norms {norms.tolist()}")
        n = n / norms[:, None]
        G = np.abs(n @ n.T)
        np.fill_diagonal(G, 0.0)
        if np.any(G >= SAME_HYPERPLANE_COS):
            i, j = np.unravel_index(np.argmax(G), G.shape)
            raise DegenerateLiftError(f"hyperplanes {i} and {j} coincide")
        n.setflags(write=False)
        self.normals = n

    @property
    def dim(self):
        return self.normals.shape[1]

    def __len__(self):
        return self.normals.shape[0]

    def levels(self, q):
        return np.asarray(q, dtype=float) @ self.normals.T

    def dist(self, q):
        return np.abs(self.levels(q)).min(axis=-1)

    def sign_vector(self, q):
        return tuple(int(s) for s in np.where(self.levels(q) >= 0, 1, -1))

    def to_dict(self):
        return {"normals": self.normals.tolist()}


def _lift_first(i, B):
    return B[0]


LIFT_RULES = {"first": _lift_first}


def lift_to_hyperplanes(arr, rule="first"):
    """Replace every subspace by a hyperplane containing it.

    ``rule`` is a name from ``LIFT_RULES`` or a callable ``rule(i, B) -> v``
    returning a vector in the row span of the complement basis ``B``; the
    hyperplane is then v^perp. A subspace that already is a hyperplane is
    kept as is.
    """
    fn = LIFT_RULES[rule] if isinstance(rule, str) else rule
    normals = []
    for i, B in enumerate(arr.bases):
        v = np.asarray(fn(i, B), dtype=float)
        v = B.T @ (B @ v)  # keep only the component normal to L_i
        nv = np.linalg.norm(v)
        if nv < 1e-12:
            raise DegenerateLiftError(f"lift rule gave a zero normal for subspace {i}")
        normals.append(v / nv)
    return HyperplaneArrangement(normals)


def collision_subspaces(sys):
    """Binary collision subspaces {q_a = q_b} in mass coordinates.

    Row k of each complement basis is the unit normal of the hyperplane
    {(q_a - q_b)_k = 0}; rows are orthonormal across axes.
    """
    return SubspaceArrangement([
        np.array([collision_normal(sys, a, b, axis) for axis in np.eye(sys.dim)])
        for a, b in sys.pairs
    ], dim=sys.ambient_dim)


def collision_normal(sys, a, b, axis):
    """Unit mass-coordinate normal of {(q_a - q_b) . axis = 0}."""
    e = np.asarray(axis, dtype=float)
    e = e / np.linalg.norm(e)
    n = np.zeros((sys.n_bodies, sys.dim))
    n[a] = e / math.sqrt(sys.masses[a])
    n[b] = -e / math.sqrt(sys.masses[b])
    n = n.ravel()
    return n / np.linalg.norm(n)


def collision_lift(sys, axes=None):
    """Hyperplane lift of the collision locus.

    ``axes`` is None (first coordinate axis for every pair), one vector in
    R^d used for every pair, or one vector per pair in ``sys.pairs`` order.
    """
    if axes is None:
        axes = np.eye(sys.dim)[0]
    axes = np.asarray(axes, dtype=float)
    if axes.ndim == 1:
        axes = np.tile(axes, (len(sys.pairs), 1))
    if axes.shape != (len(sys.pairs), sys.dim):
        raise ShapeError(f"expected {len(sys.pairs)} lift axes of length {sys.dim}, got {axes.shape}")
    return HyperplaneArrangement([collision_normal(sys, a, b, e) for (a, b), e in zip(sys.pairs, axes)])


@dataclass(frozen=True)
class Chamber:
    """One connected component of the complement, encoded by its sign vector."""

    signs: tuple
    cone: PolyhedralCone
    feasible: bool = True


def _chamber(arr, signs, interior):
    cone = PolyhedralCone(np.asarray(signs)[:, None] * arr.normals, check_interior=False)
    cone.interior_point = interior
    return Chamber(signs=tuple(signs), cone=cone)


def enumerate_chambers(arr, k_max=K_MAX, mode="exact", n_samples=20_000, seed=0):
    """All chambers of the arrangement, sorted by sign vector.

    Exact mode grows sign vectors one hyperplane at a time and keeps a prefix
    only while its cone still has interior (an LP per node), which visits far
    fewer than 2^k sign vectors. Sample mode collects the sign vectors of
    random points and may miss thin chambers.
    """
    k = len(arr)
    if mode == "sample":
        warnings.warn("sampled chamber enumeration may miss chambers", RuntimeWarning, stacklevel=2)
        rng = np.random.default_rng(seed)
        pts = rng.standard_normal((n_samples, arr.dim))
        found = {}
        for p, s in zip(pts, np.where(arr.levels(pts) >= 0, 1, -1)):
            found.setdefault(tuple(int(x) for x in s), p / np.linalg.norm(p))
        return [_chamber(arr, s, found[s]) for s in sorted(found)]
    if mode != "exact":
        raise DomainError(f"unknown enumeration mode {mode!r}")
    if k > k_max:
        raise EnumerationLimitError(
            f"{k} hyperplanes exceed the exhaustive limit {k_max}; use mode='sample'")

    chambers = []
    stack = [()]
    while stack:
        prefix = stack.pop()
        j = len(prefix)
        for s in (1, -1):
            signs = prefix + (s,)
            margin, v = interior_margin(np.asarray(signs)[:, None] * arr.normals[: j + 1])
            if margin <= FEASIBLE_TOL:
                continue
            if j + 1 == k:
                chambers.append(_chamber(arr, signs, v))
            else:
                stack.append(signs)
    chambers.sort(key=lambda c: c.signs)
    return chambers


@dataclass
class ArrangementEscape:
    """Chambers of an arrangement with their escape certificates."""

    arrangement: HyperplaneArrangement
    chambers: list
    certificates: list

    @property
    def rate(self):
        return min(c.rate for c in self.certificates)

    def rows(self):
        return [
            {"signs": list(ch.signs), "rate": cert.rate, "direction": cert.direction.tolist()}
            for ch, cert in zip(self.chambers, self.certificates)
        ]


def solve_arrangement(arr, tol=PROJ_TOL, k_max=K_MAX, chambers=None):
    if chambers is None:
        chambers = enumerate_chambers(arr, k_max=k_max)
    certs = [escape_rate(ch.cone, tol=tol) for ch in chambers]
    return ArrangementEscape(arr, chambers, certs)


def global_escape_rate(arr, tol=PROJ_TOL, k_max=K_MAX):
    """Minimum chamber escape rate and the per-chamber certificates.

    Certificates are ordered like ``enumerate_chambers(arr)``.
    """
    table = solve_arrangement(arr, tol=tol, k_max=k_max)
    return table.rate, table.certificates


def braid_escape_rate(sys, tol=PROJ_TOL):
    """Collision-lift escape rate from a single ordering chamber.

    With equal masses every chamber of the first-axis lift is the image of
    the ordering q_1 < q_2 < ... < q_N under a permutation of bodies, which
    is an isometry of the mass metric, so one projection suffices.
    """
    if len(set(sys.masses)) != 1:
        raise DomainError("the symmetry shortcut needs equal masses")
    arr = collision_lift(sys)
    signs = -np.ones(len(arr))  # q_a < q_b for every pair a < b
    return escape_rate(PolyhedralCone(signs[:, None] * arr.normals), tol=tol)


def escaper_from_point(q, arr, t, table=None, tol=OUTSIDE_TOL):
    """Translational t-escaper from ``q`` into a chamber whose closure holds q.

    Interior points use their own chamber. On hyperplanes the candidate
    chamber with the largest escape rate wins (ties: smallest sign vector);
    a point lying on every hyperplane, such as the origin, takes the chamber
    with the smallest rate, which is the worst case from the cone point.
    """
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    if table is None:
        table = solve_arrangement(arr)
    lv = arr.levels(q)
    fixed = np.abs(lv) > tol
    want = np.where(lv > 0, 1, -1)
    candidates = [
        (ch, cert) for ch, cert in zip(table.chambers, table.certificates)
        if all(s == w for s, w, f in zip(ch.signs, want, fixed) if f)
    ]
    if not candidates:
        raise DomainError("no enumerated chamber contains the point (incomplete enumeration?)")
    if not fixed.any():
        ch, cert = min(candidates, key=lambda c: (c[1].rate, c[0].signs))
    else:
        ch, cert = min(candidates, key=lambda c: (-c[1].rate, c[0].signs))
    return make_escaper(q, cert, ch.cone, t)
