"""Polyhedral convex cones K = {q : <n_i, q> >= 0} and their escape rates.

The escape rate into K equals 1 / dist(0, K_1) where K_1 = {<n_i, q> >= 1}.
The minimiser q_* of |q| over K_1 gives the optimal translation direction
q_* / |q_*|; rays p + s v then grow the distance to the boundary at least
linearly in s.
"""

from dataclasses import dataclass
from itertools import combinations
import math

import numpy as np
from scipy.optimize import linprog, nnls

from .errors import DegenerateConeError, DomainError, OutsideConeError, ShapeError, SolverError

OUTSIDE_TOL = 1e-9
NORMAL_TOL = 1e-6
DEDUP_COS = 1.0 - 1e-12
INTERIOR_TOL = 1e-9
PROJ_TOL = 1e-10
ENUMERATE_MAX = 20_000


def interior_margin(normals):
    """Solve max s subject to <n_i, v> >= s, |v|_inf <= 1, s <= 1.

    Returns ``(s, v)``. The cone has nonempty interior iff ``s > 0``.
    """
    normals = np.asarray(normals, dtype=float)
    m, D = normals.shape
    c = np.zeros(D + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-normals, np.ones((m, 1))])
    bounds = [(-1.0, 1.0)] * D + [(None, 1.0)]
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(m), bounds=bounds, method="highs")
    if res.status != 0:
        raise SolverError(f"interior feasibility LP failed: {res.message}")
    return float(res.x[-1]), res.x[:-1]


class PolyhedralCone:
    """Closed convex cone cut out by finitely many half-spaces through 0.

    Args:
        normals: (m, D) array of inward normals; each must have unit length
            to within 1e-6 and is re-normalised exactly.
        check_interior: certify a nonempty interior with a small LP.
    """

    def __init__(self, normals, check_interior=True):
        n = np.atleast_2d(np.asarray(normals, dtype=float))
        if n.ndim != 2 or n.shape[0] == 0 or n.shape[1] == 0:
            raise ShapeError(f"normals must be a nonempty (m, D) array, got shape {n.shape}")
        norms = np.linalg.norm(n, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > NORMAL_TOL)
        if bad.size:
            raise DomainError(f"normals {bad.tolist()} are not unit length (norms {norms[bad].tolist()})")
        n = n / norms[:, None]
        keep = []
        for i in range(n.shape[0]):
            if all(n[i] @ n[j] <= DEDUP_COS for j in keep):
                keep.append(i)
        n = n[keep]
        n.setflags(write=False)
        self.normals = n
        self.interior_point = None
        if check_interior:
            s, v = interior_margin(n)
            if s <= INTERIOR_TOL:
                raise DegenerateConeError(
                    f"cone has empty interior (best margin min_i <n_i, v> = {s:.3e} over the unit box)")
            self.interior_point = v

    @property
    def dim(self):
        return self.normals.shape[1]

    @property
    def n_faces(self):
        return self.normals.shape[0]

    def __repr__(self):
        return f"PolyhedralCone(m={self.n_faces}, D={self.dim})"

    def levels(self, q):
        """Values <n_i, q> of every defining functional."""
        q = np.asarray(q, dtype=float)
        if q.shape[-1] != self.dim:
            raise ShapeError(f"expected vectors of length {self.dim}, got shape {q.shape}")
        return q @ self.normals.T

    def contains(self, q, tol=OUTSIDE_TOL):
        return bool(np.all(self.levels(q) >= -tol))

    def in_equidistant(self, q, t, tol=0.0):
        """Membership in K_t = {q : <n_i, q> >= t for all i}."""
        return bool(np.all(self.levels(q) >= t - tol))

    def to_dict(self):
        return {"normals": self.normals.tolist()}


def dist_to_cone_boundary(q, K, tol=OUTSIDE_TOL):
    """Distance from a point of K to its boundary, min_i <n_i, q>."""
    lv = K.levels(q)
    if np.any(lv < -tol):
        raise OutsideConeError(f"point violates a face by {-lv.min():.3e}")
    return float(lv.min())


def _min_norm_on_faces(N_S):
    """Least-norm solution of N_S q = 1, or None if the system is inconsistent."""
    ones = np.ones(N_S.shape[0])
    q, *_ = np.linalg.lstsq(N_S, ones, rcond=None)
    # unit normals: round-off in N_S q grows with |q|
    if np.max(np.abs(N_S @ q - ones)) > 1e-9 * max(1.0, np.linalg.norm(q)):
        return None
    return q


def _feasible(N, q):
    return np.min(N @ q) >= 1.0 - 1e-12 * max(1.0, np.linalg.norm(q))


def project_origin_enumerate(K):
    """Nearest point of K_1 to the origin by exhaustive active-set enumeration.

    Every subset of faces of size <= D is tried as the active set; the
    smallest feasible least-norm solution wins. Exponential in m, so only
    meant for small cones and as a reference for the iterative projector.
    """
    N = K.normals
    m, D = N.shape
    best, best_norm = None, math.inf
    for size in range(1, min(m, D) + 1):
        for S in combinations(range(m), size):
            q = _min_norm_on_faces(N[list(S)])
            if q is None or not _feasible(N, q):
                continue
            nq = np.linalg.norm(q)
            if nq < best_norm:
                best, best_norm = q, nq
    if best is None:
        raise SolverError("no feasible active set; K_1 is empty")
    return best


def _kkt_polish(N, support):
    """Try to certify optimality from a guessed active set.

    Returns the optimal point if the KKT conditions hold with this support,
    otherwise None.
    """
    if not support:
        return None
    N_S = N[support]
    q = _min_norm_on_faces(N_S)
    if q is None or not _feasible(N, q):
        return None
    # q must be a nonnegative combination of the active normals
    _, resid = nnls(N_S.T, q)
    if resid > 1e-10 * max(1.0, np.linalg.norm(q)):
        return None
    return q


def _least_distance_nnls(N):
    """Lawson-Hanson reduction of min |q| s.t. N q >= 1 to one NNLS solve."""
    m, D = N.shape
    E = np.vstack([N.T, np.ones((1, m))])
    f = np.zeros(D + 1)
    f[-1] = 1.0
    u, _ = nnls(E, f, maxiter=50 * (m + D + 1))
    r = E @ u - f
    if abs(r[-1]) < 1e-14:
        raise SolverError("least-distance problem reported K_1 empty")
    return -r[:-1] / r[-1]


def project_origin_K1(K, tol=PROJ_TOL, max_sweeps=20_000, polish_every=25):
    """Nearest point of K_1 = {<n_i, q> >= 1} to the origin.

    Hildreth's dual coordinate ascent on min |q|^2/2 s.t. N q >= 1, with
    periodic attempts to certify the optimum exactly from the current
    support. Ill-conditioned cones, where coordinate ascent crawls, fall
    back after ``max_sweeps`` sweeps to exact active-set enumeration when
    that is affordable, and otherwise to a least-distance NNLS solve whose
    answer must pass the same KKT check.
    """
    N = K.normals
    m, _ = N.shape
    mu = np.zeros(m)
    q = np.zeros(N.shape[1])
    resid = math.inf
    for sweep in range(1, max_sweeps + 1):
        for i in range(m):
            delta = max(-mu[i], 1.0 - N[i] @ q)
            if delta != 0.0:
                mu[i] += delta
                q += delta * N[i]
        lv = N @ q
        viol = max(0.0, 1.0 - lv.min())
        comp = float(np.max(np.abs(mu * (lv - 1.0))))
        resid = max(viol, comp)
        if sweep % polish_every == 0 or resid <= tol:
            for support in (
                np.flatnonzero(mu > 1e-14).tolist(),
                np.flatnonzero(lv <= 1.0 + 1e-8).tolist(),
            ):
                exact = _kkt_polish(N, support)
                if exact is not None:
                    return exact
        if resid <= tol:
            return q
    if sum(math.comb(m, j) for j in range(1, min(m, N.shape[1]) + 1)) <= ENUMERATE_MAX:
        return project_origin_enumerate(K)
    q = _least_distance_nnls(N)
    lv = N @ q
    exact = _kkt_polish(N, np.flatnonzero(lv <= 1.0 + 1e-8).tolist())
    if exact is not None:
        return exact
    viol = max(0.0, 1.0 - lv.min())
    if viol <= tol:
        return q
    raise SolverError(f"projection onto K_1 did not converge in {max_sweeps} sweeps", max(resid, viol))


@dataclass(frozen=True)
class EscapeCertificate:
    """Optimal translation direction into a cone with its escape rate."""

    direction: np.ndarray
    rate: float
    witness: np.ndarray

    def to_dict(self):
        return {
            "rate": self.rate,
            "direction": self.direction.tolist(),
            "q_star": self.witness.tolist(),
        }


def escape_rate(K, tol=PROJ_TOL, method="iterative"):
    """Exact escape rate 1/|q_*| into ``K`` together with its direction."""
    if method == "iterative":
        q_star = project_origin_K1(K, tol=tol)
    elif method == "enumerate":
        q_star = project_origin_enumerate(K)
    else:
        raise DomainError(f"unknown projection method {method!r}")
    norm = float(np.linalg.norm(q_star))
    v = q_star / norm
    v.setflags(write=False)
    q_star.setflags(write=False)
    return EscapeCertificate(direction=v, rate=1.0 / norm, witness=q_star)


@dataclass(frozen=True)
class Escaper:
    """Straight ray p + s v with a certified linear growth of boundary distance.

    ``s_exit`` is the arclength at which the ray leaves the t-neighbourhood
    of the boundary (0 if it starts outside).
    """

    origin: np.ndarray
    direction: np.ndarray
    rate: float
    t: float
    start_dist: float
    s_exit: float

    def point(self, s):
        s = np.asarray(s, dtype=float)
        return self.origin + s[..., None] * self.direction

    def guaranteed_dist(self, s):
        """Lower bound dist(p) + s * rate on the distance along the ray."""
        return self.start_dist + np.asarray(s, dtype=float) * self.rate


def make_escaper(p, cert, K, t):
    """Translational escaper from ``p`` along the certificate direction."""
    if not t > 0:
        raise DomainError(f"neighbourhood size t must be positive, got {t}")
    p = np.asarray(p, dtype=float)
    start = dist_to_cone_boundary(p, K)
    lv_p = K.levels(p)
    lv_v = K.levels(cert.direction)
    # exit once every functional reaches t
    s_exit = float(np.max(np.maximum(0.0, (t - lv_p) / lv_v)))
    return Escaper(origin=p, direction=cert.direction, rate=cert.rate, t=float(t),
                   start_dist=max(start, 0.0), s_exit=s_exit)


def rectangle_cone(a, b):
    """Cone over a rectangle: z >= a|x|, z >= b|y| in R^3."""
    if not (a > 0 and b > 0):
        raise DomainError(f"a and b must be positive, got a={a}, b={b}")
    sa, sb = math.sqrt(a * a + 1.0), math.sqrt(b * b + 1.0)
    normals = np.array([
        [a / sa, 0.0, 1.0 / sa],
        [-a / sa, 0.0, 1.0 / sa],
        [0.0, b / sb, 1.0 / sb],
        [0.0, -b / sb, 1.0 / sb],
    ])
    return PolyhedralCone(normals)


def equidistant_cross_section(a, b, z, t=1.0):
    """Half-widths of the K_t cross-section at height z of the rectangle cone.

    Returns ``(x_half, y_half, aspect)`` with aspect = y_half / x_half. Heights
    below the apex of K_t give ``nan`` widths.
    """
    z = np.asarray(z, dtype=float)
    sa, sb = math.sqrt(a * a + 1.0), math.sqrt(b * b + 1.0)
    x_half = (z - t * sa) / a
    y_half = (z - t * sb) / b
    x_half = np.where(x_half >= 0, x_half, np.nan)
    y_half = np.where(y_half >= 0, y_half, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        aspect = y_half / x_half
    return x_half, y_half, aspect
