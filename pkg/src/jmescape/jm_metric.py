"""Jacobi-Maupertuis lengths at negative energy and the diameter certificate.

At energy E the JM length element is sqrt(2 (U + E)) |dq| in the mass
metric, clamped to zero outside the Hill region {U >= -E}. Everything here
defaults to E = -1.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .arrangement_escape import ArrangementEscape, collision_lift, escaper_from_point, solve_arrangement
from .cone_geometry import PROJ_TOL
from .errors import CollisionError, DomainError, SolverError
from .nbody_core import (
    HILL_TOL,
    as_configuration,
    dist_to_collision_locus,
    energy,
    from_mass_coords,
    mass_inner,
    mass_norm,
    newton_rhs,
    potential_U,
    potential_U_batch,
    to_mass_coords,
)
from .quadrature import RTOL, integrate

E_DEFAULT = -1.0
COLLISION_EPS = 1e-4


@dataclass(frozen=True)
class Polyline:
    """Piecewise-linear path through configurations, shape (n, N, d)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 3 or v.shape[0] == 0:
            raise DomainError(f"polyline vertices must have shape (n, N, d), got {v.shape}")
        if v.shape[0] > 1 and np.any(np.all(np.diff(v, axis=0) == 0.0, axis=(1, 2))):
            raise DomainError("consecutive polyline vertices must differ")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return self.vertices.shape[0]

    def scaled(self, lam):
        return Polyline(lam * self.vertices)

    def length(self, sys):
        return math.fsum(mass_norm(b - a, sys) for a, b in zip(self.vertices[:-1], self.vertices[1:]))


def _conformal(u, E):
    x = u + E
    return math.sqrt(2.0 * x) if x > 0.0 else 0.0


def _segment_jm(p0, p1, sys, E, rtol, endpoint_limit):
    seg = p1 - p0
    L = mass_norm(seg, sys)
    sing = [math.isinf(potential_U(p, sys)) for p in (p0, p1)]
    if any(sing) and not endpoint_limit:
        raise CollisionError("path touches the collision locus; pass endpoint_limit=True")
    mode = {(True, True): "both", (True, False): "left", (False, True): "right"}.get(tuple(sing))
    f = lambda s: _conformal(potential_U(p0 + s * seg, sys), E)
    return L * integrate(f, 0.0, 1.0, rtol=rtol, singular=mode)


def jm_length(path, sys, E=E_DEFAULT, rtol=RTOL, endpoint_limit=False):
    """JM length of a polyline or an integrated trajectory.

    ``endpoint_limit`` allows vertices on the collision locus; the improper
    integral is then taken with a square-root endpoint substitution.
    """
    if isinstance(path, Trajectory):
        return path.jm_length(E=E, rtol=rtol)
    v = path.vertices
    return math.fsum(
        _segment_jm(a, b, sys, E, rtol, endpoint_limit) for a, b in zip(v[:-1], v[1:]))


@dataclass
class Trajectory:
    """Dense-output solution of Newton's equations."""

    sys: object
    t: np.ndarray
    q: np.ndarray
    v: np.ndarray
    sol: object = field(repr=False)
    stopped_early: bool = False
    energy_drift: float = 0.0

    def state(self, t):
        y = self.sol(t)
        n = self.sys.ambient_dim
        shape = (self.sys.n_bodies, self.sys.dim)
        return y[:n].reshape(shape), y[n:].reshape(shape)

    def _piecewise(self, f, t0, t1, rtol):
        t0 = self.t[0] if t0 is None else t0
        t1 = self.t[-1] if t1 is None else t1
        knots = np.concatenate([[t0], self.t[(self.t > t0) & (self.t < t1)], [t1]])
        return math.fsum(integrate(f, a, b, rtol=rtol) for a, b in zip(knots[:-1], knots[1:]))

    def jm_length(self, t0=None, t1=None, E=E_DEFAULT, rtol=RTOL):
        def f(t):
            q, v = self.state(t)
            return _conformal(potential_U(q, self.sys), E) * mass_norm(v, self.sys)
        return self._piecewise(f, t0, t1, rtol)

    def twice_kinetic_integral(self, t0=None, t1=None, rtol=RTOL):
        """Integral of 2K = <v, v> over time."""
        def f(t):
            _, v = self.state(t)
            return mass_inner(v, v, self.sys)
        return self._piecewise(f, t0, t1, rtol)


def newton_integrate(q0, v0, sys, T, E=E_DEFAULT, rtol=1e-12, atol=1e-12,
                     collision_eps=COLLISION_EPS, energy_tol=1e-9):
    """Integrate q'' = grad U from (q0, v0) for time T with DOP853.

    Integration stops early (``stopped_early=True``) when the configuration
    comes within ``collision_eps`` of the collision locus.
    """
    q0 = as_configuration(q0, sys)
    v0 = as_configuration(v0, sys)
    if dist_to_collision_locus(q0, sys) == 0.0:
        raise CollisionError("initial configuration is a collision")
    e0 = energy(q0, v0, sys)
    if abs(e0 - E) > energy_tol:
        raise DomainError(f"initial energy {e0!r} differs from {E} by more than {energy_tol}")
    if not T > 0:
        raise DomainError(f"duration must be positive, got {T}")
    n = sys.ambient_dim
    shape = (sys.n_bodies, sys.dim)

    def rhs(_, y):
        return np.concatenate([y[n:], newton_rhs(y[:n].reshape(shape), sys).ravel()])

    def near_collision(_, y):
        return dist_to_collision_locus(y[:n].reshape(shape), sys) - collision_eps

    near_collision.terminal = True
    near_collision.direction = -1

    res = solve_ivp(rhs, (0.0, T), np.concatenate([q0.ravel(), v0.ravel()]), method="DOP853",
                    rtol=rtol, atol=atol, dense_output=True, events=near_collision)
    if res.status == -1:
        raise SolverError(f"integration failed: {res.message}")
    q = res.y[:n].T.reshape(-1, *shape)
    v = res.y[n:].T.reshape(-1, *shape)
    drift = max(abs(energy(qi, vi, sys) - E) for qi, vi in zip(q, v))
    return Trajectory(sys=sys, t=res.t, q=q, v=v, sol=res.sol,
                      stopped_early=res.status == 1, energy_drift=drift)


def unit_escape_integral(rtol=1e-12):
    """Integral of sqrt(1/u - 1) over [0, 1] (equals pi/2)."""
    return integrate(lambda u: math.sqrt(max(1.0 / u - 1.0, 0.0)), 0.0, 1.0, rtol=rtol, singular="left")


def escaper_jm_bound(k, rtol=1e-12):
    """Upper bound on the JM length of a unit-speed escaper with U <= 1/(k t).

    Quadrature of sqrt(2) sqrt(max(1/(k t) - 1, 0)) over 0 <= t <= 1/k.
    """
    if not k > 0:
        raise DomainError(f"k must be positive, got {k}")
    f = lambda t: math.sqrt(max(1.0 / (k * t) - 1.0, 0.0)) if t > 0 else math.inf
    return math.sqrt(2.0) * integrate(f, 0.0, 1.0 / k, rtol=rtol, singular="left")


@dataclass(frozen=True)
class DiameterCertificate:
    """Chain of constants bounding the JM distance to the Hill boundary."""

    sys: object
    lambda_min: float
    lambda_sum: float
    c1: float
    C: float
    rate: float
    k: float
    t_cross: float
    bound_single: float
    bound_diameter: float
    lift_rule: str
    lift_axes: tuple = None
    table: ArrangementEscape = field(default=None, repr=False, compare=False)

    @property
    def constants(self):
        return {
            "lambda_min": self.lambda_min,
            "lambda_sum": self.lambda_sum,
            "c1": self.c1,
            "C": self.C,
            "rate": self.rate,
            "k": self.k,
            "t_cross": self.t_cross,
        }

    def to_dict(self):
        out = {
            "system": self.sys.to_dict(),
            "constants": self.constants,
            "bound_single": self.bound_single,
            "bound_diameter": self.bound_diameter,
            "lift_rule": self.lift_rule,
        }
        if self.lift_axes is not None:
            out["lift_axes"] = [list(a) for a in self.lift_axes]
        return out


def diameter_certificate(sys, lift_rule="first-axis", axes=None, tol=PROJ_TOL, k_max=20):
    """Finite upper bound on sup_q d(q, Hill boundary) and on the diameter.

    ``lift_rule`` is ``"first-axis"`` or ``"custom"``; the latter requires
    ``axes`` (see :func:`collision_lift`).
    """
    if lift_rule == "first-axis":
        if axes is not None:
            raise DomainError("first-axis lift takes no axes; use lift_rule='custom'")
    elif lift_rule == "custom":
        if axes is None:
            raise DomainError("custom lift rule needs axes")
    else:
        raise DomainError(f"unknown lift rule {lift_rule!r}")
    arr = collision_lift(sys, axes)
    table = solve_arrangement(arr, tol=tol, k_max=k_max)
    rate = table.rate
    k = sys.c1 * rate
    single = escaper_jm_bound(k)
    lift_axes = None if axes is None else tuple(map(tuple, np.atleast_2d(axes).tolist()))
    return DiameterCertificate(
        sys=sys, lambda_min=sys.lambda_min, lambda_sum=sys.lambda_sum, c1=sys.c1, C=sys.C,
        rate=rate, k=k, t_cross=1.0 / k, bound_single=single, bound_diameter=2.0 * single,
        lift_rule=lift_rule, lift_axes=lift_axes, table=table)


def escape_to_boundary(q, sys, cert, n_grid=4096, rtol=RTOL):
    """Straight escaper from a Hill-region point to the Hill boundary.

    Returns ``(path, jm_len)``; ``path`` has the start point and the first
    point along the escaper where U = 1.
    """
    q = as_configuration(q, sys)
    u0 = potential_U(q, sys)
    if abs(u0 - 1.0) <= HILL_TOL:
        return Polyline(q[None]), 0.0
    if u0 < 1.0:
        raise DomainError(f"start point is outside the Hill region (U = {u0!r})")
    x0 = to_mass_coords(q, sys)
    esc = escaper_from_point(x0, cert.table.arrangement, sys.lambda_min, table=cert.table)
    g = lambda s: potential_U(from_mass_coords(esc.point(s), sys), sys) - 1.0
    s_grid = np.linspace(0.0, cert.t_cross, n_grid + 1)[1:]
    pts = from_mass_coords(esc.point(s_grid), sys)
    vals = potential_U_batch(pts, sys) - 1.0
    hit = np.flatnonzero(vals <= 0.0)
    if hit.size == 0 and vals[-1] <= HILL_TOL:
        # sharp case: the boundary sits at s = 1/k up to round-off
        hit = np.array([n_grid - 1])
        vals[-1] = 0.0
    if hit.size == 0:
        raise SolverError("escaper did not reach the Hill boundary within 1/k", float(vals[-1]))
    i = hit[0]
    if vals[i] == 0.0:
        s_star = s_grid[i]
    else:
        lo = 0.0 if i == 0 else s_grid[i - 1]
        if i == 0 and math.isinf(u0):
            lo = s_grid[0] * 1e-12
        try:
            s_star = brentq(g, lo, s_grid[i], xtol=1e-12, rtol=4 * np.finfo(float).eps)
        except ValueError as exc:
            raise SolverError(f"Hill-boundary root solve failed: {exc}") from None
    q_exit = from_mass_coords(esc.point(s_star), sys)
    path = Polyline(np.stack([q, q_exit]))
    return path, jm_length(path, sys, rtol=rtol, endpoint_limit=math.isinf(u0))


def path_profile(path, sys, n=200, E=E_DEFAULT, rtol=RTOL):
    """Samples along a polyline: arclength, coordinates, U, collision distance,
    cumulative JM length. Returns a list of row tuples."""
    verts = path.vertices
    rows = []
    s_off, jm_off = 0.0, 0.0
    if len(verts) == 1:
        q = verts[0]
        return [(0.0, *q.ravel(), potential_U(q, sys), dist_to_collision_locus(q, sys), 0.0)]
    for p0, p1 in zip(verts[:-1], verts[1:]):
        L = mass_norm(p1 - p0, sys)
        fr = np.linspace(0.0, 1.0, n + 1)
        prev = 0.0
        jm = jm_off
        for j, f in enumerate(fr):
            q = p0 + f * (p1 - p0)
            if j > 0:
                seg = Polyline(np.stack([p0 + prev * (p1 - p0), q]))
                jm += jm_length(seg, sys, E=E, rtol=rtol, endpoint_limit=True)
            if j > 0 or not rows:
                rows.append((s_off + f * L, *q.ravel(), potential_U(q, sys),
                             dist_to_collision_locus(q, sys), jm))
            prev = f
        s_off += L
        jm_off = jm
    return rows


def two_body_radial_distance(sys, E=E_DEFAULT, rtol=1e-12):
    """JM distance from total collision to the Hill boundary for N = 2.

    In the separation r the mass norm of a radial motion is sqrt(mu) |dr|
    with mu = m1 m2 / (m1 + m2), so the distance is
    int_0^{r_b} sqrt(2 (G m1 m2 / r + E) mu) dr with r_b = -G m1 m2 / E.
    The substitution r = w^2 removes the endpoint singularity.
    """
    if sys.n_bodies != 2:
        raise DomainError("the radial oracle is for two bodies")
    if not E < 0:
        raise DomainError("the Hill boundary is empty for E >= 0")
    m1, m2 = sys.masses
    A = sys.G * m1 * m2
    mu = m1 * m2 / (m1 + m2)
    w_b = math.sqrt(-A / E)
    f = lambda w: 2.0 * math.sqrt(2.0 * mu * max(A + E * w * w, 0.0))
    return integrate(f, 0.0, w_b, rtol=rtol)
