import math

import numpy as np
import pytest
from scipy import integrate as spi
from scipy.special import beta

from jmescape import sampling
from jmescape.errors import CollisionError, DomainError
from jmescape.jm_metric import (
    Polyline,
    diameter_certificate,
    escape_to_boundary,
    escaper_jm_bound,
    jm_length,
    newton_integrate,
    path_profile,
    two_body_radial_distance,
    unit_escape_integral,
)
from jmescape.nbody_core import MassSystem, mass_norm, potential_U, potential_U_batch


def two_body(r, axis=0, d=3):
    """Unit masses at +-r/2 along one axis."""
    q = np.zeros((2, d))
    q[0, axis], q[1, axis] = -r / 2, r / 2
    return q


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


UNIT2 = MassSystem((1.0, 1.0), 3)


# --- polylines --------------------------------------------------------------


def test_polyline_rejects_repeated_vertex():
    q = two_body(1.0)
    with pytest.raises(DomainError):
        Polyline(np.stack([q, q]))


def test_polyline_rejects_bad_shape():
    with pytest.raises(DomainError):
        Polyline(np.zeros((2, 3)))


def test_jm_length_zero_outside_hill_region():
    # U = 1/r < 1 along the whole segment, so the conformal factor is clamped to 0
    path = Polyline(np.stack([two_body(2.0), two_body(5.0)]))
    assert jm_length(path, UNIT2) == 0.0


def test_radial_segment_matches_one_dimensional_quadrature():
    r0, r1 = 0.2, 0.9
    path = Polyline(np.stack([two_body(r0), two_body(r1)]))
    mu = 0.5
    ref, _ = spi.quad(lambda r: math.sqrt(2 * (1 / r - 1)) * math.sqrt(mu), r0, r1, epsabs=0, epsrel=1e-12)
    assert jm_length(path, UNIT2) == pytest.approx(ref, rel=1e-8)


def test_radial_segment_crossing_hill_boundary():
    path = Polyline(np.stack([two_body(0.5), two_body(3.0)]))
    ref, _ = spi.quad(lambda r: math.sqrt(2 * (1 / r - 1)) * math.sqrt(0.5), 0.5, 1.0, epsabs=0, epsrel=1e-12)
    assert jm_length(path, UNIT2) == pytest.approx(ref, rel=1e-8)


def test_length_is_additive_over_vertices():
    sys = MassSystem((1.0, 2.0, 3.0), 2)
    rng = np.random.default_rng(0)
    a, b, c = (sampling.random_configuration(rng, sys, 0.5) for _ in range(3))
    whole = jm_length(Polyline(np.stack([a, b, c])), sys)
    parts = jm_length(Polyline(np.stack([a, b])), sys) + jm_length(Polyline(np.stack([b, c])), sys)
    assert whole == pytest.approx(parts, rel=1e-12)


def test_scaling_law(rng):
    # U is homogeneous of degree -1, so L_{E/lam}(lam * path) = sqrt(lam) L_E(path)
    sys = MassSystem((1.0, 2.0, 0.5), 2)
    for _ in range(5):
        verts = np.stack([sampling.random_configuration(rng, sys, 0.4) for _ in range(3)])
        path = Polyline(verts)
        base = jm_length(path, sys, E=-1.0)
        for lam in (0.25, 3.0):
            scaled = jm_length(path.scaled(lam), sys, E=-1.0 / lam)
            assert scaled == pytest.approx(math.sqrt(lam) * base, rel=1e-7)


def test_collision_vertex_needs_endpoint_limit():
    path = Polyline(np.stack([np.zeros((2, 3)), two_body(1.0)]))
    with pytest.raises(CollisionError):
        jm_length(path, UNIT2)
    # collision to Hill boundary is the radial distance pi/2 for unit masses
    assert jm_length(path, UNIT2, endpoint_limit=True) == pytest.approx(math.pi / 2, rel=1e-8)


# --- trajectories -----------------------------------------------------------


def test_circular_orbit():
    # unit masses at r = 1/2: U = 2, K = 1, omega = 4; JM speed = 2K = 2
    r, w = 0.5, 4.0
    q0 = two_body(r, d=2)
    v0 = np.array([[0.0, -w * r / 2], [0.0, w * r / 2]])
    sys = MassSystem((1.0, 1.0), 2)
    T = 2 * math.pi / w
    tr = newton_integrate(q0, v0, sys, T)
    q1, _ = tr.state(T)
    np.testing.assert_allclose(q1, q0, atol=1e-9)
    assert tr.jm_length() == pytest.approx(2 * T, rel=1e-9)
    assert tr.twice_kinetic_integral() == pytest.approx(2 * T, rel=1e-9)
    assert tr.energy_drift < 1e-10


def test_brake_orbit_falls_to_collision():
    # released at rest on the Hill boundary, the pair falls radially
    sys = MassSystem((1.0, 1.0), 1)
    tr = newton_integrate(np.array([[-0.5], [0.5]]), np.zeros((2, 1)), sys, 5.0)
    assert tr.stopped_early
    q, _ = tr.state(tr.t[-1])
    r_end = q[1, 0] - q[0, 0]
    ref, _ = spi.quad(lambda r: math.sqrt(2 * (1 / r - 1)) * math.sqrt(0.5), r_end, 1.0, epsabs=0, epsrel=1e-12)
    assert tr.jm_length() == pytest.approx(ref, rel=1e-7)
    assert tr.jm_length() == pytest.approx(tr.twice_kinetic_integral(), rel=1e-7)


def test_jm_length_equals_twice_kinetic_integral(rng):
    for n in (2, 3):
        sys = MassSystem((1.0,) * n, 2)
        q, v = sampling.random_energy_state(rng, sys)
        tr = newton_integrate(q, v, sys, 0.5)
        assert abs(tr.jm_length() - tr.twice_kinetic_integral()) <= 1e-6 * tr.twice_kinetic_integral()
        assert tr.energy_drift <= 1e-7


def test_dispatch_on_trajectory(rng):
    sys = MassSystem((1.0, 1.0), 2)
    q, v = sampling.random_energy_state(rng, sys)
    tr = newton_integrate(q, v, sys, 0.3)
    assert jm_length(tr, sys) == tr.jm_length()


def test_rejects_wrong_energy():
    with pytest.raises(DomainError):
        newton_integrate(two_body(0.5), np.zeros((2, 3)), UNIT2, 1.0)


# --- escaper bound ------------------------------------------------------------


def test_unit_escape_integral_is_beta():
    # int_0^1 u^{-1/2} (1 - u)^{1/2} du = B(1/2, 3/2)
    assert unit_escape_integral() == pytest.approx(beta(0.5, 1.5), rel=1e-12)
    assert beta(0.5, 1.5) == pytest.approx(math.pi / 2, rel=1e-14)


def test_escaper_bound_at_unit_k():
    assert escaper_jm_bound(1.0) == pytest.approx(2.221441469079183, rel=1e-12)


@pytest.mark.parametrize("k", [0.1, 0.5, 2.0, 17.0])
def test_escaper_bound_homogeneity(k):
    assert escaper_jm_bound(k) == pytest.approx(math.sqrt(2) * math.pi / (2 * k), rel=1e-11)
    assert escaper_jm_bound(2 * k) == pytest.approx(escaper_jm_bound(k) / 2, rel=1e-11)


def test_escaper_bound_rejects_nonpositive():
    with pytest.raises(DomainError):
        escaper_jm_bound(0.0)


# --- certificate --------------------------------------------------------------


def test_two_body_certificate_is_sharp():
    cert = diameter_certificate(UNIT2)
    oracle = two_body_radial_distance(UNIT2)
    assert oracle == pytest.approx(math.pi / 2, rel=1e-12)
    assert cert.bound_single >= oracle * (1 - 1e-12)
    assert cert.bound_diameter / (2 * oracle) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("masses", [(1.0, 3.0), (0.2, 5.0)])
def test_two_body_bound_dominates_oracle(masses):
    sys = MassSystem(masses, 2)
    assert diameter_certificate(sys).bound_single >= two_body_radial_distance(sys) * (1 - 1e-12)


def test_certificate_permutation_invariant():
    a = diameter_certificate(MassSystem((1.0, 2.0, 5.0), 2))
    b = diameter_certificate(MassSystem((5.0, 1.0, 2.0), 2))
    assert a.rate == pytest.approx(b.rate, rel=1e-10)
    assert a.bound_single == pytest.approx(b.bound_single, rel=1e-10)


def test_certificate_mass_doubling():
    a = diameter_certificate(MassSystem((1.0, 2.0, 5.0), 2))
    b = diameter_certificate(MassSystem((2.0, 4.0, 10.0), 2))
    f = 4 * math.sqrt(2)
    assert b.lambda_min == pytest.approx(f * a.lambda_min, rel=1e-12)
    assert b.rate == pytest.approx(a.rate, rel=1e-10)
    assert b.bound_single == pytest.approx(f * a.bound_single, rel=1e-10)


def test_certificate_constants_chain():
    sys = MassSystem((1.0, 1.0, 1.0), 2)
    cert = diameter_certificate(sys)
    assert cert.rate == pytest.approx(0.5, abs=1e-12)
    assert cert.k == pytest.approx(cert.c1 * cert.rate, rel=1e-15)
    assert cert.t_cross == pytest.approx(1 / cert.k, rel=1e-15)
    assert cert.bound_diameter == 2 * cert.bound_single
    d = cert.to_dict()
    assert set(d) == {"system", "constants", "bound_single", "bound_diameter", "lift_rule"}


def test_custom_lift_rule_requires_axes():
    sys = MassSystem((1.0, 1.0, 1.0), 2)
    with pytest.raises(DomainError):
        diameter_certificate(sys, lift_rule="custom")
    with pytest.raises(DomainError):
        diameter_certificate(sys, axes=[1.0, 0.0])
    cert = diameter_certificate(sys, lift_rule="custom", axes=[0.6, 0.8])
    # equal masses: the rate does not depend on the lift axis
    assert cert.rate == pytest.approx(0.5, abs=1e-12)


# --- escape to the Hill boundary --------------------------------------------


def test_escape_from_hill_boundary_has_zero_length():
    cert = diameter_certificate(UNIT2)
    path, L = escape_to_boundary(two_body(1.0), UNIT2, cert)
    assert L == 0.0 and len(path) == 1


def test_escape_rejects_points_outside():
    cert = diameter_certificate(UNIT2)
    with pytest.raises(DomainError):
        escape_to_boundary(two_body(2.0), UNIT2, cert)


def test_escape_from_total_collision_two_body():
    cert = diameter_certificate(UNIT2)
    path, L = escape_to_boundary(np.zeros((2, 3)), UNIT2, cert)
    assert potential_U(path.vertices[-1], UNIT2) == pytest.approx(1.0, abs=1e-9)
    assert L == pytest.approx(math.pi / 2, rel=1e-8)
    assert L <= cert.bound_single * (1 + 1e-8)


@pytest.mark.parametrize("masses", [(1.0, 1.0, 1.0), (1.0, 2.0, 0.5)])
def test_escapes_within_bound(masses, rng):
    sys = MassSystem(masses, 2)
    cert = diameter_certificate(sys)
    for _ in range(200):
        q = sampling.random_hill_point(rng, sys)
        path, L = escape_to_boundary(q, sys, cert)
        assert L <= cert.bound_single
        p0, p1 = path.vertices
        assert potential_U(p1, sys) == pytest.approx(1.0, abs=1e-9)
        # U k s <= 1 along the escaper
        length = mass_norm(p1 - p0, sys)
        s = np.linspace(0.0, 1.0, 33)[1:] * length
        pts = p0 + (s / length)[:, None, None] * (p1 - p0)
        assert np.max(potential_U_batch(pts, sys) * cert.k * s) <= 1.0 + 1e-6


def test_path_profile_columns():
    cert = diameter_certificate(UNIT2)
    path, L = escape_to_boundary(two_body(0.3), UNIT2, cert)
    rows = path_profile(path, UNIT2, n=50)
    assert len(rows) == 51
    assert len(rows[0]) == 1 + 6 + 3
    assert rows[-1][-1] == pytest.approx(L, rel=1e-7)
    assert all(b[-1] >= a[-1] for a, b in zip(rows, rows[1:]))
