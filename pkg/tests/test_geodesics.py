import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from negcurv.errors import DomainExited, NoConvergence, NotPositiveDefinite, StepTooLarge
from negcurv.geodesics import (
    chart_vector,
    default_steps,
    disc_distance,
    distance_estimate,
    geodesic_metric,
    integrate_geodesic,
    radial_ray,
    unit_speed,
)
from negcurv.jets import EXP, FUBINI, LINEAR, LOG_BALL, RadialPotential
from negcurv.radial import radial_distance
from negcurv.realified import RealifiedMetric, christoffel_at
from oracles import ARCTANH_05, RADIAL_DISTANCE_EXP_1, TANH_1

EUCLID = RealifiedMetric.from_potential(LINEAR, 1)
DISC_CART = RealifiedMetric.from_potential(LOG_BALL, 1)


class TestChristoffel:
    def test_euclidean(self):
        assert np.max(np.abs(christoffel_at(EUCLID, [0.3, -1.2]))) <= 1e-8

    def test_disc_origin(self):
        assert np.max(np.abs(christoffel_at(DISC_CART, [0.0, 0.0]))) <= 1e-6

    def test_symmetric(self):
        G = RealifiedMetric.from_potential(EXP, 2)
        gamma = christoffel_at(G, [0.3, 0.1, -0.2, 0.5])
        assert np.array_equal(gamma, np.swapaxes(gamma, 1, 2))

    def test_disc_against_closed_form(self):
        # conformal factor λ = (1 - |z|^2)^-2: Γ^x_xx = ∂_x ln λ / 2 = 2x / (1 - |z|^2)
        x, y = 0.3, 0.4
        gamma = christoffel_at(DISC_CART, [x, y])
        assert gamma[0, 0, 0] == pytest.approx(2 * x / (1 - x * x - y * y), rel=1e-8)

    def test_not_positive_definite(self):
        G = RealifiedMetric.from_potential(RadialPotential("poly", (1.0, -0.5)), 1)
        with pytest.raises(NotPositiveDefinite):
            christoffel_at(G, [1.2, 0.0])


class TestIntegrate:
    def test_euclidean_line(self):
        path = integrate_geodesic(EUCLID, [0, 0], [1, 0], 3.0)
        assert np.allclose(path.endpoint, [3, 0], atol=1e-12)

    def test_euclidean_drift(self):
        path = integrate_geodesic(EUCLID, [0, 0], [0.6, 0.8], 10.0)
        assert path.speed_drift <= 1e-9

    def test_default_steps(self):
        assert default_steps(1.0) == 200 and default_steps(10.0) == 1000

    def test_log_ball_tanh(self):
        path = radial_ray(LOG_BALL, 1, 1.0)
        assert float(np.hypot(*path.cartesian()[-1])) == pytest.approx(TANH_1, abs=1e-6)

    def test_log_ball_long_ray_stays_inside(self):
        path = radial_ray(LOG_BALL, 1, 100.0)
        assert not path.exited
        assert path.endpoint[0] == pytest.approx(100.0, rel=1e-9)
        assert np.all(np.hypot(*path.cartesian().T) <= 1.0)

    def test_exp_radial_consistency(self):
        path = radial_ray(EXP, 1, RADIAL_DISTANCE_EXP_1)
        assert float(np.linalg.norm(path.cartesian()[-1])) == pytest.approx(1.0, abs=1e-4)

    def test_disc_drift(self):
        G = geodesic_metric(LOG_BALL, 1)
        x0 = G.chart([0.2, -0.3])
        v0 = unit_speed(G, x0, [0.3, 1.0])
        assert integrate_geodesic(G, x0, v0, 5.0).speed_drift <= 1e-6

    def test_domain_exit_returns_partial_path(self):
        with pytest.raises(DomainExited) as info:
            integrate_geodesic(DISC_CART, [0, 0], [1, 0], 30.0)
        exc = info.value
        assert 0 < exc.exit_time < 30.0
        assert exc.path.exited and exc.path.t[-1] == exc.exit_time

    def test_step_too_large(self):
        G = geodesic_metric(EXP, 1)
        with pytest.raises(StepTooLarge):
            integrate_geodesic(G, [0.5, 0], unit_speed(G, [0.5, 0], [0, 1]), 3.0, steps=3)

    @settings(max_examples=15)
    @given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(0, 2 * math.pi), st.floats(0.5, 5))
    def test_reversal(self, x, y, angle, T):
        G = geodesic_metric(EXP, 1)
        x0 = np.array([x, y])
        v0 = unit_speed(G, x0, [math.cos(angle), math.sin(angle)])
        fwd = integrate_geodesic(G, x0, v0, T)
        back = integrate_geodesic(G, fwd.endpoint, -fwd.velocities[-1], T)
        assert np.allclose(back.endpoint, x0, atol=1e-5)

    def test_at_interpolates(self):
        path = integrate_geodesic(EUCLID, [0, 0], [1, 0], 1.0)
        assert path.at(0.123)[0] == pytest.approx(0.123, rel=1e-12)
        with pytest.raises(ValueError):
            path.at(2.0)

    def test_chart_vector_radial(self):
        G = geodesic_metric(LOG_BALL, 1)
        v = chart_vector(G, [0.5, 0.0], [1.0, 0.0])
        # d arctanh(r)/dr = 1/(1 - r^2)
        assert v[0] == pytest.approx(1 / 0.75, rel=1e-6)


class TestDistance:
    def test_euclidean(self):
        assert distance_estimate(EUCLID, [0, 0], [3, 4]) == pytest.approx(5.0, abs=1e-6)

    def test_log_ball_from_origin(self):
        G = geodesic_metric(LOG_BALL, 1)
        assert distance_estimate(G, [0, 0], [0.5, 0]) == pytest.approx(ARCTANH_05, abs=1e-6)

    @pytest.mark.parametrize("z, w", [(0.3 + 0.2j, -0.4 + 0.1j), (0.7j, 0.6), (-0.5 - 0.5j, 0.1 + 0.8j)])
    def test_log_ball_against_disc_formula(self, z, w):
        G = geodesic_metric(LOG_BALL, 1)
        est = distance_estimate(G, [z.real, z.imag], [w.real, w.imag], budget=8)
        assert est == pytest.approx(disc_distance(z, w), abs=1e-6)

    def test_disc_formula_at_origin(self):
        assert disc_distance(0, 0.5) == pytest.approx(ARCTANH_05, rel=1e-14)

    def test_cartesian_chart_agrees(self):
        # the Cartesian chart is fine for nearby points away from the boundary
        est = distance_estimate(DISC_CART, [0.1, 0.2], [-0.3, 0.1], budget=4)
        assert est == pytest.approx(disc_distance(0.1 + 0.2j, -0.3 + 0.1j), abs=1e-6)

    def test_symmetry_and_triangle(self):
        G = geodesic_metric(FUBINI, 1)
        pts = [np.array(p) for p in ([0.3, 0.1], [-0.2, 0.5], [0.6, -0.4])]
        d = {(i, j): distance_estimate(G, pts[i], pts[j], budget=4) for i in range(3) for j in range(3) if i != j}
        for i, j in d:
            assert d[i, j] == pytest.approx(d[j, i], abs=1e-6)
        assert d[0, 2] <= d[0, 1] + d[1, 2] + 1e-5

    def test_exp_radial_shortcut(self):
        G = geodesic_metric(EXP, 1)
        assert distance_estimate(G, [0, 0], [0.0, 1.0]) == pytest.approx(radial_distance(EXP, 1.0))

    def test_no_convergence(self):
        G = geodesic_metric(EXP, 1)
        with pytest.raises(NoConvergence) as info:
            distance_estimate(G, [1.0, 0.0], [-1.0, 0.2], budget=1, steps=200, tol=1e-30)
        assert info.value.residual > 0
