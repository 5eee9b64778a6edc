import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from negcurv.errors import DegeneratePlane, DomainError, NotPositiveDefinite, ZeroVector
from negcurv.jets import EXP, FUBINI, LINEAR, LOG_BALL, RadialPotential
from negcurv.kahler import (
    complex_ricci,
    curvature_range_report,
    curvature_tensor_at,
    holomorphic_bisectional,
    holomorphic_sectional,
    make_rng,
    metric_at,
    real_sectional,
    ricci_at,
    sample_planes,
)
from negcurv.realified import complex_structure, complex_to_real, realify_matrix
from oracles import GAUSS_EXP_N1

coord = st.floats(-0.6, 0.6)


def cvec(n):
    return st.lists(st.tuples(coord, coord), min_size=n, max_size=n).map(
        lambda pairs: np.array([a + 1j * b for a, b in pairs])
    )


def random_ball_points(rng, n, count, radius):
    z = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z * radius * rng.uniform(0, 1, (count, 1))


class TestMetric:
    def test_linear_identity(self):
        assert np.array_equal(metric_at(LINEAR, [0.3 + 1j, -2.0]).g, np.eye(2))

    def test_exp_origin(self):
        assert np.allclose(metric_at(EXP, [0, 0]).g, np.eye(2), atol=0)

    def test_log_ball_scalar(self):
        g = metric_at(LOG_BALL, [np.sqrt(0.5)]).g
        assert g[0, 0] == pytest.approx(4.0, rel=1e-14)

    @given(cvec(3))
    def test_hermitian_with_expected_eigenvalues(self, z):
        m = metric_at(EXP, z)
        assert np.allclose(m.g, m.g.conj().T, atol=1e-12, rtol=0)
        x = float(np.sum(np.abs(z) ** 2))
        expected = sorted([np.exp(x)] * 2 + [np.exp(x) * (1 + x)])
        assert np.allclose(m.eigenvalues, expected, rtol=1e-12)
        assert np.allclose(m.g @ m.inverse, np.eye(3), atol=1e-10)

    def test_not_positive_definite_reports_eigenvalue(self):
        p = RadialPotential("poly", (1.0, -0.5))
        with pytest.raises(NotPositiveDefinite) as info:
            metric_at(p, [1.2])
        assert info.value.eigenvalue <= 0

    def test_outside_ball(self):
        with pytest.raises(DomainError):
            metric_at(LOG_BALL, [0.8, 0.7])


class TestTensor:
    def test_linear_zero(self):
        assert np.all(curvature_tensor_at(LINEAR, [0.5, 1j]).R == 0)

    @pytest.mark.parametrize("p", [LOG_BALL, EXP])
    def test_origin_n1(self, p):
        assert curvature_tensor_at(p, [0.0]).R[0, 0, 0, 0] == pytest.approx(-2.0, abs=1e-15)

    def test_log_ball_origin_n2(self):
        R = curvature_tensor_at(LOG_BALL, [0, 0]).R
        d = np.eye(2)
        expected = -(np.einsum("ij,kl->ijkl", d, d) + np.einsum("il,kj->ijkl", d, d))
        assert np.allclose(R, expected, atol=1e-15)

    @pytest.mark.parametrize("p", [EXP, LOG_BALL, FUBINI])
    @given(z=cvec(2))
    def test_symmetries(self, p, z):
        R = curvature_tensor_at(p, 0.5 * z).R
        scale = np.max(np.abs(R))
        assert np.allclose(R, np.einsum("ijkl->kjil", R), atol=1e-8 * scale)
        assert np.allclose(R, np.einsum("ijkl->ilkj", R), atol=1e-8 * scale)
        assert np.allclose(R, np.conj(np.einsum("ijkl->jilk", R)), atol=1e-8 * scale)

    @pytest.mark.parametrize("p", [EXP, LOG_BALL, FUBINI])
    @given(z=cvec(3))
    def test_ricci_is_trace(self, p, z):
        z = 0.5 * z
        T = curvature_tensor_at(p, z)
        ric = complex_ricci(p, z)
        assert np.allclose(T.ricci_trace(), ric, rtol=0, atol=1e-8 * max(1.0, np.max(np.abs(ric))))


class TestHolomorphic:
    def test_linear_zero(self):
        T = curvature_tensor_at(LINEAR, [1.0, 2j])
        assert holomorphic_sectional(T, [1, 1j]) == 0.0
        assert holomorphic_bisectional(T, [1, 0], [0.5j, 1]) == 0.0

    def test_log_ball_n1_constant(self):
        rng = np.random.default_rng(5)
        for z in random_ball_points(rng, 1, 30, 0.9):
            v = rng.standard_normal(1) + 1j * rng.standard_normal(1)
            assert holomorphic_sectional(curvature_tensor_at(LOG_BALL, z), v) == pytest.approx(-4.0, abs=1e-9)

    def test_log_ball_n2_constant(self):
        rng = np.random.default_rng(6)
        H0 = holomorphic_sectional(curvature_tensor_at(LOG_BALL, [0, 0]), [1, 0])
        assert H0 == pytest.approx(-4.0, abs=1e-15)
        for z in random_ball_points(rng, 2, 50, 0.9):
            v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            assert holomorphic_sectional(curvature_tensor_at(LOG_BALL, z), v) == pytest.approx(H0, abs=1e-9)

    def test_orthogonal_bisectional_at_origin_is_half(self):
        T = curvature_tensor_at(LOG_BALL, [0, 0])
        assert holomorphic_bisectional(T, [1, 0], [0, 1]) == pytest.approx(-2.0, abs=1e-15)

    @given(cvec(2), cvec(2), st.floats(0.1, 5), st.floats(0, 6.3))
    def test_scaling_and_symmetry(self, z, v, mod, arg):
        if not np.any(v):
            return
        T = curvature_tensor_at(EXP, z)
        a = mod * np.exp(1j * arg)
        assert holomorphic_sectional(T, a * v) == pytest.approx(holomorphic_sectional(T, v), rel=1e-12, abs=1e-15)
        assert holomorphic_bisectional(T, v, v) == pytest.approx(holomorphic_sectional(T, v), rel=1e-12, abs=1e-15)
        w = np.roll(v, 1) + 0.3j
        assert holomorphic_bisectional(T, v, w) == pytest.approx(holomorphic_bisectional(T, w, v), rel=1e-10, abs=1e-15)

    def test_tiny_vector_is_not_zero(self):
        T = curvature_tensor_at(EXP, [0.0, 0.0])
        assert holomorphic_sectional(T, [0, 1e-300j]) == pytest.approx(-4.0)

    def test_zero_vector(self):
        T = curvature_tensor_at(EXP, [0.1, 0])
        with pytest.raises(ZeroVector):
            holomorphic_sectional(T, [0, 0])
        with pytest.raises(ZeroVector):
            holomorphic_bisectional(T, [1, 0], [0, 0])

    @pytest.mark.parametrize("r", sorted(GAUSS_EXP_N1))
    def test_exp_n1_gaussian_oracle(self, r):
        H = holomorphic_sectional(curvature_tensor_at(EXP, [r]), [1.0])
        assert H == pytest.approx(GAUSS_EXP_N1[r], rel=1e-10)


class TestRealSectional:
    def test_linear(self):
        rng = np.random.default_rng(1)
        for n in (1, 2):
            X, Y = rng.standard_normal((2, 2 * n))
            assert abs(real_sectional(LINEAR, rng.standard_normal(n) * (1 + 1j), X, Y)) <= 1e-7

    def test_log_ball_n1(self):
        rng = np.random.default_rng(2)
        for z in random_ball_points(rng, 1, 10, 0.9):
            assert real_sectional(LOG_BALL, z, [1, 0], [0, 1]) == pytest.approx(-4.0, abs=1e-5)

    @pytest.mark.parametrize("p, radius", [(EXP, 1.5), (LOG_BALL, 0.8), (FUBINI, 2.0)])
    def test_matches_holomorphic_on_complex_lines(self, p, radius):
        rng = np.random.default_rng(3)
        J = complex_structure(4)
        for z in random_ball_points(rng, 2, 5, radius):
            v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            X = complex_to_real(v)
            K = real_sectional(p, z, X, J @ X)
            H = holomorphic_sectional(curvature_tensor_at(p, z), v)
            assert abs(K - H) <= 1e-4

    def test_realification_is_the_hermitian_form(self):
        z = np.array([0.3 + 0.1j, -0.2j])
        g = metric_at(EXP, z).g
        G = realify_matrix(g)
        v = np.array([1 - 2j, 0.5 + 1j])
        w = np.array([0.2j, 1.0])
        assert complex_to_real(v) @ G @ complex_to_real(w) == pytest.approx((v @ g @ np.conj(w)).real)

    def test_degenerate_plane(self):
        with pytest.raises(DegeneratePlane):
            real_sectional(EXP, [0.5, 0], [1, 0, 0, 0], [2, 0, 0, 1e-9])

    @pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
    def test_exp_n1_gaussian_oracle(self, r):
        assert real_sectional(EXP, [r], [1, 0], [0, 1]) == pytest.approx(GAUSS_EXP_N1[r], rel=1e-5)


class TestRicci:
    def test_linear(self):
        ric, lower = ricci_at(LINEAR, [0.2, 0.7j])
        assert np.all(ric == 0) and lower == 0.0

    def test_log_ball_n1(self):
        rng = np.random.default_rng(4)
        for z in random_ball_points(rng, 1, 20, 0.9):
            assert ricci_at(LOG_BALL, z)[1] == pytest.approx(-4.0, abs=1e-9)

    def test_exp_n2_bounded_below(self):
        lows = [ricci_at(EXP, [r, 0])[1] for r in np.linspace(0, 4, 41)]
        assert np.all(np.isfinite(lows))
        assert min(lows) > -10

    def test_log_ball_n2_einstein(self):
        # complex space form: Ric = -(n+1)/2 H g, so 2 Ric has constant eigenvalue -6
        ric, lower = ricci_at(LOG_BALL, [0.3, 0.4j])
        assert lower == pytest.approx(-6.0, rel=1e-12)


class TestSampling:
    def test_planes_are_orthonormal(self):
        G0 = realify_matrix(metric_at(EXP, [1.0, 0.5j]).g)
        X, Y = sample_planes(make_rng(0), G0, 50)
        assert np.allclose(np.einsum("ka,ab,kb->k", X, G0, X), 1)
        assert np.allclose(np.einsum("ka,ab,kb->k", Y, G0, Y), 1)
        assert np.allclose(np.einsum("ka,ab,kb->k", X, G0, Y), 0, atol=1e-12)

    def test_same_seed_same_sample(self):
        G0 = np.eye(4)
        a = sample_planes(make_rng(9), G0, 10)
        b = sample_planes(make_rng(9), G0, 10)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))


class TestRangeReport:
    def test_linear(self):
        rep = curvature_range_report(LINEAR, 2, [0.5, 2.0], 50, 0)
        assert abs(rep.K_min) <= 1e-7 and abs(rep.K_max) <= 1e-7

    def test_log_ball(self):
        rep = curvature_range_report(LOG_BALL, 1, [0.2, 0.5, 0.9], 20, 0)
        for row in rep.rows:
            assert row.K_min == pytest.approx(-4.0, abs=1e-5)
            assert row.K_max == pytest.approx(-4.0, abs=1e-5)

    def test_exp_negative_and_bounded(self):
        rep = curvature_range_report(EXP, 2, [2.0, 3.0, 4.0], 2000, 7)
        assert rep.K_max < 0
        assert rep.K_min >= -2.5
        assert all(row.K_min <= row.K_max for row in rep.rows)

    def test_holomorphic_samples_are_sectional_samples(self):
        rep = curvature_range_report(EXP, 2, [1.0], 100, 3)
        row = rep.rows[0]
        assert np.allclose(row.K[-len(row.H):], row.H, atol=1e-4)

    def test_thread_count_does_not_change_result(self, monkeypatch):
        monkeypatch.setenv("NEGCURV_THREADS", "1")
        a = curvature_range_report(EXP, 2, [1.0, 2.0, 3.0], 200, 11).as_dict()
        monkeypatch.setenv("NEGCURV_THREADS", "4")
        b = curvature_range_report(EXP, 2, [1.0, 2.0, 3.0], 200, 11).as_dict()
        assert a == b

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            curvature_range_report(EXP, 2, [1.0], 0)
        with pytest.raises(DomainError):
            curvature_range_report(LOG_BALL, 1, [1.5], 5)
