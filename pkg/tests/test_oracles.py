import math

import mpmath as mp
import pytest

from oracles import (
    ARCTANH_05,
    ARCTANH_0999,
    COMPLETENESS_EXP_4,
    GAUSS_EXP_N1,
    MARGIN_E_EXP,
    RADIAL_DISTANCE_EXP_1,
    RADIAL_DISTANCE_EXP_2,
    TANH_1,
    gaussian_curvature,
    length_element,
    margin_e,
    q_exp,
)


@pytest.fixture(autouse=True)
def _precision():
    with mp.workdps(30):
        yield


class TestFrozenValues:
    @pytest.mark.parametrize(
        "upper, frozen",
        [(1, RADIAL_DISTANCE_EXP_1), (2, RADIAL_DISTANCE_EXP_2), (4, COMPLETENESS_EXP_4)],
    )
    def test_exp_radial_integrals(self, upper, frozen):
        value = mp.quad(length_element(q_exp), list(range(upper + 1)))
        assert float(value) == pytest.approx(frozen, rel=1e-15)

    def test_elementary(self):
        assert float(mp.atanh(mp.mpf("0.999"))) == pytest.approx(ARCTANH_0999, rel=1e-15)
        assert float(mp.atanh(mp.mpf("0.5"))) == pytest.approx(ARCTANH_05, rel=1e-15)
        assert float(mp.tanh(1)) == pytest.approx(TANH_1, rel=1e-15)

    @pytest.mark.parametrize("r", sorted(GAUSS_EXP_N1))
    def test_gaussian_curvature_exp(self, r):
        assert float(gaussian_curvature(q_exp, r)) == pytest.approx(GAUSS_EXP_N1[r], rel=1e-12)

    @pytest.mark.parametrize("r", sorted(MARGIN_E_EXP))
    def test_margin_e_closed_form(self, r):
        assert float(margin_e(q_exp, r)) == pytest.approx(4 + 4 / (1 + r * r) ** 2, rel=1e-12)
        assert MARGIN_E_EXP[r] == pytest.approx(4 + 4 / (1 + r * r) ** 2, rel=1e-15)


def test_disc_oracle_is_constant_minus_four():
    for r in (0.1, 0.5, 0.9):
        K = gaussian_curvature(lambda x: 1 / (1 - x) ** 2, r)
        assert math.isclose(float(K), -4.0, rel_tol=1e-12)
