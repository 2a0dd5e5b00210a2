import cmath
import math
import random

import pytest
import scipy.special

from toriccharge.fan import box, sigma_frame
from toriccharge.gammaclasses import (
    EquivariantKClass,
    GammaPoleError,
    ch_tilde_at,
    euler_IX_at,
    gamma,
    gamma_tilde_TX_at,
    h_coefficient,
    h_consistency,
    kappa_eval,
    log_gamma,
    zpow,
)

TWO_PI_I = 2j * math.pi


class TestLogGamma:
    def test_gamma_one(self):
        assert log_gamma(1) == pytest.approx(0, abs=1e-14)

    def test_gamma_half(self):
        assert abs(cmath.exp(log_gamma(0.5)) - math.sqrt(math.pi)) < 1e-12
        assert log_gamma(0.5) == pytest.approx(0.5723649429247001, abs=1e-12)

    def test_reflection_at_complex_point(self):
        s = 0.3 + 0.7j
        val = gamma(s) * gamma(1 - s) * cmath.sin(math.pi * s) / math.pi
        assert abs(val - 1) < 1e-12

    def test_poles_raise(self):
        for s in (0, -1, -2, -7):
            with pytest.raises(GammaPoleError):
                log_gamma(s)

    def test_reflection_and_recurrence_grid(self):
        rng = random.Random(42)
        for _ in range(100):
            s = complex(rng.uniform(-4, 4), rng.uniform(-4, 4))
            if min(abs(s - k) for k in range(-6, 2)) < 0.1:
                continue
            refl = gamma(s) * gamma(1 - s) * cmath.sin(math.pi * s) / math.pi
            assert abs(refl - 1) < 1e-12
            rec = gamma(s + 1) / (s * gamma(s))
            assert abs(rec - 1) < 1e-12

    def test_against_scipy(self):
        rng = random.Random(7)
        for _ in range(60):
            s = complex(rng.uniform(0.2, 6), rng.uniform(-5, 5))
            mine = gamma(s)
            ref = cmath.exp(complex(scipy.special.loggamma(s)))
            assert abs(mine - ref) / abs(ref) < 1e-13


class TestZpow:
    def test_real_log_branch(self):
        assert zpow(2.0, 3) == pytest.approx(8.0)
        s = 1.5 - 2.0j
        assert zpow(3.0, s) == pytest.approx(cmath.exp(s * math.log(3.0)))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            zpow(-1.0, 2)


@pytest.fixture
def generic_w2():
    return [0.37 + 0.21j, -1.13 + 0.54j]


@pytest.fixture
def generic_w3():
    return [0.9 - 0.3j, -0.7 + 0.45j, 0.31 + 1.2j]


class TestChTilde:
    def test_trivial_bundle(self, p1_dd, generic_w2):
        v0 = box(p1_dd, (0,))[0]
        assert ch_tilde_at(p1_dd, (0,), v0, [0, 0], 1.0, generic_w2) == pytest.approx(1)

    def test_p1_pure_phase(self, p1_dd, generic_w2):
        z = 1.0
        v0 = box(p1_dd, (0,))[0]
        l1 = 3
        tw = generic_w2[0] - generic_w2[1]
        expected = cmath.exp(TWO_PI_I * l1 * tw / z)
        got = ch_tilde_at(p1_dd, (0,), v0, [l1, 0], z, generic_w2)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_p12_age_sign(self, p12_dd, generic_w2):
        z = 1.0
        twisted = box(p12_dd, (1,))[1]
        tw = generic_w2[1] - generic_w2[0] / 2
        expected = cmath.exp(TWO_PI_I * (tw / z + 0.5))
        got = ch_tilde_at(p12_dd, (1,), twisted, [0, 1], z, generic_w2)
        assert got == pytest.approx(expected, rel=1e-12)


class TestGammaTilde:
    def test_small_weights_near_one(self, p1_dd):
        w = [1e-9, -1e-9 * 0.5]
        val = gamma_tilde_TX_at(p1_dd, (0,), box(p1_dd, (0,))[0], 1.0, w)
        assert abs(val - 1) < 1e-7

    def test_recurrence_vs_shifted_argument(self, p1_dd, generic_w2):
        # Gamma(x + 1) = x Gamma(x) transported through the class: compare the
        # class at z against the elementary factors.
        z = 1.0
        v0 = box(p1_dd, (0,))[0]
        tw = generic_w2[0] - generic_w2[1]
        x = -tw / z + 1
        expected = zpow(z, x) * gamma(x)
        assert gamma_tilde_TX_at(p1_dd, (0,), v0, z, generic_w2) == pytest.approx(
            expected, rel=1e-12
        )

    def test_p12_twisted_half_shift(self, p12_dd, generic_w2):
        z = 2.0
        twisted = box(p12_dd, (1,))[1]
        tw = generic_w2[1] - generic_w2[0] / 2
        x = -tw / z + 1 - 0.5
        expected = zpow(z, x) * gamma(x)
        assert gamma_tilde_TX_at(p12_dd, (1,), twisted, z, generic_w2) == pytest.approx(
            expected, rel=1e-12
        )


class TestEuler:
    def test_p1_single_weight(self, p1_dd, generic_w2):
        v0 = box(p1_dd, (0,))[0]
        expected = -(generic_w2[0] - generic_w2[1])
        assert euler_IX_at(p1_dd, (0,), v0, generic_w2) == pytest.approx(expected)

    def test_p2_two_weights(self, p2_dd, generic_w3):
        v0 = box(p2_dd, (0, 1))[0]
        w = generic_w3
        expected = (w[2] - w[0]) * (w[2] - w[1])
        assert euler_IX_at(p2_dd, (0, 1), v0, w) == pytest.approx(expected, rel=1e-12)

    def test_p12_twisted_empty_product(self, p12_dd, generic_w2):
        twisted = box(p12_dd, (1,))[1]
        assert euler_IX_at(p12_dd, (1,), twisted, generic_w2) == 1

    def test_degenerate_weight(self, p1_dd):
        with pytest.raises(GammaPoleError):
            euler_IX_at(p1_dd, (0,), box(p1_dd, (0,))[0], [1.0, 1.0])


class TestHCoefficient:
    def test_p1_chart_formulas(self, p1_dd, generic_w2):
        # Closed forms for both rank-one charts; the phase carries
        # exp(2 pi i l_i tw_i / z) with tw the chart weight.
        z = 1.0
        w1, w2 = generic_w2
        for sigma, tw, li in (((0,), w1 - w2, 4), ((1,), w2 - w1, 7)):
            v0 = box(p1_dd, sigma)[0]
            l = [0, 0]
            l[sigma[0]] = li
            expected = zpow(z, -tw / z) * gamma(-tw / z) * cmath.exp(
                TWO_PI_I * li * tw / z
            )
            got = h_coefficient(p1_dd, sigma, v0, l, z, generic_w2)
            assert got == pytest.approx(expected, rel=1e-12)

    def test_trivial_bundle_p2(self, p2_dd, generic_w3):
        z = 1.0
        sigma = (0, 1)
        v0 = box(p2_dd, sigma)[0]
        frame = sigma_frame(p2_dd, sigma, generic_w3)
        expected = 1
        for i in sigma:
            expected *= zpow(z, -frame.tw[i] / z) * gamma(-frame.tw[i] / z)
        got = h_coefficient(p2_dd, sigma, v0, [0, 0, 0], z, generic_w3)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_group_order_prefactor(self, p12_dd, generic_w2):
        z = 1.0
        v0 = box(p12_dd, (1,))[0]
        tw = generic_w2[1] - generic_w2[0] / 2
        expected = 0.5 * zpow(z, -tw / z) * gamma(-tw / z)
        got = h_coefficient(p12_dd, (1,), v0, [0, 0], z, generic_w2)
        assert got == pytest.approx(expected, rel=1e-12)


class TestHConsistency:
    @pytest.mark.parametrize("l", [(0, 0), (1, 2), (3, -1)])
    def test_p1(self, p1_dd, generic_w2, l):
        for sigma in p1_dd.fan.max_cones:
            v0 = box(p1_dd, sigma)[0]
            assert h_consistency(p1_dd, sigma, v0, list(l), 1.0, generic_w2) < 1e-12

    @pytest.mark.parametrize("l", [(0, 0), (0, 1), (2, 3)])
    def test_p12_both_sectors(self, p12_dd, generic_w2, l):
        for sigma in p12_dd.fan.max_cones:
            for el in box(p12_dd, sigma):
                assert (
                    h_consistency(p12_dd, sigma, el, list(l), 1.0, generic_w2) < 1e-12
                )

    def test_p2(self, p2_dd, generic_w3):
        for sigma in p2_dd.fan.max_cones:
            v0 = box(p2_dd, sigma)[0]
            assert h_consistency(p2_dd, sigma, v0, [1, 0, 0], 1.0, generic_w3) < 1e-12


def test_h_coefficient_cannot_see_t0():
    # Independence from t_0 is structural: the signature has no such input.
    import inspect

    assert "t0" not in inspect.signature(h_coefficient).parameters


class TestKappaEval:
    def test_structure_sheaf_gives_gamma_class(self, p1_dd, generic_w2):
        v0 = box(p1_dd, (0,))[0]
        K = EquivariantKClass.line_bundle([0, 0])
        got = kappa_eval(p1_dd, K, (0,), v0, 1.0, generic_w2)
        assert got == pytest.approx(
            gamma_tilde_TX_at(p1_dd, (0,), v0, 1.0, generic_w2), rel=1e-12
        )

    def test_cancellation(self, p1_dd, generic_w2):
        K = EquivariantKClass.line_bundle([1, 2]) - EquivariantKClass.line_bundle([1, 2])
        assert K.terms == ()
        v0 = box(p1_dd, (0,))[0]
        assert kappa_eval(p1_dd, K, (0,), v0, 1.0, generic_w2) == 0

    def test_point_class_phase_difference(self, p1_dd, generic_w2):
        # [O] - [O(-D_1)] via a Koszul-type difference.
        z = 1.0
        v0 = box(p1_dd, (0,))[0]
        K = EquivariantKClass.line_bundle([0, 0]) - EquivariantKClass.line_bundle(
            [-1, 0]
        )
        got = kappa_eval(p1_dd, K, (0,), v0, z, generic_w2)
        gam = gamma_tilde_TX_at(p1_dd, (0,), v0, z, generic_w2)
        tw = generic_w2[0] - generic_w2[1]
        expected = gam * (1 - cmath.exp(-TWO_PI_I * tw / z))
        assert got == pytest.approx(expected, rel=1e-12)

    def test_additivity_random(self, p2_dd, generic_w3):
        rng = random.Random(5)
        v0 = box(p2_dd, (1, 2))[0]
        for _ in range(5):
            la = [rng.randint(-2, 2) for _ in range(3)]
            lb = [rng.randint(-2, 2) for _ in range(3)]
            Ka = EquivariantKClass.line_bundle(la)
            Kb = EquivariantKClass.line_bundle(lb, 2)
            lhs = kappa_eval(p2_dd, Ka + Kb, (1, 2), v0, 1.0, generic_w3)
            rhs = kappa_eval(p2_dd, Ka, (1, 2), v0, 1.0, generic_w3) + kappa_eval(
                p2_dd, Kb, (1, 2), v0, 1.0, generic_w3
            )
            assert lhs == pytest.approx(rhs, rel=1e-12)
