import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from toriccharge.cycles import characteristic_cycle, shifted_cycle
from toriccharge.fan import box
from toriccharge.gammaclasses import gamma
from toriccharge.integrate import (
    QuadratureConfig,
    Splitting,
    SplittingPositivityError,
    adaptive_1d,
    eta_independence_check,
    eta_sigma,
    integrand,
    integrate_cell,
    integrate_cycle,
    splitting_from_rows,
)
from toriccharge.params import EquivariantParams

W2 = [-3.0 + 0.4j, 1.2 - 0.3j]
W3 = [0.9 - 0.3j, -0.7 + 0.45j, 0.31 + 1.2j]
CFG = QuadratureConfig(adaptive_tol=1e-10)


class TestEtaSigma:
    def test_p1(self, p1_dd):
        spl = eta_sigma(p1_dd, (0,))
        assert spl.eta == ((Fraction(0),), (Fraction(1),))
        assert spl.q_prime([0.3])[1] == pytest.approx(0.3)

    def test_p2(self, p2_dd):
        spl = eta_sigma(p2_dd, (0, 1))
        assert spl.eta == ((Fraction(0),), (Fraction(0),), (Fraction(1),))

    def test_p12_fractional_row(self, p12_dd):
        spl = eta_sigma(p12_dd, (1,))
        assert spl.eta == ((Fraction(1, 2),), (Fraction(0),))
        assert spl.q_prime([0.04])[0] == pytest.approx(0.2)

    def test_positivity_violation(self, f1_dd):
        # The adapted F1 basis has e_1^vee = D_1 exactly, so the chart at
        # sigma = (1, 2) gets a zero row and must be rejected.
        with pytest.raises(SplittingPositivityError):
            eta_sigma(f1_dd, (1, 2))

    def test_custom_splitting_identity_enforced(self, p1_dd):
        with pytest.raises(ValueError):
            splitting_from_rows(p1_dd, [[Fraction(1)], [Fraction(1)]])
        ok = splitting_from_rows(p1_dd, [[Fraction(1, 2)], [Fraction(1, 2)]])
        assert ok.eta[0][0] == Fraction(1, 2)


class TestIntegrand:
    def test_direct_value_at_origin(self, p1_dd):
        # q = 1 is outside the admissible parameter range, so build the value
        # by hand: at v = u = 0 with w = 0, t0 = 0: W~ = X_1 + X_2 = 1 + q.
        params = EquivariantParams.make(z=1.0, w=[0, 0], t0=0.0, q=[0.9999])
        spl = eta_sigma(p1_dd, (0,))
        val = integrand(p1_dd.fan, params, spl, ((0.0,), (0.0,)))
        assert val == pytest.approx(cmath.exp(-(1 + 0.9999)), rel=1e-12)

    def test_periodicity_without_weights(self, p1_dd):
        params = EquivariantParams.make(z=1.0, w=[0, 0], t0=0.1, q=[0.37])
        spl = eta_sigma(p1_dd, (0,))
        a = integrand(p1_dd.fan, params, spl, ((0.4,), (0.23,)))
        b = integrand(p1_dd.fan, params, spl, ((0.4,), (1.23,)))
        assert a == pytest.approx(b, rel=1e-12)

    def test_matches_example_form(self, p1_dd):
        # W~ = t0 + X_1 + q/X_1 + w_1 log X_1 + w_2 log(q/X_1) with the branch
        # given by the linear form x_1 = y, x_2 = log q - y.
        params = EquivariantParams.make(z=1.0, w=W2, t0=0.3 + 0.1j, q=[0.02])
        spl = eta_sigma(p1_dd, (0,))
        q = 0.02
        for v, u in [(0.5, 0.3), (-1.2, 0.8), (2.0, -0.4)]:
            y = -v + 2j * math.pi * u
            x1 = y
            x2 = math.log(q) - y
            wt = params.t0 + cmath.exp(x1) + cmath.exp(x2) + W2[0] * x1 + W2[1] * x2
            expected = cmath.exp(-wt / params.z)
            got = integrand(p1_dd.fan, params, spl, ((v,), (u,)))
            assert got == pytest.approx(expected, rel=1e-12)

    def test_overflow_guard(self, p1_dd):
        params = EquivariantParams.make(z=1.0, w=[0, 0], t0=0.0, q=[0.5])
        spl = eta_sigma(p1_dd, (0,))
        assert integrand(p1_dd.fan, params, spl, ((-800.0,), (0.0,))) == 0


class TestQuadratureSanity:
    @pytest.mark.parametrize("s", [2.0, 2.5, 1 + 1j])
    def test_gamma_integral(self, s):
        # int_0^infty e^{-X} X^{s-1} dX through the substitution X = e^c.
        f = lambda c: np.exp(-np.exp(c) + s * c)
        val, err = adaptive_1d(f, -40.0, 6.0, 1e-13, 24, 14)
        assert abs(val - gamma(s)) < 1e-10

    def test_gamma_half_sqrt_pi(self):
        f = lambda c: np.exp(-np.exp(c) + 0.5 * c)
        val, _ = adaptive_1d(f, -70.0, 6.0, 1e-14, 32, 14)
        assert abs(val - math.sqrt(math.pi)) < 1e-12

    def test_interval_cell_crude_bound(self, p1_dd):
        params = EquivariantParams.make(z=1.0, w=W2, t0=0.0, q=[0.05])
        spl = eta_sigma(p1_dd, (0,))
        chain = characteristic_cycle(p1_dd.fan, [1, 2])
        interval = next(c for c in chain.cells if c.tau == ())
        res = integrate_cell(chain, interval, params, spl, CFG)
        length = 3.0  # u from -1 to 2
        nodes = np.linspace(-1, 2, 400)
        peak = max(
            abs(integrand(p1_dd.fan, params, spl, ((0.0,), (u,)))) for u in nodes
        )
        assert abs(res.value) <= 2 * math.pi * length * peak * 1.0001

    def test_gauss_legendre_order(self):
        # On a smooth panel, doubling the node count collapses the error
        # estimate by many orders, as the rule's order predicts.
        from toriccharge.integrate import _panel_values

        f = lambda x: np.exp(-x * x) * np.cos(3 * x)
        _, err_low = _panel_values(f, 0.0, 2.0, 4)
        _, err_high = _panel_values(f, 0.0, 2.0, 12)
        assert err_high < 1e-8 * err_low

    def test_convergence_with_nodes(self, p1_dd):
        params = EquivariantParams.make(z=1.0, w=W2, t0=0.0, q=[0.05])
        spl = eta_sigma(p1_dd, (0,))
        chain = characteristic_cycle(p1_dd.fan, [1, 2])
        coarse = integrate_cycle(chain, params, spl, QuadratureConfig(adaptive_tol=1e-6))
        fine = integrate_cycle(chain, params, spl, QuadratureConfig(adaptive_tol=1e-12))
        assert abs(coarse.value - fine.value) <= 10 * (
            coarse.error_estimate + fine.error_estimate
        )
        assert fine.error_estimate < coarse.error_estimate


class TestIntegrateCycle:
    def test_empty_chain(self, p1_dd):
        from toriccharge.cycles import CycleChain

        params = EquivariantParams.make(z=1.0, w=W2, t0=0.0, q=[0.05])
        spl = eta_sigma(p1_dd, (0,))
        res = integrate_cycle(CycleChain(fan=p1_dd.fan, cells=()), params, spl, CFG)
        assert res.value == 0

    def test_doubled_chain_linear(self, p1_dd):
        params = EquivariantParams.make(z=1.0, w=W2, t0=0.1j, q=[0.03])
        spl = eta_sigma(p1_dd, (0,))
        chain = characteristic_cycle(p1_dd.fan, [1, 2])
        single = integrate_cycle(chain, params, spl, CFG)
        double = integrate_cycle(chain.scaled(2), params, spl, CFG)
        assert double.value == pytest.approx(2 * single.value, rel=1e-12)

    def test_chain_linearity(self, p1_dd):
        params = EquivariantParams.make(z=1.0, w=W2, t0=0.1j, q=[0.03])
        spl = eta_sigma(p1_dd, (0,))
        a = characteristic_cycle(p1_dd.fan, [1, 2])
        b = characteristic_cycle(p1_dd.fan, [2, 3])
        ia = integrate_cycle(a, params, spl, CFG)
        ib = integrate_cycle(b, params, spl, CFG)
        iab = integrate_cycle(a + b, params, spl, CFG)
        assert abs(iab.value - (ia.value + ib.value)) <= 10 * (
            ia.error_estimate + ib.error_estimate + iab.error_estimate
        )

    def test_tail_honesty_doubling_radius(self, p1_dd):
        params = EquivariantParams.make(z=1.0, w=W2, t0=0.0, q=[0.05])
        spl = eta_sigma(p1_dd, (0,))
        chain = characteristic_cycle(p1_dd.fan, [1, 2])
        base = integrate_cycle(chain, params, spl, QuadratureConfig(adaptive_tol=1e-10, radius=12.0))
        wide = integrate_cycle(chain, params, spl, QuadratureConfig(adaptive_tol=1e-10, radius=24.0))
        assert abs(base.value - wide.value) <= base.tail_bound + 1e-12 * abs(base.value)

    def test_shift_invariance(self, p1_dd):
        params = EquivariantParams.make(z=1.0, w=W2, t0=0.2, q=[0.02])
        spl = eta_sigma(p1_dd, (0,))
        chain = characteristic_cycle(p1_dd.fan, [1, 2])
        vals = []
        for t in (0, 1, 5):
            moved = shifted_cycle(chain, (0,), [1], t)
            vals.append(integrate_cycle(moved, params, spl, CFG).value)
        scale = max(abs(v) for v in vals)
        assert max(abs(v - vals[0]) for v in vals) < 1e-8 * scale

    def test_eta_independence_p1(self, p1_dd):
        params = EquivariantParams.make(z=1.0, w=W2, t0=0.3 + 0.1j, q=[0.01])
        chain = characteristic_cycle(p1_dd.fan, [1, 2])
        resid, _, _ = eta_independence_check(
            chain, params, eta_sigma(p1_dd, (0,)), eta_sigma(p1_dd, (1,)), CFG
        )
        assert resid < 1e-8

    def test_eta_independence_p2_mixed_splitting(self, p2_dd):
        params = EquivariantParams.make(z=1.0, w=W3, t0=0.1 - 0.2j, q=[0.01])
        chain = characteristic_cycle(p2_dd.fan, [1, 1, 1])
        mixed = splitting_from_rows(
            p2_dd, [[Fraction(1, 3)], [Fraction(1, 3)], [Fraction(1, 3)]]
        )
        resid, _, _ = eta_independence_check(
            chain, params, eta_sigma(p2_dd, (0, 1)), mixed,
            QuadratureConfig(adaptive_tol=1e-9),
        )
        assert resid < 1e-7

    def test_threefolds_rejected(self):
        from toriccharge.fan import StackyFan, divisor_data
        from toriccharge.cycles import characteristic_cycle

        fan = StackyFan.make(
            n=3,
            rays=[[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, -1, -1]],
            max_cones=[[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]],
        )
        divisor_data(fan, [[1, 1, 1, 1]])  # the lattice layer itself is fine
        with pytest.raises(NotImplementedError):
            characteristic_cycle(fan, [1, 1, 1, 1])

    def test_identity_with_extension_vector(self):
        # The full pipeline on the extended projective line: the extension
        # vector adds a superpotential term and a second degree parameter,
        # and the two sides of the identity still agree.
        from fractions import Fraction as F

        from toriccharge.fan import StackyFan, divisor_data, fixed_points
        from toriccharge.gammaclasses import h_coefficient
        from toriccharge.series import ifunction_localized

        fan = StackyFan.make(
            n=1, rays=[[1], [-1]], max_cones=[[0], [1]], extra=[[1]]
        )
        dd = divisor_data(fan, [[2, 1, -1], [-3, -1, 2]])
        w = [-1.9 + 0.3j, 0.8 - 0.2j, 0.45 + 0.15j]
        params = EquivariantParams.make(z=1.0, w=w, t0=0.3 + 0.1j, q=[0.02, 0.03])
        chain = characteristic_cycle(fan, [1, 2])
        lhs = integrate_cycle(
            chain, params, eta_sigma(dd, (0,)), QuadratureConfig(adaptive_tol=1e-11)
        )
        rhs = 0j
        for fp in fixed_points(dd):
            h = h_coefficient(dd, fp.sigma, fp.v, [1, 2], 1.0, w)
            ser = ifunction_localized(dd, fp.sigma, fp.v, params, F(18), z_value=-1.0)
            rhs += h * ser.evaluate(params.t0, params.q)
        resid = abs(lhs.value - rhs) / max(abs(lhs.value), abs(rhs))
        assert resid < 1e-7

    def test_node_trace(self, p1_dd, tmp_path):
        params = EquivariantParams.make(z=1.0, w=W2, t0=0.0, q=[0.05])
        spl = eta_sigma(p1_dd, (0,))
        chain = characteristic_cycle(p1_dd.fan, [1, 2])
        trace = tmp_path / "nodes.csv"
        cfg = QuadratureConfig(adaptive_tol=1e-6, trace_path=str(trace))
        integrate_cycle(chain, params, spl, cfg)
        lines = trace.read_text().strip().splitlines()
        assert len(lines) > 10
        assert lines[0].count(";") == 4
