from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from vorcdf import lattice_bounds as lb
from vorcdf import specfun
from vorcdf.errors import DomainError, ValidityError
from vorcdf.lattice_bounds import AwgnParams
from vorcdf.results import CdfCurve, evaluate

SIGMA_A, SIGMA_B = lb.SIGMA2_FIGURE


def r_at(n, x):
    return lb.radius_for_x(n, x)


class TestCdfBounds:
    def test_ball_examples(self):
        assert lb.g_ball(7, specfun.r_eff(7)) == pytest.approx(1.0)
        assert lb.g_ball(7, 0.0) == 0.0
        assert lb.g_ball(4, specfun.r_eff(4) * 2**0.25) == 1.0

    def test_jensen_examples(self):
        assert lb.g_jensen(9, specfun.r_eff(9)) == pytest.approx(0.5)
        assert lb.g_jensen(9, 0.0) == 0.0
        assert lb.g_jensen(4, r_at(4, 3.0)) == pytest.approx(0.75)

    @given(st.integers(1, 500), st.floats(0, 5))
    def test_jensen_below_ball(self, n, rel):
        r = rel * specfun.r_eff(n)
        assert lb.g_jensen(n, r) <= lb.g_ball(n, r) + 1e-15

    def test_arrays(self):
        r = np.linspace(0, 2, 11)
        out = lb.g_jensen(16, r)
        assert out.shape == r.shape
        assert np.all(np.diff(out) >= 0)

    def test_covering_pieces(self):
        n = 13
        eta = lb.EtaConst.for_dim(n)
        assert lb.g_covering(n, r_at(n, 2 * eta.far_threshold)) == 1.0
        assert lb.g_covering(n, r_at(n, eta.eta), clamp=False) == pytest.approx(1 - 24 * math.exp(-eta.eta / 2))
        n = 200
        eta200 = 25 * math.log(4 / 3)
        assert lb.EtaConst.for_dim(n).eta == pytest.approx(eta200)
        expected = 1 - math.exp(-1) - 23 * math.exp(-eta200 / 2)
        assert lb.g_covering(n, specfun.r_eff(n)) == pytest.approx(expected, rel=1e-12)

    def test_covering_domain(self):
        with pytest.raises(ValidityError):
            lb.g_covering(12, 1.0)

    @pytest.mark.parametrize("n", [13, 20, 64, 300])
    def test_covering_clamped_monotone(self, n):
        r = np.linspace(0, 3 * specfun.r_eff(n), 2001)
        g = lb.g_covering(n, r)
        assert np.all((g >= 0) & (g <= 1))
        assert np.all(np.diff(g) >= 0)

    def test_rogers(self):
        assert lb.g_rogers_lower(13, 0.0) == 0.0
        eta = lb.EtaConst.for_dim(13).eta
        expected = max(0.0, 1 - math.exp(-eta / 2) - 7 * math.exp(-eta))
        assert lb.g_rogers_lower(13, r_at(13, eta / 2)) == pytest.approx(expected)
        r = np.linspace(0, r_at(100, 0.999 * lb.EtaConst.for_dim(100).eta), 50)
        assert np.all(np.diff(lb.g_rogers_lower(100, r)) >= 0)
        with pytest.raises(ValidityError):
            lb.g_rogers_lower(13, r_at(13, 2 * eta))


class TestNsm:
    def test_ball_values(self):
        assert lb.nsm_ball(1) == pytest.approx(1 / 12, rel=1e-14)
        assert lb.nsm_ball(2) == pytest.approx(1 / (4 * math.pi), rel=1e-14)
        assert lb.nsm_ball(4096) == pytest.approx(1 / (2 * math.pi * math.e), rel=1e-2)

    def test_upper_domain(self):
        assert lb.nsm_upper(3) > 0
        with pytest.raises(ValidityError):
            lb.nsm_upper(2)
        with pytest.raises(ValidityError):
            lb.nsm_upper(1)

    def test_upper_window_at_40(self):
        # ratio is (n+2)/n / sinc(2/n) = 1.0543 at n = 40, so a 5% window is too tight
        ratio = lb.nsm_upper(40) / lb.nsm_ball(40)
        assert ratio == pytest.approx(1.05 / (math.sin(math.pi / 20) / (math.pi / 20)), rel=1e-13)
        assert 1 < ratio < 1 + 4 / 40

    @pytest.mark.parametrize("n", [3, 5, 8, 24, 100, 1000])
    def test_upper_matches_integral(self, n):
        # n V^{2/n} G = int_0^inf dt / (1 + t^{n/2})
        def f(t):
            return math.exp(-specfun.log1pexp(n / 2 * math.log(t))) if t > 0 else 1.0

        val = sum(integrate.quad(f, a, b, epsrel=1e-12, limit=400)[0] for a, b in ((0, 1), (1, 2), (2, np.inf)))
        lhs = lb.nsm_upper(n) * n * math.exp(specfun.ball_volume(n).log_magnitude * 2 / n)
        assert lhs == pytest.approx(val, rel=1e-8)

    def test_ratio_closed_form(self):
        for n in (3, 8, 50):
            assert lb.nsm_ratio_bound(n) == pytest.approx(lb.nsm_upper(n) / lb.nsm_ball(n), rel=1e-13)

    def test_ordering_invariants(self):
        for n in range(3, 400):
            assert lb.nsm_ball(n) <= lb.nsm_upper(n)
            assert lb.nsm_ball(n) <= lb.nsm_zador(n)
            if n >= 8:
                assert lb.nsm_ratio_bound(n) <= 1 + 4 / n

    def test_npm(self):
        for n in (3, 10, 40):
            assert lb.npm_upper(n, 2) == pytest.approx(lb.nsm_upper(n), rel=1e-14)
        v14 = 2**4 / math.factorial(4)
        expected = 1 / (4 * v14 ** (1 / 4) * math.sin(math.pi / 4) / (math.pi / 4))
        assert lb.npm_upper(4, 1) == pytest.approx(expected, rel=1e-13)
        assert lb.npm_ball(4, 1) < lb.npm_upper(4, 1)
        with pytest.raises(ValidityError):
            lb.npm_upper(3, 3)

    def test_npm_tail_chain(self):
        # The Markov argument needs (n+p)/n / sinc(p/n) - 1 < 2p/n for n >= 4p.
        for p in (0.5, 1, 2, 3, 7.5):
            for n in range(math.ceil(4 * p), 600):
                excess = lb.npm_upper(n, p) / lb.npm_ball(n, p) - 1
                assert excess < 2 * p / n
        assert lb.npm_tail(40, 2, 0.5) == pytest.approx(0.2)
        with pytest.raises(ValidityError):
            lb.npm_tail(7, 2, 1.0)

    def test_tail(self):
        n = 40
        assert lb.nsm_tail(n, 8 / n) == pytest.approx(0.5)
        assert lb.nsm_tail(n, 5 / n) == pytest.approx(0.8)
        assert lb.nsm_tail(n, 1e12) < 1e-10
        assert lb.nsm_tail(n, 1e-6) == 1.0
        with pytest.raises(ValidityError):
            lb.nsm_tail(7, 1.0)

    def test_zador_lattice_difference(self):
        for n in (13, 50, 400):
            eta = lb.EtaConst.for_dim(n).eta
            diff = lb.nsm_zador_lattice(n) - lb.nsm_zador(n)
            expected = 60 * math.exp(-eta / 2) / math.exp(specfun.ball_volume(n).log_magnitude * 2 / n)
            assert diff == pytest.approx(expected, rel=1e-9)
            assert diff > 0
        with pytest.raises(ValidityError):
            lb.nsm_zador_lattice(12)

    def test_zador_lattice_excess_decays(self):
        rel = [lb.nsm_zador_lattice(n) / lb.nsm_zador(n) - 1 for n in (100, 400, 1000, 1500, 2000)]
        assert all(a > b for a, b in zip(rel, rel[1:]))
        # The excess is 60 n e^{-eta/2} / Gamma(1 + 2/n); it is still ~18 at n = 400
        # and first drops below 1e-6 near n = 1400.
        assert rel[1] > 1
        assert rel[3] < 1e-6

    def test_zador_over_ball_is_order_one_over_n(self):
        e256 = lb.nsm_zador(256) / lb.nsm_ball(256) - 1
        e512 = lb.nsm_zador(512) / lb.nsm_ball(512) - 1
        assert e512 / e256 == pytest.approx(0.5, abs=0.05)

    def test_cs_lower(self):
        assert 0 < lb.nsm_cs_lower(2) < lb.nsm_zador(2)
        n = 1024
        ratio = math.log(lb.nsm_zador(n) / lb.nsm_cs_lower(n)) / (2 * math.log(n) ** 2 / n**2)
        assert 0.5 < ratio < 2
        with pytest.raises(DomainError):
            lb.nsm_cs_lower(1)

    def test_cs_trend(self):
        d128 = math.log(lb.nsm_zador(128) / lb.nsm_cs_lower(128))
        d256 = math.log(lb.nsm_zador(256) / lb.nsm_cs_lower(256))
        pred = (2 * math.log(256) ** 2 / 256**2) / (2 * math.log(128) ** 2 / 128**2)
        assert d256 < d128
        assert d256 / d128 == pytest.approx(pred, rel=0.15)

    def test_expansions(self):
        e100 = abs(math.log(lb.nsm_zador(100)) - lb.zador_cs_expansions(100)[0])
        e200 = abs(math.log(lb.nsm_zador(200)) - lb.zador_cs_expansions(200)[0])
        assert e100 / e200 >= 3
        for n in (8, 64, 10**4):
            e1, e2 = lb.zador_cs_expansions(n)
            assert e1 - e2 == pytest.approx(2 * math.log(n) ** 2 / n**2, rel=1e-9)
        e1, _ = lb.zador_cs_expansions(10**4)
        direct = -math.log(2 * math.pi) - 1 + (math.log(math.pi * 1e4) - 2 * 0.5772156649015329) / 1e4
        assert abs(e1 - direct) < 1e-4
        with pytest.raises(ValidityError):
            lb.zador_cs_expansions(7)

    def test_nsm_from_cdf_ball(self):
        n = 6
        r = np.linspace(0, specfun.r_eff(n), 20001)
        assert lb.nsm_from_cdf(n, r, lb.g_ball(n, r)) == pytest.approx(lb.nsm_ball(n), rel=1e-6)


class TestAwgn:
    def test_params_validated(self):
        with pytest.raises(DomainError):
            AwgnParams(4, 0.0)
        with pytest.raises(DomainError):
            AwgnParams(0, 1.0)

    def test_sphere_packing(self):
        assert lb.pe_sphere_packing(AwgnParams(8, 1e-6)) < 1e-300
        for s2 in (0.01, 0.1, 1.0):
            assert lb.pe_sphere_packing(AwgnParams(2, s2)) == pytest.approx(math.exp(-1 / (2 * math.pi * s2)), rel=1e-12)
        vals = [lb.pe_sphere_packing(AwgnParams(24, s)) for s in np.linspace(0.01, 0.2, 30)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("n", [1, 2, 4, 16, 40, 128, 512])
    @pytest.mark.parametrize("s2", [SIGMA_A, SIGMA_B, 0.2 * SIGMA_A, 3 * SIGMA_A])
    def test_orderings(self, n, s2):
        p = AwgnParams(n, s2)
        sp = lb.pe_sphere_packing(p)
        assert sp <= lb.pe_new_awgn(p) <= 1
        assert sp <= lb.pe_mlb_awgn(p) <= 1

    @pytest.mark.parametrize("n", [2, 4, 40, 256])
    @pytest.mark.parametrize("s2", [SIGMA_A, SIGMA_B, 0.5 * SIGMA_A])
    def test_mlb_quadrature_vs_closed_form(self, n, s2):
        p = AwgnParams(n, s2)
        assert lb.pe_mlb_awgn(p) == pytest.approx(lb.pe_mlb_awgn_closed(p), abs=1e-11)

    def test_mlb_large_noise(self):
        assert lb.pe_mlb_awgn(AwgnParams(10, 1e4)) == pytest.approx(1.0, abs=1e-12)

    def test_integrand_peak(self):
        # at X = 1 the summand min(X, 1/X) / (1 + X) equals 1/2
        lx = 0.0
        assert math.exp(-abs(lx) - specfun.log1pexp(lx)) == 0.5

    @pytest.mark.parametrize("n", [4, 40, 200])
    def test_tolerance_self_consistency(self, n):
        p = AwgnParams(n, SIGMA_A)
        a = lb.pe_new_awgn(p, rtol=1e-9)
        b = lb.pe_new_awgn(p, rtol=5e-10)
        assert abs(a - b) < 1e-8

    @pytest.mark.parametrize("func,excess", [(lb.pe_new_awgn, "new"), (lb.pe_mlb_awgn, "mlb")])
    def test_monte_carlo_oracle(self, func, excess):
        n, s2 = 40, 0.95 / (2 * math.pi * math.e)
        rng = np.random.default_rng(20240601)
        log_re = specfun.log_r_eff(n)
        draws = 10**7
        acc = []
        for _ in range(10):
            dof = n + 2 if excess == "new" else n
            w = rng.chisquare(dof, draws // 10)
            lx = 0.5 * n * (math.log(s2) + np.log(w) - 2 * log_re)
            if excess == "new":
                h = np.exp(-np.abs(lx) - np.logaddexp(0, lx))
            else:
                h = np.where(lx <= 0, np.exp(np.minimum(lx, 0)), 0.0)
            acc.append(h)
        h = np.concatenate(acc)
        mc = lb.pe_sphere_packing(AwgnParams(n, s2)) + h.mean()
        se = h.std(ddof=1) / math.sqrt(h.size)
        assert abs(func(AwgnParams(n, s2)) - mc) < 3 * se


class TestGaussianMeasureIdentity:
    @pytest.mark.parametrize("n", [2, 4, 8, 16])
    @pytest.mark.parametrize("rho", [0.5, 1.0, 2.0])
    def test_ball(self, n, rho):
        radius = rho * specfun.r_eff(n)
        for sigma in np.geomspace(0.05, 2.0, 4):
            s2 = sigma * sigma
            direct = specfun.chi2_cdf(n, radius * radius / s2)
            via = lb.gaussian_measure_from_cdf(n, s2, lb.ball_log_cdf(n, radius), radius, [radius])
            assert via == pytest.approx(direct, abs=1e-8)

    def test_cube(self):
        # K = [-1/2, 1/2]^2 (unit area): its spherical CDF is known in closed form.
        def g(r):
            if r <= 0.5:
                return math.pi * r * r
            if r >= math.sqrt(0.5):
                return 1.0
            return math.pi * r * r - 4 * (r * r * math.acos(0.5 / r) - 0.5 * math.sqrt(r * r - 0.25))

        for s2 in (0.01, 0.05, 0.3):
            direct = math.erf(0.5 / math.sqrt(2 * s2)) ** 2
            via = lb.gaussian_measure_from_cdf(
                2, s2, lambda r: math.log(g(r)) if g(r) > 0 else -math.inf, 1 / math.sqrt(math.pi), [0.5, math.sqrt(0.5)]
            )
            assert via == pytest.approx(direct, abs=1e-8)


class TestResults:
    def test_evaluate_invalid(self):
        res = evaluate("nsm_upper", lb.nsm_upper, n=2)
        assert not res.valid and res.value is None and "divergent" in res.reason

    def test_evaluate_clamp(self):
        res = evaluate("x", lambda: 1.5, probability=True)
        assert res.value == 1.0 and res.clamped and res.raw == 1.5

    def test_curve_invariants(self):
        c = lb.jensen_curve(8, np.linspace(0, 2, 9))
        assert c.label == "g_jensen"
        with pytest.raises(DomainError):
            CdfCurve([0, 1], [0.5, 0.2], "bad", 1)
        with pytest.raises(DomainError):
            CdfCurve([1, 0], [0.1, 0.2], "bad", 1)
