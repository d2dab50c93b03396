"""Diversity-multiplexing tradeoff curves, offsets and thresholds."""
import math

import numpy as np
import pytest

from mimodmt import (
    ChannelDims,
    IidChannel,
    KeyholeMode,
    MuxGainDef,
    combined_dmt,
    convergence_threshold,
    d_gamma_from_outage,
    d_prime_numeric,
    keyhole_dmt_asymptotic,
    make_exponential_correlation,
    model_dmt_point,
    model_outage_ln,
    outage_from_dmt,
    prop2_dmt,
    prop3_dmt,
    prop4_dmt,
    rate_from_mux,
    snr_offset_c,
    th4_dmt,
    th5_dmt,
    th6_dmt,
    zheng_tse_dmt,
)
from mimodmt.errors import ParameterError, PrecisionError, RegimeError
from mimodmt.moments import CapacityMoments, db_to_gamma, iid_moments


def _moments(gamma, n=2):
    return iid_moments(gamma, ChannelDims(n, n))


class TestMuxGainDef:
    def test_parse(self):
        assert MuxGainDef.parse("rawlog") is MuxGainDef.RAW_LOG
        assert MuxGainDef.parse("offsetlog") is MuxGainDef.OFFSET_LOG
        assert MuxGainDef.parse("meancap") is MuxGainDef.MEAN_CAPACITY

    def test_parse_rejects_unknown(self):
        with pytest.raises(ParameterError):
            MuxGainDef.parse("shannon")


class TestRateFromMux:
    def test_zero_r_is_zero_rate(self):
        mom = _moments(10.0)
        for mux in MuxGainDef:
            assert rate_from_mux(0.0, mux, 10.0, mom, 2, a=math.e) == 0.0

    def test_full_rank_mean_capacity(self):
        mom = _moments(10.0)
        assert rate_from_mux(2.0, MuxGainDef.MEAN_CAPACITY, 10.0, mom, 2) == pytest.approx(
            mom.mean_nats
        )

    def test_rawlog_arithmetic(self):
        mom = _moments(1000.0, n=10)
        rate = rate_from_mux(9.0, MuxGainDef.RAW_LOG, 1000.0, mom, 10)
        assert rate == pytest.approx(9 * math.log(1000.0))

    def test_rawlog_regime_error(self):
        with pytest.raises(RegimeError):
            rate_from_mux(1.0, MuxGainDef.RAW_LOG, 0.5, _moments(0.5), 2)

    def test_offsetlog_needs_gamma_above_a(self):
        with pytest.raises(RegimeError):
            rate_from_mux(1.0, MuxGainDef.OFFSET_LOG, 2.0, _moments(2.0), 2, a=math.e)

    def test_r_out_of_range(self):
        with pytest.raises(ParameterError):
            rate_from_mux(3.0, MuxGainDef.RAW_LOG, 10.0, _moments(10.0), 2)


class TestDGamma:
    def test_no_outage_decay(self):
        assert d_gamma_from_outage(1.0, 10.0) == 0.0

    def test_exact_power_law(self):
        assert d_gamma_from_outage(10.0**-2, 10.0) == pytest.approx(2.0)

    def test_simple_value(self):
        assert d_gamma_from_outage(0.01, 100.0) == pytest.approx(1.0)

    def test_zero_outage_is_infinite(self):
        assert math.isinf(d_gamma_from_outage(0.0, 10.0))

    def test_gamma_at_most_one_rejected(self):
        with pytest.raises(RegimeError):
            d_gamma_from_outage(0.1, 1.0)


class TestDPrimeNumeric:
    @pytest.mark.parametrize("c", [1e-3, 1.0, 1e3])
    @pytest.mark.parametrize("d", [0.5, 1.0, 4.0])
    def test_recovers_power_law(self, c, d):
        est = d_prime_numeric(lambda g: c * g**-d, 100.0)
        assert est == pytest.approx(d, rel=1e-12)

    def test_constant_gives_zero(self):
        assert d_prime_numeric(lambda g: 0.123, 50.0) == pytest.approx(0.0, abs=1e-12)

    def test_model_2x2_near_one_at_high_snr(self):
        model = IidChannel(ChannelDims(2, 2))
        est = d_prime_numeric(
            lambda g: model_outage_ln(model, MuxGainDef.MEAN_CAPACITY, 1.0, g),
            1000.0,
            log_domain=True,
        )
        assert abs(est - 1.0) <= 0.1

    def test_underflow_raises(self):
        with pytest.raises(PrecisionError):
            d_prime_numeric(lambda g: 0.0, 100.0)


class TestSnrOffset:
    def test_pure_power_law_gives_one(self):
        gamma, d = 50.0, 1.5
        assert snr_offset_c(gamma**-d, d, gamma) == pytest.approx(1.0)

    def test_scaled_power_law(self):
        gamma = 123.0
        assert snr_offset_c(5 * gamma**-2, 2.0, gamma) == pytest.approx(5.0)

    def test_round_trip_with_outage(self):
        for c in [1e-3, 1.0, 1e3]:
            for d in [0.5, 1.0, 4.0]:
                gamma = 200.0
                p = outage_from_dmt(c, d, gamma)
                if p < 1.0:
                    assert snr_offset_c(p, d, gamma) == pytest.approx(c, rel=1e-10)

    def test_model_2x2_offset_order_one(self):
        point = model_dmt_point(
            IidChannel(ChannelDims(2, 2)), MuxGainDef.MEAN_CAPACITY, 1.0, db_to_gamma(10.0)
        )
        assert 0.1 <= point.c_gamma <= 10.0


class TestZhengTse:
    def test_figure_points(self):
        assert zheng_tse_dmt(ChannelDims(10, 10), 9.0) == pytest.approx(1.0)
        assert zheng_tse_dmt(ChannelDims(2, 2), 1.0) == pytest.approx(1.0)
        assert zheng_tse_dmt(ChannelDims(9, 10), 8.7) == pytest.approx(0.6)

    def test_endpoints(self):
        d = ChannelDims(4, 3)
        assert zheng_tse_dmt(d, 0.0) == pytest.approx(12.0)
        assert zheng_tse_dmt(d, 3.0) == pytest.approx(0.0)

    def test_piecewise_linear_and_decreasing(self):
        d = ChannelDims(5, 4)
        grid = np.linspace(0, 4, 81)
        vals = [zheng_tse_dmt(d, float(r)) for r in grid]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
        # linear between consecutive integers: midpoint equals chord value
        for k in range(4):
            mid = zheng_tse_dmt(d, k + 0.5)
            chord = 0.5 * (zheng_tse_dmt(d, float(k)) + zheng_tse_dmt(d, float(k + 1)))
            assert mid == pytest.approx(chord)

    def test_out_of_range(self):
        with pytest.raises(ParameterError):
            zheng_tse_dmt(ChannelDims(2, 2), 2.5)


class TestKeyholeAsymptotic:
    def test_endpoints(self):
        d = ChannelDims(4, 2)
        assert keyhole_dmt_asymptotic(d, 0.0) == pytest.approx(2.0)
        assert keyhole_dmt_asymptotic(d, 1.0) == pytest.approx(0.0)
        assert keyhole_dmt_asymptotic(d, 0.5) == pytest.approx(1.0)

    def test_out_of_range(self):
        with pytest.raises(ParameterError):
            keyhole_dmt_asymptotic(ChannelDims(2, 2), 1.5)


class TestProp2:
    def test_full_rank_vanishes(self):
        pair = prop2_dmt(lambda g: _moments(g, n=4), 25.0, 4.0, 4)
        assert pair.d_gamma == pytest.approx(0.0)
        assert pair.d_prime == pytest.approx(0.0)

    def test_quadratic_scaling_in_r(self):
        m_star = 4
        f = lambda g: _moments(g, n=4)
        full = prop2_dmt(f, 25.0, 2.0, m_star)
        half = prop2_dmt(f, 25.0, 3.0, m_star)
        assert full.d_prime / half.d_prime == pytest.approx(4.0)
        assert full.d_gamma / half.d_gamma == pytest.approx(4.0)

    def test_matches_square_closed_form(self):
        pair = prop2_dmt(lambda g: _moments(g, n=10), 25.0, 9.0, 10)
        assert abs(pair.d_prime - 0.9) / 0.9 <= 0.15

    def test_degenerate_variance(self):
        zero_var = lambda g: CapacityMoments(mean_nats=1.0, var_nats2=0.0, gamma=g)
        with pytest.raises(RegimeError):
            prop2_dmt(zero_var, 25.0, 1.0, 2)


class TestTh4:
    def test_full_rank(self):
        res = th4_dmt(3, 3.0, 100.0)
        assert res.d_prime == 0.0
        assert res.c_gamma == pytest.approx(0.5)

    def test_arithmetic(self):
        res = th4_dmt(2, 1.0, 100.0)
        assert res.d_prime == pytest.approx(0.95)

    def test_ten_percent_boundary_at_25(self):
        res = th4_dmt(5, 3.0, 25.0)
        assert res.d_prime == pytest.approx(0.9 * (5 - 3) ** 2)

    def test_asymptote(self):
        res = th4_dmt(2, 1.0, 1e8)
        assert abs(res.d_prime - 1.0) <= 1e-3

    def test_unreliable_flag(self):
        # at gamma = 1, d_gamma * ln(gamma/e) = 1, on the validity boundary
        assert not th4_dmt(2, 1.0, 1.0).reliable
        assert not th4_dmt(2, 0.0, 100.0).reliable  # r = 0 collapse
        assert th4_dmt(2, 1.0, 100.0).reliable


class TestProp3:
    def test_r_zero_same_for_both(self):
        raw = prop3_dmt(3, 0.0, 100.0, MuxGainDef.RAW_LOG)
        off = prop3_dmt(3, 0.0, 100.0, MuxGainDef.OFFSET_LOG)
        expected = 9 * (1 - 1 / 10)
        assert raw.d_prime == pytest.approx(expected)
        assert off.d_prime == pytest.approx(expected)

    def test_offset_ratio_is_exp_2r_n_minus_r(self):
        gamma = 1e6
        raw = prop3_dmt(10, 9.0, gamma, MuxGainDef.RAW_LOG)
        off = prop3_dmt(10, 9.0, gamma, MuxGainDef.OFFSET_LOG)
        assert raw.c_gamma_limit / off.c_gamma_limit == pytest.approx(math.exp(18.0))

    def test_offsetlog_at_its_threshold(self):
        res = prop3_dmt(2, 1.0, 900.0, MuxGainDef.OFFSET_LOG)
        assert res.d_prime == pytest.approx(0.9)

    def test_meancap_rejected(self):
        with pytest.raises(ParameterError):
            prop3_dmt(2, 1.0, 100.0, MuxGainDef.MEAN_CAPACITY)

    def test_full_rank_zero(self):
        assert prop3_dmt(2, 2.0, 100.0, MuxGainDef.RAW_LOG).d_prime == 0.0


class TestConvergenceThreshold:
    def test_meancap_constant(self):
        assert convergence_threshold(MuxGainDef.MEAN_CAPACITY, 10, 9.0) == pytest.approx(25.0)
        assert convergence_threshold(MuxGainDef.MEAN_CAPACITY, 2, 1.0) == pytest.approx(25.0)

    def test_offsetlog(self):
        assert convergence_threshold(MuxGainDef.OFFSET_LOG, 2, 1.0) == pytest.approx(900.0)

    def test_rawlog_takes_max(self):
        val = convergence_threshold(MuxGainDef.RAW_LOG, 10, 9.0)
        assert val == pytest.approx(math.exp(28.0))

    def test_full_rank_infinite(self):
        assert math.isinf(convergence_threshold(MuxGainDef.MEAN_CAPACITY, 2, 2.0))

    def test_accuracy_knob(self):
        loose = convergence_threshold(MuxGainDef.OFFSET_LOG, 2, 1.0, accuracy=0.2)
        assert loose == pytest.approx(225.0)


class TestProp4:
    def test_full_rank_vanishes(self):
        assert prop4_dmt(ChannelDims(9, 10), 9.0, 100.0).d_prime == pytest.approx(0.0)

    def test_dprime_twice_dgamma(self):
        pair = prop4_dmt(ChannelDims(9, 10), 8.0, 100.0)
        assert pair.d_prime / pair.d_gamma == pytest.approx(2.0)

    def test_log_growth(self):
        # one e-fold of SNR adds exactly (m* - r)^2 / (-ln(1 - beta*))
        d = ChannelDims(9, 10)
        v1 = prop4_dmt(d, 8.7, 100.0).d_prime
        v2 = prop4_dmt(d, 8.7, 100.0 * math.e).d_prime
        assert v2 - v1 == pytest.approx((9 - 8.7) ** 2 / (-math.log(1 - 0.9)), rel=1e-9)
        assert v1 > 0

    def test_square_rejected(self):
        with pytest.raises(RegimeError):
            prop4_dmt(ChannelDims(4, 4), 1.0, 100.0)


class TestCombined:
    def test_high_snr_hits_asymptote(self):
        d = ChannelDims(9, 10)
        assert combined_dmt(d, 8.7, 1e12) == pytest.approx(0.6)

    def test_near_offset_vanishes(self):
        d = ChannelDims(9, 10)
        from mimodmt.moments import iid_power_offset

        a = iid_power_offset(0.9)
        assert combined_dmt(d, 8.7, a * 1.0001) == pytest.approx(0.0, abs=1e-3)

    def test_unique_crossover(self):
        d = ChannelDims(9, 10)
        grid = np.logspace(0.5, 12, 400)
        active = [combined_dmt(d, 8.7, float(g)) < zheng_tse_dmt(d, 8.7) - 1e-12 for g in grid]
        # the low-SNR branch is a contiguous prefix: exactly one switch
        switches = sum(1 for a, b in zip(active, active[1:]) if a != b)
        assert switches == 1


class TestTh5:
    def test_identity_matches_prop4_at_beta_star_tenth(self):
        dims = ChannelDims(40, 4)
        rt = make_exponential_correlation(40, 0.0)
        rr = make_exponential_correlation(4, 0.0)
        # the asymptotic gap is -ln(1 - beta*)/beta* - 1 ~ 5.4% at beta* = 0.1;
        # a finite-SNR offset-a term adds ~1% at 20 dB, so check at high SNR
        v = th5_dmt(dims, 2.0, 1e6, rt, rr)
        ref = prop4_dmt(dims, 2.0, 1e6).d_prime
        assert abs(v - ref) / ref <= 0.06

    def test_identity_matches_prop4_at_beta_star_hundredth(self):
        dims = ChannelDims(200, 2)
        rt = make_exponential_correlation(200, 0.0)
        rr = make_exponential_correlation(2, 0.0)
        v = th5_dmt(dims, 1.0, 100.0, rt, rr)
        ref = prop4_dmt(dims, 1.0, 100.0).d_prime
        assert abs(v - ref) / ref <= 0.01

    def test_full_rank_vanishes(self):
        dims = ChannelDims(16, 4)
        v = th5_dmt(
            dims,
            4.0,
            100.0,
            make_exponential_correlation(16, 0.3),
            make_exponential_correlation(4, 0.3),
        )
        assert v == pytest.approx(0.0)

    def test_decreases_with_transmit_correlation(self):
        dims = ChannelDims(32, 4)
        rr = make_exponential_correlation(4, 0.0)
        vals = [
            th5_dmt(dims, 2.0, 100.0, make_exponential_correlation(32, rho), rr)
            for rho in (0.0, 0.3, 0.6, 0.9)
        ]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_singular_rr_rejected(self):
        dims = ChannelDims(8, 2)
        rr_singular = type(make_exponential_correlation(2, 0.0))(np.ones((2, 2)))
        with pytest.raises(RegimeError):
            th5_dmt(dims, 1.0, 100.0, make_exponential_correlation(8, 0.0), rr_singular)


class TestTh6:
    def _mode(self, m, n, b=1.0):
        return KeyholeMode(
            b=b,
            rt=make_exponential_correlation(m, 0.0),
            rr=make_exponential_correlation(n, 0.0),
        )

    def test_single_identity_mode(self):
        dims = ChannelDims(4, 2)
        v = th6_dmt(dims, 0.5, 100.0, [self._mode(4, 2)])
        assert v == pytest.approx(0.25 * math.log(100.0) / (1 / 4 + 1 / 2))

    def test_full_rank_vanishes(self):
        dims = ChannelDims(4, 2)
        assert th6_dmt(dims, 1.0, 100.0, [self._mode(4, 2)]) == pytest.approx(0.0)

    def test_denominator_linearity(self):
        # doubling every squared Frobenius norm (two identical modes with
        # r measured against the same mode count) halves the prefactor
        dims = ChannelDims(4, 4)
        single = th6_dmt(dims, 0.5, 100.0, [self._mode(4, 4)])
        double = th6_dmt(dims, 0.5, 100.0, [self._mode(4, 4), self._mode(4, 4)])
        # M doubles too: (2 - 0.5)^2 vs (1 - 0.5)^2, denominator doubled
        assert double / single == pytest.approx((1.5 / 0.5) ** 2 / 2)

    def test_out_of_range(self):
        with pytest.raises(ParameterError):
            th6_dmt(ChannelDims(4, 2), 1.5, 100.0, [self._mode(4, 2)])


class TestOutageFromDmt:
    def test_simple(self):
        assert outage_from_dmt(1.0, 1.0, 100.0) == pytest.approx(0.01)

    def test_high_offset_large_snr(self):
        assert outage_from_dmt(1e4, 1.0, 1e6) == pytest.approx(0.01)

    def test_capped_at_one(self):
        assert outage_from_dmt(1e4, 1.0, 10.0) == 1.0

    def test_bad_offset(self):
        with pytest.raises(ParameterError):
            outage_from_dmt(0.0, 1.0, 10.0)


class TestDefinitionOrdering:
    def test_closed_form_dprime_ordering(self):
        # raw-log <= offset-log <= mean-capacity closed forms, 10x10 r = 9
        for gamma in np.logspace(1, 6, 30):
            raw = prop3_dmt(10, 9.0, float(gamma), MuxGainDef.RAW_LOG).d_prime
            off = prop3_dmt(10, 9.0, float(gamma), MuxGainDef.OFFSET_LOG).d_prime
            mean = th4_dmt(10, 9.0, float(gamma)).d_prime
            assert raw <= off + 1e-12
            assert off <= mean + 1e-12


class TestOffsetDecreasesAtSmallR:
    def test_2x2_offset_sequence(self):
        model = IidChannel(ChannelDims(2, 2))
        gamma = db_to_gamma(10.0)
        cs = [
            model_dmt_point(model, MuxGainDef.MEAN_CAPACITY, r, gamma).c_gamma
            for r in (0.5, 0.2, 0.1, 0.05)
        ]
        assert all(b < a for a, b in zip(cs, cs[1:]))


class TestDmtPointConsistency:
    def test_offset_reconstructs_outage(self):
        model = IidChannel(ChannelDims(2, 2))
        point = model_dmt_point(model, MuxGainDef.MEAN_CAPACITY, 1.0, 100.0)
        rebuilt = point.c_gamma * point.gamma**-point.d_prime
        assert rebuilt == pytest.approx(point.p_out, rel=1e-10)

    def test_d_gamma_consistent(self):
        model = IidChannel(ChannelDims(2, 2))
        point = model_dmt_point(model, MuxGainDef.MEAN_CAPACITY, 1.0, 100.0)
        assert point.d_gamma == pytest.approx(-math.log(point.p_out) / math.log(100.0))
