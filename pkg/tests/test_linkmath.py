import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from amcsim.linkmath import (DEFAULT_MCS_TABLE, LinkParams, McsSpec, optimal_mcs,
                             per, q_function, rate, ser)

BPSK, QPSK, QAM16, QAM64 = DEFAULT_MCS_TABLE


class TestQFunction:
    def test_symmetry_at_zero(self):
        assert q_function(0.0) == 0.5

    def test_deep_tail(self):
        q = q_function(40.0)
        assert 0.0 <= q < 1e-300

    def test_derived_value(self):
        # frozen from a high-precision erfc evaluation
        assert q_function(4.4721) == pytest.approx(3.87275948309e-6, rel=1e-9)

    def test_against_library_erfc(self):
        # independent route: the scipy/libm erfc over a wide grid
        for x in np.linspace(-8.0, 37.0, 901):
            ref = 0.5 * float(special.erfc(x / math.sqrt(2.0)))
            assert q_function(float(x)) == pytest.approx(ref, rel=1e-10)

    def test_negative_branch(self):
        assert q_function(-1.3) == pytest.approx(1.0 - q_function(1.3), rel=1e-12)

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(ValueError):
            q_function(bad)


class TestSer:
    def test_bpsk_at_zero(self):
        assert ser(BPSK, 0.0) == 0.5

    def test_qpsk_at_zero(self):
        assert ser(QPSK, 0.0) == pytest.approx(0.5, rel=1e-12)

    def test_bpsk_at_10db(self):
        assert ser(BPSK, 10.0) == pytest.approx(3.87210821552e-6, rel=1e-9)

    def test_qam_formula(self):
        g = 7.5
        expected = 2 * (1 - 0.25) * q_function(math.sqrt(3 * 4 * g / 15))
        assert ser(QAM16, g) == pytest.approx(expected, rel=1e-12)

    def test_negative_gamma_rejected(self):
        with pytest.raises(ValueError):
            ser(BPSK, -0.1)

    @pytest.mark.parametrize("mcs", DEFAULT_MCS_TABLE)
    def test_monotone_nonincreasing(self, mcs):
        grid = np.concatenate([[0.0], np.logspace(-3, 4, 200)])
        vals = [ser(mcs, float(g)) for g in grid]
        assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("mcs", DEFAULT_MCS_TABLE)
    def test_bounded(self, mcs):
        for g in [0.0, 1e-6, 0.1, 1.0, 100.0]:
            assert 0.0 <= ser(mcs, g) <= 1.0


class TestPer:
    def test_huge_gamma_is_zero(self):
        assert per(QAM64, 1e12, 1000) == 0.0

    def test_single_symbol_reduces_to_ser(self):
        assert per(BPSK, 0.0, 1) == pytest.approx(0.5, rel=1e-12)

    def test_derived_16qam(self):
        assert per(QAM16, 22.3, 1000) == pytest.approx(1.78596534261e-2, rel=1e-9)

    @pytest.mark.parametrize("mcs", DEFAULT_MCS_TABLE)
    @pytest.mark.parametrize("g", [0.5, 5.0, 50.0])
    def test_per_at_least_ser(self, mcs, g):
        assert per(mcs, g, 1000) >= ser(mcs, g) - 1e-15

    def test_nondecreasing_in_n(self):
        vals = [per(QAM16, 20.0, n) for n in (1, 10, 100, 1000, 10000)]
        assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))

    def test_no_underflow_for_tiny_ser(self):
        # naive (1-p)^N would round to 1.0 here
        p = per(BPSK, 30.0, 1000)
        assert 0.0 < p < 1e-9

    @pytest.mark.parametrize("mcs,g", [
        (BPSK, 2.0), (BPSK, 4.0), (BPSK, 6.0),
        (QPSK, 5.0), (QPSK, 9.0), (QPSK, 13.0),
        (QAM16, 18.0), (QAM16, 22.3), (QAM16, 30.0),
        (QAM64, 60.0), (QAM64, 80.0), (QAM64, 110.0),
    ])
    def test_monte_carlo_oracle(self, mcs, g):
        # per-symbol simulation: a packet fails iff any of N symbols errs
        rng = np.random.default_rng(hash((mcs.index, g)) % 2**32)
        n_pkts = 100_000
        p_sym = ser(mcs, g)
        fails = (rng.binomial(1000, p_sym, size=n_pkts) > 0).mean()
        p = per(mcs, g, 1000)
        sigma = math.sqrt(max(p * (1.0 - p), 1e-12) / n_pkts)
        assert abs(fails - p) <= 3.0 * sigma


class TestRate:
    def test_all_errors_gives_zero(self):
        assert rate(BPSK, 0.0, 1000) == 0.0

    def test_clean_channel_full_rate(self):
        assert rate(QPSK, 1e12, 1000) == 2000.0

    def test_regression_64qam(self):
        assert rate(QAM64, 100.0, 1000) == pytest.approx(5999.52591805601, rel=1e-12)

    @given(st.floats(min_value=0.0, max_value=1e6), st.sampled_from(DEFAULT_MCS_TABLE))
    @settings(max_examples=200)
    def test_bounded_by_peak(self, g, mcs):
        r = rate(mcs, g, 1000)
        assert 0.0 <= r <= mcs.bits_per_symbol * 1000


class TestOptimalMcs:
    def test_huge_gamma_picks_64qam(self):
        assert optimal_mcs(1e6, 1000) == 4

    def test_zero_gamma_ties_to_bpsk(self):
        assert optimal_mcs(0.0, 1000) == 1

    def test_brute_force_at_10db(self):
        g = 10.0
        rates = [rate(m, g, 1000) for m in DEFAULT_MCS_TABLE]
        expected = DEFAULT_MCS_TABLE[int(np.argmax(rates))].index
        assert optimal_mcs(g, 1000) == expected == 2

    def test_brute_force_at_13p5db(self):
        g = 10 ** 1.35
        rates = [rate(m, g, 1000) for m in DEFAULT_MCS_TABLE]
        assert optimal_mcs(g, 1000) == DEFAULT_MCS_TABLE[int(np.argmax(rates))].index == 3

    @given(st.floats(min_value=0.0, max_value=1e4))
    @settings(max_examples=100)
    def test_scale_invariance_of_argmax(self, g):
        rates = np.array([rate(m, g, 1000) for m in DEFAULT_MCS_TABLE])
        assert np.argmax(rates) == np.argmax(7.3 * rates)

    def test_empty_table_rejected(self):
        with pytest.raises(ValueError):
            optimal_mcs(1.0, 1000, table=())


class TestSpecs:
    def test_default_table_shape(self):
        assert [m.bits_per_symbol for m in DEFAULT_MCS_TABLE] == [1, 2, 4, 6]
        assert [m.constellation_size for m in DEFAULT_MCS_TABLE] == [2, 4, 16, 64]
        assert [m.index for m in DEFAULT_MCS_TABLE] == [1, 2, 3, 4]

    def test_inconsistent_bits_rejected(self):
        with pytest.raises(ValueError):
            McsSpec(1, 3.0, 16)

    def test_link_params_validation(self):
        assert LinkParams().data_fraction == pytest.approx(0.9)
        with pytest.raises(ValueError):
            LinkParams(symbols_per_frame=0)
        with pytest.raises(ValueError):
            LinkParams(sensing_fraction=1.5)
