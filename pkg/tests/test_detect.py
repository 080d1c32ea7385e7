import math

import numpy as np
import pytest

from rareweak.errors import DomainError
from rareweak import detect as de
from rareweak import models as mo
from rareweak.numerics import RngStream, normal_sf

# High-precision oracle for the three-term likelihood-ratio example
# (mpmath, 40 digits): eps = 0.1, tau = 1, y = (0, 1, 2).
LR_EXAMPLE = 0.32146008131766874868


class TestPValues:
    def test_zero_data_upper(self):
        om = mo.PrecisionModel.identity(6)
        pv = de.pvalues(np.zeros(6), om, "none", "upper")
        assert np.allclose(pv.values, 0.5)

    def test_transforms_coincide_under_identity(self):
        om = mo.PrecisionModel.identity(10)
        y = RngStream(1, 0).standard_normal(10)
        a = de.pvalues(y, om, "none", "two").values
        b = de.pvalues(y, om, "whitened", "two").values
        c = de.pvalues(y, om, "innovated", "two").values
        assert np.allclose(a, b) and np.allclose(a, c)

    def test_block_model_snr_ordering(self):
        # noiseless signal at site 0: the transformed statistics hit their
        # means exactly, so the P-values order brute > whitened > innovated
        h0, tau = 0.5, 3.0
        om = mo.PrecisionModel.block2(4, h0)
        y = np.zeros(4)
        y[0] = tau
        brute = de.pvalues(y, om, "none", "two").values[0]
        whit = de.pvalues(y, om, "whitened", "two").values[0]
        innov = de.pvalues(y, om, "innovated", "two").values[0]
        assert abs(brute - 2 * normal_sf(math.sqrt(1 - h0**2) * tau)) <= 1e-12
        assert abs(whit - 2 * normal_sf(0.965926 * tau)) <= 1e-6
        assert abs(innov - 2 * normal_sf(tau)) <= 1e-12
        assert innov < whit < brute

    def test_invalid_args(self):
        om = mo.PrecisionModel.identity(4)
        with pytest.raises(DomainError):
            de.pvalues(np.zeros(4), om, "nope", "upper")
        with pytest.raises(DomainError):
            de.pvalues(np.zeros(4), om, "none", "lower")
        with pytest.raises(DomainError):
            de.pvalues(np.zeros(3), om)


class TestHcStatistic:
    def test_hand_example(self):
        res = de.hc_statistic(np.array([0.01, 0.2, 0.5, 0.9]))
        expected = 2 * (0.25 - 0.01) / math.sqrt(0.01 * 0.99)
        assert abs(res.statistic - expected) <= 1e-12
        assert res.argmax_index == 1
        assert res.threshold is None and res.reject is False

    def test_uniform_spacing_moderate(self):
        p = 40
        pv = np.arange(1, p + 1) / (p + 1.0)
        res = de.hc_statistic(pv)
        assert 0 < res.statistic < 5

    def test_two_point(self):
        res = de.hc_statistic(np.array([0.5, 0.5]))
        assert res.statistic == 0.0
        assert res.argmax_index == 1

    def test_permutation_invariance(self):
        rng = RngStream(2, 0)
        pv = rng.uniform(100)
        a = de.hc_statistic(pv)
        perm = pv[np.argsort(rng.standard_normal(100))]
        b = de.hc_statistic(perm)
        assert a.statistic == b.statistic and a.argmax_index == b.argmax_index

    def test_clamping_flag(self):
        res = de.hc_statistic(np.array([0.0, 0.4, 0.6, 0.9]))
        assert res.clamped
        assert math.isfinite(res.statistic)

    def test_ties_take_smallest_index(self):
        # symmetric spacing gives equal objective at i = 1, 2
        pv = np.array([0.1, 0.35, 0.8, 0.9])
        obj = de._hc_objective(np.sort(pv)[:2], 4)
        if abs(obj[0] - obj[1]) < 1e-12:
            assert de.hc_statistic(pv).argmax_index == 1


class TestHcPlus:
    def test_hand_example(self):
        res = de.hc_plus_statistic(np.array([0.3, 0.4, 0.6, 0.9]), alpha0=0.5)
        expected = 2 * (0.5 - 0.4) / math.sqrt(0.4 * 0.6)
        assert abs(res.statistic - expected) <= 1e-12
        assert res.argmax_index == 2

    def test_empty_feasible_set(self):
        res = de.hc_plus_statistic(np.array([0.1, 0.2, 0.6, 0.9]), alpha0=0.5)
        assert res.statistic == -math.inf
        assert res.reject is False

    def test_matches_hc_when_unconstrained(self):
        pv = np.array([0.3, 0.45, 0.6, 0.7, 0.8, 0.9])
        a = de.hc_plus_statistic(pv, alpha0=0.5)
        b = de.hc_statistic(pv)
        assert abs(a.statistic - b.statistic) <= 1e-12

    def test_alpha0_validation(self):
        with pytest.raises(DomainError):
            de.hc_plus_statistic(np.array([0.1, 0.2]), alpha0=0.7)


class TestCriticalValues:
    def test_asymptotic_reference(self):
        assert abs(de.asymptotic_critical_value(math.e**math.e) - math.sqrt(2)) <= 1e-12

    def test_quantiles_monotone_in_alpha(self):
        table = de.critical_value(500, [0.05, 0.5], variant="ohc",
                                  num_null_reps=400, rng=RngStream(3, 0))
        assert table.value(0.05) > table.value(0.5)
        assert math.isfinite(table.value(0.05))

    def test_stable_across_seeds(self):
        # two independent simulations agree within 3x a bootstrap SE
        p, reps = 500, 10**4
        rng = RngStream(4, 0)
        stats = np.array([de.hc_statistic(rng.uniform(p)).statistic
                          for _ in range(reps)])
        q1 = float(np.quantile(stats, 0.95))
        boot_rng = np.random.Generator(np.random.Philox(99))
        boots = [np.quantile(boot_rng.choice(stats, size=reps, replace=True), 0.95)
                 for _ in range(200)]
        se = float(np.std(boots))
        table = de.critical_value(p, [0.05], variant="ohc",
                                  num_null_reps=reps, rng=RngStream(5, 0))
        assert abs(table.value(0.05) - q1) <= 3 * se

    def test_csv_round_trip(self, tmp_path):
        table = de.critical_value(200, [0.1, 0.05], variant="hcplus",
                                  num_null_reps=200, rng=RngStream(6, 0))
        path = tmp_path / "table.csv"
        table.save_csv(path)
        back = de.CriticalValueTable.load_csv(path)
        assert back.p == table.p and back.variant == "hcplus"
        assert back.value(0.1) == table.value(0.1)

    def test_validation(self):
        with pytest.raises(DomainError):
            de.critical_value(100, [0.05], num_null_reps=50, rng=RngStream(7, 0))
        with pytest.raises(DomainError):
            de.critical_value(100, [1.5], num_null_reps=200, rng=RngStream(7, 0))
        table = de.critical_value(100, [0.05], num_null_reps=200, rng=RngStream(7, 0))
        with pytest.raises(DomainError):
            table.value(0.2)


class TestIhcTest:
    def test_identity_reduces_to_ohc_threshold(self):
        p = 200
        table = de.critical_value(p, [0.1], num_null_reps=300, rng=RngStream(8, 0))
        om = mo.PrecisionModel.identity(p)
        y = om.sample_noise(RngStream(8, 1))
        res = de.ihc_test(y, om, 0.1, table)
        assert res.threshold == pytest.approx(table.value(0.1))
        assert res.reject == (res.statistic >= res.threshold)

    def test_block_threshold_doubles(self):
        p = 200
        table = de.critical_value(p, [0.1], num_null_reps=300, rng=RngStream(9, 0))
        om = mo.PrecisionModel.block2(p, 0.5)
        y = om.sample_noise(RngStream(9, 1))
        res = de.ihc_test(y, om, 0.1, table)
        assert res.threshold == pytest.approx(2 * table.value(0.1))

    def test_wrong_table_rejected(self):
        table = de.critical_value(100, [0.1], variant="hcplus",
                                  num_null_reps=200, rng=RngStream(10, 0))
        om = mo.PrecisionModel.identity(100)
        with pytest.raises(DomainError):
            de.ihc_test(np.zeros(100), om, 0.1, table)


class TestLrStatistic:
    def test_zero_tau(self):
        y = RngStream(11, 0).standard_normal(20)
        assert abs(de.lr_statistic(y, 0.3, 0.0)) <= 1e-12

    def test_balanced_single_point(self):
        tau = 1.7
        assert abs(de.lr_statistic(np.array([tau / 2]), 0.5, tau)) <= 1e-12

    def test_three_term_oracle(self):
        val = de.lr_statistic(np.array([0.0, 1.0, 2.0]), 0.1, 1.0)
        assert abs(val - LR_EXAMPLE) <= 1e-12

    def test_monotone_in_observations(self):
        y = np.array([0.0, 1.0, -0.5])
        base = de.lr_statistic(y, 0.2, 1.5)
        for j in range(3):
            bumped = y.copy()
            bumped[j] += 0.3
            assert de.lr_statistic(bumped, 0.2, 1.5) >= base

    def test_no_overflow(self):
        val = de.lr_statistic(np.array([500.0]), 0.1, 3.0)
        assert math.isfinite(val)

    def test_validation(self):
        with pytest.raises(DomainError):
            de.lr_statistic(np.zeros(3), 0.0, 1.0)
        with pytest.raises(DomainError):
            de.lr_statistic(np.zeros(3), 0.1, -1.0)


class TestPowerEstimate:
    def setup_method(self):
        self.p = 1000
        self.om = mo.PrecisionModel.identity(self.p)
        self.table = de.critical_value(self.p, [0.05], num_null_reps=2000,
                                       rng=RngStream(12, 0))

    def test_null_alternative_matches_size(self):
        mix = mo.MixtureParams(p=self.p, epsilon=0.0, tau=3.0)
        est = de.power_estimate(mix, self.om, "ohc", 0.05, 200,
                                RngStream(12, 1), table=self.table)
        joint_se = math.sqrt(est.size_se**2 + est.power_se**2)
        assert abs(est.power - est.size) <= max(3 * joint_se, 0.01)

    def test_strong_signal_beats_size(self):
        params = mo.ArwParams(p=self.p, vartheta=0.6, r=1.5)
        est = de.power_estimate(params, self.om, "ohc", 0.05, 100,
                                RngStream(12, 2), table=self.table)
        assert est.power > est.size

    def test_power_monotone_in_r(self):
        powers = []
        for r in (0.4, 0.8, 1.6):
            params = mo.ArwParams(p=self.p, vartheta=0.6, r=r)
            est = de.power_estimate(params, self.om, "ohc", 0.05, 200,
                                    RngStream(12, 3), table=self.table)
            powers.append((est.power, est.power_se))
        for (lo, lo_se), (hi, hi_se) in zip(powers, powers[1:]):
            assert hi >= lo - 2 * math.hypot(lo_se, hi_se)

    def test_ohc_size_within_binomial_error(self):
        mix = mo.MixtureParams(p=self.p, epsilon=0.0, tau=0.0)
        table = de.critical_value(self.p, [0.05, 0.2, 0.4], num_null_reps=10**4,
                                  rng=RngStream(13, 0))
        for alpha in (0.05, 0.2, 0.4):
            est = de.power_estimate(mix, self.om, "ohc", alpha, 400,
                                    RngStream(13, 1), table=table)
            assert abs(est.size - alpha) <= 3 * math.sqrt(alpha * (1 - alpha) / 400) + 0.01

    def test_variants_coincide_under_identity(self):
        y = RngStream(14, 0).standard_normal(self.p)
        b = de._variant_statistic(y, self.om, "bhc")
        w = de._variant_statistic(y, self.om, "whc")
        i = de._variant_statistic(y, self.om, "ihc")
        assert b == w == i

    def test_reps_validation(self):
        params = mo.ArwParams(p=self.p, vartheta=0.6, r=1.0)
        with pytest.raises(DomainError):
            de.power_estimate(params, self.om, "ohc", 0.05, 10,
                              RngStream(15, 0), table=self.table)
