import math

import numpy as np
from django.test import SimpleTestCase

from core.services.stats import (
    binomial_best, binomial_lower_tail, binomial_upper_tail, rate_point, simulated_wilson_coverage,
    whole_wins, wilson_coverage, wilson_interval,
)


def pmf(i, n, p):
    return math.comb(n, i) * p ** i * (1 - p) ** (n - i)


class BinomialTests(SimpleTestCase):

    def test_tails_match_direct_sum(self):
        n, p = 30, 0.37
        for k in (0, 5, 11, 20, 30):
            with self.subTest(k=k):
                lower = sum(pmf(i, n, p) for i in range(k + 1))
                upper = sum(pmf(i, n, p) for i in range(k, n + 1))
                self.assertAlmostEqual(binomial_lower_tail(k, n, p), lower, places=12)
                self.assertAlmostEqual(binomial_upper_tail(k, n, p), upper, places=12)

    def test_draws_round_half_up(self):
        self.assertEqual(whole_wins(2.5), 3)
        self.assertEqual(whole_wins(2.0), 2)
        self.assertEqual(whole_wins(0.5), 1)

    def test_best_marks(self):
        self.assertEqual(binomial_best([100, 95, 60], [200, 200, 200]), [True, True, False])

    def test_ties_for_best_are_all_marked(self):
        self.assertEqual(binomial_best([50, 50], [100, 100]), [True, True])

    def test_bad_input(self):
        with self.assertRaises(ValueError):
            binomial_best([1, 2], [10])
        with self.assertRaises(ValueError):
            binomial_best([11], [10])
        self.assertEqual(binomial_best([], []), [])


class WilsonTests(SimpleTestCase):

    def test_interval_for_even_record(self):
        low, high = wilson_interval(100, 200, 0.99)
        self.assertAlmostEqual(low, 0.4104, places=3)
        self.assertAlmostEqual(low + high, 1.0)

    def test_interval_stays_in_unit_range(self):
        self.assertEqual(wilson_interval(0, 0), (0.0, 1.0))
        low, high = wilson_interval(0, 20)
        self.assertAlmostEqual(low, 0.0)
        self.assertLess(high, 1.0)
        low, high = wilson_interval(20, 20)
        self.assertAlmostEqual(high, 1.0)

    def test_exact_coverage(self):
        self.assertGreaterEqual(wilson_coverage(200, 0.5, 0.99), 0.99)

    def test_simulated_coverage(self):
        coverage = simulated_wilson_coverage(200, 0.5, 2000, np.random.default_rng(0))
        self.assertGreaterEqual(coverage, 0.98)


class RatePointTests(SimpleTestCase):

    def test_tests_against_baseline(self):
        point = rate_point(7, 130.5, 200, baseline=0.5)
        self.assertAlmostEqual(point.rate, 130.5 / 200)
        self.assertLess(point.p_above, 0.001)
        self.assertGreater(point.p_below, 0.999)
        self.assertLess(point.low, point.rate)
        self.assertGreater(point.high, point.rate)

    def test_without_baseline(self):
        point = rate_point('x', 10, 20)
        self.assertIsNone(point.p_above)
        self.assertIsNone(point.p_below)
