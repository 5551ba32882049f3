"""
Test cases for the two-state toy chain with theta_n = n^(-1/4)
"""

import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from diagnostics.norms import kernel_tv_sup
from diagnostics.records import DiscreteKernelOracle
from samplers.rng import RngStream
from toy.records import UNIFORM, DistVec2, ToyKernel, ToySchedule
from toy.services import (
    run_toy_chain,
    run_toy_replicates,
    toy_adaptation_distance,
    toy_exact_marginal,
    toy_mixing_time,
    toy_tv_series,
    toy_tv_to_pi,
)

START_AT_ZERO = DistVec2.point_mass(0)


class ToyRecordTests(SimpleTestCase):
    def test_kernel_rows(self):
        """P_theta is doubly stochastic"""
        matrix = ToyKernel(0.3).matrix
        np.testing.assert_allclose(matrix.sum(axis=1), 1.0)
        np.testing.assert_allclose(matrix.sum(axis=0), 1.0)

    def test_theta_range(self):
        with self.assertRaises(ValidationError):
            ToyKernel(1.5)
        with self.assertRaises(ValidationError):
            ToySchedule.constant(-0.1)

    def test_default_schedule(self):
        """theta_1 = 1 and theta_16 = 1/2"""
        sched = ToySchedule()
        self.assertEqual(sched.theta(1), 1.0)
        self.assertAlmostEqual(sched.theta(16), 0.5, places=15)
        with self.assertRaises(ValidationError):
            sched.theta(0)

    def test_probability_pair(self):
        with self.assertRaises(ValidationError):
            DistVec2(0.7, 0.7)


class ExactMarginalTests(SimpleTestCase):
    def test_zero_steps(self):
        """n = 0 returns the initial law"""
        law = toy_exact_marginal(ToySchedule(), START_AT_ZERO, 0)
        self.assertEqual(law, START_AT_ZERO)

    def test_one_step_at_half(self):
        """theta = 1/2 reaches (1/2, 1/2) in one step"""
        law = toy_exact_marginal(ToySchedule.constant(0.5), START_AT_ZERO, 1)
        self.assertAlmostEqual(law.p0, 0.5, places=15)

    def test_constant_by_hand(self):
        """theta = 0.9, three steps from state 0 gives (0.756, 0.244)"""
        law = toy_exact_marginal(ToySchedule.constant(0.9), START_AT_ZERO, 3)
        self.assertAlmostEqual(law.p0, 0.756, places=12)
        self.assertAlmostEqual(law.p1, 0.244, places=12)

    def test_closed_form(self):
        """Constant theta gives p0(n) = 1/2 + (1/2)(2 theta - 1)^n"""
        for theta in (0.05, 0.3, 0.5, 0.77, 0.99):
            sched = ToySchedule.constant(theta)
            for n in (1, 2, 7, 25, 50):
                law = toy_exact_marginal(sched, START_AT_ZERO, n)
                self.assertAlmostEqual(
                    law.p0, 0.5 + 0.5 * (2 * theta - 1) ** n, places=12
                )

    def test_uniform_start_stays_put(self):
        """(1/2, 1/2) is invariant under every P_theta"""
        series = toy_tv_series(ToySchedule(), UNIFORM, 200)
        self.assertLess(series.max(), 1e-15)

    def test_point_mass_distance(self):
        """A point mass is 1/2 away from the uniform law"""
        self.assertEqual(toy_tv_to_pi(ToySchedule(), START_AT_ZERO, 0), 0.5)

    def test_negative_horizon(self):
        with self.assertRaises(ValidationError):
            toy_exact_marginal(ToySchedule(), START_AT_ZERO, -1)


class MarginalConvergenceTests(SimpleTestCase):
    """The law converges although the mixing time diverges"""

    def setUp(self):
        self.sched = ToySchedule()
        self.series = toy_tv_series(self.sched, START_AT_ZERO, 10**4)

    def test_series_matches_single_horizon(self):
        for n in (0, 1, 5, 15, 40):
            self.assertEqual(
                self.series[n], toy_tv_to_pi(self.sched, START_AT_ZERO, n)
            )

    def test_small_by_ten_thousand(self):
        """Distance below 1e-2 at n = 10^4"""
        self.assertLess(self.series[10**4], 1e-2)

    def test_collapses_at_sixteen(self):
        """theta_16 = 1/2 sends the law to (1/2, 1/2)"""
        self.assertGreater(self.series[15], self.series[16])
        self.assertLess(self.series[16], 1e-15)

    def test_nonincreasing_after_ten(self):
        self.assertTrue(np.all(np.diff(self.series[10:]) <= 1e-15))
        self.assertTrue(np.all(np.diff(self.series[10:17]) < 0))


class MixingTimeTests(SimpleTestCase):
    def test_quarter_by_hand(self):
        """theta = 0.25, eps = 0.1: ln 0.1 / ln 0.5"""
        self.assertAlmostEqual(
            toy_mixing_time(0.25, 0.1), math.log(0.1) / math.log(0.5), places=12
        )
        self.assertAlmostEqual(toy_mixing_time(0.25, 0.1), 3.3219, places=4)

    def test_half_mixes_in_one_step(self):
        self.assertEqual(toy_mixing_time(0.5, 0.1), 1.0)

    def test_degenerate_kernels(self):
        """theta in {0, 1} never mixes"""
        self.assertEqual(toy_mixing_time(0.0, 0.1), math.inf)
        self.assertEqual(toy_mixing_time(1.0, 0.1), math.inf)

    def test_epsilon_range(self):
        with self.assertRaises(ValidationError):
            toy_mixing_time(0.3, 1.0)

    def test_shape_along_schedule(self):
        """Decreases up to n = 15, bottoms out at 16, then never decreases"""
        sched = ToySchedule()
        times = [toy_mixing_time(sched.theta(n), 0.1) for n in range(2, 16)]
        self.assertTrue(all(b < a for a, b in zip(times, times[1:])))
        self.assertLessEqual(toy_mixing_time(sched.theta(16), 0.1), 1.0)
        later = [toy_mixing_time(sched.theta(n), 0.1) for n in range(17, 20_000)]
        self.assertTrue(all(b >= a for a, b in zip(later, later[1:])))

    def test_diverges_along_schedule(self):
        """M_0.1 exceeds 10^3 at n = 10^12"""
        self.assertGreater(toy_mixing_time(ToySchedule().theta(10**12), 0.1), 1e3)


class AdaptationDistanceTests(SimpleTestCase):
    def test_by_hand(self):
        self.assertAlmostEqual(toy_adaptation_distance(0.3, 0.5), 0.4, places=15)
        self.assertEqual(toy_adaptation_distance(0.6, 0.6), 0.0)

    def test_matches_kernel_supremum(self):
        """D equals the row-wise supremum distance of the two kernels"""
        pairs = np.random.default_rng(4).random((100, 2))
        for theta, other in pairs:
            self.assertAlmostEqual(
                toy_adaptation_distance(theta, other),
                kernel_tv_sup(
                    DiscreteKernelOracle(ToyKernel(theta).matrix),
                    DiscreteKernelOracle(ToyKernel(other).matrix),
                ),
                places=12,
            )

    def test_diminishing_rate(self):
        """n D(theta_n, theta_{n-1}) stays bounded up to n = 10^6"""
        thetas = ToySchedule().thetas(10**6)
        n = np.arange(10, 10**6 + 1)
        distance = 2 * np.abs(thetas[n - 1] - thetas[n - 2])
        self.assertLess(np.max(n * distance), 1.0)


class ToySimulationTests(SimpleTestCase):
    def test_identity_kernel(self):
        """theta = 1 never leaves the start"""
        trace = run_toy_chain(ToySchedule.constant(1.0), 1, 50, RngStream(1))
        self.assertTrue(np.all(trace.states == 1))
        self.assertFalse(trace.accepted.any())

    def test_flip_kernel(self):
        """theta = 0 alternates"""
        trace = run_toy_chain(ToySchedule.constant(0.0), 0, 6, RngStream(1))
        np.testing.assert_array_equal(trace.states[:, 0], [1, 0, 1, 0, 1, 0])

    def test_reproducible(self):
        first = run_toy_chain(ToySchedule(), 0, 100, RngStream(7))
        second = run_toy_chain(ToySchedule(), 0, 100, RngStream(7))
        np.testing.assert_array_equal(first.states, second.states)

    def test_invalid_start(self):
        with self.assertRaises(ValidationError):
            run_toy_chain(ToySchedule(), 2, 10, RngStream(1))

    def test_replicates_follow_exact_law(self):
        """Occupancy of state 0 at n = 100 within 4 standard errors"""
        replicates = 10**5
        states = run_toy_replicates(
            ToySchedule(), 0, [10, 100], replicates, RngStream(8)
        )
        self.assertEqual(states.shape, (2, replicates))
        for row, n in zip(states, (10, 100)):
            p0 = toy_exact_marginal(ToySchedule(), START_AT_ZERO, n).p0
            standard_error = math.sqrt(p0 * (1 - p0) / replicates)
            self.assertLess(abs(np.mean(row == 0) - p0), 4 * standard_error)

    def test_long_run_occupancy(self):
        """Occupancy of state 1 over 10^6 steps is 1/2 +/- 0.01 on 9 of 10 seeds"""
        hits = 0
        for seed in range(10):
            trace = run_toy_chain(ToySchedule(), 0, 10**6, RngStream(seed))
            hits += abs(trace.states.mean() - 0.5) <= 0.01
        self.assertGreaterEqual(hits, 9)
