"""
Test cases for random streams, random-walk Metropolis and Adaptive Metropolis
"""

import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from samplers.records import AdaptiveState, ChainTrace
from samplers.rng import RngStream
from samplers.services import (
    AM_SCALE,
    am_proposal_cov,
    am_update,
    run_am,
    run_am_replicates,
    run_rwm,
    rwm_step,
)
from target.catalog import flat, gaussian, standard_gaussian


class FixedDraws:
    """Generator stand-in returning preset normal and uniform draws"""

    def __init__(self, normals, uniform):
        self.normals = np.asarray(normals, dtype=float)
        self.uniform = uniform

    def standard_normal(self, size):
        return self.normals[:size]

    def random(self):
        return self.uniform


class RngStreamTests(SimpleTestCase):
    def test_same_seed_same_draws(self):
        """Identical (seed, stream_id) reproduce the draw sequence"""
        a = RngStream(42, 3).generator().random(5)
        b = RngStream(42, 3).generator().random(5)
        np.testing.assert_array_equal(a, b)

    def test_streams_are_distinct(self):
        """Stream ids and children give different sequences"""
        base = RngStream(42).generator().random(5)
        other = RngStream(42, 1).generator().random(5)
        child = RngStream(42).child(0).generator().random(5)
        self.assertFalse(np.array_equal(base, other))
        self.assertFalse(np.array_equal(base, child))

    def test_seed_range(self):
        """Seeds are 64-bit unsigned integers"""
        RngStream(2**64 - 1)
        with self.assertRaises(ValidationError):
            RngStream(-1)
        with self.assertRaises(ValidationError):
            RngStream(2**64)


class RwmStepTests(SimpleTestCase):
    def test_flat_target_always_accepts(self):
        """A constant log-density accepts every proposal"""
        gen = RngStream(1).generator()
        x = np.zeros(2)
        for _ in range(200):
            x, accepted, _ = rwm_step(x, np.eye(2), flat(2), gen)
            self.assertTrue(accepted)

    def test_forced_proposal_acceptance_threshold(self):
        """x = 0, y = 3 on N(0, 1): accepted iff log U < -4.5"""
        target = standard_gaussian(1)
        x = np.array([0.0])
        below = FixedDraws([3.0], 0.99 * math.exp(-4.5))
        above = FixedDraws([3.0], 1.01 * math.exp(-4.5))

        move = rwm_step(x, [[1.0]], target, below)
        self.assertTrue(move.accepted)
        np.testing.assert_array_equal(move.state, [3.0])
        self.assertEqual(move.log_density, -4.5)

        move = rwm_step(x, [[1.0]], target, above)
        self.assertFalse(move.accepted)
        np.testing.assert_array_equal(move.state, [0.0])

    def test_non_spd_proposal_rejected(self):
        """Cholesky failure is a configuration error"""
        gen = RngStream(1).generator()
        with self.assertRaises(ValidationError):
            rwm_step(np.zeros(2), [[1.0, 2.0], [2.0, 1.0]], flat(2), gen)

    def test_nan_proposal_density(self):
        """NaN at the proposal raises instead of deciding silently"""
        from target.densities import TargetDensity

        target = TargetDensity(
            dim=1, log_density_fn=lambda x: 0.0 if x[0] == 0 else float("nan")
        )
        with self.assertRaises(ArithmeticError):
            rwm_step(np.zeros(1), [[1.0]], target, FixedDraws([1.0], 0.5))

    def test_run_rwm_burn_in(self):
        """Burn-in steps are not recorded"""
        trace = run_rwm(standard_gaussian(1), [0.0], [[1.0]], 100, RngStream(3), 20)
        self.assertEqual(len(trace), 80)
        self.assertEqual(trace.steps[0], 21)
        self.assertEqual(trace.steps[-1], 100)

    def test_stationary_acceptance_rate(self):
        """Acceptance rate of sd 2.38 on N(0, 1) agrees across seeds"""
        target = standard_gaussian(1)
        cov = [[2.38**2]]
        first = run_rwm(target, [0.0], cov, 20_000, RngStream(11)).acceptance_rate
        second = run_rwm(target, [0.0], cov, 20_000, RngStream(12)).acceptance_rate
        # Standard error of the rate is about 0.006 with these lengths.
        self.assertLess(abs(first - second), 0.04)
        self.assertGreater(first, 0.35)
        self.assertLess(first, 0.52)


class AdaptiveUpdateTests(SimpleTestCase):
    def test_first_update_by_hand(self):
        """mu_0 = 0, Gamma_0 = 0, x = (1, 0): mu_1 = (1, 0), Gamma_1 = diag(1.1, 0.1)"""
        state = AdaptiveState(mean=np.zeros(2), cov=np.zeros((2, 2)), kappa=0.1)
        updated = am_update(state, [1.0, 0.0])
        self.assertEqual(updated.count, 1)
        np.testing.assert_allclose(updated.mean, [1.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(
            updated.cov, [[1.1, 0.0], [0.0, 0.1]], rtol=0, atol=1e-15
        )

    def test_zero_innovation(self):
        """x = mu_n leaves the mean and shrinks Gamma toward kappa Id"""
        cov = np.array([[2.0, 0.3], [0.3, 1.0]])
        state = AdaptiveState(mean=np.array([0.5, -1.0]), cov=cov, count=3, kappa=0.2)
        updated = am_update(state, [0.5, -1.0])
        np.testing.assert_array_equal(updated.mean, state.mean)
        np.testing.assert_allclose(
            updated.cov, (3 * cov + 0.2 * np.eye(2)) / 4, rtol=1e-14
        )

    def test_iid_draws_recover_covariance(self):
        """Feeding iid N(0, Sigma) draws drives Gamma toward Sigma plus kappa Id"""
        sigma = np.array([[1.0, 0.0], [0.0, 4.0]])
        draws = np.random.default_rng(5).multivariate_normal(np.zeros(2), sigma, 5000)
        state = AdaptiveState.initial(2, kappa=0.01, cov=np.zeros((2, 2)))
        for x in draws:
            state = am_update(state, x)
        np.testing.assert_allclose(state.mean, draws.mean(axis=0), atol=1e-10)
        error = np.linalg.norm(state.cov - (sigma + 0.01 * np.eye(2)))
        self.assertLess(error / np.linalg.norm(sigma), 0.1)

    def test_update_is_symmetric(self):
        """Gamma stays symmetric to 1e-12"""
        state = AdaptiveState.initial(3, kappa=0.1)
        for x in np.random.default_rng(2).normal(size=(50, 3)):
            state = am_update(state, x)
            self.assertLessEqual(np.max(np.abs(state.cov - state.cov.T)), 1e-12)

    def test_dimension_mismatch(self):
        with self.assertRaises(ValidationError):
            am_update(AdaptiveState.initial(2, kappa=0.1), [1.0])


class AdaptiveProposalTests(SimpleTestCase):
    def test_scalar_case(self):
        """d = 1, Gamma = 1 gives 2.38^2"""
        state = AdaptiveState.initial(1, kappa=1.0)
        self.assertAlmostEqual(am_proposal_cov(state)[0, 0], 5.6644, places=12)

    def test_identity_in_two_dimensions(self):
        """d = 2, Gamma = Id gives (5.6644 / 2) Id"""
        state = AdaptiveState.initial(2, kappa=1.0)
        np.testing.assert_allclose(am_proposal_cov(state), 2.8322 * np.eye(2))

    def test_linear_in_gamma(self):
        """Scaling Gamma scales the proposal"""
        cov = np.array([[2.0, 0.5], [0.5, 1.0]])
        one = am_proposal_cov(AdaptiveState(np.zeros(2), cov, count=1))
        three = am_proposal_cov(AdaptiveState(np.zeros(2), 3 * cov, count=1))
        np.testing.assert_allclose(three, 3 * one, rtol=1e-15)
        np.testing.assert_allclose(one, AM_SCALE / 2 * cov, rtol=1e-15)

    def test_singular_initial_gamma(self):
        """Gamma_0 = 0 cannot be used as a proposal"""
        state = AdaptiveState.initial(2, kappa=0.1, cov=np.zeros((2, 2)))
        with self.assertRaises(ValidationError):
            am_proposal_cov(state)


class RunAmTests(SimpleTestCase):
    def setUp(self):
        self.target = gaussian([0.0, 0.0], [[1.0, 0.0], [0.0, 4.0]])

    def test_reproducible(self):
        """Fixed seed, bit-identical trace"""
        first = run_am(self.target, [0.0, 0.0], None, 0.1, 500, RngStream(9))
        second = run_am(self.target, [0.0, 0.0], None, 0.1, 500, RngStream(9))
        np.testing.assert_array_equal(first.states, second.states)
        np.testing.assert_array_equal(first.accepted, second.accepted)

    def test_single_step_unrolled(self):
        """steps = 1 is one RWM step with (2.38^2 / d) kappa Id, then one update"""
        rng = RngStream(4)
        trace = run_am(self.target, [0.0, 0.0], None, 0.1, 1, rng)
        gen = rng.generator()
        cov = AM_SCALE / 2 * 0.1 * np.eye(2)
        move = rwm_step(np.zeros(2), cov, self.target, gen)
        np.testing.assert_array_equal(trace.states[0], move.state)
        expected = am_update(AdaptiveState.initial(2, kappa=0.1), move.state)
        np.testing.assert_array_equal(trace.param_snapshots[0].cov, expected.cov)

    def test_mean_is_trace_average(self):
        """mu_n equals the arithmetic mean of X_1..X_n when mu_0 = 0"""
        trace = run_am(self.target, [1.0, -1.0], None, 0.1, 2000, RngStream(6))
        final = trace.param_snapshots[-1]
        np.testing.assert_allclose(
            final.mean, trace.states.mean(axis=0), rtol=1e-10, atol=1e-12
        )

    def test_eigenvalue_floor(self):
        """lambda_min(Gamma_n) >= kappa - 1e-9 at every step"""
        kappa = 0.05
        trace = run_am(self.target, [0.0, 0.0], None, kappa, 3000, RngStream(8))
        covs = np.stack([state.cov for state in trace.param_snapshots])
        self.assertGreaterEqual(np.linalg.eigvalsh(covs).min(), kappa - 1e-9)

    def test_singular_gamma0_falls_back(self):
        """Gamma_0 = 0 proposes with kappa Id before the first update"""
        with self.assertLogs("samplers.services", level="DEBUG") as logs:
            run_am(self.target, [0.0, 0.0], np.zeros((2, 2)), 0.1, 5, RngStream(1))
        self.assertEqual(len(logs.records), 1)

    def test_snapshot_thinning(self):
        """snapshot_every = 10 keeps steps 1, 11, ..., 91"""
        trace = run_am(
            self.target, [0.0, 0.0], None, 0.1, 100, RngStream(2), snapshot_every=10
        )
        self.assertEqual(len(trace), 100)
        np.testing.assert_array_equal(trace.snapshot_steps, np.arange(1, 100, 10))

    def test_invalid_kappa(self):
        with self.assertRaises(ValidationError):
            run_am(self.target, [0.0, 0.0], None, 0.0, 10, RngStream(1))


class RunAmReplicatesTests(SimpleTestCase):
    def setUp(self):
        self.target = gaussian([0.0, 0.0], [[1.0, 0.0], [0.0, 4.0]])

    def test_single_replicate_follows_run_am(self):
        """One replicate reproduces the run_am states at every checkpoint"""
        trace = run_am(self.target, [3.0, -1.0], None, 0.1, 200, RngStream(12))
        kept = run_am_replicates(
            self.target, [3.0, -1.0], None, 0.1, [0, 1, 37, 200], 1, RngStream(12)
        )
        np.testing.assert_array_equal(kept[0, 0], [3.0, -1.0])
        for row, n in enumerate([1, 37, 200], start=1):
            np.testing.assert_allclose(kept[row, 0], trace.states[n - 1], rtol=1e-9)

    def test_singular_gamma0_matches_run_am(self):
        """The kappa * Id fallback is used by both runners"""
        zeros = np.zeros((2, 2))
        trace = run_am(self.target, [0.0, 0.0], zeros, 0.1, 20, RngStream(3))
        kept = run_am_replicates(
            self.target, [0.0, 0.0], zeros, 0.1, [20], 1, RngStream(3)
        )
        np.testing.assert_allclose(kept[0, 0], trace.states[-1], rtol=1e-9)

    def test_shape_and_order(self):
        """Checkpoints come back sorted, one block of replicates each"""
        kept = run_am_replicates(
            self.target, [0.0, 0.0], None, 0.1, [50, 5], 40, RngStream(5)
        )
        self.assertEqual(kept.shape, (2, 40, 2))
        self.assertTrue(np.all(np.isfinite(kept)))
        # Replicates draw different noise.
        self.assertGreater(np.unique(kept[1, :, 0]).size, 1)

    def test_invalid_arguments(self):
        for checkpoints, replicates in (([], 10), ([-1, 5], 10), ([5], 0)):
            with self.assertRaises(ValidationError):
                run_am_replicates(
                    self.target,
                    [0.0, 0.0],
                    None,
                    0.1,
                    checkpoints,
                    replicates,
                    RngStream(1),
                )


class ChainTraceTests(SimpleTestCase):
    def test_mismatched_columns(self):
        """Aligned columns must share one length"""
        with self.assertRaises(ValueError):
            ChainTrace(
                steps=np.arange(3),
                states=np.zeros((2, 1)),
                accepted=np.zeros(3, dtype=bool),
                move_kind=("local",) * 3,
            )
