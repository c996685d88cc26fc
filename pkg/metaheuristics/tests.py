import math
import statistics

import numpy as np
from django.test import SimpleTestCase, tag

from core.exceptions import (
    InvalidOptionsError,
    OptionsMismatchError,
    UnknownMethodError,
)
from core.parameters import ParameterDef, ParameterSpace
from core.services import PlainFunction

from .acor import AcorArchive, acor_deviation, acor_propose, acor_weights
from .ees1 import (
    centroid,
    ees1_selection_weight,
    recombine,
    select_mates,
    signed_geometric_mean,
)
from .ees2 import ees2_midpoints, ees2_range
from .options import OptionsACOR, OptionsEES1, OptionsEES2, OptionsPSO, OptionsSAA
from .pso import (
    pso_neighborhood_k2,
    pso_neighborhood_k4,
    pso_neighborhood_kn,
    pso_step,
)
from .saa import (
    acceptance_probability,
    cool,
    perturb_multiplicative,
    perturb_normal,
    saa_accept,
    saa_neighborhood_size,
    saa_propose,
)
from .services import METHODS, extremize


def sphere(values):
    return float(np.sum(np.asarray(values) ** 2))


def rosenbrock(values):
    x = np.asarray(values)
    return float(np.sum((1 - x[:-1]) ** 2 + 100 * (x[1:] - x[:-1] ** 2) ** 2))


def griewank(values):
    x = np.asarray(values)
    i = np.arange(1, len(x) + 1)
    return float(1 + np.sum(x**2) / 4000 - np.prod(np.cos(x / np.sqrt(i))))


def make_objective(fn, dimension, bound=100.0, **kwargs):
    objective = PlainFunction(fn, **kwargs)
    for i in range(1, dimension + 1):
        objective.parameter(f"x{i}", -bound, bound)
    return objective


# Options courtes pour les tests de comptabilité
QUICK_OPTIONS = {
    "pso": OptionsPSO(iterations=15, swarm_size=8),
    "saa": OptionsSAA(t_min=0.1),
    "acor": OptionsACOR(archive_size=8, ants=6, iterations=10),
    "ees1": OptionsEES1(iterations=10),
    "ees2": OptionsEES2(iterations=5),
}


class OptionsTests(SimpleTestCase):
    def test_defaults(self):
        self.assertEqual(OptionsPSO().swarm_size, 16)
        self.assertEqual(OptionsPSO().neighborhood, "KN")
        self.assertEqual(OptionsACOR().archive_size, 64)
        self.assertEqual(OptionsEES2().k, 5)

    def test_invariants(self):
        with self.assertRaises(InvalidOptionsError):
            OptionsPSO(swarm_size=1)
        with self.assertRaises(InvalidOptionsError):
            OptionsPSO(phi1=1.0, phi2=1.0)
        with self.assertRaises(InvalidOptionsError):
            OptionsSAA(alpha=1.0)
        with self.assertRaises(InvalidOptionsError):
            OptionsSAA(t0=1e-5)
        with self.assertRaises(InvalidOptionsError):
            OptionsACOR(archive_size=1)
        with self.assertRaises(InvalidOptionsError):
            OptionsEES1(kappa=1.5)
        with self.assertRaises(InvalidOptionsError):
            OptionsEES2(N=3, rho=0.25)

    def test_with_overrides_casts_text(self):
        options = OptionsSAA().with_overrides(alpha="0.8", temperature_length="5")
        self.assertEqual(options.alpha, 0.8)
        self.assertEqual(options.temperature_length, 5)

    def test_with_overrides_rejects_unknown_key(self):
        with self.assertRaises(InvalidOptionsError):
            OptionsPSO().with_overrides(colour="red")

    def test_as_dict_names_callables(self):
        def ring(i, n):
            return [i]

        options = OptionsPSO(neighborhood=ring)
        self.assertEqual(options.as_dict()["neighborhood"], "ring")


class NeighborhoodTests(SimpleTestCase):
    def test_k2(self):
        self.assertEqual(pso_neighborhood_k2(1, 5), [5, 2])
        self.assertEqual(pso_neighborhood_k2(3, 5), [2, 4])
        self.assertEqual(pso_neighborhood_k2(5, 5), [4, 1])

    def test_k4(self):
        self.assertEqual(set(pso_neighborhood_k4(5, 9)), {4, 6, 2, 8})
        self.assertEqual(set(pso_neighborhood_k4(1, 9)), {3, 2, 7, 4})
        self.assertEqual(sorted(pso_neighborhood_k4(1, 4)), [2, 3])

    def test_kn(self):
        self.assertEqual(pso_neighborhood_kn(1, 3), [1, 2, 3])
        self.assertEqual(pso_neighborhood_kn(3, 3), [1, 2, 3])
        self.assertEqual(pso_neighborhood_kn(2, 2), [1, 2])

    def test_index_out_of_range(self):
        for rule in (pso_neighborhood_k2, pso_neighborhood_k4, pso_neighborhood_kn):
            with self.assertRaises(IndexError):
                rule(0, 5)
            with self.assertRaises(IndexError):
                rule(6, 5)

    def test_outputs_are_valid_indices(self):
        for n in range(2, 40):
            for i in range(1, n + 1):
                k2 = pso_neighborhood_k2(i, n)
                k4 = pso_neighborhood_k4(i, n)
                self.assertTrue(all(1 <= j <= n for j in k2 + k4))
                self.assertNotIn(i, k4)
                self.assertEqual(len(k4), len(set(k4)))
                if n >= 3:
                    self.assertEqual(len(k2), 2)
                self.assertEqual(len(pso_neighborhood_kn(i, n)), n)


class PsoTests(SimpleTestCase):
    def test_stationary_swarm_does_not_move(self):
        space = ParameterSpace([ParameterDef("a", -5, 5), ParameterDef("b", -5, 5)])
        x = np.array([[1.0, 2.0], [-3.0, 0.5]])
        v = np.zeros_like(x)
        new_x, new_v = pso_step(
            x, v, x.copy(), x.copy(), space, OptionsPSO(), np.random.default_rng(0)
        )
        np.testing.assert_array_equal(new_x, x)
        np.testing.assert_array_equal(new_v, 0)

    def test_clamped_components_lose_velocity(self):
        space = ParameterSpace([ParameterDef("a", 0, 1)])
        x = np.array([[0.9]])
        v = np.array([[5.0]])
        rng = np.random.default_rng(0)
        new_x, new_v = pso_step(x, v, x, x, space, OptionsPSO(), rng)
        self.assertEqual(new_x[0, 0], 1.0)
        self.assertEqual(new_v[0, 0], 0.0)

    def test_local_neighborhoods_run(self):
        for rule in ("K2", "K4"):
            objective = make_objective(sphere, 2, tolerance=0)
            options = OptionsPSO(iterations=10, swarm_size=9, neighborhood=rule)
            estimates = extremize("pso", objective, options, seed=1)
            self.assertEqual(estimates.stats.total_evals, 9 * 11)

    @tag("slow")
    def test_rosenbrock_walkthrough(self):
        evals, converged = [], 0
        for seed in range(7):
            objective = make_objective(rosenbrock, 2, tolerance=2e-5)
            estimates = extremize("pso", objective, seed=seed)
            evals.append(estimates.stats.total_evals)
            if estimates.stats.converged:
                converged += 1
                np.testing.assert_allclose(estimates.best.values, [1, 1], atol=0.05)
        self.assertGreaterEqual(converged, 4)
        self.assertLessEqual(statistics.median(evals), 6000)


class SaaTests(SimpleTestCase):
    def test_acceptance_probability(self):
        self.assertEqual(acceptance_probability(0.0, 1.0), 1.0)
        self.assertEqual(acceptance_probability(-3.0, 1.0), 1.0)
        self.assertAlmostEqual(acceptance_probability(1.0, 2.0), math.exp(-0.5))

    def test_acceptance_law(self):
        rng = np.random.default_rng(42)
        trials = 100_000
        for temperature in (0.1, 1.0, 10.0):
            for delta in (0.05, 0.5, 5.0):
                accepted = sum(
                    saa_accept(delta, temperature, rng) for _ in range(trials)
                )
                self.assertAlmostEqual(
                    accepted / trials, math.exp(-delta / temperature), delta=0.02
                )

    def test_cooling(self):
        self.assertAlmostEqual(cool(100.0, 1, OptionsSAA(alpha=0.9, t0=200)), 90.0)
        self.assertAlmostEqual(cool(0.5, 1, OptionsSAA(cooling="fast")), 0.5)
        custom = OptionsSAA(cooling=lambda t, k, options: t - 0.25)
        self.assertEqual(cool(1.0, 1, custom), 0.75)

    def test_paths(self):
        self.assertEqual(perturb_normal(0, 10, 0.5, 0.0), 5.0)
        self.assertEqual(perturb_multiplicative(0.0, 0.7), 0.0)
        self.assertEqual(perturb_multiplicative(4.0, 0.5), 6.0)

    def test_neighborhood_size(self):
        self.assertEqual(saa_neighborhood_size("perturb-half", 4), 2)
        self.assertEqual(saa_neighborhood_size("perturb-half", 1), 1)
        self.assertEqual(saa_neighborhood_size("perturb-all", 3), 3)
        self.assertEqual(saa_neighborhood_size("perturb-1", 7), 1)

    def test_propose_only_touches_selected_dimensions(self):
        space = ParameterSpace([ParameterDef(f"p{i}", -10, 10) for i in range(4)])
        rng = np.random.default_rng(5)
        current = np.array([1.0, 2.0, 3.0, 4.0])
        for _ in range(100):
            proposal = saa_propose(current, space, 0.5, [2], rng)
            np.testing.assert_array_equal(proposal[[0, 1, 3]], current[[0, 1, 3]])
            self.assertTrue(space.contains(proposal))

    def test_propose_rejects_empty_selection(self):
        space = ParameterSpace([ParameterDef("a", 0, 1)])
        with self.assertRaises(ValueError):
            saa_propose([0.5], space, 0.5, [], np.random.default_rng(0))

    def test_sphere_1d(self):
        objective = make_objective(sphere, 1, bound=1.0, tolerance=1e-3)
        estimates = extremize("saa", objective, seed=3)
        self.assertLessEqual(estimates.best.fitness, 1e-2)


class AcorTests(SimpleTestCase):
    def test_weights(self):
        weights = acor_weights(5, 0.2)
        self.assertAlmostEqual(weights[0], 1 / (0.2 * 5 * math.sqrt(2 * math.pi)))
        self.assertTrue(np.all(np.diff(weights) < 0))
        pair = acor_weights(2, 0.2)
        self.assertAlmostEqual(pair[0] / pair[1], math.exp(3.125))

    def test_probabilities_sum_to_one(self):
        archive = AcorArchive.build(np.zeros((6, 1)), np.arange(6.0), 0.2)
        self.assertAlmostEqual(archive.probabilities.sum(), 1.0)

    def test_identical_rows(self):
        space = ParameterSpace([ParameterDef("a", -5, 5), ParameterDef("b", -5, 5)])
        archive = AcorArchive.build(np.full((4, 2), 1.5), np.zeros(4), 0.2)
        proposal = acor_propose(archive, space, 0.85, np.random.default_rng(0))
        np.testing.assert_array_equal(proposal, [1.5, 1.5])

    def test_deviation(self):
        archive = AcorArchive.build(np.array([[0.0], [2.0]]), np.array([0.0, 1.0]), 0.2)
        self.assertAlmostEqual(acor_deviation(archive, 0, 0.85)[0], 1.7)

    def test_proposals_within_bounds(self):
        space = ParameterSpace([ParameterDef("a", 0, 1)])
        archive = AcorArchive.build(np.array([[0.0], [1.0]]), np.array([0.0, 1.0]), 0.2)
        rng = np.random.default_rng(1)
        for _ in range(200):
            self.assertTrue(space.contains(acor_propose(archive, space, 5.0, rng)))

    def test_merge_keeps_best_sorted(self):
        archive = AcorArchive.build(np.array([[1.0], [2.0]]), np.array([3.0, 1.0]), 0.2)
        archive.merge(np.array([[7.0], [8.0]]), np.array([2.0, 0.5]))
        np.testing.assert_array_equal(archive.fitness, [0.5, 1.0])
        np.testing.assert_array_equal(archive.rows[:, 0], [8.0, 2.0])

    def test_single_ant_iteration(self):
        objective = PlainFunction(lambda v: float(v[0] ** 2 + 1), tolerance=0)
        objective.parameter("x", -1, 1)
        options = OptionsACOR(archive_size=2, ants=1, iterations=1)
        estimates = extremize("acor", objective, options, seed=0)
        self.assertEqual(estimates.stats.total_evals, 3)


class Ees1Tests(SimpleTestCase):
    def test_selection_weight(self):
        self.assertAlmostEqual(ees1_selection_weight(0.3, 1), 0.3)
        self.assertAlmostEqual(ees1_selection_weight(0.3, 3), 0.027)
        self.assertEqual(ees1_selection_weight(1.0, 9), 1.0)

    def test_select_mates_fills_quota(self):
        mates = select_mates(10, 0.3, 5, np.random.default_rng(0))
        self.assertEqual(len(mates), 5)
        self.assertTrue(all(0 <= m < 10 for m in mates))
        self.assertEqual(select_mates(4, 1.0, 2, np.random.default_rng(0)), [0, 1])

    def test_select_mates_are_distinct(self):
        rng = np.random.default_rng(5)
        for mu in (0.3, 0.01):
            for _ in range(50):
                mates = select_mates(10, mu, 5, rng)
                self.assertEqual(len(set(mates)), 5)
        with self.assertRaises(ValueError):
            select_mates(4, 0.3, 5, rng)

    @tag("slow")
    def test_griewank_with_protocol_budget(self):
        options = OptionsEES1(iterations=200)
        converged = 0
        for seed in range(7):
            objective = make_objective(griewank, 4, tolerance=0.1)
            estimates = extremize("ees1", objective, options, seed=seed)
            converged += estimates.stats.converged
        self.assertGreaterEqual(converged, 6)

    def test_geometric_centroid(self):
        self.assertAlmostEqual(signed_geometric_mean([1, 4]), 2.0)
        self.assertAlmostEqual(signed_geometric_mean([-1, -4]), -2.0)
        self.assertEqual(signed_geometric_mean([0, 3]), 0.0)
        self.assertAlmostEqual(signed_geometric_mean([-2, 4]), 1.0)
        mates = np.array([[1.0, -1.0], [4.0, -9.0]])
        np.testing.assert_allclose(centroid(mates), [2, -3])

    def test_recombination(self):
        x, g = np.array([2.0]), np.array([4.0])
        self.assertEqual(recombine(x, g)[0], 3.0)
        self.assertEqual(recombine(x, g, 0.5)[0], 2.5)
        self.assertEqual(recombine(x, g, 0.5, "pseudocode")[0], 3.0)

    def test_best_never_worsens(self):
        for seed in range(5):
            objective = make_objective(sphere, 4, tolerance=0)
            estimates = extremize("ees1", objective, seed=seed)
            fitness = [c.fitness for c in estimates.iteration_bests]
            self.assertTrue(all(b <= a for a, b in zip(fitness, fitness[1:])))
            self.assertEqual(estimates.stats.total_evals, 10 * 51)


class Ees2Tests(SimpleTestCase):
    def test_midpoints(self):
        self.assertEqual(ees2_midpoints(1.0, 4.0), (2.0, 2.5))
        self.assertEqual(ees2_midpoints(-4.0, -1.0), (-2.0, 2.5))
        self.assertEqual(ees2_midpoints(-2.0, 4.0), (1.0, 1.0))

    def test_ranges_within_bounds(self):
        space = ParameterSpace([ParameterDef("a", -1, 1), ParameterDef("b", 10, 20)])
        rng = np.random.default_rng(3)
        for _ in range(500):
            rows = rng.uniform(space.lower, space.upper, size=(5, 2))
            lower, upper = ees2_range(rows, space, rng)
            self.assertTrue(np.all(lower >= space.lower))
            self.assertTrue(np.all(upper <= space.upper))
            self.assertTrue(np.all(lower <= upper))

    def test_fixed_budget(self):
        objective = make_objective(rosenbrock, 4, tolerance=0)
        estimates = extremize("ees2", objective, seed=11)
        self.assertEqual(estimates.stats.total_evals, 620)
        self.assertEqual(len(estimates.iteration_bests), 31)

    @tag("slow")
    def test_focusing_on_sphere(self):
        # Les k meilleures lignes se resserrent à côté de l'origine sans
        # toujours l'encadrer : on tolère un écart de 1e-2 (5e-5 de l'étendue).
        for seed in range(7):
            objective = make_objective(sphere, 4, tolerance=0)
            estimates = extremize("ees2", objective, seed=seed)
            best_rows = np.array(
                [c.values for c in estimates.get_visited_space(sort=True)[:5]]
            )
            lowest, highest = best_rows.min(axis=0), best_rows.max(axis=0)
            self.assertTrue(np.all(highest - lowest <= 20.0), (seed, lowest, highest))
            self.assertTrue(np.all(lowest <= 1e-2), (seed, lowest))
            self.assertTrue(np.all(highest >= -1e-2), (seed, highest))


class ExtremizeTests(SimpleTestCase):
    def test_unknown_method(self):
        objective = make_objective(sphere, 2)
        with self.assertRaises(UnknownMethodError) as context:
            extremize("tabu", objective)
        self.assertIn("ees2", str(context.exception))

    def test_options_mismatch(self):
        objective = make_objective(sphere, 2)
        with self.assertRaises(OptionsMismatchError):
            extremize("pso", objective, OptionsACOR())

    def test_bookkeeping_for_every_method(self):
        for method in METHODS:
            objective = make_objective(sphere, 3, tolerance=0)
            estimates = extremize(method, objective, QUICK_OPTIONS[method], seed=7)
            visited = estimates.get_visited_space()
            self.assertEqual(estimates.stats.total_evals, len(visited), method)
            self.assertEqual(
                estimates.best.fitness, min(c.fitness for c in visited), method
            )
            self.assertEqual(
                [c.pset for c in visited], list(range(1, len(visited) + 1))
            )
            space = objective.space
            self.assertTrue(all(space.contains(c.values) for c in visited), method)
            fitness = [c.fitness for c in estimates.iteration_bests]
            self.assertTrue(all(b <= a for a, b in zip(fitness, fitness[1:])), method)

    def test_same_seed_same_run(self):
        for method in METHODS:
            runs = [
                extremize(
                    method,
                    make_objective(sphere, 2, tolerance=0),
                    QUICK_OPTIONS[method],
                    seed=21,
                )
                for _ in range(2)
            ]
            first, second = (
                np.array([c.values for c in run.visited_space]) for run in runs
            )
            np.testing.assert_array_equal(first, second)

    def test_convergence_stops_run(self):
        objective = make_objective(sphere, 2, bound=1.0, tolerance=0.5)
        estimates = extremize("pso", objective, seed=0)
        self.assertTrue(estimates.stats.converged)
        self.assertLess(estimates.stats.total_evals, 16 * 1001)

    def test_budget_caps_run(self):
        objective = make_objective(sphere, 2, tolerance=0, max_evals=50)
        estimates = extremize("pso", objective, seed=0)
        self.assertEqual(estimates.stats.total_evals, 50)
        self.assertEqual(len(estimates.visited_space), 50)
