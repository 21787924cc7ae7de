import math
import unittest

import numpy as np

from autoinject import injector

from graphtc.settings import GtcSettings
from graphtc.wfsa import EmissionMatrix
from graphtc.label_graph import WordAlternatives, build_ctc_graph, build_gtc_graph
from graphtc.loss import (
    collapse, alignment_logprob, greedy_decode, gtc_loss, ctc_loss_reference, brute_force_loss, LossResult,
    InvalidTarget, TooLarge
)
from graphtc._tests import (
    FIGURE_WORDS, is_unambiguous, min_frames, random_emissions, random_sequence, random_words
)


def _uniform(num_frames, vocab_size=3):
    return EmissionMatrix.uniform(num_frames, vocab_size)


class TestCollapse(unittest.TestCase):

    def test_collapse(self):
        self.assertEqual(collapse((1, 1, 0, 2, 2, 0, 0, 2)), (1, 2, 2))
        self.assertEqual(collapse((0, 0)), ())
        self.assertEqual(collapse(()), ())
        self.assertEqual(collapse((3, 0, 3)), (3, 3))

    def test_alignment_logprob(self):
        self.assertAlmostEqual(alignment_logprob((1, 0), _uniform(2)), 2 * math.log(1 / 3))
        self.assertRaises(ValueError, alignment_logprob, (1,), _uniform(2))

    def test_greedy_decode(self):
        one_hot = np.log(np.asarray([
            [0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0],
        ]))
        self.assertEqual(greedy_decode(EmissionMatrix(one_hot)), (1, 2))
        self.assertEqual(greedy_decode(_uniform(4)), ())


class TestSpotValues(unittest.TestCase):

    def test_single_label_two_frames(self):
        result = gtc_loss(build_ctc_graph((1,)), _uniform(2))
        self.assertAlmostEqual(result.loss, math.log(3), places=12)
        self.assertEqual(round(result.loss, 6), 1.098612)

    def test_two_variants_one_frame(self):
        graph = build_gtc_graph([WordAlternatives("w", [(1,), (2,)])])
        self.assertEqual(round(gtc_loss(graph, _uniform(1)).loss, 6), 0.405465)
        self.assertAlmostEqual(brute_force_loss(graph, _uniform(1)), math.log(1.5), places=12)

    def test_repeated_word(self):
        words = [WordAlternatives("w", [(1,)]), WordAlternatives("w", [(1,)])]
        graph = build_gtc_graph(words)
        self.assertEqual(round(gtc_loss(graph, _uniform(3)).loss, 6), 3.295837)
        self.assertAlmostEqual(brute_force_loss(graph, _uniform(3)), math.log(27), places=12)
        self.assertAlmostEqual(ctc_loss_reference((1, 1), _uniform(3)).loss, math.log(27), places=12)

    def test_shared_spelling_is_counted_once(self):
        # a|bc and ab|c both spell "a b c"
        words = [WordAlternatives("w1", [(1,), (1, 2)]), WordAlternatives("w2", [(2, 3), (3,)])]
        one_hot = EmissionMatrix(np.log(np.eye(4)[[1, 2, 3]]))
        self.assertAlmostEqual(gtc_loss(build_gtc_graph(words), one_hot).loss, 0.0, places=12)
        self.assertAlmostEqual(brute_force_loss(build_gtc_graph(words), one_hot), 0.0, places=12)
        emissions = _uniform(4, 4)
        expected = brute_force_loss(build_gtc_graph(words), emissions)
        self.assertAlmostEqual(gtc_loss(build_gtc_graph(words), emissions).loss, expected, places=12)
        self.assertLess(gtc_loss(build_gtc_graph(words, deterministic=False), emissions).loss, expected)

    def test_infeasible(self):
        words = [WordAlternatives("w", [(1,)]), WordAlternatives("w", [(1,)])]
        result = gtc_loss(build_gtc_graph(words), _uniform(2))
        self.assertFalse(result.feasible)
        self.assertEqual(result.loss, float("inf"))
        self.assertTrue((result.grad == 0).all())
        self.assertFalse(ctc_loss_reference((1, 1), _uniform(2)).feasible)
        self.assertEqual(brute_force_loss(build_gtc_graph(words), _uniform(2)), float("inf"))

    def test_loss_result_infeasible(self):
        result = LossResult.infeasible(3, 4)
        self.assertEqual(result.grad.shape, (3, 4))
        self.assertFalse(result.feasible)


class TestOracle(unittest.TestCase):

    def test_brute_force_agreement(self):
        rng = np.random.default_rng(1234)
        ambiguous = 0
        for _ in range(1000):
            vocab_size = int(rng.integers(2, 5))
            words = random_words(rng, vocab_size)
            ambiguous += not is_unambiguous(words)
            emissions = random_emissions(rng, int(rng.integers(1, 7)), vocab_size)
            graph = build_gtc_graph(words)
            expected = brute_force_loss(graph, emissions)
            actual = gtc_loss(graph, emissions).loss
            self.assertGreaterEqual(actual, -1e-12)
            if math.isinf(expected):
                self.assertTrue(math.isinf(actual))
            else:
                self.assertLessEqual(abs(actual - expected), 1e-10 * max(1.0, abs(expected)))
        self.assertGreater(ambiguous, 0)

    def test_too_large(self):
        with self.assertRaises(TooLarge):
            brute_force_loss(build_ctc_graph((1,)), _uniform(20, 4), max_alignments=1000)

    @injector.test_case({GtcSettings: GtcSettings(brute_force_limit=100)})
    def test_limit_from_settings(self):
        graph = build_ctc_graph((1,))
        self.assertRaises(TooLarge, brute_force_loss, graph, _uniform(5, 3))
        self.assertAlmostEqual(brute_force_loss(graph, _uniform(4, 3)), -math.log(10 / 81), places=12)
        self.assertAlmostEqual(brute_force_loss(graph, _uniform(5, 3), max_alignments=243), -math.log(15 / 243),
                               places=12)


class TestCtcDegeneracy(unittest.TestCase):

    def test_matches_reference(self):
        rng = np.random.default_rng(99)
        for _ in range(500):
            vocab_size = int(rng.integers(2, 6))
            target = random_sequence(rng, vocab_size, 4)
            emissions = random_emissions(rng, int(rng.integers(1, 10)), vocab_size)
            graph = build_gtc_graph([WordAlternatives("w", [target])])
            reference = ctc_loss_reference(target, emissions)
            result = gtc_loss(graph, emissions)
            if not reference.feasible:
                self.assertFalse(result.feasible)
                self.assertLess(emissions.num_frames, min_frames(target))
                continue
            self.assertAlmostEqual(result.loss, reference.loss, delta=1e-12 * max(1.0, abs(reference.loss)))
            np.testing.assert_allclose(result.grad, reference.grad, atol=1e-12)

    def test_rejects_blank_target(self):
        self.assertRaises(InvalidTarget, ctc_loss_reference, (1, 0), _uniform(3))
        self.assertRaises(InvalidTarget, ctc_loss_reference, (5,), _uniform(3))


class TestGradient(unittest.TestCase):

    def test_finite_differences(self):
        rng = np.random.default_rng(2024)
        checked = 0
        step = 1e-5
        while checked < 100:
            vocab_size = int(rng.integers(2, 5))
            graph = build_gtc_graph(random_words(rng, vocab_size, max_words=2))
            emissions = random_emissions(rng, int(rng.integers(3, 7)), vocab_size, scale=1.0)
            result = gtc_loss(graph, emissions)
            if not result.feasible:
                continue
            checked += 1
            np.testing.assert_allclose(result.occupancy.sum(axis=1), 1.0, atol=1e-9)
            np.testing.assert_array_equal(result.grad, -result.occupancy)
            values = emissions.log_posteriors
            for frame, symbol in zip(*np.nonzero(np.abs(result.grad) > 1e-8)):
                plus = values.copy()
                minus = values.copy()
                plus[frame, symbol] += step
                minus[frame, symbol] -= step
                numeric = (gtc_loss(graph, EmissionMatrix(plus, validate=False)).loss
                           - gtc_loss(graph, EmissionMatrix(minus, validate=False)).loss) / (2 * step)
                self.assertLessEqual(abs(numeric - result.grad[frame, symbol]),
                                     1e-6 * max(abs(result.grad[frame, symbol]), 1e-2))


class TestMonotonicity(unittest.TestCase):

    def test_adding_a_variant(self):
        rng = np.random.default_rng(31)
        for _ in range(500):
            vocab_size = int(rng.integers(2, 5))
            words = random_words(rng, vocab_size)
            index = int(rng.integers(len(words)))
            extra = random_sequence(rng, vocab_size, 3)
            richer = list(words)
            richer[index] = WordAlternatives(words[index].word, list(words[index].variants) + [extra])
            emissions = random_emissions(rng, int(rng.integers(1, 8)), vocab_size)
            before = gtc_loss(build_gtc_graph(words), emissions).loss
            after = gtc_loss(build_gtc_graph(richer), emissions).loss
            self.assertLessEqual(after, before + 1e-12)

    def test_figure_words_variants_help(self):
        emissions = _uniform(6, 7)
        one_best = build_gtc_graph([WordAlternatives(w.word, w.variants[:1]) for w in FIGURE_WORDS])
        every = build_gtc_graph(FIGURE_WORDS)
        self.assertLess(gtc_loss(every, emissions).loss, gtc_loss(one_best, emissions).loss)
