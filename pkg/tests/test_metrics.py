import io
import itertools
import unittest

import numpy as np

from graphtc.label_graph import WordAlternatives, build_gtc_graph, enumerate_collapsed
from graphtc.lexicon import parse_lexicon, UnknownWord
from graphtc.metrics import (
    EditCounts, ErrorReport, edit_distance, error_rate, pool, graph_edit_distance, read_transcripts, oracle_report,
    oracle_ler, EmptyReference, TranscriptFormatError
)
from graphtc._tests import FIGURE_WORDS, random_sequence, random_words


LEXICON = (
    "w1\ta b\n"
    "w1\ta c\n"
    "w1\ta d\n"
    "w2\td e\n"
    "w2\tf e\n"
    "w3\tb\n"
    "w3\tc b\n"
)


class TestEditDistance(unittest.TestCase):

    def test_counts(self):
        self.assertEqual(edit_distance((1, 2, 3), (1, 2, 3)), EditCounts())
        self.assertEqual(edit_distance((1, 2, 3), (1, 4, 3)), EditCounts(substitutions=1))
        self.assertEqual(edit_distance((1, 2, 3), (1, 3)), EditCounts(deletions=1))
        self.assertEqual(edit_distance((1, 3), (1, 2, 3)), EditCounts(insertions=1))
        self.assertEqual(edit_distance((), (1, 2)), EditCounts(insertions=2))
        self.assertEqual(edit_distance((1, 2), ()), EditCounts(deletions=2))

    def test_substitution_preferred(self):
        self.assertEqual(edit_distance((1,), (2,)), EditCounts(substitutions=1))
        self.assertEqual(edit_distance((1, 2), (2, 1)).distance, 2)

    def test_random_properties(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            ref = random_sequence(rng, 4, 6)
            hyp = random_sequence(rng, 4, 6)
            counts = edit_distance(ref, hyp)
            self.assertEqual(counts.distance, edit_distance(hyp, ref).distance)
            self.assertEqual(len(hyp) - len(ref), counts.insertions - counts.deletions)
            self.assertLessEqual(counts.distance, max(len(ref), len(hyp)))

    def test_triangle_inequality(self):
        rng = np.random.default_rng(4)
        for _ in range(300):
            a, b, c = (random_sequence(rng, 4, 6) for _ in range(3))
            self.assertLessEqual(edit_distance(a, c).distance,
                                 edit_distance(a, b).distance + edit_distance(b, c).distance)


class TestErrorRate(unittest.TestCase):

    def test_pooled(self):
        pairs = [((1, 2, 3, 4), (1, 2, 3, 4)), ((1, 2), (1,))]
        self.assertAlmostEqual(error_rate(pairs), 100.0 / 6)
        report = pool(pairs)
        self.assertEqual(report.ref_len, 6)
        self.assertEqual(report.counts, EditCounts(deletions=1))

    def test_empty_reference(self):
        self.assertRaises(EmptyReference, error_rate, [])
        self.assertRaises(EmptyReference, error_rate, [((), (1,))])

    def test_report_line(self):
        report = ErrorReport(EditCounts(1, 2, 3), 60)
        self.assertEqual(report.format(None), "n=all ler=10.0% S=1 I=2 D=3 ref_len=60")
        self.assertEqual(report.format(2), "n=2 ler=10.0% S=1 I=2 D=3 ref_len=60")


class TestGraphEditDistance(unittest.TestCase):

    def test_figure_words(self):
        graph = build_gtc_graph(FIGURE_WORDS)
        self.assertEqual(graph_edit_distance(graph, (1, 3, 6, 5)).distance, 0)
        self.assertEqual(graph_edit_distance(graph, (1, 3, 6)), EditCounts(deletions=0, insertions=1))
        self.assertEqual(graph_edit_distance(graph, (1, 3, 3, 6, 5)), EditCounts(deletions=1))

    def test_matches_enumeration(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            words = random_words(rng, 4)
            graph = build_gtc_graph(words)
            ref = random_sequence(rng, 4, 7)
            expected = min(edit_distance(ref, hyp).distance for hyp in enumerate_collapsed(graph))
            self.assertEqual(graph_edit_distance(graph, ref).distance, expected)

    def test_adding_variants_never_hurts(self):
        rng = np.random.default_rng(23)
        for _ in range(500):
            words = random_words(rng, 4)
            ref = random_sequence(rng, 4, 7)
            index = int(rng.integers(len(words)))
            richer = list(words)
            richer[index] = WordAlternatives(words[index].word,
                                             list(words[index].variants) + [random_sequence(rng, 4, 3)])
            self.assertLessEqual(graph_edit_distance(build_gtc_graph(richer), ref).distance,
                                 graph_edit_distance(build_gtc_graph(words), ref).distance)


class TestOracle(unittest.TestCase):

    def setUp(self):
        self.lexicon = parse_lexicon(io.StringIO(LEXICON))
        vocab = self.lexicon.vocabulary
        self.transcripts = read_transcripts(io.StringIO(
            "w1 w2\ta d f e\n"
            "w3 w1\tc b a c\n"
            "# comment\n"
            "w2 w3 w1\td e b a b\n"
            "w1\ta d\n"
        ), vocab)

    def test_read_transcripts(self):
        self.assertEqual(len(self.transcripts), 4)
        self.assertEqual(self.transcripts[0][0], ("w1", "w2"))
        with self.assertRaises(TranscriptFormatError) as ctx:
            read_transcripts(["w1\ta\n", "w1 a\n"], self.lexicon.vocabulary)
        self.assertEqual(ctx.exception.line_number, 2)
        self.assertRaises(TranscriptFormatError, read_transcripts, ["w1\ta zz\n"], self.lexicon.vocabulary)
        self.assertRaises(TranscriptFormatError, read_transcripts, ["\ta\n"], self.lexicon.vocabulary)

    def test_monotone_in_n(self):
        rates = [oracle_ler(self.lexicon, self.transcripts, n) for n in (1, 2, 3, None)]
        for before, after in zip(rates, rates[1:]):
            self.assertLessEqual(after, before)
        self.assertEqual(rates[-1], 0.0)
        self.assertGreater(rates[0], 0.0)

    def test_one_best_references(self):
        transcripts = []
        for words in itertools.permutations(("w1", "w2", "w3"), 2):
            ref = []
            for word in words:
                ref.extend(self.lexicon.variants(word)[0].pronunciation.phonemes)
            transcripts.append((words, tuple(ref)))
        for n in (1, 2, 3, None):
            self.assertEqual(oracle_ler(self.lexicon, transcripts, n), 0.0)

    def test_jobs_do_not_change_the_result(self):
        self.assertEqual(oracle_report(self.lexicon, self.transcripts, 1, jobs=3),
                         oracle_report(self.lexicon, self.transcripts, 1))

    def test_unknown_words_are_aggregated(self):
        with self.assertRaises(UnknownWord) as ctx:
            oracle_ler(self.lexicon, [(("w1", "q2"), (1,)), (("q1",), (1,))], 1)
        self.assertEqual(ctx.exception.words, ["q1", "q2"])

    def test_empty_reference(self):
        self.assertRaises(EmptyReference, oracle_ler, self.lexicon, [], None)
