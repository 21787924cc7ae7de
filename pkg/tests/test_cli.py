import contextlib
import io
import json
import pathlib
import tempfile
import unittest

import numpy as np

from autoinject import injector

from graphtc.cli import main, EXIT_OK, EXIT_INPUT_ERROR, EXIT_INFEASIBLE
from graphtc.posteriors import read_matrix, write_matrix
from graphtc.settings import GtcSettings


FIGURE_LEXICON = "w1\ta b\nw1\ta c\nw2\td e\nw2\tf e\n"
AB_LEXICON = "x\ta\nx\tb\ny\ta\nz\tb\n"


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self._directory = tempfile.TemporaryDirectory()
        self.directory = pathlib.Path(self._directory.name)

    def tearDown(self):
        self._directory.cleanup()

    def write(self, name, text):
        path = self.directory / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    def uniform(self, name, num_frames, vocab_size=3):
        path = self.directory / name
        write_matrix(path, np.full((num_frames, vocab_size), -np.log(vocab_size)))
        return str(path)

    def run_cli(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            status = main([str(a) for a in argv])
        return status, out.getvalue(), err.getvalue()


class TestGraphCommand(CliTestCase):

    def test_figure_words(self):
        lexicon = self.write("lex.tsv", FIGURE_LEXICON)
        status, out, _ = self.run_cli("graph", lexicon, "w1", "w2", "--n", "all")
        self.assertEqual(status, EXIT_OK)
        self.assertIn("sequences=4", out)
        status, out, _ = self.run_cli("graph", lexicon, "w1", "w2", "--n", "1")
        self.assertIn("sequences=1", out)

    def test_outputs(self):
        lexicon = self.write("lex.tsv", FIGURE_LEXICON)
        dot = self.directory / "g.dot"
        dump = self.directory / "g.txt"
        status, out, _ = self.run_cli("graph", lexicon, "w1", "w2", "--dot", dot, "--dump", dump)
        self.assertEqual(status, EXIT_OK)
        self.assertIn("digraph", dot.read_text(encoding="utf-8"))
        nodes = int(out.split()[0].split("=")[1])
        arcs = int(out.split()[1].split("=")[1])
        self.assertEqual(len(dump.read_text(encoding="utf-8").splitlines()), nodes + arcs)

    @injector.test_case({GtcSettings: GtcSettings(enumerate_limit=3)})
    def test_enumeration_limit(self):
        lexicon = self.write("lex.tsv", FIGURE_LEXICON)
        _, out, _ = self.run_cli("graph", lexicon, "w1", "w2")
        self.assertIn("sequences=>3", out)

    def test_input_errors(self):
        missing = self.directory / "missing.tsv"
        status, _, err = self.run_cli("graph", missing, "w1")
        self.assertEqual(status, EXIT_INPUT_ERROR)
        self.assertIn("missing.tsv", err)
        lexicon = self.write("lex.tsv", FIGURE_LEXICON)
        status, _, err = self.run_cli("graph", lexicon, "w1", "nope")
        self.assertEqual(status, EXIT_INPUT_ERROR)
        self.assertIn("nope", err)
        broken = self.write("broken.tsv", "w1 a b\n")
        status, _, err = self.run_cli("graph", broken, "w1")
        self.assertEqual(status, EXIT_INPUT_ERROR)
        self.assertIn("Line 1", err)

    def test_bad_n(self):
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                main(["graph", "lex.tsv", "w1", "--n", "0"])
        self.assertEqual(ctx.exception.code, 2)


class TestLossCommand(CliTestCase):

    def setUp(self):
        super().setUp()
        self.lexicon = self.write("lex.tsv", AB_LEXICON)

    def test_spot_values(self):
        _, out, _ = self.run_cli("loss", self.lexicon, self.uniform("t1", 1), "x")
        self.assertEqual(out.strip(), "loss=0.405465")
        _, out, _ = self.run_cli("loss", self.lexicon, self.uniform("t2", 2), "y")
        self.assertEqual(out.strip(), "loss=1.098612")
        _, out, _ = self.run_cli("loss", self.lexicon, self.uniform("t3", 3), "y", "y")
        self.assertEqual(out.strip(), "loss=3.295837")

    def test_modes_agree(self):
        posteriors = self.uniform("t1", 1)
        _, gtc, _ = self.run_cli("loss", self.lexicon, posteriors, "x")
        _, brute, _ = self.run_cli("loss", self.lexicon, posteriors, "x", "--mode", "brute")
        self.assertEqual(gtc, brute)
        posteriors = self.uniform("t3", 3)
        _, gtc, _ = self.run_cli("loss", self.lexicon, posteriors, "y", "y")
        _, ctc, _ = self.run_cli("loss", self.lexicon, posteriors, "y", "y", "--mode", "ctc-ref")
        self.assertEqual(gtc, ctc)

    def test_infeasible(self):
        status, out, _ = self.run_cli("loss", self.lexicon, self.uniform("t2", 2), "y", "y")
        self.assertEqual(status, EXIT_INFEASIBLE)
        self.assertEqual(out.strip(), "loss=inf")

    def test_gradient_file(self):
        grad = self.directory / "grad.txt"
        status, _, _ = self.run_cli("loss", self.lexicon, self.uniform("t4", 4), "x", "z", "--grad", grad)
        self.assertEqual(status, EXIT_OK)
        values = read_matrix(grad)
        self.assertEqual(values.shape, (4, 3))
        np.testing.assert_allclose(-values.sum(axis=1), 1.0, atol=1e-9)
        status, _, err = self.run_cli("loss", self.lexicon, self.uniform("t4", 4), "x", "--mode", "brute",
                                      "--grad", grad)
        self.assertEqual(status, EXIT_INPUT_ERROR)

    def test_precision(self):
        _, out, _ = self.run_cli("loss", self.lexicon, self.uniform("t1", 1), "x", "--precision", "2")
        self.assertEqual(out.strip(), "loss=0.41")

    @injector.test_case({GtcSettings: GtcSettings(precision=3)})
    def test_precision_from_settings(self):
        _, out, _ = self.run_cli("loss", self.lexicon, self.uniform("t1", 1), "x")
        self.assertEqual(out.strip(), "loss=0.405")

    def test_normalization(self):
        raw = self.directory / "raw.txt"
        write_matrix(raw, [[-1.0, -1.0, -1.0]])
        status, _, err = self.run_cli("loss", self.lexicon, raw, "x")
        self.assertEqual(status, EXIT_INPUT_ERROR)
        self.assertIn("normalized", err)
        status, out, _ = self.run_cli("loss", self.lexicon, raw, "x", "--normalize")
        self.assertEqual(out.strip(), "loss=0.405465")

    def test_vocabulary_mismatch(self):
        status, _, _ = self.run_cli("loss", self.lexicon, self.uniform("wide", 2, 5), "x")
        self.assertEqual(status, EXIT_INPUT_ERROR)

    def test_graph_dump_target(self):
        dump = self.directory / "xy.graph"
        self.run_cli("graph", self.lexicon, "x", "y", "--dump", dump)
        posteriors = self.uniform("t3", 3)
        _, from_words, _ = self.run_cli("loss", self.lexicon, posteriors, "x", "y")
        status, from_dump, _ = self.run_cli("loss", self.lexicon, posteriors, "--graph", dump)
        self.assertEqual(status, EXIT_OK)
        self.assertEqual(from_dump, from_words)
        _, brute, _ = self.run_cli("loss", self.lexicon, posteriors, "--graph", dump, "--mode", "brute")
        self.assertEqual(brute, from_words)
        status, _, _ = self.run_cli("loss", self.lexicon, posteriors, "--graph", dump, "--mode", "ctc-ref")
        self.assertEqual(status, EXIT_INPUT_ERROR)
        status, _, _ = self.run_cli("loss", self.lexicon, posteriors)
        self.assertEqual(status, EXIT_INPUT_ERROR)

    @injector.test_case({GtcSettings: GtcSettings(brute_force_limit=10)})
    def test_brute_force_guard(self):
        status, _, err = self.run_cli("loss", self.lexicon, self.uniform("t4", 4), "x", "--mode", "brute")
        self.assertEqual(status, EXIT_INPUT_ERROR)
        self.assertIn("81", err)


class TestOracleCommand(CliTestCase):

    def setUp(self):
        super().setUp()
        self.lexicon = self.write("lex.tsv", "w1\ta b\nw1\ta c\nw1\ta d\nw2\td e\nw2\tf e\n")

    def test_report_lines(self):
        transcripts = self.write("ref.tsv", "w1 w2\ta d f e\nw1\ta c\n")
        status, out, _ = self.run_cli("oracle-ler", self.lexicon, transcripts, "--jobs", "2")
        self.assertEqual(status, EXIT_OK)
        lines = out.splitlines()
        self.assertEqual([line.split()[0] for line in lines], ["n=1", "n=2", "n=3", "n=all"])
        rates = [float(line.split()[1][len("ler="):-1]) for line in lines]
        self.assertEqual(rates, sorted(rates, reverse=True))
        self.assertEqual(lines[0], "n=1 ler=50.0% S=3 I=0 D=0 ref_len=6")
        self.assertEqual(rates[-1], 0.0)

    def test_one_best_references(self):
        transcripts = self.write("ref.tsv", "w1 w2\ta b d e\nw2\td e\n")
        _, out, _ = self.run_cli("oracle-ler", self.lexicon, transcripts, "--n", "1", "all")
        self.assertEqual([line.split()[1] for line in out.splitlines()], ["ler=0.0%", "ler=0.0%"])

    def test_errors(self):
        status, _, err = self.run_cli("oracle-ler", self.lexicon, self.write("empty.tsv", ""))
        self.assertEqual(status, EXIT_INPUT_ERROR)
        self.assertIn("no phonemes", err)
        status, _, _ = self.run_cli("oracle-ler", self.lexicon, self.write("bad.tsv", "w9\ta\n"))
        self.assertEqual(status, EXIT_INPUT_ERROR)


class TestDecodeCommand(CliTestCase):

    def one_hot(self, name, frames):
        path = self.directory / name
        with np.errstate(divide="ignore"):
            write_matrix(path, np.log(np.eye(3)[list(frames)]))
        return str(path)

    def test_decode(self):
        lexicon = self.write("lex.tsv", "x\ta b\n")
        _, out, _ = self.run_cli("decode", self.one_hot("p.txt", (1, 1, 0, 2)), "--lexicon", lexicon)
        self.assertEqual(out, "a b\n")
        _, out, _ = self.run_cli("decode", self.one_hot("p.txt", (0, 0, 0)))
        self.assertEqual(out, "\n")
        _, out, _ = self.run_cli("decode", self.one_hot("p.txt", (2, 1)))
        self.assertEqual(out, "2 1\n")

    def test_ties_go_to_blank(self):
        _, out, _ = self.run_cli("decode", self.uniform("u.txt", 3))
        self.assertEqual(out, "\n")

    def test_symbols_file(self):
        symbols = self.write("symbols.txt", "ε\nq\nr\n")
        _, out, _ = self.run_cli("decode", self.one_hot("p.txt", (2, 0, 2)), "--symbols", symbols)
        self.assertEqual(out, "r r\n")

    def test_malformed(self):
        status, _, _ = self.run_cli("decode", self.write("bad.txt", "2 3\n0 0 0\n"))
        self.assertEqual(status, EXIT_INPUT_ERROR)


class TestTrainToyCommand(CliTestCase):

    CONFIG = {"train_utterances": 12, "test_utterances": 8, "epochs": 0}

    def test_untrained_rows_match(self):
        config = self.write("config.json", json.dumps(self.CONFIG))
        out_file = self.directory / "results.txt"
        status, out, _ = self.run_cli("train-toy", "--config", config, "--out", out_file, "--seeds", "0")
        self.assertEqual(status, EXIT_OK)
        lines = out_file.read_text(encoding="utf-8").splitlines()
        self.assertEqual(len(lines), 2)
        self.assertTrue(lines[0].startswith("mode=ctc n=1 seed=0 per="))
        self.assertTrue(lines[1].startswith("mode=gtc n=all seed=0 per="))
        self.assertEqual(lines[0].split("per=")[1], lines[1].split("per=")[1])
        self.assertIn("median PER", out)

    def test_deterministic(self):
        config = self.write("config.json", json.dumps(dict(self.CONFIG, epochs=1)))
        first = self.directory / "first.txt"
        second = self.directory / "second.txt"
        self.run_cli("train-toy", "--config", config, "--out", first, "--n", "2", "all")
        self.run_cli("train-toy", "--config", config, "--out", second, "--n", "2", "all")
        self.assertEqual(first.read_text(encoding="utf-8"), second.read_text(encoding="utf-8"))
        self.assertEqual(len(first.read_text(encoding="utf-8").splitlines()), 3)

    def test_named_modes(self):
        config = self.write("config.json", json.dumps(self.CONFIG))
        out_file = self.directory / "results.txt"
        status, _, _ = self.run_cli("train-toy", "--config", config, "--out", out_file,
                                    "--modes", "ctc-1best", "gtc-nbest(2)")
        self.assertEqual(status, EXIT_OK)
        lines = out_file.read_text(encoding="utf-8").splitlines()
        self.assertTrue(lines[0].startswith("mode=ctc n=1 "))
        self.assertTrue(lines[1].startswith("mode=gtc n=2 "))
        status, _, err = self.run_cli("train-toy", "--config", config, "--modes", "hmm")
        self.assertEqual(status, EXIT_INPUT_ERROR)
        self.assertIn("hmm", err)

    def test_bad_config(self):
        config = self.write("config.json", json.dumps({"vocab_size": 1}))
        status, _, err = self.run_cli("train-toy", "--config", config)
        self.assertEqual(status, EXIT_INPUT_ERROR)
        self.assertIn("vocab_size", err)
