""" Command-line tools.

    Results go to standard output and diagnostics to standard error. Exit statuses are stable for scripting:

    * ``0``: success
    * ``2``: an input error (unreadable or malformed files, unknown words, bad configuration)
    * ``3``: the loss is infinite because the target cannot fit the available frames

"""
import argparse
import logging
import pathlib
import sys
import typing as t

import numpy as np

from autoinject import injector

from .wfsa import LabelGraph, Vocabulary, to_dot
from .label_graph import LimitExceeded, dump_graph, enumerate_collapsed, load_graph
from .lexicon import Lexicon, load_lexicon, words_to_graph
from .loss import brute_force_loss, ctc_loss_reference, greedy_decode, gtc_loss
from .metrics import oracle_report, read_transcripts
from .posteriors import read_posteriors, write_matrix
from .settings import GtcSettings
from .synthlab import LossMode, SynthConfig, format_table, run_experiment


EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_INFEASIBLE = 3


def _parse_n(text: str) -> t.Optional[int]:
    if text == "all":
        return None
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a positive integer or 'all', got {!r}".format(text)) from None
    if n < 1:
        raise argparse.ArgumentTypeError("n must be at least 1")
    return n


def _read_symbols(path: str) -> Vocabulary:
    return Vocabulary(tuple(pathlib.Path(path).read_text(encoding="utf-8").split()))


def _load_lexicon(args) -> Lexicon:
    vocabulary = _read_symbols(args.symbols) if getattr(args, "symbols", None) else None
    return load_lexicon(args.lexicon, vocabulary)


@injector.inject
def cmd_graph(args, settings: GtcSettings = None) -> int:
    """ Builds the pronunciation graph of a word sequence and reports its size """
    lexicon = _load_lexicon(args)
    graph = words_to_graph(lexicon, args.words, args.n)
    if args.dot:
        pathlib.Path(args.dot).write_text(to_dot(graph, lexicon.vocabulary).source, encoding="utf-8")
    if args.dump:
        with open(args.dump, "w", encoding="utf-8", newline="\n") as handle:
            dump_graph(graph, lexicon.vocabulary, handle)
    try:
        sequences = str(len(enumerate_collapsed(graph, limit=settings.enumerate_limit)))
    except LimitExceeded:
        sequences = ">{}".format(settings.enumerate_limit)
    print("nodes={} arcs={} sequences={}".format(graph.num_nodes, graph.num_arcs, sequences))
    return EXIT_OK


def _target_graph(args, lexicon: Lexicon) -> LabelGraph:
    if args.graph:
        with open(args.graph, "r", encoding="utf-8") as handle:
            return load_graph(handle, lexicon.vocabulary)
    return words_to_graph(lexicon, args.words, args.n)


@injector.inject
def cmd_loss(args, settings: GtcSettings = None) -> int:
    """ Computes the loss of a word sequence against a posterior file

        The target is built from the words or read from a graph dump given with ``--graph``. The brute-force mode has
        no gradient, so it cannot be combined with ``--grad``.
    """
    if args.mode == "brute" and args.grad:
        raise ValueError("--grad is not available in brute mode")
    if args.graph and args.mode == "ctc-ref":
        raise ValueError("--graph cannot be combined with ctc-ref mode")
    if not args.graph and not args.words:
        raise ValueError("give the words of the utterance or a --graph dump")
    lexicon = _load_lexicon(args)
    emissions = read_posteriors(args.posteriors, normalize=args.normalize)
    if emissions.vocab_size != lexicon.vocabulary.size:
        raise ValueError("{} has {} columns but the vocabulary has {} symbols".format(
            args.posteriors, emissions.vocab_size, lexicon.vocabulary.size
        ))
    precision = settings.precision if args.precision is None else args.precision
    if args.mode == "ctc-ref":
        if args.n is not None and args.n != 1:
            logging.getLogger("graphtc").warning("ctc-ref mode uses the 1-best pronunciation and ignores --n")
        target = []
        for word in args.words:
            target.extend(lexicon.variants(word)[0].pronunciation.phonemes)
        result = ctc_loss_reference(target, emissions)
        loss = result.loss
    elif args.mode == "brute":
        result = None
        loss = brute_force_loss(_target_graph(args, lexicon), emissions)
    else:
        result = gtc_loss(_target_graph(args, lexicon), emissions)
        loss = result.loss
    if args.grad:
        write_matrix(args.grad, result.grad)
    if not np.isfinite(loss):
        print("loss=inf")
        return EXIT_INFEASIBLE
    print("loss={:.{}f}".format(loss, precision))
    return EXIT_OK


@injector.inject
def cmd_oracle_ler(args, settings: GtcSettings = None) -> int:
    """ Prints one oracle report line per requested ``n`` """
    lexicon = _load_lexicon(args)
    with open(args.transcripts, "r", encoding="utf-8") as handle:
        transcripts = read_transcripts(handle, lexicon.vocabulary)
    jobs = settings.jobs if args.jobs is None else args.jobs
    reports = [(n, oracle_report(lexicon, transcripts, n, jobs=jobs)) for n in args.n]
    for n, report in reports:
        print(report.format(n))
    return EXIT_OK


def cmd_decode(args) -> int:
    """ Greedy decoding of a posterior file """
    emissions = read_posteriors(args.posteriors, normalize=args.normalize)
    hypothesis = greedy_decode(emissions)
    vocabulary = None
    if args.symbols:
        vocabulary = _read_symbols(args.symbols)
    elif args.lexicon:
        vocabulary = load_lexicon(args.lexicon).vocabulary
    if vocabulary is not None and vocabulary.size != emissions.vocab_size:
        raise ValueError("{} has {} columns but the vocabulary has {} symbols".format(
            args.posteriors, emissions.vocab_size, vocabulary.size
        ))
    if vocabulary is None:
        print(" ".join(str(symbol) for symbol in hypothesis))
    else:
        print(" ".join(vocabulary.decode(hypothesis)))
    return EXIT_OK


@injector.inject
def cmd_train_toy(args, settings: GtcSettings = None) -> int:
    """ Runs the synthetic CTC versus GTC experiment and writes one result line per mode and seed """
    config = SynthConfig.from_json(args.config) if args.config else SynthConfig()
    overrides = {
        key: value for key, value in (
            ("epochs", args.epochs),
            ("variant_probability", args.variant_probability),
        ) if value is not None
    }
    if overrides:
        config = config.replace(**overrides)
    if args.modes:
        modes = [LossMode.parse(text) for text in args.modes]
    else:
        modes = [LossMode.ctc_1best()] + [LossMode.gtc_nbest(n) for n in args.n]
    seeds = args.seeds if args.seeds else [config.seed]
    jobs = settings.jobs if args.jobs is None else args.jobs
    results = run_experiment(config, modes, seeds, jobs=jobs)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
            for result in results:
                handle.write(result.format() + "\n")
    print(format_table(results))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphtc", description="Graph Temporal Classification tools")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="Log more (repeat for debug output)")
    commands = parser.add_subparsers(dest="command", required=True)

    graph = commands.add_parser("graph", help="Build the pronunciation graph of a word sequence")
    graph.add_argument("lexicon")
    graph.add_argument("words", nargs="+")
    graph.add_argument("--n", type=_parse_n, default=None, help="Variants per word (integer or 'all')")
    graph.add_argument("--dot", help="Write the graph in DOT format to this file")
    graph.add_argument("--dump", help="Write the textual graph dump to this file")
    graph.add_argument("--symbols", help="File listing the vocabulary, blank first")
    graph.set_defaults(handler=cmd_graph)

    loss = commands.add_parser("loss", help="Compute the loss of a word sequence")
    loss.add_argument("lexicon")
    loss.add_argument("posteriors")
    loss.add_argument("words", nargs="*")
    loss.add_argument("--n", type=_parse_n, default=None, help="Variants per word (integer or 'all')")
    loss.add_argument("--mode", choices=("gtc", "ctc-ref", "brute"), default="gtc")
    loss.add_argument("--grad", help="Write the gradient to this file")
    loss.add_argument("--precision", type=int, default=None, help="Decimals printed for the loss")
    loss.add_argument("--normalize", action="store_true", help="Renormalize rows instead of rejecting them")
    loss.add_argument("--symbols", help="File listing the vocabulary, blank first")
    loss.add_argument("--graph", help="Read the target from a graph dump instead of building it from the words")
    loss.set_defaults(handler=cmd_loss)

    oracle = commands.add_parser("oracle-ler", help="Oracle label error rate for several n")
    oracle.add_argument("lexicon")
    oracle.add_argument("transcripts")
    oracle.add_argument("--n", type=_parse_n, nargs="+", default=[1, 2, 3, None])
    oracle.add_argument("--jobs", type=int, default=None)
    oracle.add_argument("--symbols", help="File listing the vocabulary, blank first")
    oracle.set_defaults(handler=cmd_oracle_ler)

    decode = commands.add_parser("decode", help="Greedy decoding of a posterior file")
    decode.add_argument("posteriors")
    decode.add_argument("--lexicon", help="Lexicon naming the symbols")
    decode.add_argument("--symbols", help="File listing the vocabulary, blank first")
    decode.add_argument("--normalize", action="store_true")
    decode.set_defaults(handler=cmd_decode)

    toy = commands.add_parser("train-toy", help="Synthetic CTC versus GTC training experiment")
    toy.add_argument("--config", help="JSON file with synthetic experiment settings")
    toy.add_argument("--out", help="Write result lines to this file")
    toy.add_argument("--n", type=_parse_n, nargs="+", default=[None], help="GTC variant counts to train")
    toy.add_argument("--modes", nargs="+", help="Objectives such as ctc-1best or gtc-nbest(2); replaces --n")
    toy.add_argument("--seeds", type=int, nargs="+", default=None)
    toy.add_argument("--epochs", type=int, default=None)
    toy.add_argument("--variant-probability", type=float, default=None)
    toy.add_argument("--jobs", type=int, default=None)
    toy.set_defaults(handler=cmd_train_toy)
    return parser


@injector.inject
def _configure_logging(verbose: int, settings: GtcSettings = None):
    level = logging.getLevelName(settings.log_level)
    if verbose:
        level = min(level, logging.INFO if verbose == 1 else logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: t.Optional[t.Sequence[str]] = None) -> int:
    """ Entry point of the ``graphtc`` command; returns the exit status """
    args = build_parser().parse_args(argv)
    try:
        _configure_logging(args.verbose)
        return args.handler(args)
    except (OSError, ValueError) as ex:
        print("graphtc {}: {}".format(args.command, ex), file=sys.stderr)
        return EXIT_INPUT_ERROR
