""" Synthetic corpora and a linear frame classifier for comparing CTC 1-best training with multi-variant GTC training.

    The first ``reduced_phonemes`` canonical phonemes each have a *reduced* form. Every word has a canonical
    pronunciation and variants in which one reducible phoneme is replaced by its reduced form, the way speakers reduce
    vowels that a grapheme-to-phoneme 1-best spells in full. A few *anchor* words carry a reduced phoneme in their
    canonical pronunciation, so reduced forms also occur as unambiguous targets. Utterances pick a non-first variant
    with ``variant_probability`` and render each phoneme as a few noisy copies of its feature template, with occasional
    silence frames rendered from the blank's template.

    The frame model is a linear layer followed by a log-softmax, trained with plain mini-batch gradient descent. The
    loss gradient ``-occupancy`` is pushed through the log-softmax, giving ``softmax - occupancy`` on the logits.

"""
import concurrent.futures
import dataclasses
import json
import logging
import pathlib
import statistics
import typing as t

import numpy as np

from autoinject import injector

from .wfsa import BLANK, EmissionMatrix, LabelGraph, Vocabulary, EmptyIntersection, intersect
from .label_graph import Pronunciation, build_ctc_graph
from .lexicon import Lexicon, Variant, load_lexicon, dump_lexicon, words_to_graph
from .loss import gtc_loss, greedy_decode
from .metrics import error_rate, read_transcripts, format_n
from .settings import GtcSettings


_CORPUS_STREAM, _MODEL_STREAM, _SHUFFLE_STREAM = range(3)


def _generator(seed: int, stream: int) -> np.random.Generator:
    """ One of several independent generators derived from a single seed """
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(3)[stream])


class ConfigError(ValueError):
    """ Raised when a synthetic experiment configuration is out of range or has unknown keys. """
    pass


class DivergenceError(ValueError):
    """ Raised when training produces a non-finite loss or non-finite parameters. """
    pass


@dataclasses.dataclass(frozen=True)
class SynthConfig:
    """ Configuration of a synthetic corpus and of its training run.

        ``vocab_size`` counts the blank. The last ``reduced_phonemes`` phonemes are the reduced forms of the first ones;
        ``variants_per_word`` caps the number of pronunciations per word.
    """

    vocab_size: int = 8
    reduced_phonemes: int = 2
    num_words: int = 12
    variants_per_word: int = 2
    feature_dim: int = 12
    min_frames: int = 2
    max_frames: int = 3
    noise: float = 0.5
    variant_probability: float = 0.5
    silence_probability: float = 0.3
    min_words: int = 2
    max_words: int = 3
    min_phonemes: int = 2
    max_phonemes: int = 4
    train_utterances: int = 120
    test_utterances: int = 60
    seed: int = 0
    epochs: int = 15
    learning_rate: float = 2.0
    batch_size: int = 8

    def __post_init__(self):
        checks = [
            (self.vocab_size >= 3, "vocab_size must be at least 3"),
            (0 <= 2 * self.reduced_phonemes <= self.vocab_size - 1,
             "every reduced phoneme needs its own canonical phoneme"),
            (self.num_words >= 1, "num_words must be at least 1"),
            (self.variants_per_word >= 1, "variants_per_word must be at least 1"),
            (self.feature_dim >= 1, "feature_dim must be at least 1"),
            (1 <= self.min_frames <= self.max_frames, "need 1 <= min_frames <= max_frames"),
            (self.noise >= 0, "noise must be non-negative"),
            (0.0 <= self.variant_probability <= 1.0, "variant_probability must lie in [0, 1]"),
            (0.0 <= self.silence_probability <= 1.0, "silence_probability must lie in [0, 1]"),
            (1 <= self.min_words <= self.max_words, "need 1 <= min_words <= max_words"),
            (1 <= self.min_phonemes <= self.max_phonemes, "need 1 <= min_phonemes <= max_phonemes"),
            (self.train_utterances >= 1, "train_utterances must be at least 1"),
            (self.test_utterances >= 1, "test_utterances must be at least 1"),
            (self.epochs >= 0, "epochs must be non-negative"),
            (self.learning_rate > 0, "learning_rate must be positive"),
            (self.batch_size >= 1, "batch_size must be at least 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)

    @classmethod
    def from_mapping(cls, mapping: t.Mapping[str, t.Any]) -> "SynthConfig":
        """ Builds a configuration from a mapping, rejecting unknown keys and ill-typed values """
        fields = {field.name: field for field in dataclasses.fields(cls)}
        unknown = sorted(set(mapping) - set(fields))
        if unknown:
            raise ConfigError("Unknown configuration key(s): {}".format(", ".join(unknown)))
        values = {}
        for key, value in mapping.items():
            kind = type(fields[key].default)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError("{} must be a number".format(key))
            if kind is int and value != int(value):
                raise ConfigError("{} must be an integer".format(key))
            values[key] = kind(value)
        return cls(**values)

    @classmethod
    def from_json(cls, path: t.Union[str, pathlib.Path]) -> "SynthConfig":
        try:
            with open(path, "r", encoding="utf-8") as handle:
                mapping = json.load(handle)
        except json.JSONDecodeError as ex:
            raise ConfigError("{} is not valid JSON: {}".format(path, ex)) from None
        if not isinstance(mapping, dict):
            raise ConfigError("{} must hold a JSON object".format(path))
        return cls.from_mapping(mapping)

    def replace(self, **changes) -> "SynthConfig":
        return dataclasses.replace(self, **changes)


@dataclasses.dataclass(frozen=True, eq=False)
class Utterance:
    """ One synthetic utterance: its words, the phonemes actually rendered, and the ``T x D`` feature frames """

    uid: str
    words: t.Tuple[str, ...]
    phonemes: t.Tuple[int, ...]
    features: np.ndarray

    @property
    def num_frames(self) -> int:
        return int(self.features.shape[0])


@dataclasses.dataclass(frozen=True, eq=False)
class Corpus:
    lexicon: Lexicon
    train: t.Tuple[Utterance, ...]
    test: t.Tuple[Utterance, ...]

    @property
    def vocabulary(self) -> Vocabulary:
        return self.lexicon.vocabulary


def generate_corpus(config: SynthConfig) -> Corpus:
    """ Generates a lexicon with train and test utterances; identical configurations give identical corpora """
    rng = _generator(config.seed, _CORPUS_STREAM)
    vocab_size = config.vocab_size
    vocabulary = Vocabulary.from_phonemes("p{}".format(i) for i in range(1, vocab_size))
    num_reduced = config.reduced_phonemes
    num_canonical = vocab_size - 1 - num_reduced
    canonical = np.arange(1, 1 + num_canonical)

    templates = rng.normal(size=(vocab_size, config.feature_dim))
    templates /= np.linalg.norm(templates, axis=1, keepdims=True)

    # canonical phoneme j (1 <= j <= num_reduced) has the reduced form num_canonical + j
    entries = {}
    for index in range(config.num_words):
        length = int(rng.integers(config.min_phonemes, config.max_phonemes + 1))
        base = [int(p) for p in rng.choice(canonical, size=length)]
        if num_reduced:
            position = int(rng.integers(length))
            if index < num_reduced:
                base[position] = num_canonical + index + 1
            else:
                base[position] = int(rng.integers(1, num_reduced + 1))
        variants = [tuple(base)]
        for position in rng.permutation(length).tolist():
            if len(variants) >= config.variants_per_word:
                break
            if 1 <= base[position] <= num_reduced:
                variants.append(tuple(base[:position] + [num_canonical + base[position]] + base[position + 1:]))
        entries["w{:03d}".format(index)] = tuple(Variant(Pronunciation(v)) for v in variants)
    lexicon = Lexicon(entries, vocabulary)
    word_names = list(entries)

    def _utterance(uid: str) -> Utterance:
        count = int(rng.integers(config.min_words, config.max_words + 1))
        words = tuple(word_names[int(i)] for i in rng.integers(len(word_names), size=count))
        phonemes = []
        for word in words:
            variants = entries[word]
            choice = variants[0]
            if len(variants) > 1 and rng.random() < config.variant_probability:
                choice = variants[int(rng.integers(1, len(variants)))]
            phonemes.extend(choice.pronunciation.phonemes)
        frame_symbols = []
        previous = None
        for phoneme in phonemes:
            if phoneme == previous or rng.random() < config.silence_probability:
                frame_symbols.append(BLANK)
            frame_symbols.extend([phoneme] * int(rng.integers(config.min_frames, config.max_frames + 1)))
            previous = phoneme
        noise = rng.normal(size=(len(frame_symbols), config.feature_dim)) / np.sqrt(config.feature_dim)
        features = templates[frame_symbols] + config.noise * noise
        return Utterance(uid, words, tuple(phonemes), features)

    train = tuple(_utterance("train{:05d}".format(i)) for i in range(config.train_utterances))
    test = tuple(_utterance("test{:05d}".format(i)) for i in range(config.test_utterances))
    return Corpus(lexicon, train, test)


@dataclasses.dataclass(frozen=True)
class LossMode:
    """ Training objective: CTC on the concatenated first variants, or GTC over the top-``n`` variants

        ``n`` is ``None`` for every variant.
    """

    kind: str
    n: t.Optional[int] = 1

    def __post_init__(self):
        if self.kind not in ("ctc", "gtc"):
            raise ConfigError("Unknown loss mode {!r}".format(self.kind))
        if self.kind == "ctc" and self.n != 1:
            raise ConfigError("CTC training only uses the 1-best pronunciation")
        if self.n is not None and self.n < 1:
            raise ConfigError("n must be at least 1")

    @classmethod
    def ctc_1best(cls) -> "LossMode":
        return cls("ctc", 1)

    @classmethod
    def gtc_nbest(cls, n: t.Optional[int]) -> "LossMode":
        return cls("gtc", n)

    @classmethod
    def parse(cls, text: str) -> "LossMode":
        """ Parses ``ctc-1best``, ``gtc-nbest(<n>)`` or ``gtc-nbest(all)`` """
        text = text.strip()
        if text == "ctc-1best":
            return cls.ctc_1best()
        if text.startswith("gtc-nbest(") and text.endswith(")"):
            inner = text[len("gtc-nbest("):-1]
            if inner == "all":
                return cls.gtc_nbest(None)
            if inner.isdigit():
                return cls.gtc_nbest(int(inner))
        raise ConfigError("Unknown loss mode {!r}".format(text))

    @property
    def label(self) -> str:
        return "ctc-1best" if self.kind == "ctc" else "gtc-nbest({})".format(format_n(self.n))

    def graph(self, lexicon: Lexicon, words: t.Sequence[str]) -> LabelGraph:
        if self.kind == "ctc":
            first = []
            for word in words:
                first.extend(lexicon.variants(word)[0].pronunciation.phonemes)
            return build_ctc_graph(first)
        return words_to_graph(lexicon, words, self.n)


@dataclasses.dataclass(frozen=True, eq=False)
class FrameModel:
    """ Linear frame classifier (``V x D`` weights and ``V`` biases) producing log-softmax posteriors.

        ``steps`` counts gradient updates; ``loss_history`` holds the mean training loss of every epoch and ``skipped``
        the number of training utterances whose target could not fit their frames.
    """

    weights: np.ndarray
    bias: np.ndarray
    steps: int = 0
    loss_history: t.Tuple[float, ...] = ()
    skipped: int = 0

    @classmethod
    def initialize(cls, vocab_size: int, feature_dim: int, seed: int = 0, scale: float = 0.01) -> "FrameModel":
        rng = _generator(seed, _MODEL_STREAM)
        return cls(scale * rng.normal(size=(vocab_size, feature_dim)), np.zeros(vocab_size))

    @property
    def vocab_size(self) -> int:
        return int(self.weights.shape[0])

    def logits(self, features: np.ndarray) -> np.ndarray:
        return features @ self.weights.T + self.bias

    def emissions(self, features: np.ndarray) -> EmissionMatrix:
        return EmissionMatrix.from_logits(self.logits(features))


def _fits(graph: LabelGraph, num_frames: int, vocab_size: int) -> bool:
    try:
        intersect(graph, EmissionMatrix.uniform(num_frames, vocab_size))
    except EmptyIntersection:
        return False
    return True


def _map_in_order(fn: t.Callable, items: t.Sequence, jobs: int) -> t.List:
    if jobs > 1 and len(items) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as executor:
            return list(executor.map(fn, items))
    return [fn(item) for item in items]


@injector.inject
def train(model: FrameModel,
          utterances: t.Sequence[Utterance],
          lexicon: Lexicon,
          mode: LossMode,
          epochs: int,
          learning_rate: float,
          batch_size: int = 8,
          seed: int = 0,
          jobs: t.Optional[int] = None,
          settings: GtcSettings = None) -> FrameModel:
    """ Mini-batch gradient descent on the CTC or GTC objective.

        Utterances whose target cannot fit their frames are skipped and counted. Batch gradients are summed in
        utterance order and scaled by the number of frames in the batch, so results do not depend on ``jobs``.

        :param jobs: Worker threads for per-utterance losses; defaults to the injected settings
        :raises graphtc.synthlab.DivergenceError: If a feasible utterance gets a non-finite loss or parameters blow up
    """
    if not utterances:
        raise ValueError("Cannot train on an empty corpus")
    jobs = settings.jobs if jobs is None else jobs
    log = logging.getLogger("graphtc")
    graphs = [mode.graph(lexicon, u.words) for u in utterances]
    feasible = []
    for index, (graph, utterance) in enumerate(zip(graphs, utterances)):
        if _fits(graph, utterance.num_frames, model.vocab_size):
            feasible.append(index)
        else:
            log.debug("Skipping %s: target does not fit %d frames", utterance.uid, utterance.num_frames)
    skipped = len(utterances) - len(feasible)
    if skipped:
        log.info("%s: %d of %d utterances skipped as infeasible", mode.label, skipped, len(utterances))

    weights, bias = model.weights.copy(), model.bias.copy()
    steps = model.steps
    history = list(model.loss_history)
    rng = _generator(seed, _SHUFFLE_STREAM)

    def _utterance_gradient(index: int):
        utterance = utterances[index]
        logits = utterance.features @ weights.T + bias
        if not np.isfinite(logits).all():
            raise DivergenceError("Non-finite logits on utterance {}".format(utterance.uid))
        emissions = EmissionMatrix.from_logits(logits)
        result = gtc_loss(graphs[index], emissions)
        if not result.feasible:
            raise DivergenceError("Non-finite loss on feasible utterance {}".format(utterance.uid))
        probabilities = np.exp(emissions.log_posteriors)
        delta = result.grad - probabilities * result.grad.sum(axis=1, keepdims=True)
        return result.loss, delta.T @ utterance.features, delta.sum(axis=0), utterance.num_frames

    for epoch in range(epochs):
        order = rng.permutation(np.asarray(feasible, dtype=np.int64)).tolist()
        losses = []
        for start in range(0, len(order), batch_size):
            batch = order[start:start + batch_size]
            results = _map_in_order(_utterance_gradient, batch, jobs)
            grad_weights = np.zeros_like(weights)
            grad_bias = np.zeros_like(bias)
            frames = 0
            for loss, item_weights, item_bias, item_frames in results:
                losses.append(loss)
                grad_weights += item_weights
                grad_bias += item_bias
                frames += item_frames
            weights = weights - learning_rate * grad_weights / frames
            bias = bias - learning_rate * grad_bias / frames
            steps += 1
            if not (np.isfinite(weights).all() and np.isfinite(bias).all()):
                raise DivergenceError("Parameters became non-finite after step {}".format(steps))
        mean_loss = float(np.mean(losses)) if losses else float("nan")
        history.append(mean_loss)
        log.info("%s epoch %d/%d: mean loss %.4f", mode.label, epoch + 1, epochs, mean_loss)
    return FrameModel(weights, bias, steps, tuple(history), skipped)


def decode_utterances(model: FrameModel, utterances: t.Sequence[Utterance]) -> t.List[t.Tuple[int, ...]]:
    return [greedy_decode(model.emissions(u.features)) for u in utterances]


def evaluate(model: FrameModel, utterances: t.Sequence[Utterance]) -> float:
    """ Pooled phoneme error rate (percent) of greedy decoding against the rendered phonemes """
    hypotheses = decode_utterances(model, utterances)
    return error_rate([(u.phonemes, hyp) for u, hyp in zip(utterances, hypotheses)])


@dataclasses.dataclass(frozen=True)
class ExperimentResult:
    mode: LossMode
    seed: int
    per: float

    def format(self) -> str:
        """ Result line ``mode=<m> n=<k> seed=<s> per=<x.x>`` """
        return "mode={} n={} seed={} per={:.1f}".format(self.mode.kind, format_n(self.mode.n), self.seed, self.per)


@injector.inject
def run_experiment(config: SynthConfig,
                   modes: t.Sequence[LossMode],
                   seeds: t.Sequence[int],
                   jobs: t.Optional[int] = None,
                   settings: GtcSettings = None) -> t.List[ExperimentResult]:
    """ Generates one corpus per seed and trains every mode from the same initial model on it """
    jobs = settings.jobs if jobs is None else jobs
    results = []
    for seed in seeds:
        seeded = config.replace(seed=seed)
        corpus = generate_corpus(seeded)
        initial = FrameModel.initialize(seeded.vocab_size, seeded.feature_dim, seed=seed)
        for mode in modes:
            model = train(initial, corpus.train, corpus.lexicon, mode, seeded.epochs, seeded.learning_rate,
                          batch_size=seeded.batch_size, seed=seed, jobs=jobs)
            results.append(ExperimentResult(mode, seed, evaluate(model, corpus.test)))
            logging.getLogger("graphtc").info(results[-1].format())
    return results


def summarize(results: t.Sequence[ExperimentResult]) -> t.Dict[LossMode, float]:
    """ Median PER of every mode across seeds, in first-seen mode order """
    grouped = {}
    for result in results:
        grouped.setdefault(result.mode, []).append(result.per)
    return {mode: statistics.median(pers) for mode, pers in grouped.items()}


def format_table(results: t.Sequence[ExperimentResult]) -> str:
    lines = ["{:<16} {:>6} {:>10}".format("mode", "seeds", "median PER")]
    counts = {}
    for result in results:
        counts[result.mode] = counts.get(result.mode, 0) + 1
    for mode, median in summarize(results).items():
        lines.append("{:<16} {:>6} {:>9.1f}%".format(mode.label, counts[mode], median))
    return "\n".join(lines)


def save_corpus(corpus: Corpus, directory: t.Union[str, pathlib.Path]):
    """ Writes ``symbols.txt``, ``lexicon.tsv`` and, per split, a transcripts TSV and a frames file """
    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "symbols.txt", "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(corpus.vocabulary.symbols) + "\n")
    with open(directory / "lexicon.tsv", "w", encoding="utf-8", newline="\n") as handle:
        dump_lexicon(corpus.lexicon, handle)
    for split, utterances in (("train", corpus.train), ("test", corpus.test)):
        with open(directory / "{}.tsv".format(split), "w", encoding="utf-8", newline="\n") as handle:
            for u in utterances:
                handle.write("{}\t{}\n".format(" ".join(u.words), " ".join(corpus.vocabulary.decode(u.phonemes))))
        with open(directory / "{}.frames".format(split), "w", encoding="utf-8", newline="\n") as handle:
            for u in utterances:
                handle.write("{} {} {}\n".format(u.uid, u.num_frames, u.features.shape[1]))
                for row in u.features.tolist():
                    handle.write(" ".join(repr(x) for x in row) + "\n")


def _read_frames(path: pathlib.Path) -> t.List[t.Tuple[str, np.ndarray]]:
    blocks = []
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line for line in handle.read().splitlines() if line.strip()]
    position = 0
    while position < len(lines):
        header = lines[position].split()
        if len(header) != 3:
            raise ConfigError("{}: malformed frames header {!r}".format(path, lines[position]))
        uid, num_frames, dim = header[0], int(header[1]), int(header[2])
        rows = [[float(x) for x in line.split()] for line in lines[position + 1:position + 1 + num_frames]]
        if len(rows) != num_frames or any(len(row) != dim for row in rows):
            raise ConfigError("{}: utterance {} does not hold {} x {} values".format(path, uid, num_frames, dim))
        blocks.append((uid, np.asarray(rows, dtype=np.float64).reshape(num_frames, dim)))
        position += 1 + num_frames
    return blocks


def load_corpus(directory: t.Union[str, pathlib.Path]) -> Corpus:
    """ Reads a corpus written by :func:`save_corpus` """
    directory = pathlib.Path(directory)
    symbols = (directory / "symbols.txt").read_text(encoding="utf-8").split()
    vocabulary = Vocabulary(tuple(symbols))
    lexicon = load_lexicon(directory / "lexicon.tsv", vocabulary)
    splits = {}
    for split in ("train", "test"):
        with open(directory / "{}.tsv".format(split), "r", encoding="utf-8") as handle:
            transcripts = read_transcripts(handle, vocabulary)
        frames = _read_frames(directory / "{}.frames".format(split))
        if len(frames) != len(transcripts):
            raise ConfigError("{}: {} transcripts but {} frame blocks".format(directory, len(transcripts),
                                                                             len(frames)))
        splits[split] = tuple(
            Utterance(uid, words, phonemes, features)
            for (words, phonemes), (uid, features) in zip(transcripts, frames)
        )
    return Corpus(lexicon, splits["train"], splits["test"])
