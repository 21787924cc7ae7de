""" Pronunciation lexicons with several ranked variants per word.

    The file format is one variant per line, TAB-separated::

        word<TAB>[score<TAB>]phoneme phoneme ...

    Blank lines and lines starting with ``#`` are ignored. Scores are optional but must be used consistently for all
    lines of a word; when present, variants are ranked by descending score, otherwise they keep file order. Scores only
    rank variants and never become graph weights.

"""
import dataclasses
import io
import pathlib
import typing as t

from .wfsa import BLANK_SYMBOL, LabelGraph, Vocabulary
from .label_graph import Pronunciation, WordAlternatives, build_gtc_graph


ALL = None
""" Value of ``n`` selecting every variant """


class ParseError(ValueError):
    """ Raised when a lexicon line cannot be parsed.

        :param line_number: 1-based line number of the offending line
        :type line_number: int
        :param reason: What is wrong with the line
        :type reason: str
    """

    def __init__(self, line_number: int, reason: str):
        """ Constructor """
        super().__init__("Line {}: {}".format(line_number, reason))
        self.line_number = line_number
        self.reason = reason


class UnknownWord(ValueError):
    """ Raised when words are missing from the lexicon.

        :param words: Every missing word
        :type words: list of str
    """

    def __init__(self, words: t.Iterable[str]):
        """ Constructor """
        self.words = list(words)
        super().__init__("Unknown word(s): {}".format(", ".join(self.words)))


@dataclasses.dataclass(frozen=True)
class Variant:
    """ One pronunciation of a word with its optional ranking score """

    pronunciation: Pronunciation
    score: t.Optional[float] = None


@dataclasses.dataclass(frozen=True)
class Lexicon:
    """ Ordered mapping from words to their ranked pronunciation variants.

        :param entries: Words in first-seen order, each with its deduplicated, ranked variants
        :param vocabulary: Phoneme vocabulary covering every variant
    """

    entries: t.Mapping[str, t.Tuple[Variant, ...]]
    vocabulary: Vocabulary

    def __contains__(self, word):
        return word in self.entries

    def __len__(self):
        return len(self.entries)

    @property
    def words(self) -> t.Tuple[str, ...]:
        return tuple(self.entries)

    def variants(self, word: str) -> t.Tuple[Variant, ...]:
        """ All ranked variants of a word

            :raises graphtc.lexicon.UnknownWord: If the word is not in the lexicon
        """
        try:
            return self.entries[word]
        except KeyError:
            raise UnknownWord([word]) from None


def parse_lexicon(stream: t.Iterable[str], vocabulary: t.Optional[Vocabulary] = None) -> Lexicon:
    """ Parses a lexicon from a text stream.

        :param stream: Lines of text (``\\r\\n`` and ``\\n`` line endings are both accepted)
        :param vocabulary: Optional fixed vocabulary; when omitted it is accumulated in first-seen phoneme order
        :raises graphtc.lexicon.ParseError: With the line number of the first malformed line
    """
    raw = {}
    scored = {}
    phoneme_order = {}
    for line_number, line in enumerate(stream, start=1):
        line = line.rstrip("\n").rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) == 2:
            word, score_text, phoneme_text = fields[0], None, fields[1]
        elif len(fields) == 3:
            word, score_text, phoneme_text = fields
        else:
            raise ParseError(line_number, "expected 'word<TAB>[score<TAB>]phonemes'")
        word = word.strip()
        if not word:
            raise ParseError(line_number, "missing word")
        score = None
        if score_text is not None:
            try:
                score = float(score_text)
            except ValueError:
                raise ParseError(line_number, "malformed score {!r}".format(score_text)) from None
        if scored.setdefault(word, score is not None) != (score is not None):
            raise ParseError(line_number, "scores must be given for all variants of {!r} or for none".format(word))
        phonemes = phoneme_text.split()
        if not phonemes:
            raise ParseError(line_number, "missing phonemes")
        if BLANK_SYMBOL in phonemes:
            raise ParseError(line_number, "the blank symbol {} cannot be used as a phoneme".format(BLANK_SYMBOL))
        if vocabulary is not None:
            unknown = [p for p in phonemes if p not in vocabulary]
            if unknown:
                raise ParseError(line_number, "phoneme(s) not in the vocabulary: {}".format(" ".join(unknown)))
        for phoneme in phonemes:
            phoneme_order.setdefault(phoneme, None)
        raw.setdefault(word, {}).setdefault(tuple(phonemes), score)

    if vocabulary is None:
        vocabulary = Vocabulary.from_phonemes(phoneme_order) if phoneme_order else None
        if vocabulary is None:
            raise ParseError(0, "lexicon is empty")
    entries = {}
    for word, variants in raw.items():
        ranked = [Variant(Pronunciation(vocabulary.encode(phonemes)), score) for phonemes, score in variants.items()]
        if scored[word]:
            ranked.sort(key=lambda v: -v.score)
        entries[word] = tuple(ranked)
    return Lexicon(entries, vocabulary)


def load_lexicon(path: t.Union[str, pathlib.Path], vocabulary: t.Optional[Vocabulary] = None) -> Lexicon:
    """ Reads a UTF-8 lexicon file """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        return parse_lexicon(handle, vocabulary)


def dump_lexicon(lexicon: Lexicon, stream: t.TextIO):
    """ Writes a lexicon in the TSV format, variants in rank order """
    for word, variants in lexicon.entries.items():
        for variant in variants:
            phonemes = " ".join(lexicon.vocabulary.decode(variant.pronunciation.phonemes))
            if variant.score is None:
                stream.write("{}\t{}\n".format(word, phonemes))
            else:
                stream.write("{}\t{!r}\t{}\n".format(word, variant.score, phonemes))


def dumps_lexicon(lexicon: Lexicon) -> str:
    buffer = io.StringIO()
    dump_lexicon(lexicon, buffer)
    return buffer.getvalue()


def n_best(lexicon: Lexicon, word: str, n: t.Optional[int] = ALL) -> t.List[Pronunciation]:
    """ The first ``min(n, available)`` variants of a word; having fewer than ``n`` is not an error.

        :param n: Number of variants, or ``None`` for all of them
        :raises graphtc.lexicon.UnknownWord: If the word is not in the lexicon
    """
    if n is not None and n < 1:
        raise ValueError("n must be at least 1, got {}".format(n))
    variants = lexicon.variants(word)
    if n is not None:
        variants = variants[:n]
    return [variant.pronunciation for variant in variants]


def words_to_graph(lexicon: Lexicon, words: t.Sequence[str], n: t.Optional[int] = ALL) -> LabelGraph:
    """ GTC label graph of a word sequence using the top-``n`` variants of each word.

        :raises graphtc.lexicon.UnknownWord: Listing every missing word
    """
    missing = [word for word in dict.fromkeys(words) if word not in lexicon]
    if missing:
        raise UnknownWord(missing)
    return build_gtc_graph([WordAlternatives(word, tuple(n_best(lexicon, word, n))) for word in words])
