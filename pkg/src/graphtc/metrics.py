""" Edit distances, pooled error rates and the oracle label error rate of pronunciation graphs.

    The oracle LER of an utterance is the edit distance between its reference phonemes and the closest sequence encoded
    in the utterance's pronunciation graph. It is computed by dynamic programming over (graph node, reference position)
    pairs rather than by enumerating the graph.

"""
import concurrent.futures
import dataclasses
import typing as t

import numpy as np

from .wfsa import BLANK, LabelGraph, Vocabulary, topo_order
from .lexicon import Lexicon, UnknownWord, words_to_graph


class EmptyReference(ValueError):
    """ Raised when an error rate is requested over references with no phonemes at all. """

    def __init__(self):
        """ Constructor """
        super().__init__("References contain no phonemes; the error rate is undefined")


class TranscriptFormatError(ValueError):
    """ Raised when a transcripts file line is malformed.

        :param line_number: 1-based line number of the offending line
        :type line_number: int
        :param reason: What is wrong with the line
        :type reason: str
    """

    def __init__(self, line_number: int, reason: str):
        """ Constructor """
        super().__init__("Line {}: {}".format(line_number, reason))
        self.line_number = line_number


@dataclasses.dataclass(frozen=True)
class EditCounts:
    """ Substitutions, insertions and deletions of a Levenshtein alignment """

    substitutions: int = 0
    insertions: int = 0
    deletions: int = 0

    @property
    def distance(self) -> int:
        return self.substitutions + self.insertions + self.deletions

    def __add__(self, other: "EditCounts") -> "EditCounts":
        return EditCounts(
            self.substitutions + other.substitutions,
            self.insertions + other.insertions,
            self.deletions + other.deletions,
        )


@dataclasses.dataclass(frozen=True)
class ErrorReport:
    """ Corpus-level pooled edit counts.

        :param counts: Summed edit counts
        :param ref_len: Summed reference length
    """

    counts: EditCounts
    ref_len: int

    @property
    def rate(self) -> float:
        """ Pooled error rate in percent

            :raises graphtc.metrics.EmptyReference: If the references hold no phonemes
        """
        if self.ref_len == 0:
            raise EmptyReference()
        return 100.0 * self.counts.distance / self.ref_len

    def format(self, n: t.Optional[int]) -> str:
        """ Report line ``n=<k> ler=<x.x>% S=<s> I=<i> D=<d> ref_len=<m>`` """
        return "n={} ler={:.1f}% S={} I={} D={} ref_len={}".format(
            format_n(n), self.rate, self.counts.substitutions, self.counts.insertions, self.counts.deletions,
            self.ref_len
        )


def format_n(n: t.Optional[int]) -> str:
    return "all" if n is None else str(n)


def edit_distance(ref: t.Sequence[int], hyp: t.Sequence[int]) -> EditCounts:
    """ Unit-cost Levenshtein alignment of a hypothesis against a reference.

        The backtrace prefers substitution (or match), then deletion, then insertion, so counts are reproducible.
    """
    ref, hyp = tuple(ref), tuple(hyp)
    rows, cols = len(ref) + 1, len(hyp) + 1
    cost = np.zeros((rows, cols), dtype=np.int64)
    cost[:, 0] = np.arange(rows)
    cost[0, :] = np.arange(cols)
    for i in range(1, rows):
        for j in range(1, cols):
            cost[i, j] = min(
                cost[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1]),
                cost[i - 1, j] + 1,
                cost[i, j - 1] + 1,
            )
    subs = ins = dels = 0
    i, j = rows - 1, cols - 1
    while i > 0 or j > 0:
        if i > 0 and j > 0 and cost[i, j] == cost[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1]):
            subs += int(ref[i - 1] != hyp[j - 1])
            i, j = i - 1, j - 1
        elif i > 0 and cost[i, j] == cost[i - 1, j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return EditCounts(subs, ins, dels)


def pool(pairs: t.Iterable[t.Tuple[t.Sequence[int], t.Sequence[int]]]) -> ErrorReport:
    """ Sums edit counts and reference lengths over ``(ref, hyp)`` pairs """
    counts = EditCounts()
    ref_len = 0
    for ref, hyp in pairs:
        counts = counts + edit_distance(ref, hyp)
        ref_len += len(ref)
    return ErrorReport(counts, ref_len)


def error_rate(pairs: t.Iterable[t.Tuple[t.Sequence[int], t.Sequence[int]]]) -> float:
    """ Corpus-level error rate in percent: ``100 * sum(distance) / sum(len(ref))``

        :raises graphtc.metrics.EmptyReference: If the references hold no phonemes
    """
    return pool(pairs).rate


def graph_edit_distance(graph: LabelGraph, ref: t.Sequence[int]) -> EditCounts:
    """ Smallest edit distance between ``ref`` and any sequence accepted by the graph.

        The dynamic program runs over (node, reference position) pairs in topological order. Blank nodes are traversed
        at no cost. The closest sequence is recovered by backtrace and its counts come from :func:`edit_distance`.
    """
    ref = tuple(ref)
    width = len(ref) + 1
    pred = graph.predecessors()
    # cost[node][j]: best cost of a path ending at node that has consumed ref[:j]
    cost = {}
    back = {}
    infinity = float("inf")
    for node in topo_order(graph):
        incoming = [infinity] * width
        origin = [None] * width
        if node in graph.starts:
            for j in range(width):
                incoming[j] = j
                origin[j] = (None, j)
        for p in pred[node]:
            for j in range(width):
                if cost[p][j] < incoming[j]:
                    incoming[j] = cost[p][j]
                    origin[j] = (p, j)
        symbol = graph.symbols[node]
        if symbol == BLANK:
            cost[node] = incoming
            back[node] = [(o[0], o[1], False) if o else None for o in origin]
            continue
        here = [infinity] * width
        steps = [None] * width
        for j in range(width):
            if j > 0 and incoming[j - 1] + (symbol != ref[j - 1]) < here[j]:
                here[j] = incoming[j - 1] + (symbol != ref[j - 1])
                steps[j] = (origin[j - 1][0], j - 1, True)
            if incoming[j] + 1 < here[j]:
                here[j] = incoming[j] + 1
                steps[j] = (origin[j][0], j, True)
            if j > 0 and here[j - 1] + 1 < here[j]:
                here[j] = here[j - 1] + 1
                steps[j] = (node, j - 1, False)
        cost[node] = here
        back[node] = steps

    finals = sorted(graph.finals)
    if not finals:
        return EditCounts(deletions=len(ref))
    best = min(finals, key=lambda f: (cost[f][-1], f))
    if cost[best][-1] == infinity:
        return EditCounts(deletions=len(ref))
    hyp = []
    node, j = best, width - 1
    while node is not None:
        previous, j_previous, emits = back[node][j]
        if emits:
            hyp.append(graph.symbols[node])
        node, j = previous, j_previous
    hyp.reverse()
    return edit_distance(ref, hyp)


def read_transcripts(stream: t.Iterable[str],
                     vocabulary: Vocabulary) -> t.List[t.Tuple[t.Tuple[str, ...], t.Tuple[int, ...]]]:
    """ Reads ``words<TAB>ref phonemes`` lines (blank lines and ``#`` comments are skipped)

        :raises graphtc.metrics.TranscriptFormatError: If a line is malformed or uses an unknown phoneme
    """
    transcripts = []
    for line_number, line in enumerate(stream, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise TranscriptFormatError(line_number, "expected 'words<TAB>phonemes'")
        words = tuple(fields[0].split())
        if not words:
            raise TranscriptFormatError(line_number, "no words")
        phonemes = fields[1].split()
        unknown = [p for p in phonemes if p not in vocabulary or vocabulary.index(p) == BLANK]
        if unknown:
            raise TranscriptFormatError(line_number, "unknown phoneme(s) {}".format(" ".join(unknown)))
        transcripts.append((words, vocabulary.encode(phonemes)))
    return transcripts


def oracle_report(lexicon: Lexicon, transcripts: t.Sequence[t.Tuple[t.Sequence[str], t.Sequence[int]]],
                  n: t.Optional[int], jobs: int = 1) -> ErrorReport:
    """ Pooled oracle edit counts when each word may use any of its top-``n`` variants (``None`` means all).

        :param jobs: Worker threads; results are pooled in transcript order
        :raises graphtc.lexicon.UnknownWord: Listing every word missing from the lexicon
    """
    missing = sorted({word for words, _ in transcripts for word in words if word not in lexicon})
    if missing:
        raise UnknownWord(missing)

    def _one(item):
        words, ref = item
        return graph_edit_distance(words_to_graph(lexicon, words, n), ref), len(ref)

    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as executor:
            results = list(executor.map(_one, transcripts))
    else:
        results = [_one(item) for item in transcripts]
    counts = EditCounts()
    ref_len = 0
    for item_counts, item_len in results:
        counts = counts + item_counts
        ref_len += item_len
    return ErrorReport(counts, ref_len)


def oracle_ler(lexicon: Lexicon, transcripts: t.Sequence[t.Tuple[t.Sequence[str], t.Sequence[int]]],
               n: t.Optional[int], jobs: int = 1) -> float:
    """ Oracle label error rate in percent; ``n=1`` is the plain LER of the first variants.

        :raises graphtc.lexicon.UnknownWord: Listing every word missing from the lexicon
        :raises graphtc.metrics.EmptyReference: If the references hold no phonemes
    """
    return oracle_report(lexicon, transcripts, n, jobs=jobs).rate
