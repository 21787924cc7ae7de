""" CTC and GTC losses with their gradients, the collapse function and reference oracles.

    All values are in nats. Gradients are taken with respect to the log-posteriors treated as free variables, i.e.
    ``d loss / d log_posteriors[t][k] = -occupancy[t][k]``; callers composing with a softmax apply the chain rule
    themselves.

"""
import dataclasses
import itertools
import logging
import typing as t

import numpy as np
from scipy.special import logsumexp

from autoinject import injector

from .wfsa import BLANK, EmissionMatrix, LabelGraph, EmptyIntersection, intersect, forward_backward
from .label_graph import enumerate_collapsed
from .settings import GtcSettings


AlignmentSequence = t.Tuple[int, ...]
""" Frame-level symbols, blank included """

TargetSequence = t.Tuple[int, ...]
""" Label sequence without blanks """

class InvalidTarget(ValueError):
    """ Raised when a target sequence contains the blank or a symbol outside the vocabulary. """
    pass


class TooLarge(ValueError):
    """ Raised when the brute-force oracle would have to enumerate too many alignments.

        :param count: Number of alignments that would be needed
        :type count: int
        :param limit: The configured maximum
        :type limit: int
    """

    def __init__(self, count: int, limit: int):
        """ Constructor """
        super().__init__("Brute force needs {} alignments, more than the limit of {}".format(count, limit))
        self.count = count
        self.limit = limit


@dataclasses.dataclass(frozen=True, eq=False)
class LossResult:
    """ Loss value with its gradient and the frame occupancies (``grad == -occupancy``).

        An infeasible target has an infinite loss and zero gradient.
    """

    loss: float
    grad: np.ndarray
    occupancy: np.ndarray

    @classmethod
    def infeasible(cls, num_frames: int, vocab_size: int) -> "LossResult":
        return cls(float("inf"), np.zeros((num_frames, vocab_size)), np.zeros((num_frames, vocab_size)))

    @property
    def feasible(self) -> bool:
        return bool(np.isfinite(self.loss))


def collapse(pi: t.Iterable[int]) -> TargetSequence:
    """ Merges runs of repeated symbols, then deletes blanks """
    out = []
    previous = None
    for symbol in pi:
        if symbol != previous and symbol != BLANK:
            out.append(symbol)
        previous = symbol
    return tuple(out)


def alignment_logprob(pi: t.Sequence[int], emissions: EmissionMatrix) -> float:
    """ Log-probability of one alignment under the conditional independence assumption """
    if len(pi) != emissions.num_frames:
        raise ValueError("Alignment has {} frames, emissions have {}".format(len(pi), emissions.num_frames))
    return float(emissions.log_posteriors[np.arange(emissions.num_frames), np.asarray(pi, dtype=np.intp)].sum())


def greedy_decode(emissions: EmissionMatrix) -> TargetSequence:
    """ Best-path decoding: argmax per frame (lowest index wins ties, so blank wins its ties), then collapse """
    return collapse(np.argmax(emissions.log_posteriors, axis=1).tolist())


def _check_target(target: t.Iterable[int], vocab_size: int) -> TargetSequence:
    target = tuple(int(x) for x in target)
    for symbol in target:
        if symbol == BLANK:
            raise InvalidTarget("Target sequences cannot contain the blank symbol")
        if not 0 < symbol < vocab_size:
            raise InvalidTarget("Symbol {} is outside the vocabulary of size {}".format(symbol, vocab_size))
    return target


def ctc_loss_reference(target: t.Iterable[int], emissions: EmissionMatrix) -> LossResult:
    """ Classical CTC recursion over the ``2L + 1`` blank-interleaved states.

        This is an independent array implementation (no graphs, no trellis) kept as a cross-check of :func:`gtc_loss`.

        :raises graphtc.loss.InvalidTarget: If the target contains the blank
    """
    num_frames, vocab_size = emissions.num_frames, emissions.vocab_size
    target = _check_target(target, vocab_size)
    repeats = sum(1 for i in range(1, len(target)) if target[i] == target[i - 1])
    if len(target) + repeats > num_frames:
        return LossResult.infeasible(num_frames, vocab_size)

    num_states = 2 * len(target) + 1
    extended = np.zeros(num_states, dtype=np.intp)
    extended[1::2] = target
    skip_into = np.zeros(num_states, dtype=bool)
    skip_into[3::2] = extended[3::2] != extended[1:-2:2]
    emit = emissions.log_posteriors[:, extended]
    neg = np.full(2, -np.inf)

    alpha = np.full((num_frames, num_states), -np.inf)
    alpha[0, :min(2, num_states)] = emit[0, :min(2, num_states)]
    for frame in range(1, num_frames):
        prev = alpha[frame - 1]
        step = np.concatenate([neg[:1], prev[:-1]])
        jump = np.where(skip_into, np.concatenate([neg, prev[:-2]])[:num_states], -np.inf)
        alpha[frame] = np.logaddexp(np.logaddexp(prev, step), jump) + emit[frame]

    skip_from = np.concatenate([skip_into[2:], [False, False]])[:num_states]
    beta = np.full((num_frames, num_states), -np.inf)
    beta[-1, max(0, num_states - 2):] = 0.0
    for frame in range(num_frames - 2, -1, -1):
        ahead = beta[frame + 1] + emit[frame + 1]
        step = np.concatenate([ahead[1:], neg[:1]])
        jump = np.where(skip_from, np.concatenate([ahead[2:], neg])[:num_states], -np.inf)
        beta[frame] = np.logaddexp(np.logaddexp(ahead, step), jump)

    total = float(np.logaddexp.reduce(alpha[-1, max(0, num_states - 2):]))
    if not np.isfinite(total):
        return LossResult.infeasible(num_frames, vocab_size)
    state_posteriors = np.exp(alpha + beta - total)
    occupancy = np.zeros((num_frames, vocab_size))
    np.add.at(occupancy.T, extended, state_posteriors.T)
    return LossResult(-total, -occupancy, occupancy)


def gtc_loss(graph: LabelGraph, emissions: EmissionMatrix) -> LossResult:
    """ GTC loss ``-log P(G | X)`` of a label graph, with occupancies from the trellis arc posteriors.

        An empty intersection (the graph cannot be traversed in the available frames) gives an infinite loss.
    """
    try:
        trellis = intersect(graph, emissions)
    except EmptyIntersection:
        return LossResult.infeasible(emissions.num_frames, emissions.vocab_size)
    total, posteriors = forward_backward(trellis)
    if not np.isfinite(total):
        return LossResult.infeasible(emissions.num_frames, emissions.vocab_size)
    occupancy = np.zeros((emissions.num_frames, emissions.vocab_size))
    np.add.at(occupancy, (trellis.arc_frames, trellis.arc_symbols), posteriors)
    return LossResult(-total, -occupancy, occupancy)


@injector.inject
def brute_force_loss(graph: LabelGraph,
                     emissions: EmissionMatrix,
                     max_alignments: t.Optional[int] = None,
                     settings: GtcSettings = None) -> float:
    """ Exponential oracle: sums every alignment whose collapse is accepted by the graph. For tests only.

        :param max_alignments: Largest ``V ** T'`` to enumerate; defaults to the injected ``brute_force_limit``
        :raises graphtc.loss.TooLarge: If ``V ** T'`` exceeds ``max_alignments``
    """
    if max_alignments is None:
        max_alignments = settings.brute_force_limit
    num_frames, vocab_size = emissions.num_frames, emissions.vocab_size
    count = vocab_size ** num_frames
    if count > max_alignments:
        raise TooLarge(count, max_alignments)
    logging.getLogger("graphtc").debug("Brute force over %d alignments", count)
    accepted = enumerate_collapsed(graph, limit=max_alignments)
    alignments = list(itertools.product(range(vocab_size), repeat=num_frames))
    mask = np.fromiter((collapse(pi) in accepted for pi in alignments), dtype=bool, count=len(alignments))
    if not mask.any():
        return float("inf")
    chosen = np.asarray(alignments, dtype=np.intp)[mask]
    scores = emissions.log_posteriors[np.arange(num_frames), chosen].sum(axis=1)
    return -float(logsumexp(scores))
