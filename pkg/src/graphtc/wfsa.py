""" Core acceptor types, intersection with the emission lattice and log-semiring forward-backward.

    Label graphs are node-labeled: every node carries one symbol of the :class:`Vocabulary` and may be dwelt on for
    several frames (an implicit self-loop that is never stored). Intersecting a label graph with an
    :class:`EmissionMatrix` yields a time-synchronous :class:`Trellis` whose arcs all advance time by one frame, so the
    trellis is acyclic by construction and its states are numbered in topological order.

"""
import dataclasses
import heapq
import typing as t

import graphviz
import numpy as np
from scipy.special import logsumexp, log_softmax


BLANK = 0
""" Index of the blank symbol in every vocabulary """

BLANK_SYMBOL = "ε"
""" Printable name of the blank symbol """

SOURCE = -1
""" Source id used by the entry arcs of a trellis (the virtual state before the first frame) """


class InvalidVocabulary(ValueError):
    """ Raised when a symbol table breaks the vocabulary invariants. """
    pass


class UnknownSymbol(ValueError):
    """ Raised when a symbol string is not part of the vocabulary.

        :param symbol: The symbol that was looked up
        :type symbol: str
    """

    def __init__(self, symbol: str):
        """ Constructor """
        super().__init__("Symbol {} is not in the vocabulary".format(symbol))
        self.symbol = symbol


class InvalidGraph(ValueError):
    """ Raised when a label graph breaks one of its structural invariants. """
    pass


class CycleDetected(InvalidGraph):
    """ Raised when the explicit arcs of a graph contain a cycle. """
    pass


class EmptyGraph(InvalidGraph):
    """ Raised when trimming removes every node of a graph. """
    pass


class SymbolOutOfRange(ValueError):
    """ Raised when a graph uses a symbol index the emissions do not cover. """
    pass


class InvalidEmissions(ValueError):
    """ Raised when a matrix of log-posteriors is malformed or its rows are not normalized. """
    pass


class EmptyIntersection(ValueError):
    """ Raised when no path through the label graph fits the number of frames.

        :param num_frames: The number of frames of the emissions
        :type num_frames: int
    """

    def __init__(self, num_frames: int):
        """ Constructor """
        super().__init__("No accepted alignment fits in {} frame(s)".format(num_frames))
        self.num_frames = num_frames


@dataclasses.dataclass(frozen=True)
class Vocabulary:
    """ Ordered table of phoneme symbols. Index 0 is always the blank ``ε``.

        :param symbols: All symbols, blank first
        :type symbols: tuple of str
    """

    symbols: t.Tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if len(symbols) < 2:
            raise InvalidVocabulary("A vocabulary needs the blank and at least one phoneme")
        if symbols[0] != BLANK_SYMBOL:
            raise InvalidVocabulary("Index 0 must be the blank symbol {}".format(BLANK_SYMBOL))
        for symbol in symbols:
            if not isinstance(symbol, str) or not symbol or symbol != symbol.strip() or len(symbol.split()) != 1:
                raise InvalidVocabulary("Invalid symbol {!r}".format(symbol))
        if len(set(symbols)) != len(symbols):
            raise InvalidVocabulary("Symbols must be unique")
        object.__setattr__(self, "_index", {symbol: i for i, symbol in enumerate(symbols)})

    @classmethod
    def from_phonemes(cls, phonemes: t.Iterable[str]) -> "Vocabulary":
        """ Builds a vocabulary from phonemes in first-seen order, after the reserved blank. """
        seen = {}
        for phoneme in phonemes:
            if phoneme == BLANK_SYMBOL:
                raise InvalidVocabulary("The blank symbol cannot be used as a phoneme")
            seen.setdefault(phoneme, None)
        return cls((BLANK_SYMBOL, *seen))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __contains__(self, symbol):
        return symbol in self._index

    def index(self, symbol: str) -> int:
        """ Look up the index of a symbol

            :raises graphtc.wfsa.UnknownSymbol: If the symbol is not part of the vocabulary
        """
        try:
            return self._index[symbol]
        except KeyError:
            raise UnknownSymbol(symbol) from None

    def symbol(self, index: int) -> str:
        return self.symbols[index]

    def encode(self, symbols: t.Iterable[str]) -> t.Tuple[int, ...]:
        return tuple(self.index(symbol) for symbol in symbols)

    def decode(self, indices: t.Iterable[int]) -> t.Tuple[str, ...]:
        return tuple(self.symbols[int(i)] for i in indices)


@dataclasses.dataclass(frozen=True)
class LabelGraph:
    """ Node-labeled acyclic acceptor encoding a set of target sequences.

        Every node may be dwelt on for any number of frames; these self-loops are implicit and never stored in ``arcs``.
        Arcs are kept sorted and unique so that equal graphs compare equal.

        :param symbols: Symbol index of every node
        :type symbols: tuple of int
        :param arcs: Explicit ``(src, dst)`` arcs
        :type arcs: tuple of tuple
        :param starts: Nodes a path may begin at
        :type starts: frozenset
        :param finals: Nodes a path may end at
        :type finals: frozenset
    """

    symbols: t.Tuple[int, ...]
    arcs: t.Tuple[t.Tuple[int, int], ...]
    starts: t.FrozenSet[int]
    finals: t.FrozenSet[int]

    def __post_init__(self):
        symbols = tuple(int(s) for s in self.symbols)
        arcs = tuple(sorted({(int(a), int(b)) for a, b in self.arcs}))
        starts = frozenset(int(s) for s in self.starts)
        finals = frozenset(int(f) for f in self.finals)
        n = len(symbols)
        for symbol in symbols:
            if symbol < 0:
                raise InvalidGraph("Negative symbol index {}".format(symbol))
        for src, dst in arcs:
            if not (0 <= src < n and 0 <= dst < n):
                raise InvalidGraph("Arc {}->{} points outside the graph".format(src, dst))
            if src == dst:
                raise InvalidGraph("Self-loops are implicit and may not be stored ({})".format(src))
        for node in starts | finals:
            if not 0 <= node < n:
                raise InvalidGraph("Start/final node {} is outside the graph".format(node))
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "finals", finals)

    @classmethod
    def empty(cls) -> "LabelGraph":
        """ The empty slot used to initialize serial and parallel composition """
        return cls((), (), frozenset(), frozenset())

    @property
    def num_nodes(self) -> int:
        return len(self.symbols)

    @property
    def num_arcs(self) -> int:
        return len(self.arcs)

    @property
    def is_empty(self) -> bool:
        return not self.symbols

    def successors(self) -> t.List[t.List[int]]:
        succ = [[] for _ in self.symbols]
        for src, dst in self.arcs:
            succ[src].append(dst)
        return succ

    def predecessors(self) -> t.List[t.List[int]]:
        pred = [[] for _ in self.symbols]
        for src, dst in self.arcs:
            pred[dst].append(src)
        return pred

    def accepts(self, sequence: t.Sequence[int]) -> bool:
        """ Tells whether a label sequence (no blanks) is encoded in the graph """
        sequence = tuple(sequence)
        succ = self.successors()
        frontier = set()
        for start in self.starts:
            frontier |= self._advance(start, 0, sequence)
        seen = set(frontier)
        while frontier:
            node, pos = frontier.pop()
            if pos == len(sequence) and node in self.finals:
                return True
            for nxt in succ[node]:
                for state in self._advance(nxt, pos, sequence):
                    if state not in seen:
                        seen.add(state)
                        frontier.add(state)
        return False

    def _advance(self, node: int, pos: int, sequence: t.Tuple[int, ...]) -> t.Set[t.Tuple[int, int]]:
        symbol = self.symbols[node]
        if symbol == BLANK:
            return {(node, pos)}
        if pos < len(sequence) and sequence[pos] == symbol:
            return {(node, pos + 1)}
        return set()

    def check(self):
        """ Validates every label graph invariant.

            :raises graphtc.wfsa.CycleDetected: If the explicit arcs contain a cycle
            :raises graphtc.wfsa.InvalidGraph: If the graph is empty, not trim, or links two equal non-blank labels
        """
        topo_order(self)
        if not self.starts or not self.finals:
            raise InvalidGraph("Start and final node sets must be non-empty")
        alive = _reachable(self.starts, self.successors()) & _reachable(self.finals, self.predecessors())
        if len(alive) != self.num_nodes:
            raise InvalidGraph("Graph is not trim; dead nodes: {}".format(sorted(set(range(self.num_nodes)) - alive)))
        for src, dst in self.arcs:
            if self.symbols[src] == self.symbols[dst] and self.symbols[src] != BLANK:
                raise InvalidGraph("Arc {}->{} joins two nodes with the same label".format(src, dst))


def _reachable(seeds: t.Iterable[int], neighbours: t.List[t.List[int]]) -> t.Set[int]:
    seen = set(seeds)
    stack = list(seen)
    while stack:
        node = stack.pop()
        for nxt in neighbours[node]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def _kahn(num_nodes: int, arcs: t.Iterable[t.Tuple[int, int]]) -> t.List[int]:
    in_degree = [0] * num_nodes
    succ = [[] for _ in range(num_nodes)]
    for src, dst in arcs:
        succ[src].append(dst)
        in_degree[dst] += 1
    ready = [node for node in range(num_nodes) if in_degree[node] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        node = heapq.heappop(ready)
        order.append(node)
        for nxt in succ[node]:
            in_degree[nxt] -= 1
            if in_degree[nxt] == 0:
                heapq.heappush(ready, nxt)
    if len(order) != num_nodes:
        raise CycleDetected("Explicit arcs contain a cycle through nodes {}".format(
            sorted(set(range(num_nodes)) - set(order))
        ))
    return order


def topo_order(graph: t.Union[LabelGraph, "Trellis"]) -> t.List[int]:
    """ Kahn-style topological order; ties are broken by ascending node id so the output is deterministic.

        :param graph: A label graph or a trellis (the virtual source of a trellis is not part of the order)
        :raises graphtc.wfsa.CycleDetected: If the explicit arcs contain a cycle
        :return: Node (or state) ids in topological order
        :rtype: list of int
    """
    if isinstance(graph, Trellis):
        inner = graph.arc_sources >= 0
        return _kahn(graph.num_states, zip(graph.arc_sources[inner].tolist(), graph.arc_targets[inner].tolist()))
    return _kahn(graph.num_nodes, graph.arcs)


def trim(graph: LabelGraph) -> LabelGraph:
    """ Removes nodes that are not both reachable from a start and co-reachable to a final node.

        Surviving nodes are renumbered densely in topological order, which makes the result canonical for graphs that
        only differ in node numbering but share a unique topological order.

        :raises graphtc.wfsa.EmptyGraph: If no node survives
        :raises graphtc.wfsa.CycleDetected: If the explicit arcs contain a cycle
    """
    alive = _reachable(graph.starts, graph.successors()) & _reachable(graph.finals, graph.predecessors())
    if not alive:
        raise EmptyGraph("No node lies on a start-to-final path")
    kept = sorted(alive)
    local = {node: i for i, node in enumerate(kept)}
    local_arcs = [(local[a], local[b]) for a, b in graph.arcs if a in alive and b in alive]
    order = _kahn(len(kept), local_arcs)
    renumber = {kept[old]: new for new, old in enumerate(order)}
    return LabelGraph(
        symbols=tuple(graph.symbols[kept[old]] for old in order),
        arcs=tuple((renumber[a], renumber[b]) for a, b in graph.arcs if a in alive and b in alive),
        starts=frozenset(renumber[s] for s in graph.starts if s in alive),
        finals=frozenset(renumber[f] for f in graph.finals if f in alive),
    )


class EmissionMatrix:
    """ Frame-level log-posteriors (natural log) of shape ``T' x V``.

        Rows must be normalized distributions. ``-inf`` is allowed for exact zeros. The matrix is read-only after
        construction.

        :param log_posteriors: A ``T' x V`` array-like of log-probabilities
        :param validate: Set to False to skip the normalization check (e.g. for finite-difference perturbations)
        :type validate: bool
        :param tolerance: Allowed deviation of each row's log-sum-exp from 0
        :type tolerance: float
    """

    def __init__(self, log_posteriors, validate: bool = True, tolerance: float = 1e-6):
        """ Constructor """
        values = np.array(log_posteriors, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 2:
            raise InvalidEmissions(
                "Expected a T' x V matrix with T' >= 1 and V >= 2, got shape {}".format(values.shape))
        if np.isnan(values).any() or np.isposinf(values).any():
            raise InvalidEmissions("Log-posteriors may not contain NaN or +inf")
        if validate:
            if (values > tolerance).any():
                raise InvalidEmissions("Log-posteriors must be <= 0")
            totals = logsumexp(values, axis=1)
            bad = np.flatnonzero(~(np.abs(totals) <= tolerance))
            if bad.size:
                raise InvalidEmissions("Row {} is not normalized (log-sum-exp {:.3g})".format(bad[0], totals[bad[0]]))
        values.setflags(write=False)
        self._values = values

    @classmethod
    def from_logits(cls, logits) -> "EmissionMatrix":
        """ Applies a log-softmax over the last axis """
        return cls(log_softmax(np.asarray(logits, dtype=np.float64), axis=1))

    @classmethod
    def uniform(cls, num_frames: int, vocab_size: int) -> "EmissionMatrix":
        return cls(np.full((num_frames, vocab_size), -np.log(vocab_size)))

    @property
    def log_posteriors(self) -> np.ndarray:
        return self._values

    @property
    def num_frames(self) -> int:
        return self._values.shape[0]

    @property
    def vocab_size(self) -> int:
        return self._values.shape[1]

    def __repr__(self):
        return "EmissionMatrix(num_frames={}, vocab_size={})".format(self.num_frames, self.vocab_size)


@dataclasses.dataclass(frozen=True, eq=False)
class Trellis:
    """ Time-synchronous intersection of a label graph with an emission matrix.

        State ``i`` is the pair ``(state_frames[i], state_nodes[i])`` with frames counted from 1; states are numbered by
        frame then node, which is a topological order. Arc ``a`` consumes emission row ``arc_frames[a]`` and its weight
        is the log-posterior of the destination node's symbol in that row. Entry arcs leave the virtual source
        (``arc_sources == SOURCE``). Arcs entering frame ``t + 1`` occupy ``frame_offsets[t]:frame_offsets[t + 1]``.
    """

    num_frames: int
    state_frames: np.ndarray
    state_nodes: np.ndarray
    arc_sources: np.ndarray
    arc_targets: np.ndarray
    arc_symbols: np.ndarray
    arc_weights: np.ndarray
    frame_offsets: np.ndarray
    final_states: np.ndarray

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if isinstance(value, np.ndarray):
                value.setflags(write=False)

    @property
    def num_states(self) -> int:
        return int(self.state_nodes.shape[0])

    @property
    def num_arcs(self) -> int:
        return int(self.arc_targets.shape[0])

    @property
    def arc_frames(self) -> np.ndarray:
        return np.repeat(np.arange(self.num_frames), np.diff(self.frame_offsets))

    @property
    def start_states(self) -> np.ndarray:
        return self.arc_targets[self.frame_offsets[0]:self.frame_offsets[1]]

    def frame_arcs(self, frame: int) -> slice:
        """ Slice of the arcs consuming emission row ``frame`` """
        return slice(int(self.frame_offsets[frame]), int(self.frame_offsets[frame + 1]))


def intersect(graph: LabelGraph, emissions: EmissionMatrix) -> Trellis:
    """ Intersects a trim label graph with the emission lattice.

        Only states reachable in ``t`` frames and co-reachable to a final node in the remaining frames are kept, so the
        trellis is trim by construction.

        :raises graphtc.wfsa.SymbolOutOfRange: If a node symbol is not covered by the emissions
        :raises graphtc.wfsa.EmptyIntersection: If no start-to-final path fits in the available frames
    """
    num_frames = emissions.num_frames
    if graph.is_empty:
        raise EmptyIntersection(num_frames)
    symbols = np.asarray(graph.symbols, dtype=np.int64)
    if symbols.max() >= emissions.vocab_size:
        raise SymbolOutOfRange("Graph uses symbol {} but the emissions only cover {} symbols".format(
            symbols.max(), emissions.vocab_size
        ))
    n = graph.num_nodes
    loops = np.arange(n, dtype=np.int64)
    explicit = np.asarray(graph.arcs, dtype=np.int64).reshape(-1, 2)
    order = np.lexsort((np.concatenate([explicit[:, 1], loops]), np.concatenate([explicit[:, 0], loops])))
    src = np.concatenate([explicit[:, 0], loops])[order]
    dst = np.concatenate([explicit[:, 1], loops])[order]

    starts = np.zeros(n, dtype=bool)
    starts[sorted(graph.starts)] = True
    finals = np.zeros(n, dtype=bool)
    finals[sorted(graph.finals)] = True

    # reach[t] / coreach[t] describe frame t + 1
    reach = np.zeros((num_frames, n), dtype=bool)
    reach[0] = starts
    for frame in range(1, num_frames):
        step = np.zeros(n, dtype=bool)
        step[dst[reach[frame - 1][src]]] = True
        reach[frame] = step
    coreach = np.zeros((num_frames, n), dtype=bool)
    coreach[-1] = finals
    for frame in range(num_frames - 2, -1, -1):
        step = np.zeros(n, dtype=bool)
        step[src[coreach[frame + 1][dst]]] = True
        coreach[frame] = step
    alive = reach & coreach
    if not alive[-1].any():
        raise EmptyIntersection(num_frames)

    frames_of_state, nodes_of_state = np.nonzero(alive)
    state_id = np.full((num_frames, n), -1, dtype=np.int64)
    state_id[frames_of_state, nodes_of_state] = np.arange(frames_of_state.shape[0])

    log_posteriors = emissions.log_posteriors
    arc_blocks_src, arc_blocks_dst, arc_blocks_sym, arc_blocks_w = [], [], [], []
    offsets = [0]
    entry_nodes = np.flatnonzero(alive[0])
    arc_blocks_src.append(np.full(entry_nodes.shape[0], SOURCE, dtype=np.int64))
    arc_blocks_dst.append(state_id[0, entry_nodes])
    arc_blocks_sym.append(symbols[entry_nodes])
    arc_blocks_w.append(log_posteriors[0, symbols[entry_nodes]])
    offsets.append(entry_nodes.shape[0])
    for frame in range(1, num_frames):
        keep = alive[frame - 1][src] & alive[frame][dst]
        block_src, block_dst = src[keep], dst[keep]
        arc_blocks_src.append(state_id[frame - 1, block_src])
        arc_blocks_dst.append(state_id[frame, block_dst])
        arc_blocks_sym.append(symbols[block_dst])
        arc_blocks_w.append(log_posteriors[frame, symbols[block_dst]])
        offsets.append(offsets[-1] + block_src.shape[0])

    final_nodes = np.flatnonzero(alive[-1] & finals)
    return Trellis(
        num_frames=num_frames,
        state_frames=frames_of_state + 1,
        state_nodes=nodes_of_state,
        arc_sources=np.concatenate(arc_blocks_src),
        arc_targets=np.concatenate(arc_blocks_dst),
        arc_symbols=np.concatenate(arc_blocks_sym),
        arc_weights=np.concatenate(arc_blocks_w).astype(np.float64),
        frame_offsets=np.asarray(offsets, dtype=np.int64),
        final_states=state_id[num_frames - 1, final_nodes],
    )


def _segment_logsumexp(values: np.ndarray, segments: np.ndarray, size: int) -> np.ndarray:
    """ Log-sum-exp of ``values`` grouped by ``segments``; empty or all ``-inf`` groups give ``-inf`` """
    peak = np.full(size, -np.inf)
    np.maximum.at(peak, segments, values)
    shift = np.where(np.isfinite(peak), peak, 0.0)
    total = np.zeros(size)
    np.add.at(total, segments, np.exp(values - shift[segments]))
    with np.errstate(divide="ignore"):
        return np.log(total) + shift


def forward_scores(trellis: Trellis) -> np.ndarray:
    """ Log forward score of every state (sum over paths from the virtual source, weights included) """
    alpha = np.full(trellis.num_states, -np.inf)
    for frame in range(trellis.num_frames):
        block = trellis.frame_arcs(frame)
        sources = trellis.arc_sources[block]
        incoming = np.where(sources == SOURCE, 0.0, alpha[np.maximum(sources, 0)])
        targets = trellis.arc_targets[block]
        scores = _segment_logsumexp(incoming + trellis.arc_weights[block], targets, trellis.num_states)
        alpha[targets] = scores[targets]
    return alpha


def backward_scores(trellis: Trellis) -> np.ndarray:
    """ Log backward score of every state (sum over paths to a final state, excluding the state's own weight) """
    beta = np.full(trellis.num_states, -np.inf)
    beta[trellis.final_states] = 0.0
    for frame in range(trellis.num_frames - 1, 0, -1):
        block = trellis.frame_arcs(frame)
        sources = trellis.arc_sources[block]
        scores = _segment_logsumexp(beta[trellis.arc_targets[block]] + trellis.arc_weights[block], sources,
                                    trellis.num_states)
        beta[sources] = scores[sources]
    return beta


def backward_total(trellis: Trellis, beta: t.Optional[np.ndarray] = None) -> float:
    """ Total log-probability computed from the backward scores at the start states """
    if beta is None:
        beta = backward_scores(trellis)
    block = trellis.frame_arcs(0)
    return float(logsumexp(trellis.arc_weights[block] + beta[trellis.arc_targets[block]]))


def forward_backward(trellis: Trellis) -> t.Tuple[float, np.ndarray]:
    """ Log-semiring forward-backward over a trellis.

        :return: The total log-probability of all start-to-final paths and the posterior of every arc. When every path
            has probability zero the total is ``-inf`` and all posteriors are zero.
        :rtype: tuple(float, numpy.ndarray)
    """
    alpha = forward_scores(trellis)
    beta = backward_scores(trellis)
    total = float(logsumexp(alpha[trellis.final_states]))
    if not np.isfinite(total):
        return total, np.zeros(trellis.num_arcs)
    sources = trellis.arc_sources
    source_alpha = np.where(sources == SOURCE, 0.0, alpha[np.maximum(sources, 0)])
    posteriors = np.exp(source_alpha + trellis.arc_weights + beta[trellis.arc_targets] - total)
    return total, posteriors


def _symbol_name(symbol: int, vocabulary: t.Optional[Vocabulary]) -> str:
    if vocabulary is None:
        return BLANK_SYMBOL if symbol == BLANK else str(symbol)
    return vocabulary.symbol(symbol)


def to_dot(graph: t.Union[LabelGraph, Trellis], vocabulary: t.Optional[Vocabulary] = None) -> graphviz.Digraph:
    """ Exports a label graph or a trellis as a Graphviz digraph.

        Nodes are labeled with their symbol; start nodes get a double border and final nodes a bold one. Call
        ``.source`` on the result for the DOT text.
    """
    dot = graphviz.Digraph(graph_attr={"rankdir": "LR"})
    if isinstance(graph, Trellis):
        starts = set(graph.start_states.tolist())
        finals = set(graph.final_states.tolist())
        block = graph.frame_arcs(0)
        symbol_of = {}
        for dst, symbol in zip(graph.arc_targets.tolist(), graph.arc_symbols.tolist()):
            symbol_of[dst] = symbol
        for state in range(graph.num_states):
            attrs = _dot_node_attrs(state in starts, state in finals)
            label = "{}@{}".format(_symbol_name(symbol_of[state], vocabulary), int(graph.state_frames[state]))
            dot.node(str(state), label=label, **attrs)
        for a in range(block.stop, graph.num_arcs):
            dot.edge(str(int(graph.arc_sources[a])), str(int(graph.arc_targets[a])),
                     label="{:.4g}".format(float(graph.arc_weights[a])))
        return dot
    for node, symbol in enumerate(graph.symbols):
        attrs = _dot_node_attrs(node in graph.starts, node in graph.finals)
        dot.node(str(node), label=_symbol_name(symbol, vocabulary), **attrs)
    for src, dst in graph.arcs:
        dot.edge(str(src), str(dst))
    return dot


def _dot_node_attrs(is_start: bool, is_final: bool) -> t.Dict[str, str]:
    attrs = {"shape": "circle"}
    if is_start:
        attrs["peripheries"] = "2"
    if is_final:
        attrs["style"] = "bold"
    return attrs
