""" Construction of CTC and GTC label graphs from pronunciation alternatives.

    A GTC label graph is built exactly like the textbook procedure: the CTC graphs of the variants of one word are
    composed in parallel, and the resulting word graphs are composed serially from left to right. Serial composition
    joins two words through a single boundary blank and adds direct skip arcs between differing labels, so the result
    keeps CTC repeat semantics across word boundaries.

    Two variant choices may spell the same label sequence (``a|bc`` and ``ab|c``). The composed graph then holds one
    path per choice and the forward pass would count that sequence once per path, so :func:`determinize` rebuilds the
    graph with a single path per accepted sequence before it is used for training.

"""
import dataclasses
import typing as t

from .wfsa import BLANK, LabelGraph, Vocabulary, InvalidGraph, topo_order, trim


class InvalidPronunciation(ValueError):
    """ Raised when a pronunciation contains the blank symbol. """
    pass


class EmptyPronunciation(InvalidPronunciation):
    """ Raised when a pronunciation has no phonemes. """
    pass


class MissingVariants(ValueError):
    """ Raised when a word (or a word list) has nothing to build a graph from. """
    pass


class LimitExceeded(ValueError):
    """ Raised when a graph accepts more sequences than an enumeration allows.

        :param limit: The enumeration limit that was exceeded
        :type limit: int
    """

    def __init__(self, limit: int):
        """ Constructor """
        super().__init__("Graph accepts more than {} sequences".format(limit))
        self.limit = limit


@dataclasses.dataclass(frozen=True)
class Pronunciation:
    """ A non-empty sequence of phoneme (non-blank) symbol indices """

    phonemes: t.Tuple[int, ...]

    def __post_init__(self):
        phonemes = tuple(int(p) for p in self.phonemes)
        if not phonemes:
            raise EmptyPronunciation("A pronunciation needs at least one phoneme")
        if any(p == BLANK for p in phonemes):
            raise InvalidPronunciation("The blank symbol cannot appear in a pronunciation")
        if any(p < 0 for p in phonemes):
            raise InvalidPronunciation("Negative symbol index in {}".format(phonemes))
        object.__setattr__(self, "phonemes", phonemes)

    def __len__(self):
        return len(self.phonemes)

    def __iter__(self):
        return iter(self.phonemes)


@dataclasses.dataclass(frozen=True)
class WordAlternatives:
    """ A word with its ordered pronunciation variants. Duplicate variants are dropped, keeping the first one.

        :param word: The written word
        :type word: str
        :param variants: Pronunciations (or plain symbol sequences) in preference order
    """

    word: str
    variants: t.Tuple[Pronunciation, ...]

    def __post_init__(self):
        unique = {}
        for variant in self.variants:
            if not isinstance(variant, Pronunciation):
                variant = Pronunciation(tuple(variant))
            unique.setdefault(variant.phonemes, variant)
        if not unique:
            raise MissingVariants("Word {!r} has no pronunciation".format(self.word))
        object.__setattr__(self, "variants", tuple(unique.values()))


def build_ctc_graph(pronunciation: t.Union[Pronunciation, t.Sequence[int]]) -> LabelGraph:
    """ Canonical CTC topology for ``l1 ... lL``: blanks interleaved with labels (``2L + 1`` nodes).

        Node ``2k`` is the blank ``b_k`` and node ``2k + 1`` the label ``l_{k+1}``. A skip arc joins two consecutive
        labels when they differ.

        :raises graphtc.label_graph.EmptyPronunciation: If the pronunciation is empty
    """
    if not isinstance(pronunciation, Pronunciation):
        pronunciation = Pronunciation(tuple(pronunciation))
    labels = pronunciation.phonemes
    symbols = []
    arcs = []
    for k, label in enumerate(labels):
        blank_node, label_node = 2 * k, 2 * k + 1
        symbols.extend((BLANK, label))
        arcs.append((blank_node, label_node))
        arcs.append((label_node, label_node + 1))
        if k + 1 < len(labels) and labels[k + 1] != label:
            arcs.append((label_node, label_node + 2))
    symbols.append(BLANK)
    last = len(symbols) - 1
    return LabelGraph(tuple(symbols), tuple(arcs), frozenset((0, 1)), frozenset((last - 1, last)))


def parallel(a: LabelGraph, b: LabelGraph) -> LabelGraph:
    """ Disjoint union; the accepted set is the union of both accepted sets. Empty slots are neutral. """
    if a.is_empty:
        return b
    if b.is_empty:
        return a
    offset = a.num_nodes
    return LabelGraph(
        symbols=a.symbols + b.symbols,
        arcs=a.arcs + tuple((src + offset, dst + offset) for src, dst in b.arcs),
        starts=a.starts | frozenset(s + offset for s in b.starts),
        finals=a.finals | frozenset(f + offset for f in b.finals),
    )


def serial(a: LabelGraph, b: LabelGraph) -> LabelGraph:
    """ Concatenation; the accepted set is every ``x + y`` with ``x`` accepted by ``a`` and ``y`` by ``b``.

        A boundary blank is shared by the junction: every label final of ``a`` enters it, it enters every label start of
        ``b``, and label finals skip directly to label starts carrying another symbol. Blank finals of ``a`` (which
        must be sinks) and blank starts of ``b`` (which must be sources) merge into the boundary blank. Empty slots are
        neutral.

        :raises graphtc.wfsa.InvalidGraph: If a blank final of ``a`` has successors or a blank start of ``b`` has
            predecessors
    """
    if a.is_empty:
        return b
    if b.is_empty:
        return a
    a_succ = a.successors()
    b_pred = b.predecessors()
    merged_a = {f for f in a.finals if a.symbols[f] == BLANK}
    merged_b = {s for s in b.starts if b.symbols[s] == BLANK}
    if any(a_succ[f] for f in merged_a) or any(b_pred[s] for s in merged_b):
        raise InvalidGraph("Blank finals must be sinks and blank starts must be sources to be joined")

    a_map = {}
    symbols = []
    for node, symbol in enumerate(a.symbols):
        if node not in merged_a:
            a_map[node] = len(symbols)
            symbols.append(symbol)
    boundary = len(symbols)
    symbols.append(BLANK)
    for node in merged_a:
        a_map[node] = boundary
    b_map = {}
    for node, symbol in enumerate(b.symbols):
        if node not in merged_b:
            b_map[node] = len(symbols)
            symbols.append(symbol)
    for node in merged_b:
        b_map[node] = boundary

    arcs = [(a_map[src], a_map[dst]) for src, dst in a.arcs]
    arcs.extend((b_map[src], b_map[dst]) for src, dst in b.arcs)
    label_finals = sorted(f for f in a.finals if f not in merged_a)
    label_starts = sorted(s for s in b.starts if s not in merged_b)
    for f in label_finals:
        arcs.append((a_map[f], boundary))
        for s in label_starts:
            if a.symbols[f] != b.symbols[s]:
                arcs.append((a_map[f], b_map[s]))
    for s in label_starts:
        arcs.append((boundary, b_map[s]))
    return LabelGraph(
        symbols=tuple(symbols),
        arcs=tuple(arcs),
        starts=frozenset(a_map[s] for s in a.starts),
        finals=frozenset(b_map[f] for f in b.finals),
    )


def _blank_closure(graph: LabelGraph) -> t.Tuple[t.List[t.FrozenSet[int]], t.List[bool]]:
    """ Per node, the label nodes reachable through blanks only and whether a final node is """
    succ = graph.successors()
    ahead = [frozenset()] * graph.num_nodes
    ends = [False] * graph.num_nodes
    for node in reversed(topo_order(graph)):
        reach = set()
        done = node in graph.finals
        for nxt in succ[node]:
            if graph.symbols[nxt] == BLANK:
                reach |= ahead[nxt]
                done = done or ends[nxt]
            else:
                reach.add(nxt)
        ahead[node] = frozenset(reach)
        ends[node] = done
    return ahead, ends


def _by_symbol(graph: LabelGraph, nodes: t.Iterable[int]) -> t.List[t.FrozenSet[int]]:
    groups = {}
    for node in nodes:
        groups.setdefault(graph.symbols[node], set()).add(node)
    return [frozenset(groups[symbol]) for symbol in sorted(groups)]


def determinize(graph: LabelGraph) -> LabelGraph:
    """ Rebuilds a CTC-style label graph so that every accepted label sequence has exactly one path.

        Label nodes of the input are grouped by a subset construction over label sequences: a node of the result
        stands for the set of input label nodes reachable by one prefix. Each result label gets the usual CTC
        surroundings, a blank after it and a skip arc to every following label with another symbol, so the result
        accepts the CTC alignments of the same sequences, each alignment once. Input blanks are assumed optional
        between differing labels, which holds for graphs built by this module.

        :raises graphtc.wfsa.EmptyGraph: If the graph accepts nothing
        :raises graphtc.wfsa.CycleDetected: If the explicit arcs contain a cycle
    """
    ahead, ends = _blank_closure(graph)
    first = set()
    for start in graph.starts:
        if graph.symbols[start] == BLANK:
            first |= ahead[start]
        else:
            first.add(start)
    symbols = [BLANK]
    arcs = []
    starts = {0}
    finals = {0} if any(ends[s] for s in graph.starts if graph.symbols[s] == BLANK) else set()
    label_nodes = {}
    queue = []

    def label_node(state: t.FrozenSet[int]) -> int:
        if state not in label_nodes:
            label_nodes[state] = len(symbols)
            symbols.append(graph.symbols[next(iter(state))])
            symbols.append(BLANK)
            queue.append(state)
        return label_nodes[state]

    for state in _by_symbol(graph, first):
        node = label_node(state)
        starts.add(node)
        arcs.append((0, node))
    while queue:
        state = queue.pop(0)
        node = label_nodes[state]
        blank = node + 1
        arcs.append((node, blank))
        if any(ends[member] for member in state):
            finals.update((node, blank))
        following = set()
        for member in state:
            following |= ahead[member]
        for nxt_state in _by_symbol(graph, following):
            nxt = label_node(nxt_state)
            arcs.append((blank, nxt))
            if symbols[nxt] != symbols[node]:
                arcs.append((node, nxt))
    return trim(LabelGraph(tuple(symbols), tuple(arcs), frozenset(starts), frozenset(finals)))


def build_gtc_graph(words: t.Sequence[WordAlternatives], deterministic: bool = True) -> LabelGraph:
    """ Builds the GTC label graph of a word sequence.

        For each word the CTC graphs of its variants are composed in parallel, then the word graphs are composed
        serially from left to right. The result is trimmed and renumbered in topological order, then passed through
        :func:`determinize` unless ``deterministic`` is False.

        :param deterministic: Set to False to keep one path per variant choice (the plain composition)
        :type deterministic: bool
        :raises graphtc.label_graph.MissingVariants: If ``words`` is empty
        :raises graphtc.label_graph.EmptyPronunciation: If any variant is empty
    """
    if not words:
        raise MissingVariants("At least one word is required to build a label graph")
    label_graph = LabelGraph.empty()
    for word in words:
        word_graph = LabelGraph.empty()
        for pronunciation in word.variants:
            word_graph = parallel(word_graph, build_ctc_graph(pronunciation))
        label_graph = serial(label_graph, word_graph)
    label_graph = trim(label_graph)
    return determinize(label_graph) if deterministic else label_graph


def enumerate_collapsed(graph: LabelGraph, limit: int = 10000) -> t.Set[t.Tuple[int, ...]]:
    """ Lists every distinct label sequence accepted by the graph (blank nodes contribute nothing).

        :param limit: Maximum number of sequences to produce
        :raises graphtc.label_graph.LimitExceeded: If more than ``limit`` sequences exist
        :raises graphtc.wfsa.CycleDetected: If the explicit arcs contain a cycle
    """
    succ = graph.successors()
    suffixes = {}
    for node in reversed(topo_order(graph)):
        symbol = graph.symbols[node]
        head = () if symbol == BLANK else (symbol,)
        found = set()
        if node in graph.finals:
            found.add(head)
        for nxt in succ[node]:
            found.update(head + tail for tail in suffixes[nxt])
        if len(found) > limit:
            raise LimitExceeded(limit)
        suffixes[node] = found
    accepted = set()
    for start in graph.starts:
        accepted |= suffixes[start]
        if len(accepted) > limit:
            raise LimitExceeded(limit)
    return accepted


def dump_graph(graph: LabelGraph, vocabulary: Vocabulary, stream: t.TextIO):
    """ Writes the textual dump: ``id symbol [start] [final]`` per node, then ``src dst`` per arc """
    for node, symbol in enumerate(graph.symbols):
        fields = [str(node), vocabulary.symbol(symbol)]
        if node in graph.starts:
            fields.append("start")
        if node in graph.finals:
            fields.append("final")
        stream.write(" ".join(fields) + "\n")
    for src, dst in graph.arcs:
        stream.write("{} {}\n".format(src, dst))


def load_graph(stream: t.Iterable[str], vocabulary: Vocabulary) -> LabelGraph:
    """ Reads a graph written by :func:`dump_graph`

        Node lines come first and are numbered consecutively, which tells them apart from arc lines.

        :raises graphtc.wfsa.InvalidGraph: If a line cannot be interpreted
    """
    symbols, arcs, starts, finals = [], [], set(), set()
    for line_number, line in enumerate(stream, start=1):
        fields = line.split()
        if not fields:
            continue
        try:
            first = int(fields[0])
        except ValueError:
            raise InvalidGraph("Line {}: expected a node id".format(line_number)) from None
        if first == len(symbols) and not arcs:
            flags = set(fields[2:])
            if len(fields) < 2 or not flags <= {"start", "final"}:
                raise InvalidGraph("Line {}: malformed node line".format(line_number))
            symbols.append(vocabulary.index(fields[1]))
            if "start" in flags:
                starts.add(first)
            if "final" in flags:
                finals.add(first)
        elif len(fields) == 2:
            try:
                arcs.append((first, int(fields[1])))
            except ValueError:
                raise InvalidGraph("Line {}: malformed arc line".format(line_number)) from None
        else:
            raise InvalidGraph("Line {}: malformed line".format(line_number))
    return LabelGraph(tuple(symbols), tuple(arcs), frozenset(starts), frozenset(finals))
