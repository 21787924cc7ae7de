"""
Graph Temporal Classification: CTC-style training against a graph of alternative label sequences.

.. code-block:: python

    from graphtc import parse_lexicon, words_to_graph, gtc_loss, EmissionMatrix

    lexicon = parse_lexicon(["hello\\th @ l oU\\n", "hello\\th E l oU\\n"])
    graph = words_to_graph(lexicon, ["hello"])
    result = gtc_loss(graph, EmissionMatrix.uniform(8, lexicon.vocabulary.size))

"""
from .wfsa import (
    BLANK, BLANK_SYMBOL, Vocabulary, LabelGraph, EmissionMatrix, Trellis, intersect, forward_backward, topo_order,
    trim, to_dot, InvalidVocabulary, UnknownSymbol, InvalidGraph, CycleDetected, EmptyGraph, SymbolOutOfRange,
    InvalidEmissions, EmptyIntersection
)
from .label_graph import (
    Pronunciation, WordAlternatives, build_ctc_graph, build_gtc_graph, parallel, serial, determinize,
    enumerate_collapsed, dump_graph, load_graph, EmptyPronunciation, MissingVariants, LimitExceeded
)
from .loss import (
    LossResult, collapse, alignment_logprob, greedy_decode, gtc_loss, ctc_loss_reference, brute_force_loss,
    InvalidTarget, TooLarge
)
from .lexicon import (
    ALL, Variant, Lexicon, parse_lexicon, load_lexicon, dump_lexicon, n_best, words_to_graph, ParseError, UnknownWord
)
from .metrics import EditCounts, ErrorReport, edit_distance, error_rate, graph_edit_distance, oracle_ler, EmptyReference
from .posteriors import read_posteriors, write_posteriors, PosteriorFormatError
from .settings import GtcSettings, SettingsError

__version__ = '0.1.0'
