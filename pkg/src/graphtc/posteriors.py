""" Reading and writing posterior files.

    Two encodings are accepted:

    * text: a header line ``T V`` followed by ``T`` rows of ``V`` whitespace-separated log-probabilities;
    * binary: the magic ``GTCP``, unsigned 32-bit little-endian ``T`` and ``V``, then ``T x V`` little-endian 64-bit
      floats in row-major order.

    Readers detect the encoding from the magic bytes.

"""
import logging
import pathlib
import typing as t

import numpy as np
from scipy.special import log_softmax

from .wfsa import EmissionMatrix, InvalidEmissions


MAGIC = b"GTCP"


class PosteriorFormatError(ValueError):
    """ Raised when a posterior file is malformed or fails the normalization check.

        :param path: The file being read
        :param reason: What is wrong with the file
        :type reason: str
    """

    def __init__(self, path, reason: str):
        """ Constructor """
        super().__init__("{}: {}".format(path, reason))
        self.path = path


def read_matrix(path: t.Union[str, pathlib.Path]) -> np.ndarray:
    """ Reads the raw ``T x V`` matrix of a posterior file (text or binary) """
    data = pathlib.Path(path).read_bytes()
    if data[:4] == MAGIC:
        return _decode_binary(path, data)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise PosteriorFormatError(path, "neither a text nor a binary posterior file") from None
    return _decode_text(path, text)


def _decode_binary(path, data: bytes) -> np.ndarray:
    if len(data) < 12:
        raise PosteriorFormatError(path, "truncated header")
    num_frames, vocab_size = np.frombuffer(data, dtype="<u4", count=2, offset=4).tolist()
    expected = 12 + 8 * num_frames * vocab_size
    if len(data) != expected:
        raise PosteriorFormatError(path, "expected {} bytes for {} x {}, found {}".format(
            expected, num_frames, vocab_size, len(data)
        ))
    values = np.frombuffer(data, dtype="<f8", offset=12).astype(np.float64)
    return values.reshape(num_frames, vocab_size)


def _decode_text(path, text: str) -> np.ndarray:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise PosteriorFormatError(path, "empty file")
    header = lines[0].split()
    try:
        num_frames, vocab_size = (int(x) for x in header)
    except ValueError:
        raise PosteriorFormatError(path, "header must be 'T V'") from None
    if len(lines) - 1 != num_frames:
        raise PosteriorFormatError(path, "header announces {} rows, found {}".format(num_frames, len(lines) - 1))
    rows = []
    for row_number, line in enumerate(lines[1:], start=1):
        fields = line.split()
        if len(fields) != vocab_size:
            raise PosteriorFormatError(path, "row {} has {} values, expected {}".format(row_number, len(fields),
                                                                                       vocab_size))
        try:
            rows.append([float(x) for x in fields])
        except ValueError:
            raise PosteriorFormatError(path, "row {} holds a non-numeric value".format(row_number)) from None
    return np.asarray(rows, dtype=np.float64).reshape(num_frames, vocab_size)


def read_posteriors(path: t.Union[str, pathlib.Path], normalize: bool = False) -> EmissionMatrix:
    """ Reads a posterior file into an :class:`graphtc.wfsa.EmissionMatrix`

        :param normalize: Renormalize rows with a log-softmax instead of rejecting unnormalized rows
        :raises graphtc.posteriors.PosteriorFormatError: If the file is malformed or its rows are not normalized
    """
    values = read_matrix(path)
    if normalize:
        logging.getLogger("graphtc").info("Renormalizing %s with a log-softmax", path)
        with np.errstate(invalid="ignore"):
            values = log_softmax(values, axis=1)
    try:
        return EmissionMatrix(values)
    except InvalidEmissions as ex:
        raise PosteriorFormatError(path, str(ex)) from None


def write_matrix(path: t.Union[str, pathlib.Path], values, binary: bool = False):
    """ Writes a ``T x V`` matrix. Text output uses shortest round-trip float formatting, so it is lossless too. """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError("Expected a T x V matrix, got shape {}".format(values.shape))
    num_frames, vocab_size = values.shape
    if binary:
        header = np.asarray([num_frames, vocab_size], dtype="<u4").tobytes()
        pathlib.Path(path).write_bytes(MAGIC + header + values.astype("<f8").tobytes(order="C"))
        return
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("{} {}\n".format(num_frames, vocab_size))
        for row in values.tolist():
            handle.write(" ".join(repr(x) for x in row) + "\n")


def write_posteriors(path: t.Union[str, pathlib.Path], emissions: EmissionMatrix, binary: bool = False):
    write_matrix(path, emissions.log_posteriors, binary=binary)
