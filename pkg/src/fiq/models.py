"""Generative models of finitely-informed binary expansions.

Two constructions:

* IndependentBitsModel -- bit j is 1 with propensity q_j, independently.
* MajorityVoteModel -- bit j is the majority of a window of k fresh source
  bits r(j) .. r(j+k-1).  Windows at distance < k overlap, so adjacent bits
  are correlated, yet the first d bits are always determined by the finite
  set of source bits r(1) .. r(d+k-1).

The window indexing starts every window at the bit's own position, so bit 1
is well defined from time 1 onward (no warm-up padding); the sliding-window
overlap structure is unchanged by this re-indexing.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import DepthBeyondKnowledgeError, EnumerationBoundError
from .propensity import PropensityVector, TailPolicy, as_propensity
from .randombits import RandomBitSource, bias_threshold, threshold_bits
from .rational import format_rational, parse_rational

ENUMERATION_BIT_BOUND = 24


@dataclass(frozen=True)
class BitPrefix:
    """The first d realized bits after the binary point.

    Denotes the dyadic interval [v, v + 2^-d) with v = sum bits_i 2^-i.
    """

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("prefix bits must be 0 or 1")
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))

    @property
    def depth(self) -> int:
        return len(self.bits)

    @property
    def value(self) -> Fraction:
        """Left endpoint of the dyadic interval."""
        num = 0
        for b in self.bits:
            num = (num << 1) | b
        return Fraction(num, 1 << self.depth)


def majority(window: Sequence[int]) -> int:
    """1 iff strictly more ones than zeros; window length must be odd."""
    n = len(window)
    if n == 0 or n % 2 == 0:
        raise ValueError(f"majority window must have odd length >= 1, got {n}")
    if any(b not in (0, 1) for b in window):
        raise ValueError("window entries must be 0 or 1")
    return int(sum(window) * 2 > n)


@dataclass(frozen=True)
class MajorityVoteModel:
    """Bit j = majority of the k source bits r(j) .. r(j+k-1)."""

    k: int
    source: RandomBitSource

    def __post_init__(self) -> None:
        if self.k < 1 or self.k % 2 == 0:
            raise ValueError(f"window length k must be an odd positive integer, got {self.k}")


@dataclass(frozen=True)
class IndependentBitsModel:
    """Bit j drawn independently with propensity pv[j]."""

    pv: PropensityVector
    source: RandomBitSource


FiqModel = Union[IndependentBitsModel, MajorityVoteModel]


@dataclass(frozen=True)
class SampleMatrix:
    """N independent realizations of the first d bits, one model stream per row.

    ``stationary`` records whether the generating process is shift-invariant
    across bit positions (true for majority-vote models), which decides
    whether block statistics may pool across positions.
    """

    bits: np.ndarray  # (N, d) uint8
    stationary: bool

    @property
    def n_samples(self) -> int:
        return self.bits.shape[0]

    @property
    def depth(self) -> int:
        return self.bits.shape[1]


def generating_bits_count(model: FiqModel, depth: int) -> int:
    """Number of source bits that determine the first ``depth`` model bits."""
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    if depth == 0:
        return 0
    if isinstance(model, MajorityVoteModel):
        return depth + model.k - 1
    return depth


def _check_depth(model: FiqModel, depth: int) -> None:
    if isinstance(model, IndependentBitsModel) and model.pv.tail is TailPolicy.UNSPECIFIED:
        if depth > model.pv.prefix_length:
            raise DepthBeyondKnowledgeError(
                f"depth {depth} exceeds prefix length {model.pv.prefix_length} "
                "and the tail is unspecified"
            )


def _independent_bits(model: IndependentBitsModel, stream_ids: np.ndarray, depth: int) -> np.ndarray:
    u = model.source.uniforms(stream_ids, 1, depth)
    out = np.empty(u.shape, dtype=np.uint8)
    for j in range(depth):
        t = bias_threshold(model.pv.propensity_at(j + 1))
        out[:, j] = threshold_bits(u[:, j], t)
    return out


def _majority_bits(model: MajorityVoteModel, stream_ids: np.ndarray, depth: int) -> np.ndarray:
    n_source = depth + model.k - 1
    r = model.source.bit_matrix(stream_ids, 1, n_source)
    csum = np.zeros((r.shape[0], n_source + 1), dtype=np.int64)
    np.cumsum(r, axis=1, out=csum[:, 1:])
    window_sums = csum[:, model.k:] - csum[:, :-model.k]
    return (window_sums * 2 > model.k).astype(np.uint8)


def sample_prefix(model: FiqModel, depth: int, stream_id: int | None = None) -> BitPrefix:
    """One realization of the first ``depth`` bits, deterministic in the source."""
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    _check_depth(model, depth)
    sid = model.source.stream_id if stream_id is None else stream_id
    streams = np.array([sid], dtype=np.uint64)
    if isinstance(model, MajorityVoteModel):
        row = _majority_bits(model, streams, depth)[0]
    else:
        row = _independent_bits(model, streams, depth)[0]
    return BitPrefix(tuple(int(b) for b in row))


def sample_matrix(model: FiqModel, depth: int, n_samples: int, threads: int = 1) -> SampleMatrix:
    """N realizations on streams stream_id .. stream_id+N-1, one per row.

    Output is identical for any thread count: rows are pure functions of
    their stream id, and chunks are assembled in index order.
    """
    if depth < 1 or n_samples < 1:
        raise ValueError("depth and n_samples must be >= 1")
    _check_depth(model, depth)
    base = model.source.stream_id
    streams = np.arange(base, base + n_samples, dtype=np.uint64)
    is_majority = isinstance(model, MajorityVoteModel)

    def run(chunk: np.ndarray) -> np.ndarray:
        if is_majority:
            return _majority_bits(model, chunk, depth)
        return _independent_bits(model, chunk, depth)

    if threads <= 1 or n_samples < 2 * threads:
        bits = run(streams)
    else:
        chunks = np.array_split(streams, threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
        bits = np.concatenate(parts, axis=0)
    return SampleMatrix(bits=bits, stationary=is_majority)


def exact_window_joint(
    k: int,
    bias: Fraction,
    offsets: Sequence[int],
) -> dict[tuple[int, ...], Fraction]:
    """Exact joint law of the majority-vote bits at the given positions.

    Enumerates every configuration of the source bits spanned by the windows
    and weights it by the bias, so the returned probabilities are exact
    rationals.  The span (max(offsets) - min(offsets) + k source bits) must
    not exceed ENUMERATION_BIT_BOUND.
    """
    if k < 1 or k % 2 == 0:
        raise ValueError(f"window length k must be an odd positive integer, got {k}")
    if not offsets:
        raise ValueError("offsets must be non-empty")
    bias = as_propensity(bias)
    rel = [o - min(offsets) for o in offsets]
    span = max(rel) + k
    if span > ENUMERATION_BIT_BOUND:
        raise EnumerationBoundError(
            f"enumeration needs {span} source bits, bound is {ENUMERATION_BIT_BOUND}"
        )

    half = k // 2
    n_out = len(rel)
    # counts[outcome_code, ones_in_config] over all 2^span source configs
    counts = np.zeros((1 << n_out, span + 1), dtype=np.int64)
    shifts = np.arange(span, dtype=np.uint32)
    batch = 1 << min(span, 16)
    for start in range(0, 1 << span, batch):
        m = np.arange(start, start + batch, dtype=np.uint32)
        bits = ((m[:, None] >> shifts[None, :]) & 1).astype(np.int8)
        ones = bits.sum(axis=1)
        code = np.zeros(len(m), dtype=np.int64)
        for i, o in enumerate(rel):
            wsum = bits[:, o:o + k].sum(axis=1)
            code |= (wsum > half).astype(np.int64) << i
        np.add.at(counts, (code, ones), 1)

    a, b = bias.numerator, bias.denominator
    denom = Fraction(b) ** span
    joint: dict[tuple[int, ...], Fraction] = {}
    for code in range(1 << n_out):
        total = Fraction(0)
        for ones in range(span + 1):
            c = int(counts[code, ones])
            if c:
                total += c * Fraction(a ** ones * (b - a) ** (span - ones))
        outcome = tuple((code >> i) & 1 for i in range(n_out))
        joint[outcome] = total / denom
    return joint


def majority_block_distribution(k: int, bias: Fraction, block_length: int) -> dict[tuple[int, ...], Fraction]:
    """Exact law of ``block_length`` consecutive majority-vote bits."""
    return exact_window_joint(k, bias, list(range(1, block_length + 1)))


# ---------------------------------------------------------------------------
# serialization

def model_to_json(model: FiqModel) -> dict:
    if isinstance(model, IndependentBitsModel):
        return {
            "type": "independent",
            "pv": model.pv.to_json(),
            "seed": model.source.seed,
            "stream": model.source.stream_id,
        }
    return {
        "type": "majority",
        "k": model.k,
        "bias": format_rational(model.source.bias),
        "seed": model.source.seed,
        "stream": model.source.stream_id,
    }


def model_from_json(
    data: Mapping,
    seed: int | None = None,
    stream: int | None = None,
) -> FiqModel:
    """Build a model from its JSON form; ``seed``/``stream`` override the document."""
    kind = data.get("type")
    use_seed = seed if seed is not None else data.get("seed")
    if use_seed is None:
        raise ValueError("model JSON carries no seed and none was supplied")
    use_stream = stream if stream is not None else data.get("stream", 0)
    if kind == "independent":
        pv = PropensityVector.from_json(data["pv"])
        source = RandomBitSource(seed=int(use_seed), stream_id=int(use_stream))
        return IndependentBitsModel(pv=pv, source=source)
    if kind == "majority":
        bias = parse_rational(str(data.get("bias", "1/2")))
        source = RandomBitSource(seed=int(use_seed), bias=bias, stream_id=int(use_stream))
        return MajorityVoteModel(k=int(data["k"]), source=source)
    raise ValueError(f"unknown model type {kind!r}")
