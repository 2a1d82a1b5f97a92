import math
from fractions import Fraction

import numpy as np
import pytest

from fiq.errors import DepthBeyondKnowledgeError, EnumerationBoundError
from fiq.models import (
    BitPrefix,
    IndependentBitsModel,
    MajorityVoteModel,
    exact_window_joint,
    generating_bits_count,
    majority,
    majority_block_distribution,
    model_from_json,
    model_to_json,
    sample_matrix,
    sample_prefix,
)
from fiq.propensity import PropensityVector, TailPolicy
from fiq.randombits import RandomBitSource


def fair_source(seed=11, stream=0):
    return RandomBitSource(seed=seed, stream_id=stream)


class TestMajority:
    @pytest.mark.parametrize("window,expected", [
        ((1, 1, 0), 1),
        ((0, 0, 1), 0),
        ((1, 0, 1, 0, 1), 1),
        ((0,), 0),
        ((1,), 1),
    ])
    def test_examples(self, window, expected):
        assert majority(window) == expected

    def test_rejects_even_or_empty(self):
        with pytest.raises(ValueError):
            majority(())
        with pytest.raises(ValueError):
            majority((1, 0))


class TestModels:
    def test_k_must_be_odd_positive(self):
        for bad in (0, 2, -3):
            with pytest.raises(ValueError):
                MajorityVoteModel(k=bad, source=fair_source())

    def test_json_round_trip(self):
        m = MajorityVoteModel(k=5, source=RandomBitSource(seed=3, bias=Fraction(1, 3), stream_id=2))
        doc = model_to_json(m)
        assert doc["type"] == "majority" and doc["bias"] == "1/3"
        assert model_from_json(doc) == m

        pv = PropensityVector.of(["3/4"])
        im = IndependentBitsModel(pv=pv, source=fair_source(seed=9))
        assert model_from_json(model_to_json(im)) == im

    def test_seed_override(self):
        m = MajorityVoteModel(k=3, source=fair_source(seed=3))
        m2 = model_from_json(model_to_json(m), seed=42)
        assert m2.source.seed == 42


class TestSamplePrefix:
    def test_deterministic_propensities(self):
        pv = PropensityVector.of([1, 0, 1])
        model = IndependentBitsModel(pv=pv, source=fair_source())
        assert sample_prefix(model, 3).bits == (1, 0, 1)

    def test_k1_equals_raw_source(self):
        src = fair_source(seed=77)
        model = MajorityVoteModel(k=1, source=src)
        got = sample_prefix(model, 12).bits
        assert got == tuple(int(b) for b in src.bits(1, 12))

    def test_sliding_window_matches_pure_python_oracle(self):
        src = fair_source(seed=5)
        k, depth = 3, 10
        model = MajorityVoteModel(k=k, source=src)
        r = [int(b) for b in src.bits(1, depth + k - 1)]
        expected = tuple(majority(r[j:j + k]) for j in range(depth))
        assert sample_prefix(model, depth).bits == expected

    def test_unspecified_tail_depth_limit(self):
        pv = PropensityVector.of(["3/4", "3/4"], TailPolicy.UNSPECIFIED)
        model = IndependentBitsModel(pv=pv, source=fair_source())
        assert sample_prefix(model, 2).depth == 2
        with pytest.raises(DepthBeyondKnowledgeError):
            sample_prefix(model, 3)

    def test_reproducible(self):
        model = MajorityVoteModel(k=3, source=fair_source(seed=123))
        assert sample_prefix(model, 20) == sample_prefix(model, 20)

    def test_prefix_value(self):
        assert BitPrefix((1, 0, 1)).value == Fraction(5, 8)
        assert BitPrefix(()).value == 0


class TestSampleMatrix:
    def test_thread_count_does_not_change_results(self):
        model = MajorityVoteModel(k=3, source=fair_source(seed=8))
        a = sample_matrix(model, 12, 503, threads=1)
        b = sample_matrix(model, 12, 503, threads=4)
        assert np.array_equal(a.bits, b.bits)

    def test_rows_match_per_stream_prefixes(self):
        model = MajorityVoteModel(k=3, source=fair_source(seed=8))
        s = sample_matrix(model, 8, 5)
        for i in range(5):
            assert tuple(int(b) for b in s.bits[i]) == sample_prefix(model, 8, stream_id=i).bits

    def test_independent_frequencies_converge(self):
        pv = PropensityVector.of(["3/4", "1/4"])
        model = IndependentBitsModel(pv=pv, source=fair_source(seed=31))
        s = sample_matrix(model, 2, 40_000)
        n = s.n_samples
        for j, q in ((0, 0.75), (1, 0.25)):
            f = s.bits[:, j].mean()
            assert abs(f - q) <= 3 * math.sqrt(q * (1 - q) / n)

    def test_stationary_flag(self):
        maj = MajorityVoteModel(k=3, source=fair_source())
        ind = IndependentBitsModel(pv=PropensityVector.of([]), source=fair_source())
        assert sample_matrix(maj, 4, 10).stationary
        assert not sample_matrix(ind, 4, 10).stationary


class TestGeneratingBitsCount:
    def test_examples(self):
        src = fair_source()
        assert generating_bits_count(MajorityVoteModel(k=3, source=src), 1) == 3
        assert generating_bits_count(MajorityVoteModel(k=5, source=src), 10) == 14
        ind = IndependentBitsModel(pv=PropensityVector.of([]), source=src)
        assert generating_bits_count(ind, 7) == 7
        assert generating_bits_count(MajorityVoteModel(k=7, source=src), 0) == 0


class TestExactWindowJoint:
    def test_fair_marginal_is_half(self):
        j = exact_window_joint(3, Fraction(1, 2), [5])
        assert j[(1,)] == Fraction(1, 2)

    def test_adjacent_agreement(self):
        j = exact_window_joint(3, Fraction(1, 2), [1, 2])
        assert j[(0, 0)] + j[(1, 1)] == Fraction(3, 4)
        assert j[(0, 1)] == j[(1, 0)] == Fraction(1, 8)

    def test_disjoint_windows_independent(self):
        j = exact_window_joint(3, Fraction(1, 2), [1, 4])
        assert all(p == Fraction(1, 4) for p in j.values())

    def test_probabilities_sum_to_one(self):
        j = exact_window_joint(5, Fraction(1, 3), [1, 2, 4])
        assert sum(j.values()) == 1

    def test_biased_marginal(self):
        # majority of three bits each 1 w.p. p: p^3 + 3 p^2 (1-p)
        p = Fraction(1, 3)
        j = exact_window_joint(3, p, [1])
        assert j[(1,)] == p ** 3 + 3 * p ** 2 * (1 - p)

    def test_enumeration_bound(self):
        with pytest.raises(EnumerationBoundError):
            exact_window_joint(3, Fraction(1, 2), [1, 30])

    def test_block_distribution_matches_sampling(self):
        dist = majority_block_distribution(3, Fraction(1, 2), 2)
        model = MajorityVoteModel(k=3, source=fair_source(seed=12))
        s = sample_matrix(model, 2, 40_000)
        for outcome, p in dist.items():
            f = ((s.bits[:, 0] == outcome[0]) & (s.bits[:, 1] == outcome[1])).mean()
            pf = float(p)
            assert abs(f - pf) <= 3 * math.sqrt(pf * (1 - pf) / s.n_samples)
