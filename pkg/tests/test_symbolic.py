import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zetatherm.exceptions import InadmissibleWordError, InvalidShiftError, PeriodCapExceeded
from zetatherm.symbolic import (PeriodicWord, ShiftSpec, birkhoff_sum, birkhoff_sums, block_graph,
                                cylinder_hits, cylinder_hits_array, enumerate_fix, enumerate_necklaces,
                                fix_array, format_word, minimal_period, minimal_periods, parse_word,
                                periodic, to_word)

from conftest import FULL2, GOLDEN, make_const, make_fA, make_fB, make_random

words2 = st.lists(st.integers(1, 2), min_size=1, max_size=9).map(tuple)
words3 = st.lists(st.integers(1, 3), min_size=1, max_size=7).map(tuple)


class TestShiftSpec:
    def test_full(self):
        s = ShiftSpec.full(3)
        assert s.is_full and s.theta == 0.5 and s.period_cap == 14
        assert ShiftSpec.full(2).period_cap == 22

    @pytest.mark.parametrize("trans", [
        ((1, 0), (0, 1)),          # reducible
        ((0, 0), (1, 1)),          # stranded symbol
        ((1, 2), (1, 1)),          # not 0/1
        ((1, 1, 1), (1, 1, 1)),    # wrong shape
    ])
    def test_rejects_bad_matrices(self, trans):
        with pytest.raises(InvalidShiftError):
            ShiftSpec(2, trans)

    def test_rejects_bad_d_and_theta(self):
        with pytest.raises(InvalidShiftError):
            ShiftSpec(1)
        with pytest.raises(InvalidShiftError):
            ShiftSpec(2, theta=1.0)

    def test_json_roundtrip(self):
        assert ShiftSpec.from_json(GOLDEN.to_json()) == GOLDEN

    def test_admissibility(self):
        assert not GOLDEN.is_admissible((1, 1))
        assert GOLDEN.is_admissible((1, 2, 1))
        assert not GOLDEN.is_cyclically_admissible((1, 2, 1))
        assert list(GOLDEN.admissible_words(2)) == [(1, 2), (2, 1), (2, 2)]


class TestEnumeration:
    def test_full_shift_counts(self):
        assert len(list(enumerate_fix(FULL2, 3))) == 8
        assert [x.word for x in enumerate_fix(FULL2, 1)] == [(1,), (2,)]

    def test_golden_mean_n3(self):
        assert len(list(enumerate_fix(GOLDEN, 3))) == 4

    @pytest.mark.parametrize("spec", [FULL2, GOLDEN, ShiftSpec.full(3),
                                      ShiftSpec(3, ((0, 1, 1), (1, 0, 1), (1, 1, 1)))])
    def test_count_is_trace(self, spec):
        for n in range(1, 9):
            A = np.linalg.matrix_power(spec.matrix, n)
            assert spec.count_fix(n) == int(np.trace(A))
            assert len(list(enumerate_fix(spec, n))) == spec.count_fix(n)
            assert fix_array(spec, n).shape[0] == spec.count_fix(n)

    def test_array_matches_stream(self):
        rows = [to_word(r) for r in fix_array(GOLDEN, 7)]
        assert rows == [x.word for x in enumerate_fix(GOLDEN, 7)]

    def test_cap_is_hard(self):
        with pytest.raises(PeriodCapExceeded):
            list(enumerate_fix(FULL2, 23))
        with pytest.raises(PeriodCapExceeded):
            fix_array(ShiftSpec.full(3), 15)
        assert len(list(enumerate_fix(FULL2, 3, cap=3))) == 8

    def test_necklaces_reproduce_sums(self):
        f = make_random(4, m=2, spec=GOLDEN)
        for n in range(1, 10):
            direct = sum(birkhoff_sum(f, x) for x in enumerate_fix(GOLDEN, n))
            orbits = sum(k * birkhoff_sum(f, x) for x, k in enumerate_necklaces(GOLDEN, n))
            assert orbits == pytest.approx(direct, abs=1e-10)


class TestWords:
    @pytest.mark.parametrize("w, p", [("1212", 2), ("111", 1), ("112", 3)])
    def test_minimal_period(self, w, p):
        assert minimal_period(parse_word(w)) == p

    @given(words3, st.integers(1, 4))
    def test_minimal_period_of_repeat(self, w, k):
        assert minimal_period(w * k) == minimal_period(w)

    @given(words2)
    def test_array_minimal_period(self, w):
        arr = np.array([w], dtype=np.uint8) - 1
        assert minimal_periods(arr)[0] == minimal_period(w)

    def test_parse_format(self):
        assert parse_word("1211") == (1, 2, 1, 1)
        assert parse_word("1,12,3", 12) == (1, 12, 3)
        assert format_word((1, 12, 3)) == "1,12,3"
        with pytest.raises(InadmissibleWordError):
            parse_word("13", 2)
        with pytest.raises(InadmissibleWordError):
            parse_word("")

    def test_periodic_word(self):
        x = PeriodicWord((1, 2, 1, 2))
        assert x.n == 4 and x.n_min == 2 and x.primitive == (1, 2)
        assert x.rotate().word == (2, 1, 2, 1)
        with pytest.raises(InadmissibleWordError):
            periodic("11", GOLDEN)


class TestBirkhoffAndHits:
    def test_examples(self):
        assert birkhoff_sum(make_fA(), PeriodicWord((1, 2))) == 1.0
        assert birkhoff_sum(make_fB(), PeriodicWord((1, 2))) == 2.0
        assert birkhoff_sum(make_const(0.3), PeriodicWord((1, 2, 2, 1, 1))) == pytest.approx(1.5)
        assert cylinder_hits((1,), (1, 2)) == 1
        assert cylinder_hits((1, 1), (1, 1, 1)) == 3
        assert cylinder_hits((1, 2), (1, 1, 2, 2)) == 1

    def test_inadmissible_orbit(self):
        f = make_random(0, m=2, spec=GOLDEN)
        with pytest.raises(InadmissibleWordError):
            birkhoff_sum(f, PeriodicWord((1, 1, 2)))

    @settings(max_examples=50)
    @given(words2, st.integers(1, 3))
    def test_hits_partition_period(self, x, j):
        # cyclic windows of one length partition the period
        from itertools import product
        total = sum(cylinder_hits(w, x) for w in product((1, 2), repeat=j))
        assert total == len(x)

    @given(words2, st.integers(1, 3))
    def test_sum_scales_with_repetition(self, w, k):
        f = make_random(1, m=3)
        x = PeriodicWord(w * k)
        prim = PeriodicWord(x.primitive)
        assert birkhoff_sum(f, x) == pytest.approx(x.n / prim.n * birkhoff_sum(f, prim), abs=1e-12)

    def test_vectorized_agree(self):
        f = make_random(2, m=3)
        arr = fix_array(FULL2, 8)
        sums = birkhoff_sums(f, arr)
        hits = cylinder_hits_array((2, 1, 1), arr)
        for row, s, h in zip(arr[::7], sums[::7], hits[::7]):
            x = PeriodicWord(to_word(row))
            assert s == pytest.approx(birkhoff_sum(f, x), abs=1e-12)
            assert h == cylinder_hits((2, 1, 1), x)

    def test_hits_longer_than_period(self):
        arr = fix_array(FULL2, 1)
        assert cylinder_hits_array((1, 1, 1), arr).tolist() == [1, 0]


class TestBlockGraph:
    @pytest.mark.parametrize("spec, m", [(FULL2, 1), (FULL2, 3), (GOLDEN, 2), (GOLDEN, 3),
                                         (ShiftSpec.full(3), 2)])
    def test_closed_walks_count_fix(self, spec, m):
        A = block_graph(spec, m).adjacency
        for n in range(1, 8):
            assert int(np.trace(np.linalg.matrix_power(A, n))) == spec.count_fix(n)

    def test_windows(self):
        g = block_graph(FULL2, 3)
        assert g.r == 2 and g.size == 4
        path = g.state_path((1, 2, 2, 1))
        assert [g.states[i] for i in path] == [(1, 2), (2, 2), (2, 1)]
        assert len(g.path_windows((1, 2, 2, 1))) == 2
        assert g.states_with_prefix((2,)) == [2, 3]
