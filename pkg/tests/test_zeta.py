import math
from itertools import product

import pytest

from zetatherm import zeta as Z
from zetatherm.exceptions import NotPositiveError, ZetathermError
from zetatherm.potentials import LocallyConstantPotential
from zetatherm.symbolic import ShiftSpec
from zetatherm.thermo import gibbs_cylinder, pressure

from conftest import FULL2, GOLDEN, make_const, make_random

E = math.e


def const_q(a, c, s):
    return math.exp(c * a * (s - 1))


def const_zeta_11(q):
    # level 1 holds only the fixed point 1, the rest carry a quarter each
    return 0.5 - q / 4


class TestParams:
    @pytest.mark.parametrize("kw", [dict(c=0, s=0.5), dict(c=1, s=1.0), dict(c=1, s=0.0),
                                    dict(c=1, s=0.5, rel_tol=1e-2), dict(c=1, s=0.5, n_cap=0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            Z.ZetaParams(**kw)

    def test_defaults(self):
        p = Z.ZetaParams(2.0, 0.5)
        assert p.rel_tol == 1e-10 and p.n_cap == Z.DEFAULT_N_CAP


class TestLevelSums:
    @pytest.mark.parametrize("n", [1, 2, 5, 9])
    def test_constant_all(self, n, fconst):
        a, c, s = 0.7, 3.0, 0.6
        assert Z.zeta_level_sum(fconst, c, s, n) == pytest.approx(n * c * a * (s - 1), abs=1e-10)

    @pytest.mark.parametrize("w", [(1,), (1, 2), (2, 2, 1)])
    def test_constant_cylinder_from_length_on(self, w, fconst):
        a, c, s = 0.7, 3.0, 0.6
        for n in range(len(w), len(w) + 5):
            expected = n * c * a * (s - 1) - len(w) * math.log(2)
            assert Z.zeta_level_sum(fconst, c, s, n, w) == pytest.approx(expected, abs=1e-10)

    def test_fA_two_fixed_points(self, fA):
        P = math.log(E + 1)
        expected = math.log(math.exp(0.5 - P) + math.exp(-P))
        assert Z.zeta_level_sum(fA, 1.0, 0.5, 1) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("spec, m", [(FULL2, 1), (FULL2, 3), (GOLDEN, 2), (GOLDEN, 3),
                                         (ShiftSpec.full(3), 2)])
    def test_transfer_matches_enumeration(self, spec, m):
        f = make_random(13, spec=spec, m=m)
        words = [None] + [w for j in (1, 2, 3, 4) for w in list(spec.admissible_words(j))[::3]]
        for w in words:
            for n in range(1, 9):
                a = Z.zeta_level_sum(f, 2.0, 0.8, n, w)
                b = Z.zeta_level_sum(f, 2.0, 0.8, n, w, method="enumerate")
                assert a == b or a == pytest.approx(b, abs=1e-10), (w, n)

    def test_unknown_method(self, fA):
        with pytest.raises(ValueError):
            Z.zeta_level_sum(fA, 1.0, 0.5, 1, method="magic")


class TestZetaMeasure:
    @pytest.mark.parametrize("c, s", [(1.0, 0.5), (3.0, 0.9), (10.0, 0.99)])
    def test_constant(self, c, s, fconst):
        q = const_q(0.7, c, s)
        p = Z.ZetaParams(c, s)
        assert Z.zeta_measure(fconst, p, (1,)).value == pytest.approx(0.5, abs=1e-9)
        assert Z.zeta_measure(fconst, p, (1, 1)).value == pytest.approx(const_zeta_11(q), abs=1e-9)

    def test_constant_12_closed_form(self, fconst):
        # [12] misses both fixed points: (q^2/4/(1-q)) / (q/(1-q)) = q/4
        c, s = 2.0, 0.7
        q = const_q(0.7, c, s)
        assert Z.zeta_measure(fconst, Z.ZetaParams(c, s), (1, 2)).value == pytest.approx(q / 4, abs=1e-9)

    def test_certificate(self, fB):
        p = Z.ZetaParams(2.0, 0.95, rel_tol=1e-10)
        r = Z.zeta_measure(fB, p, (1, 1))
        assert r.certified and r.tail_bound <= p.rel_tol
        # truncating much later moves the value by less than the certified amount
        later = Z.zeta_truncated(fB, 2.0, 0.95, 4 * r.n_used, (1, 1))
        assert abs(later - r.value) <= 10 * p.rel_tol

    def test_uncertified_flag(self, fA):
        r = Z.zeta_measure(fA, Z.ZetaParams(2.0, 0.999, n_cap=50), (1,))
        assert not r.certified and r.n_used == 50 and r.tail_bound > 1e-10

    @pytest.mark.parametrize("spec, m", [(FULL2, 2), (GOLDEN, 3)])
    def test_additive_and_invariant(self, spec, m):
        f = make_random(21, spec=spec, m=m, low=0.1, high=1.0)
        p = Z.ZetaParams(1.5, 0.9)
        for j in (1, 2):
            words = list(spec.admissible_words(j))
            longer = list(spec.admissible_words(j + 1))
            vals = dict(zip(words + longer, (r.value for r in Z.zeta_measures(f, p, words + longer))))
            assert math.fsum(vals[w] for w in words) == pytest.approx(1.0, abs=10 * p.rel_tol)
            for w in words:
                right = math.fsum(vals[v] for v in longer if v[:-1] == w)
                left = math.fsum(vals[v] for v in longer if v[1:] == w)
                assert right == pytest.approx(vals[w], abs=10 * p.rel_tol)
                assert left == pytest.approx(vals[w], abs=10 * p.rel_tol)

    def test_near_gibbs(self, fA):
        r = Z.zeta_measure(fA, Z.ZetaParams(2.0, 0.999), (1,))
        assert r.certified
        assert abs(r.value - E ** 2 / (E ** 2 + 1)) <= 2e-3

    def test_cold_cylinder_rate(self, fA):
        rate = Z.ldp_rate("zeta", fA, (2,), 50.0, s=0.98)
        assert -1.15 <= rate <= -0.85

    def test_positivity_required(self):
        with pytest.raises(NotPositiveError):
            Z.zeta_measure(LocallyConstantPotential.range_one([1.0, -0.5]), Z.ZetaParams(1, 0.5), (1,))
        with pytest.raises(NotPositiveError):
            Z.zeta_measure(make_const(0.0), Z.ZetaParams(1, 0.5), (1,))

    def test_approach_to_gibbs_monotone_in_s(self, fA, fB):
        words = list(product((1, 2), repeat=2))
        for f in (fA, fB):
            for c in (1.0, 2.0, 4.0):
                gaps = []
                for s in (0.9, 0.99, 0.999, 0.9999):
                    res = Z.zeta_measures(f, Z.ZetaParams(c, s), words)
                    gaps.append(max(abs(r.value - gibbs_cylinder(f, c, w)) for r, w in zip(res, words)))
                assert all(a > b for a, b in zip(gaps, gaps[1:])), gaps

    def test_zeta_mean_constant(self, fconst):
        assert Z.zeta_mean(fconst, Z.ZetaParams(2.0, 0.5)) == pytest.approx(0.7, abs=1e-9)


class TestTruncated:
    @pytest.mark.parametrize("N", [1, 3, 10])
    def test_constant(self, N, fconst):
        a, c = 0.7, 4.0
        for fn in (Z.pi_measure, Z.eta_measure):
            assert fn(fconst, c, N, (2,)) == pytest.approx(0.5, abs=1e-12)
        # only the fixed point 1 sits in [11] at period 1
        assert Z.pi_measure(fconst, c, N, (1, 1)) == pytest.approx((N + 1) / (4 * N), abs=1e-12)
        W = 2 * math.exp(c * a)
        num = W / 2 + sum(W ** n / 4 for n in range(2, N + 1))
        den = sum(W ** n for n in range(1, N + 1))
        assert Z.eta_measure(fconst, c, N, (1, 1)) == pytest.approx(num / den, rel=1e-12)

    def test_pi_equals_eta_on_symbols_for_constant(self):
        f = make_const(1.3, 3)
        for w in [(1,), (2,), (3,)]:
            assert Z.pi_measure(f, 2.0, 7, w) == pytest.approx(Z.eta_measure(f, 2.0, 7, w), abs=1e-12)

    def test_pi_equals_eta_for_fA(self, fA):
        # every level of [1] is the same multiple of the whole-space level
        for N in (1, 5, 30):
            assert Z.pi_measure(fA, 1.0, N, (1,)) == pytest.approx(E / (E + 1), abs=1e-12)
            assert Z.eta_measure(fA, 1.0, N, (1,)) == pytest.approx(E / (E + 1), abs=1e-12)

    def test_fA_limit(self, fA):
        assert abs(Z.pi_measure(fA, 1.0, 30, (1,)) - E / (E + 1)) <= 1e-3

    @pytest.mark.parametrize("spec, m", [(GOLDEN, 2), (FULL2, 3)])
    def test_methods_agree(self, spec, m):
        f = make_random(5, spec=spec, m=m)
        for w in [(2,), (1, 2), (2, 1, 2)]:
            for fn in (Z.pi_measure, Z.eta_measure):
                assert fn(f, 2.0, 9, w) == pytest.approx(fn(f, 2.0, 9, w, method="enumerate"), abs=1e-12)

    def test_converge_to_gibbs(self, fB):
        g = gibbs_cylinder(fB, 1.0, (1, 1))
        gaps = [abs(Z.pi_measure(fB, 1.0, N, (1, 1)) - g) for N in (10, 40, 160)]
        assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-3
        gaps = [abs(Z.eta_measure(fB, 1.0, N, (1, 1)) - g) for N in (10, 40, 160)]
        assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-3

    def test_bad_N(self, fA):
        with pytest.raises(ValueError):
            Z.pi_measure(fA, 1.0, 0, (1,))


class TestRates:
    def test_hot_cylinder_rate_vanishes(self, fA):
        assert abs(Z.ldp_rate("zeta", fA, (1,), 100.0, s=0.99)) < 1e-9
        assert abs(Z.ldp_rate("pi", fA, (1,), 100.0, N=10)) < 1e-3

    def test_rate_arguments(self, fA):
        with pytest.raises(ValueError):
            Z.ldp_rate("zeta", fA, (1,), 1.0)
        with pytest.raises(ValueError):
            Z.ldp_rate("pi", fA, (1,), 1.0)
        with pytest.raises(ValueError):
            Z.ldp_rate("nope", fA, (1,), 1.0, s=0.5)

    def test_rate_survives_underflow(self, fA):
        # the measure itself is far below the smallest double
        rate = Z.ldp_rate("zeta", fA, (2,), 2000.0, s=1 - 1 / 2000)
        assert rate == pytest.approx(-1.0, abs=1e-3)

    def test_log_partition_constant(self, fconst):
        c, s = 3.0, 0.8
        q = const_q(0.7, c, s)
        assert Z.log_partition_rate(fconst, c, s) == pytest.approx(math.log(q / (1 - q)) / c, abs=1e-9)

    def test_log_partition_schedule(self, fA):
        assert abs(Z.log_partition_rate(fA, 200.0, 1 - 1 / 200)) <= 0.05
        assert Z.log_partition_rate(fA, 100.0, 0.5) < 0

    def test_schedules(self):
        assert Z.l_schedule(1.0, [25, 50]) == [(25, 0.96), (50, 0.98)]
        with pytest.raises(ValueError):
            Z.l_schedule(2.0, [1.0])
        assert Z.table_schedule({4: 0.9, 2: 0.5}) == [(2.0, 0.5), (4.0, 0.9)]
        assert Z.n_schedule([400, 10]) == [(400, 20), (10, 4)]
        assert Z.n_schedule([8], lambda c: c // 2) == [(8, 4)]


class TestDecomposition:
    def test_constant_remainder_vanishes(self, fconst):
        c, s = 2.0, 0.9
        q = const_q(0.7, c, s)
        d = Z.series_gibbs_decomposition(fconst, c, s, (2,))
        assert d.zeta_side == pytest.approx(q / (1 - q) / 2, rel=1e-9)
        assert d.gibbs_side == pytest.approx(d.zeta_side, rel=1e-9)
        assert abs(d.alpha_remainder) < 1e-12

    def test_remainder_is_series_difference(self, fB):
        d = Z.series_gibbs_decomposition(fB, 1.0, 0.9, (1, 1))
        assert d.alpha_remainder == pytest.approx(d.zeta_side - d.gibbs_side, abs=1e-8)
        assert d.rho == pytest.approx(math.exp(pressure(fB, 0.9).log_lambda - pressure(fB, 1.0).log_lambda))

    @pytest.mark.parametrize("seed", range(3))
    def test_reconstruction(self, seed):
        f = make_random(seed, spec=GOLDEN, m=3, low=0.1)
        whole = Z.series_gibbs_decomposition(f, 1.5, 0.95)
        for w in [(2,), (1, 2), (2, 2, 1)]:
            part = Z.series_gibbs_decomposition(f, 1.5, 0.95, w)
            direct = Z.zeta_measure(f, Z.ZetaParams(1.5, 0.95), w).value
            assert Z.reconstruct_measure(part, whole) == pytest.approx(direct, abs=1e-9)

    def test_remainder_bounded_while_sides_blow_up(self, fB):
        ds = [Z.series_gibbs_decomposition(fB, 1.0, s, (1, 1)) for s in (0.9, 0.99, 0.999)]
        rems = [abs(d.alpha_remainder) for d in ds]
        assert max(rems) <= 10 * rems[0]
        assert ds[2].zeta_side > 50 * ds[0].zeta_side

    def test_rho_must_be_below_one(self):
        # the only way rho >= 1 survives validation is a degenerate potential
        with pytest.raises(ZetathermError):
            Z.series_gibbs_decomposition(make_const(0.0), 1.0, 0.5, (1,))
