import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from localdep import (
    DomainError,
    FrechetMixture,
    Grid,
    Independence,
    MarshallOlkin,
    PseudoSample,
    Sample,
    TieError,
    TieWarning,
    chi_values,
    empirical_copula_cn,
    empirical_copula_dn,
    hat_q_general,
    ln,
    qn,
    rank_decomposition,
    rank_transform,
    simulate_null,
    summary,
    surface_estimate,
    weight,
    z_process,
)
from localdep.empirical import grid_counts
from localdep.inference import null_permutations

CONCORDANT = PseudoSample.from_ranks([1, 2], [1, 2])
DISCORDANT = PseudoSample.from_ranks([1, 2], [2, 1])


def _brute_counts(ps, g):
    """Grid counts by direct double loop over points and observations."""
    out = np.zeros((g - 1, g - 1), dtype=int)
    for i in range(1, g):
        for j in range(1, g):
            out[i - 1, j - 1] = sum(
                1 for r, s in zip(ps.r, ps.s) if r / (ps.n + 1) <= i / g and s / (ps.n + 1) <= j / g
            )
    return out


def _random_ps(n, seed):
    rng = np.random.default_rng(seed)
    return PseudoSample.from_ranks(np.arange(1, n + 1), rng.permutation(n) + 1)


class TestRankTransform:
    def test_simple(self):
        ps = rank_transform(Sample([1.2, 5.6], [3.4, 0.1]), "strict")
        assert list(ps.r) == [1, 2]
        assert list(ps.s) == [2, 1]

    def test_midrank(self):
        with pytest.warns(TieWarning):
            ps = rank_transform(Sample([1, 1, 3], [1, 2, 3]), "midrank")
        assert list(ps.r) == [1.5, 1.5, 3]
        assert ps.ties_x == 1 and ps.ties_y == 0

    def test_strict_names_values(self):
        with pytest.raises(TieError, match="2.5"):
            rank_transform(Sample([2.5, 2.5, 3], [1, 2, 3]), "strict")

    def test_random_policy(self):
        s = Sample([1, 1, 1, 2], [4, 3, 2, 1])
        a = rank_transform(s, "random", seed=3)
        b = rank_transform(s, "random", seed=3)
        assert np.array_equal(a.r, b.r)
        assert sorted(a.r) == [1, 2, 3, 4]
        assert a.r[3] == 4

    def test_random_policy_varies(self):
        s = Sample([1, 1, 1, 2], [4, 3, 2, 1])
        seen = {tuple(rank_transform(s, "random", seed=k).r) for k in range(40)}
        assert len(seen) == 6

    def test_no_warning_without_ties(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            rank_transform(Sample([1, 2, 3], [3, 1, 2]))

    def test_bad_policy(self):
        with pytest.raises(ValueError):
            rank_transform(Sample([1, 2], [1, 2]), "first")

    def test_too_small(self):
        with pytest.raises(ValueError):
            rank_transform(Sample([1.0], [2.0]))

    def test_monotone_transform_invariance(self):
        s = MarshallOlkin(0.5, 0.75).sample(300, seed=1)
        a = rank_transform(s, "strict")
        b = rank_transform(Sample(np.exp(3 * s.x), np.log(s.y) ** 3), "strict")
        assert np.array_equal(a.r, b.r) and np.array_equal(a.s, b.s)


class TestEmpiricalCopulas:
    def test_dn_examples(self):
        assert empirical_copula_dn(CONCORDANT, 0.5, 0.5) == 0.5
        assert empirical_copula_dn(DISCORDANT, 0.5, 0.5) == 0.0
        assert empirical_copula_dn(_random_ps(37, 0), 1.0, 1.0) == 1.0

    def test_cn_examples(self):
        assert empirical_copula_cn(CONCORDANT, 0.5, 0.5) == 0.5
        ps = PseudoSample.from_ranks([1, 2, 3, 4], [1, 2, 3, 4])
        assert empirical_copula_cn(ps, 0.5, 0.5) == 0.5
        ps = _random_ps(20, 1)
        assert empirical_copula_cn(ps, 1 / 21 - 1e-9, 0.9) == 0.0

    def test_step_structure(self):
        ps = _random_ps(30, 2)
        t = np.linspace(0, 1, 601)
        for v in (0.2, 0.55, 1.0):
            dn = np.asarray(empirical_copula_dn(ps, t, v))
            cn = np.asarray(empirical_copula_cn(ps, t, v))
            assert np.all(np.diff(dn) >= 0) and np.all(np.diff(cn) >= 0)
            assert_allclose(dn * 30, np.round(dn * 30), atol=1e-12)
            # jumps only where t crosses a multiple of 1/n (resp. 1/(n+1))
            jump_dn = t[1:][np.diff(dn) > 0]
            jump_cn = t[1:][np.diff(cn) > 0]
            for jp in jump_cn:
                prev = jp - 1 / 600
                assert math.floor(jp * 31 + 1e-9) > math.floor(prev * 31 + 1e-9)
            for jp in jump_dn:
                prev = jp - 1 / 600
                assert math.floor(jp * 30 + 1e-9) > math.floor(prev * 30 + 1e-9)

    def test_grid_counts_brute_force(self):
        for n, seed in [(2, 0), (15, 1), (31, 2), (47, 3), (160, 4)]:
            ps = _random_ps(n, seed)
            assert np.array_equal(grid_counts(ps.u, ps.v, 16), _brute_counts(ps, 16))

    def test_grid_counts_matches_cn(self):
        ps = _random_ps(95, 5)
        U, V = Grid(16).mesh()
        assert_allclose(grid_counts(ps.u, ps.v, 16) / 95, empirical_copula_cn(ps, U, V), atol=0)


class TestEstimator:
    def test_concordant(self):
        assert qn(CONCORDANT, 0.5, 0.5) == pytest.approx(1.0, abs=1e-15)
        assert ln(CONCORDANT, 0.5, 0.5) == pytest.approx(1.4142136, abs=1e-7)

    def test_discordant(self):
        assert qn(DISCORDANT, 0.5, 0.5) == pytest.approx(-1.0, abs=1e-15)

    def test_boundary(self):
        with pytest.raises(DomainError):
            qn(CONCORDANT, 1.0, 0.5)
        with pytest.raises(DomainError):
            ln(CONCORDANT, 0.5, 0.0)

    def test_ln_is_scaled_qn(self):
        ps = _random_ps(77, 6)
        U, V = Grid(16).mesh()
        assert_allclose(ln(ps, U, V), math.sqrt(77) * np.asarray(qn(ps, U, V)), rtol=1e-14)

    def test_rank_invariance(self):
        s = MarshallOlkin(0.5, 0.75).sample(200, seed=4)
        t = Sample(np.arctan(5 * s.x), -np.exp(-s.y))
        a = surface_estimate(rank_transform(s, "strict")).values
        b = surface_estimate(rank_transform(t, "strict")).values
        assert np.array_equal(a, b)

    def test_null_mean(self):
        n, reps = 600, 10_000
        rng = np.random.default_rng(12)
        xy = rng.random((reps, 2, n))
        r = xy[:, 0].argsort(axis=1).argsort(axis=1) + 1
        s = xy[:, 1].argsort(axis=1).argsort(axis=1) + 1
        counts = np.count_nonzero((r / (n + 1) <= 0.5) & (s / (n + 1) <= 0.5), axis=1)
        values = math.sqrt(n) * 4 * (counts / n - 0.25)
        assert abs(values.mean()) <= 0.05

    def test_surface_matches_pointwise(self):
        ps = _random_ps(123, 7)
        U, V = Grid(16).mesh()
        assert_allclose(surface_estimate(ps).values, ln(ps, U, V), atol=0)
        assert_allclose(surface_estimate(ps, standardized=False).values, qn(ps, U, V), atol=1e-15)

    def test_surface_other_grid(self):
        ps = _random_ps(50, 8)
        U, V = Grid(7).mesh()
        assert_allclose(surface_estimate(ps, Grid(7)).values, ln(ps, U, V), atol=0)


class TestGeneralPlugIn:
    def test_concordant_pair(self):
        s = Sample([1.0, 2.0], [1.0, 2.0])
        assert hat_q_general(s, 1.0, 1.0) == pytest.approx(1.0)

    def test_sample_maximum(self):
        s = Sample([1.0, 2.0, 3.0], [3.0, 1.0, 2.0])
        with pytest.raises(DomainError):
            hat_q_general(s, 3.0, 2.0)

    def test_chi_values_skip(self):
        s = Sample([1.0, 2.0, 3.0], [3.0, 1.0, 2.0])
        chi = chi_values(s)
        assert chi.skipped == 2
        assert np.isnan(chi.values[0]) and np.isnan(chi.values[2])
        # F_n = 2/3, G_n = 1/3, H_n = 1/3 at (2, 1)
        expected = (1 / 3 - 2 / 9) / math.sqrt(2 / 9 * (1 / 3) * (2 / 3))
        assert chi.values[1] == pytest.approx(expected)

    def test_chi_mean_under_independence(self):
        s = Independence().sample(3000, seed=3)
        chi = chi_values(s)
        assert abs(np.nanmean(chi.values)) < 0.05

    def test_matches_cdf_based_form(self):
        s = MarshallOlkin(0.5, 0.75).sample(60, seed=2)
        x0, y0 = np.quantile(s.x, 0.4), np.quantile(s.y, 0.6)
        f = np.mean(s.x <= x0)
        g = np.mean(s.y <= y0)
        h = np.mean((s.x <= x0) & (s.y <= y0))
        assert hat_q_general(s, x0, y0) == pytest.approx((h - f * g) * weight(f, g))


class TestSummary:
    def test_concordant_positive(self):
        ps = PseudoSample.from_ranks(np.arange(1, 101), np.arange(1, 101))
        st_ = summary(surface_estimate(ps))
        assert st_.l_star > 0
        assert st_.l_star <= st_.l_upper
        assert st_.l_o == max(abs(st_.l_star), abs(st_.l_upper))

    def test_marshall_olkin_plausible(self):
        ps = rank_transform(MarshallOlkin(0.5, 0.75).sample(500, seed=0), "strict")
        st_ = summary(surface_estimate(ps))
        assert -3 < st_.l_star < 3
        assert 9 < st_.l_upper < 16

    def test_same_path_as_null(self):
        n, B, seed = 40, 25, 9
        grid = Grid(16)
        table = simulate_null(n, grid, B, seed, "l_o")
        perms = null_permutations(n, 0, B, seed)
        observed = []
        for p in perms:
            ps = PseudoSample.from_ranks(np.arange(1, n + 1), p + 1)
            observed.append(summary(surface_estimate(ps, grid)).l_o)
        assert np.array_equal(np.sort(observed), table.values)


class TestDecomposition:
    def test_two_points(self):
        lin, rem = rank_decomposition(CONCORDANT, 0.5, 0.5)
        assert lin == pytest.approx(1.4142136, abs=1e-7)
        assert rem == pytest.approx(0.0, abs=1e-12)

    def test_sum(self):
        ps = _random_ps(211, 3)
        for u, v in [(0.3, 0.7), (1 / 16, 15 / 16), (0.5, 0.5)]:
            lin, rem = rank_decomposition(ps, u, v)
            assert lin + rem == pytest.approx(ln(ps, u, v), abs=1e-12)

    @pytest.mark.parametrize("u, v", [(0.3, 0.7), (0.5, 0.5), (1 / 16, 1 / 16), (0.2, 0.45)])
    def test_remainder_data_independent(self, u, v):
        rems = [rank_decomposition(_random_ps(101, k), u, v)[1] for k in range(100)]
        assert np.ptp(rems) <= 1e-12

    def test_remainder_brute_force(self):
        # the remainder equals an affine function of the marginal counts only
        n, u, v = 57, 0.3, 0.62
        a = sum(1 for r in range(1, n + 1) if r / (n + 1) <= u)
        b = sum(1 for r in range(1, n + 1) if r / (n + 1) <= v)
        lo_u, hi_u = -math.sqrt((1 - u) / u), math.sqrt(u / (1 - u))
        lo_v, hi_v = -math.sqrt((1 - v) / v), math.sqrt(v / (1 - v))
        w = 1 / math.sqrt(u * v * (1 - u) * (1 - v))
        for k in range(20):
            ps = _random_ps(n, 100 + k)
            N = int(np.sum((ps.r <= a) & (ps.s <= b)))
            lin = (N * lo_u * lo_v + (a - N) * lo_u * hi_v + (b - N) * hi_u * lo_v
                   + (n - a - b + N) * hi_u * hi_v) / math.sqrt(n)
            full = math.sqrt(n) * w * (N / n - u * v)
            lin_pkg, rem_pkg = rank_decomposition(ps, u, v)
            assert lin_pkg == pytest.approx(lin, abs=1e-12)
            assert rem_pkg == pytest.approx(full - lin, abs=1e-12)

    @pytest.mark.parametrize("u, v", [(0.3, 0.7), (1 / 16, 1 / 16), (0.5, 0.5), (3 / 16, 11 / 16)])
    def test_remainder_order(self, u, v):
        scaled = [abs(rank_decomposition(_random_ps(n, n), u, v)[1]) * math.sqrt(n) for n in range(50, 2001, 37)]
        assert max(scaled) <= 2 * weight(u, v)

    def test_remainder_shrinks_odd_n(self):
        rems = [abs(rank_decomposition(_random_ps(n, 0), 0.3, 0.7)[1]) for n in (101, 401, 1601)]
        assert rems[0] > rems[1] > rems[2] > 0
        slope = np.polyfit(np.log([101, 401, 1601]), np.log(rems), 1)[0]
        assert slope == pytest.approx(-0.5, abs=0.02)

    def test_ties_rejected(self):
        with pytest.warns(TieWarning):
            ps = rank_transform(Sample([1, 1, 2], [1, 2, 3]))
        with pytest.raises(TieError):
            rank_decomposition(ps, 0.5, 0.5)


class TestZProcess:
    def test_concordant(self):
        assert z_process(CONCORDANT, 0.5, 0.5) == pytest.approx(0.3535534, abs=1e-7)

    def test_corner(self):
        assert z_process(_random_ps(33, 1), 1.0, 1.0) == 0.0

    def test_null_mean(self):
        vals = [z_process(_random_ps(200, k), 0.4, 0.7) for k in range(2000)]
        assert abs(np.mean(vals)) < 0.02


def test_reflection():
    # n + 1 = 101 is odd, so (n+1)(1-u) is never an integer on the grid and the
    # rank flip R -> n+1-R maps the count at u onto b minus the count at 1-u
    n = 100
    s = MarshallOlkin(0.5, 0.75).sample(n, seed=5)
    a = rank_transform(s, "strict")
    b = rank_transform(Sample(-s.x, s.y), "strict")
    U, V = Grid(16).mesh()
    L = surface_estimate(a).values
    Lf = surface_estimate(b).values
    bcount = np.floor(V * (n + 1))
    shift = math.sqrt(n) * np.asarray(weight(U, V)) * (bcount / n - V)
    assert_allclose(Lf, -L[::-1, :] + shift, atol=1e-12)
    assert np.abs(shift).max() <= np.asarray(weight(U, V)).max() / math.sqrt(n) + 1e-12


def _mixture_ln(theta, n, reps, seed):
    draws = FrechetMixture(theta).sample(n * reps, seed=seed)
    x = draws.x.reshape(reps, n)
    y = draws.y.reshape(reps, n)
    pu = (x.argsort(axis=1).argsort(axis=1) + 1) / (n + 1)
    pv = (y.argsort(axis=1).argsort(axis=1) + 1) / (n + 1)
    U, V = Grid(16).mesh()
    return math.sqrt(n) * np.asarray(weight(U, V)) * (grid_counts(pu, pv, 16) / n - U * V)


@pytest.mark.slow
@pytest.mark.parametrize("t1, t2", [(0.0, 0.25), (0.25, 0.5), (0.5, 0.9)])
def test_order_preservation(t1, t2):
    reps, n = 10_000, 50
    L1 = _mixture_ln(t1, n, reps, seed=31)
    L2 = _mixture_ln(t2, n, reps, seed=32)
    for c in (-1.0, 0.0, 1.0):
        p1 = (L1 >= c).mean(axis=0)
        p2 = (L2 >= c).mean(axis=0)
        se = np.sqrt((p1 * (1 - p1) + p2 * (1 - p2)) / reps)
        assert np.all(p2 >= p1 - 2 * se)


@settings(max_examples=60, deadline=None)
@given(perm=st.permutations(list(range(1, 13))), g=st.integers(2, 9))
def test_grid_counts_property(perm, g):
    ps = PseudoSample.from_ranks(np.arange(1, 13), perm)
    assert np.array_equal(grid_counts(ps.u, ps.v, g), _brute_counts(ps, g))


@settings(max_examples=60, deadline=None)
@given(perm=st.permutations(list(range(1, 10))))
def test_ln_bounded_by_frechet_surfaces(perm):
    ps = PseudoSample.from_ranks(np.arange(1, 10), perm)
    top = surface_estimate(PseudoSample.from_ranks(np.arange(1, 10), np.arange(1, 10))).values
    bottom = surface_estimate(PseudoSample.from_ranks(np.arange(1, 10), np.arange(9, 0, -1))).values
    L = surface_estimate(ps).values
    assert np.all(bottom <= L + 1e-12) and np.all(L <= top + 1e-12)
