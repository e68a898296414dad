import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_buono, brute_max_mass, brute_r_ary, grandparent_counts
from ranlab.apollonian import grow_ran
from ranlab.dary_tree import TreeArena, grow_tree
from ranlab.stochastics import ParameterError, derive_seed, make_rng
from ranlab.subtree_dp import (ConstraintViolation, adjusted_mass, buono_sizes, r_ary_sizes, covering_subtree_arity,
                               grand_offspring_counts, is_buono, is_r_ary_subtree,
                               largest_buono_subtree, largest_r_ary_subtree, max_mass_r_ary,
                               random_r_ary_level_set, sample_weighted_tree)


def complete_tree(d: int, h: int) -> TreeArena:
    n = (d ** (h + 1) - 1) // (d - 1)
    idx = np.arange(n)
    parent = np.where(idx > 0, (idx - 1) // d, -1)
    children = np.full((n, d), -1, dtype=np.int64)
    internal = n - d**h
    children[:internal] = d * idx[:internal, None] + 1 + np.arange(d)
    depth = np.zeros(n, dtype=np.int64)
    for v in range(1, n):
        depth[v] = depth[parent[v]] + 1
    leaves = idx[internal:]
    return TreeArena(d, internal, parent, children, np.zeros(n, np.int64), depth, leaves)


class TestRAry:
    @pytest.mark.parametrize("d,r", [(2, 1), (3, 1), (3, 2), (5, 3)])
    def test_star(self, d, r, rng):
        assert largest_r_ary_subtree(grow_tree(d, 1, rng), r).size == 1 + r

    @pytest.mark.parametrize("d,r,h", [(3, 2, 3), (4, 2, 3), (4, 3, 2), (3, 1, 4)])
    def test_complete(self, d, r, h):
        expected = h + 1 if r == 1 else (r ** (h + 1) - 1) // (r - 1)
        assert largest_r_ary_subtree(complete_tree(d, h), r).size == expected

    @pytest.mark.parametrize("d,r", [(2, 1), (3, 1), (3, 2), (4, 2)])
    def test_against_enumeration(self, d, r):
        for i in range(25):
            tree = grow_tree(d, i % 7, make_rng(derive_seed(d, r, i)))
            assert largest_r_ary_subtree(tree, r).size == brute_r_ary(tree, r)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 5), st.integers(0, 400), st.integers(0, 2**32), st.data())
    def test_witness_valid(self, d, t, seed, data):
        r = data.draw(st.integers(1, d - 1))
        tree = grow_tree(d, t, make_rng(seed))
        w = largest_r_ary_subtree(tree, r)
        assert 0 in w.nodes and is_r_ary_subtree(tree, w.nodes, r)
        assert largest_r_ary_subtree(tree, r, witness=False).size == w.size

    @pytest.mark.parametrize("d,r", [(2, 1), (3, 2), (4, 2)])
    def test_root_is_best_start(self, d, r):
        for i in range(30):
            tree = grow_tree(d, i % 7, make_rng(derive_seed(6, d, r, i)))
            assert r_ary_sizes(tree, r).max() == r_ary_sizes(tree, r)[0]
        tree = grow_tree(d, 5000, make_rng(d))
        assert r_ary_sizes(tree, r).max() == r_ary_sizes(tree, r)[0]

    def test_monotone_in_r(self, rng):
        tree = grow_tree(5, 2000, rng)
        sizes = [largest_r_ary_subtree(tree, r, witness=False).size for r in range(1, 5)]
        assert sizes == sorted(sizes)
        assert sizes[0] == tree.depth.max() + 1

    def test_bad_r(self, rng):
        with pytest.raises(ParameterError):
            largest_r_ary_subtree(grow_tree(3, 5, rng), 3)

    def test_is_r_ary_rejects(self, rng):
        tree = grow_tree(3, 1, rng)
        assert not is_r_ary_subtree(tree, [0, 1, 2, 3], 2)
        assert not is_r_ary_subtree(tree, [1, 2], 2)
        assert is_r_ary_subtree(tree, [0, 3], 1)


class TestBuono:
    def test_single_vertex(self, rng):
        assert largest_buono_subtree(grow_tree(3, 0, rng)).size == 1

    def test_complete_depth2(self):
        assert largest_buono_subtree(complete_tree(3, 2)).size == 12

    def test_complete_depth3(self):
        # children keep (3, 3, 2) grandchildren; those keep 8, 8 and 6 leaves
        assert largest_buono_subtree(complete_tree(3, 3)).size == 34

    def test_against_brute_force(self):
        for i in range(60):
            _, delta = grow_ran(i % 6, make_rng(derive_seed(5, i)))
            assert largest_buono_subtree(delta).size == brute_buono(delta)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 3000), st.integers(0, 2**32))
    def test_witness_valid(self, t, seed):
        _, delta = grow_ran(t, make_rng(seed))
        w = largest_buono_subtree(delta)
        assert 0 in w.nodes and is_buono(delta, w.nodes)
        assert max(grandparent_counts(delta, set(w.nodes)).values(), default=0) <= 8
        # every binary subtree is buono
        assert w.size >= largest_r_ary_subtree(delta, 2, witness=False).size

    def test_root_is_best_start(self, rng):
        _, delta = grow_ran(5000, rng)
        sizes = buono_sizes(delta)
        assert sizes.max() == sizes[0] == largest_buono_subtree(delta, witness=False).size

    def test_needs_ternary(self, rng):
        with pytest.raises(ParameterError):
            largest_buono_subtree(grow_tree(2, 5, rng))

    def test_grand_offspring_counts(self):
        tree = complete_tree(3, 2)
        assert grand_offspring_counts(tree, range(13))[0] == 9
        assert not is_buono(tree, range(13))
        assert is_buono(tree, range(12))


class TestWeightedTree:
    def test_mass_conservation(self, rng):
        s = sample_weighted_tree(4, 2, 6, rng)
        for n in range(7):
            assert s.mass[n].sum() == pytest.approx(1, abs=1e-12)

    def test_max_mass_root(self, rng):
        assert max_mass_r_ary(sample_weighted_tree(3, 2, 3, rng), 2, 0) == 1

    def test_max_mass_full_arity(self, rng):
        s = sample_weighted_tree(3, 2, 5, rng)
        assert max_mass_r_ary(s, 3, 5) == pytest.approx(1, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_max_mass_brute(self, n):
        for i in range(5):
            s = sample_weighted_tree(3, 2, n, make_rng(derive_seed(n, i)))
            assert max_mass_r_ary(s, 2, n) == pytest.approx(brute_max_mass(s, 2, n), rel=1e-12)

    def test_max_mass_monotone_in_r(self, rng):
        s = sample_weighted_tree(5, 2, 5, rng)
        values = [max_mass_r_ary(s, r, 5) for r in range(1, 6)]
        assert values == sorted(values)

    def test_max_mass_d4_r2_brute(self, rng):
        s = sample_weighted_tree(4, 2, 3, rng)
        assert max_mass_r_ary(s, 2, 3) == pytest.approx(brute_max_mass(s, 2, 3), rel=1e-12)

    def test_adjusted_root(self, rng):
        assert adjusted_mass(sample_weighted_tree(3, 2, 2, rng), [0], 0) == 1

    def test_adjusted_d2_by_hand(self, rng):
        s = sample_weighted_tree(2, 1, 1, rng)
        x = s.x[1]
        for nu in (0, 1):
            assert adjusted_mass(s, [nu], 1) == pytest.approx(x[nu] / (1 - x.min()))

    def test_adjusted_at_most_one(self, rng):
        for d, r in [(3, 1), (3, 2), (4, 3)]:
            s = sample_weighted_tree(d, r, 6, rng)
            for _ in range(50):
                c = random_r_ary_level_set(s, 6, rng)
                assert adjusted_mass(s, c, 6) <= 1 + 1e-12

    def test_adjusted_path_product(self, rng):
        s = sample_weighted_tree(3, 2, 4, rng)
        for v in range(0, 81, 7):
            path = [v // 3**(4 - k) for k in range(5)]  # level-k ancestor indices
            expect = s.mass[4][v]
            for k in range(4):
                expect /= 1 - s.upsilon[k][path[k]]
            assert s.adjusted[4][v] == pytest.approx(expect, rel=1e-12)

    @pytest.mark.parametrize("d,r", [(2, 1), (3, 2), (5, 2)])
    def test_adjusted_worst_case(self, d, r, rng):
        # maximise adjusted mass over all r-ary level sets by the top-r recursion
        for _ in range(20):
            s = sample_weighted_tree(d, r, 5, rng)
            best = s.adjusted[5]
            for _ in range(5):
                best = np.sort(best.reshape(-1, d), axis=1)[:, -r:].sum(axis=1)
            assert best[0] <= 1 + 1e-12

    def test_adjusted_rejects_wide_set(self, rng):
        s = sample_weighted_tree(3, 2, 1, rng)
        with pytest.raises(ConstraintViolation):
            adjusted_mass(s, [0, 1, 2], 1)

    def test_covering_arity(self):
        assert covering_subtree_arity(3, 2, [0, 1, 3]) == 2
        assert covering_subtree_arity(3, 2, [0, 3, 6]) == 3

    def test_bad_params(self, rng):
        with pytest.raises(ParameterError):
            sample_weighted_tree(3, 3, 2, rng)
        with pytest.raises(ParameterError):
            max_mass_r_ary(sample_weighted_tree(3, 2, 2, rng), 2, 3)
