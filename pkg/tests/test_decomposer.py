import itertools

import numpy as np
import pytest

from qdisco.decomposer import (
    Partition,
    balanced_mincut,
    extract_subproblems,
    merge_solutions,
)
from qdisco.errors import PartitionError
from qdisco.problem import (
    ProblemGraph,
    SpinAssignment,
    brute_force_optimum,
    maxcut_to_spin_polynomial,
)

from oracles import best_balanced_bipartition, random_maxcut_graph

TWO_TRIANGLES = ProblemGraph(
    6,
    (
        (0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0),
        (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0),
    ),
)


class TestBalancedMincut:
    def test_disjoint_triangles_cut_zero(self):
        part = balanced_mincut(TWO_TRIANGLES, [3, 3], seed=0)
        assert part.cut_weight == 0.0
        assert sorted(part.part_sizes) == [3, 3]

    def test_fifteen_vertices_exact_sizes(self):
        rng = np.random.default_rng(21)
        g = random_maxcut_graph(rng, 15, 0.3)
        part = balanced_mincut(g, [4, 5, 6], seed=1)
        assert part.part_sizes == (4, 5, 6)

    def test_within_ten_percent_of_exhaustive(self):
        rng = np.random.default_rng(22)
        for trial in range(30):
            g = random_maxcut_graph(rng, 10, 0.4, weighted=True)
            part = balanced_mincut(g, [5, 5], seed=trial)
            best = best_balanced_bipartition(g, 5)
            assert part.cut_weight <= best * 1.10 + 1e-9

    def test_infeasible_capacities(self):
        with pytest.raises(PartitionError):
            balanced_mincut(TWO_TRIANGLES, [3, 2], seed=0)
        with pytest.raises(PartitionError):
            balanced_mincut(TWO_TRIANGLES, [6, 0], seed=0)

    def test_deterministic_under_seed(self):
        rng = np.random.default_rng(23)
        g = random_maxcut_graph(rng, 12, 0.4, weighted=True)
        a = balanced_mincut(g, [6, 6], seed=5)
        b = balanced_mincut(g, [6, 6], seed=5)
        assert a == b

    def test_slack_capacities_respected(self):
        rng = np.random.default_rng(24)
        g = random_maxcut_graph(rng, 8, 0.4)
        part = balanced_mincut(g, [6, 6], seed=2)
        assert sum(part.part_sizes) == 8
        assert all(s <= c for s, c in zip(part.part_sizes, part.capacities))

    def test_cut_edges_are_exactly_the_crossing_edges(self):
        rng = np.random.default_rng(25)
        g = random_maxcut_graph(rng, 10, 0.5, weighted=True)
        part = balanced_mincut(g, [5, 5], seed=3)
        want = {
            (u, v)
            for u, v, _ in g.edges
            if part.assignment[u] != part.assignment[v]
        }
        assert {(u, v) for u, v, _ in part.cut_edges} == want


class TestExtractSubproblems:
    def test_triangle_split(self):
        g = ProblemGraph(3, ((0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)))
        part = Partition(
            assignment=(0, 0, 1),
            num_parts=2,
            capacities=(2, 1),
            cut_edges=((0, 2, 1.0), (1, 2, 1.0)),
        )
        subs = extract_subproblems(g, part)
        assert subs[0].graph.edges == ((0, 1, 1.0),)
        assert subs[1].graph.edges == ()
        assert subs[0].vertices == (0, 1)
        assert subs[1].vertices == (2,)

    def test_disjoint_triangles_split_cleanly(self):
        part = balanced_mincut(TWO_TRIANGLES, [3, 3], seed=0)
        subs = extract_subproblems(TWO_TRIANGLES, part)
        assert all(len(s.graph.edges) == 3 for s in subs)

    def test_edge_conservation(self):
        rng = np.random.default_rng(26)
        for trial in range(10):
            g = random_maxcut_graph(rng, 15, 0.3, weighted=True)
            part = balanced_mincut(g, [4, 5, 6], seed=trial)
            subs = extract_subproblems(g, part)
            internal = sum(len(s.graph.edges) for s in subs)
            assert internal + len(part.cut_edges) == len(g.edges)
            total_weight = sum(
                w for s in subs for _, _, w in s.graph.edges
            ) + sum(w for _, _, w in part.cut_edges)
            assert total_weight == pytest.approx(g.total_weight)


def exact_local_solutions(g, part):
    out = []
    for sub in extract_subproblems(g, part):
        _, argmins = brute_force_optimum(maxcut_to_spin_polynomial(sub.graph))
        out.append(argmins[0])
    return out


class TestMergeSolutions:
    def test_single_part_identity(self):
        g = ProblemGraph(3, ((0, 1, 1.0), (1, 2, 1.0)))
        part = Partition((0, 0, 0), 1, (3,), ())
        sol = SpinAssignment((1, -1, 1))
        assert merge_solutions(g, part, [sol]) == sol

    def test_two_parts_one_edge_gains_by_flip(self):
        # locally aligned endpoint spins across one positive cut edge:
        # flipping one part wins the edge
        g = ProblemGraph(2, ((0, 1, 1.0),))
        part = Partition((0, 1), 2, (1, 1), ((0, 1, 1.0),))
        merged = merge_solutions(g, part, [SpinAssignment((1,)), SpinAssignment((1,))])
        assert merged[0] != merged[1]
        assert g.cut_value(merged.values) == 1.0

    def test_matches_bruteforce_over_flips_and_dominates(self):
        rng = np.random.default_rng(27)
        for trial in range(100):
            g = random_maxcut_graph(rng, 12, 0.35, weighted=True)
            part = balanced_mincut(g, [4, 4, 4], seed=trial)
            locals_ = exact_local_solutions(g, part)
            merged = merge_solutions(g, part, locals_)

            # brute force over the 2^3 joint flips
            spins = [0] * 12
            subs = extract_subproblems(g, part)
            for sub, sol in zip(subs, locals_):
                for local, parent in enumerate(sub.vertices):
                    spins[parent] = sol[local]
            best_cut = -1.0
            for flips in itertools.product((-1, 1), repeat=3):
                flipped = [
                    spins[v] * flips[part.assignment[v]] for v in range(12)
                ]
                best_cut = max(best_cut, g.cut_value(flipped))
            assert g.cut_value(merged.values) == pytest.approx(best_cut)
            # dominance: at least as good as plain concatenation
            assert g.cut_value(merged.values) >= g.cut_value(spins) - 1e-12

    def test_flip_covariance(self):
        rng = np.random.default_rng(28)
        for trial in range(20):
            g = random_maxcut_graph(rng, 10, 0.4, weighted=True)
            part = balanced_mincut(g, [5, 5], seed=trial)
            locals_ = exact_local_solutions(g, part)
            merged = merge_solutions(g, part, locals_)
            negated = [locals_[0].flipped(), locals_[1]]
            merged2 = merge_solutions(g, part, negated)
            assert g.cut_value(merged.values) == pytest.approx(
                g.cut_value(merged2.values)
            )

    def test_missing_local_solution(self):
        part = balanced_mincut(TWO_TRIANGLES, [3, 3], seed=0)
        with pytest.raises(PartitionError):
            merge_solutions(TWO_TRIANGLES, part, [SpinAssignment((1, 1, 1))])

    def test_wrong_length_local_solution(self):
        part = balanced_mincut(TWO_TRIANGLES, [3, 3], seed=0)
        with pytest.raises(PartitionError):
            merge_solutions(
                TWO_TRIANGLES,
                part,
                [SpinAssignment((1, 1)), SpinAssignment((1, 1, 1, 1))],
            )
