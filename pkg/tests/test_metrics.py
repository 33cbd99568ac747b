"""Diagram distances, the Frechet mean, and the matching oracle."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topomon.metrics import (
    diagram_distance,
    frechet_mean,
    matching_distance_oracle,
    total_persistence,
)
from topomon.topology import PersistenceDiagram
from helpers import brute_matching_cost

weights_strategy = st.lists(
    st.floats(min_value=0.0, max_value=10.0, allow_nan=False),
    min_size=1,
    max_size=6,
)


class TestDiagramDistance:
    def test_identity_of_indiscernibles(self):
        d = PersistenceDiagram([5.0, 3.0, 1.0])
        for kind in ("dist2", "d1_normalized", "d_inf"):
            assert diagram_distance(d, d, kind) == 0.0

    def test_forced_values(self):
        a, b = [4.0, 2.0], [2.0, 0.0]
        assert diagram_distance(a, b, "dist2") == pytest.approx(2.0, abs=1e-15)
        assert diagram_distance(a, b, "d1_normalized") == pytest.approx(2.0, abs=1e-15)
        assert diagram_distance(a, b, "d_inf") == pytest.approx(2.0, abs=1e-15)

    def test_cardinality_mismatch(self):
        with pytest.raises(ValueError, match="cardinality"):
            diagram_distance([1.0, 2.0], [1.0])

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown distance kind"):
            diagram_distance([1.0], [1.0], "bottleneck")

    def test_resorts_defensively(self):
        # unsorted raw input must not change the result
        assert diagram_distance([2.0, 4.0], [0.0, 2.0], "dist2") == pytest.approx(2.0)

    @settings(max_examples=60, deadline=None)
    @given(weights_strategy, weights_strategy, weights_strategy)
    def test_pseudometric_properties(self, wa, wb, wc):
        n = min(len(wa), len(wb), len(wc))
        a, b, c = wa[:n], wb[:n], wc[:n]
        for kind in ("dist2", "d1_normalized", "d_inf"):
            dab = diagram_distance(a, b, kind)
            assert dab == diagram_distance(b, a, kind)  # symmetry, exact
            assert dab >= 0.0
            assert dab <= diagram_distance(a, c, kind) + diagram_distance(
                c, b, kind
            ) + 1e-9

    @settings(max_examples=60, deadline=None)
    @given(weights_strategy, weights_strategy)
    def test_norm_ordering(self, wa, wb):
        n = min(len(wa), len(wb))
        a, b = wa[:n], wb[:n]
        dinf = diagram_distance(a, b, "d_inf")
        assert diagram_distance(a, b, "d1_normalized") <= dinf + 1e-12
        assert diagram_distance(a, b, "dist2") <= dinf + 1e-12


class TestMatchingOracle:
    def test_equal_diagrams_cost_zero(self):
        assert matching_distance_oracle([3.0, 1.0], [3.0, 1.0], p=2) == 0.0

    def test_forced_example_is_sorted_cost(self):
        # sorted matching: (4-2)^2 + (2-0)^2 = 8 = N * dist2^2
        cost = matching_distance_oracle([4.0, 2.0], [2.0, 0.0], p=2)
        assert cost == pytest.approx(8.0, abs=1e-15)
        d2 = diagram_distance([4.0, 2.0], [2.0, 0.0], "dist2")
        assert cost == pytest.approx(2 * d2**2, abs=1e-12)

    def test_never_exceeds_sorted_matching_cost(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            n = rng.integers(1, 7)
            a = np.sort(rng.uniform(0, 10, n))[::-1]
            b = np.sort(rng.uniform(0, 10, n))[::-1]
            for p in (1, 2):
                sorted_cost = float(np.sum(np.abs(a - b) ** p))
                assert matching_distance_oracle(a, b, p) <= sorted_cost + 1e-12

    def test_agrees_with_raw_enumeration(self):
        # cross-check the DP against plain permutation enumeration,
        # including unequal sizes where the diagonal must absorb points
        rng = np.random.default_rng(23)
        for _ in range(40):
            n, m = rng.integers(1, 5, size=2)
            a = rng.uniform(0, 5, n)
            b = rng.uniform(0, 5, m)
            for p in (1, 2):
                assert matching_distance_oracle(a, b, p) == pytest.approx(
                    brute_matching_cost(a, b, p), abs=1e-12
                )

    def test_sorted_reduction_is_optimal(self):
        # the load-bearing claim: rank-wise matching attains the optimum
        rng = np.random.default_rng(29)
        for _ in range(200):
            n = rng.integers(1, 7)
            a = rng.uniform(0, 10, n)
            b = rng.uniform(0, 10, n)
            opt = matching_distance_oracle(a, b, p=2)
            d2 = diagram_distance(a, b, "dist2")
            assert math.sqrt(opt / n) == pytest.approx(d2, abs=1e-12)
            opt1 = matching_distance_oracle(a, b, p=1)
            assert opt1 / n == pytest.approx(
                diagram_distance(a, b, "d1_normalized"), abs=1e-12
            )

    def test_size_cap(self):
        with pytest.raises(ValueError, match="capped"):
            matching_distance_oracle(np.zeros(9), np.zeros(9))

    def test_p_validation(self):
        with pytest.raises(ValueError):
            matching_distance_oracle([1.0], [1.0], p=3)


class TestFrechetMean:
    def test_forced_mean(self):
        m = frechet_mean([PersistenceDiagram([4.0, 2.0]), PersistenceDiagram([2.0, 0.0])])
        np.testing.assert_array_equal(m.weights, [3.0, 1.0])

    def test_singleton(self):
        d = PersistenceDiagram([7.0, 1.0, 0.5])
        np.testing.assert_array_equal(frechet_mean([d]).weights, d.weights)

    def test_three_diagram_mean_and_local_optimality(self):
        diagrams = [[6.0, 0.0], [3.0, 3.0], [0.0, 0.0]]
        mean = frechet_mean(diagrams)
        np.testing.assert_array_equal(mean.weights, [3.0, 1.0])

        def objective(candidate):
            return sum(
                diagram_distance(candidate, d, "dist2") ** 2 for d in diagrams
            )

        base = objective(mean.weights)
        rng = np.random.default_rng(31)
        for _ in range(10_000):
            perturbed = np.clip(
                mean.weights + rng.normal(0, rng.choice([1e-3, 0.1, 1.0]), 2), 0, None
            )
            assert objective(perturbed) >= base - 1e-9

    def test_permutation_invariance(self):
        rng = np.random.default_rng(37)
        diagrams = [PersistenceDiagram(rng.uniform(0, 5, 4)) for _ in range(6)]
        m1 = frechet_mean(diagrams)
        order = rng.permutation(len(diagrams))
        m2 = frechet_mean([diagrams[i] for i in order])
        np.testing.assert_array_equal(m1.weights, m2.weights)

    def test_errors(self):
        with pytest.raises(ValueError, match="empty"):
            frechet_mean([])
        with pytest.raises(ValueError, match="cardinality"):
            frechet_mean([[1.0, 2.0], [1.0]])


class TestTotalPersistence:
    def test_zero_diagram(self):
        assert total_persistence([0.0, 0.0, 0.0]) == 0.0

    def test_forced_value(self):
        assert total_persistence([4.0, 2.0]) == 3.0

    def test_homogeneity(self):
        rng = np.random.default_rng(41)
        w = rng.uniform(0, 5, 7)
        lam = 2.0**3
        assert total_persistence(lam * w) == pytest.approx(
            lam * total_persistence(w), rel=1e-15
        )

    def test_equals_distance_to_zero_diagram(self):
        rng = np.random.default_rng(43)
        w = rng.uniform(0, 5, 9)
        assert total_persistence(w) == pytest.approx(
            diagram_distance(w, np.zeros(9), "d1_normalized"), abs=1e-15
        )
