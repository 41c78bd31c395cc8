"""Method-of-types layer: tables, realization, rounding, cycle decomposition."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

import blocktropy as bt


def _cyclic_counts_purepython(x, k, A):
    """Independent counting oracle: dict-based cyclic window counts."""
    n = len(x)
    counts = [0] * A**k
    for i in range(n):
        code = 0
        for j in range(k):
            code = code * A + int(x[(i + j) % n])
        counts[code] += 1
    return tuple(counts)


def _exact_type_size_oracle(counts, n, k, A):
    """Brute-force string census, independent of the library's counting."""
    target = tuple(int(c) for c in counts)
    hits = 0
    for x in itertools.product(range(A), repeat=n):
        if _cyclic_counts_purepython(x, k, A) == target:
            hits += 1
    return hits


def test_count_table_validation():
    bt.CountTable(2, 2, 4, np.array([1, 1, 1, 1]))
    with pytest.raises(ValueError):
        bt.CountTable(2, 2, 5, np.array([1, 1, 1, 1]))  # sum mismatch
    with pytest.raises(ValueError):
        bt.CountTable(2, 2, 4, np.array([2, 1, 0, 1]))  # unbalanced
    with pytest.raises(ValueError):
        bt.CountTable(2, 2, 4, np.array([2, -1, 1, 2]))  # negative


def test_count_table_json_round_trip():
    table = bt.CountTable(2, 2, 6, np.array([2, 2, 2, 0]))
    data = table.to_json_dict()
    assert data == {"k": 2, "n": 6, "counts": [2, 2, 2, 0]}
    back = bt.CountTable.from_json_dict(data, 2)
    np.testing.assert_array_equal(back.counts, table.counts)


def test_enumerate_types_tiny_frozen():
    # |A|=2, n=2, k=1 -> (1,0), (1/2,1/2), (0,1)
    types = bt.enumerate_types(2, 1, 2)
    got = sorted(tuple(t.weights) for t in types)
    assert got == [(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)]
    # |A|=2, n=2, k=2 -> delta_00, delta_11, (1/2 on 01, 1/2 on 10)
    types2 = bt.enumerate_types(2, 2, 2)
    got2 = sorted(tuple(t.weights) for t in types2)
    assert got2 == [
        (0.0, 0.0, 0.0, 1.0),
        (0.0, 0.5, 0.5, 0.0),
        (1.0, 0.0, 0.0, 0.0),
    ]
    # n=1, k=1 -> |A| point masses
    assert len(bt.enumerate_types(1, 1, 3)) == 3


def test_enumerate_types_matches_string_census():
    # the type list is exactly the set of cyclic count vectors of strings
    for n, k, A in ((6, 2, 2), (4, 3, 2), (4, 1, 3), (5, 2, 2)):
        census = {
            _cyclic_counts_purepython(x, k, A)
            for x in itertools.product(range(A), repeat=n)
        }
        types = bt.enumerate_types(n, k, A)
        got = {
            tuple(int(round(w * n)) for w in t.weights) for t in types
        }
        assert got == census
    assert len(bt.enumerate_types(6, 2, 2)) == 11


def test_type_count_bound_frozen():
    assert bt.type_count_bound(2, 1, 2) == pytest.approx(9.0)
    assert bt.type_count_bound(4, 2, 2) == pytest.approx(625.0)
    assert bt.type_count_bound(0, 1, 2) == pytest.approx(1.0)
    assert len(bt.enumerate_types(2, 1, 2)) <= bt.type_count_bound(2, 1, 2)


def test_type_cardinality_bound_sweep():
    for n in (4, 8, 12):
        for k in (1, 2, 3):
            if k > n:
                continue
            types = bt.enumerate_types(n, k, 2)
            assert len(types) <= bt.type_count_bound(n, k, 2)


def test_type_class_size_worked_examples():
    # N(01)=N(10)=2: exact 2 (0101, 1010), Euler bounds [1/4, 4]
    table = bt.CountTable(2, 2, 4, np.array([0, 2, 2, 0]))
    assert bt.type_class_size(table, mode="exact") == 2
    bounds = bt.type_class_size(table, mode="bounds")
    assert bounds.euler_lower == pytest.approx(0.25)
    assert bounds.euler_upper == pytest.approx(4.0)
    # constant string: exact 1
    const = bt.CountTable(2, 2, 5, np.array([5, 0, 0, 0]))
    assert bt.type_class_size(const, mode="exact") == 1
    # n=4, k=1, counts (2,2): exact C(4,2)=6, Euler bounds [1.5, 24]
    binom = bt.CountTable(2, 1, 4, np.array([2, 2]))
    assert bt.type_class_size(binom, mode="exact") == 6
    b1 = bt.type_class_size(binom, mode="bounds")
    assert b1.euler_lower == pytest.approx(1.5)
    assert b1.euler_upper == pytest.approx(24.0)


def test_type_class_size_matches_brute_force_oracle():
    rng = np.random.default_rng(6)
    for _ in range(12):
        A, k = 2, int(rng.integers(1, 4))
        n = int(rng.integers(max(k, 3), 9))
        x = rng.integers(0, A, size=n)
        counts = np.asarray(_cyclic_counts_purepython(x, k, A))
        table = bt.CountTable(A, k, n, counts)
        assert bt.type_class_size(table, mode="exact") == _exact_type_size_oracle(
            counts, n, k, A
        )


def test_realize_sample_worked_examples():
    # N(01)=N(10)=2 -> one of 0101 / 1010, with exact type recovery
    table = bt.CountTable(2, 2, 4, np.array([0, 2, 2, 0]))
    x = bt.realize_sample(table)
    assert tuple(x) in {(0, 1, 0, 1), (1, 0, 1, 0)}
    nu = bt.empirical_block_measure(x, 2, 2)
    np.testing.assert_allclose(nu.weights * 4, table.counts, atol=1e-12)
    # constant table -> constant string
    const = bt.CountTable(2, 2, 5, np.array([5, 0, 0, 0]))
    np.testing.assert_array_equal(bt.realize_sample(const), np.zeros(5))
    # two disjoint self-loops -> concatenation 0011, tv = 1 = k|A|^(k-1)/n
    loops = bt.CountTable(2, 2, 4, np.array([2, 0, 0, 2]))
    y = bt.realize_sample(loops)
    np.testing.assert_array_equal(y, [0, 0, 1, 1])
    pi = bt.empirical_block_measure(y, 2, 2)
    tv = bt.tv_distance(pi, loops.to_distribution())
    assert tv == pytest.approx(1.0)
    assert tv <= 2 * 2 / 4 + 1e-12


def test_realize_sample_round_trip_sweep():
    # every empirical table realizes back to its own type (connected case)
    rng = np.random.default_rng(7)
    for n in (4, 8, 12):
        for k in (1, 2, 3):
            if k > n:
                continue
            for _ in range(40):
                x = rng.integers(0, 2, size=n)
                counts = np.asarray(_cyclic_counts_purepython(x, k, 2))
                table = bt.CountTable(2, k, n, counts)
                y = bt.realize_sample(table)
                assert _cyclic_counts_purepython(y, k, 2) == tuple(counts)


def test_realize_sample_deterministic():
    table = bt.CountTable(2, 3, 8, np.array([2, 1, 1, 1, 1, 1, 1, 0]))
    first = bt.realize_sample(table)
    second = bt.realize_sample(table)
    np.testing.assert_array_equal(first, second)


def test_realize_sample_rejects_empty():
    empty = bt.CountTable(2, 2, 0, np.array([0, 0, 0, 0]))
    with pytest.raises(ValueError):
        bt.realize_sample(empty)


def test_components_ordering():
    loops = bt.CountTable(2, 2, 4, np.array([2, 0, 0, 2]))
    comps = bt.components(loops)
    assert comps == [[0], [1]]


def test_round_to_type_worked_examples(chain_spectral):
    # already a type: returned unchanged
    nu = bt.BlockDistribution(2, 2, np.array([0, 0.5, 0.5, 0]), stationary=True)
    out = bt.round_to_type(nu, 4)
    assert bt.tv_distance(out, nu) <= 1e-12
    # (1/3, 2/3) at n=4 -> (1/4, 3/4), tv 1/6
    nu1 = bt.BlockDistribution(2, 1, np.array([1 / 3, 2 / 3]), stationary=True)
    out1 = bt.round_to_type(nu1, 4)
    np.testing.assert_allclose(out1.weights, [0.25, 0.75], atol=1e-12)
    assert bt.tv_distance(out1, nu1) == pytest.approx(1 / 6, abs=1e-12)
    # irrational 2-block law at n=1000: tv <= (k+2)A^k/n = 0.016
    rho = bt.equilibrium_blocks(chain_spectral, 2)
    out2 = bt.round_to_type(rho, 1000)
    assert bt.tv_distance(out2, rho) <= 4 * 4 / 1000


def test_round_to_type_validates():
    skew = bt.BlockDistribution(2, 2, np.array([0.7, 0.1, 0.1, 0.1]))
    with pytest.raises(ValueError):
        bt.round_to_type(skew, 10)  # not stationary
    nu = bt.BlockDistribution(2, 2, np.array([0.25, 0.25, 0.25, 0.25]), stationary=True)
    with pytest.raises(ValueError):
        bt.round_to_type(nu, 1)  # n < k


def test_round_to_type_realizability_sweep(make_stationary):
    rng = np.random.default_rng(8)
    for _ in range(60):
        A = int(rng.integers(2, 4))
        k = int(rng.integers(1, 4))
        n = int(rng.integers(max(k, 20), 120))
        nu = make_stationary(rng, A, k)
        mu = bt.round_to_type(nu, n)
        assert bt.tv_distance(mu, nu) <= (k + 2) * A**k / n + 1e-12
        counts = np.rint(mu.weights * n).astype(np.int64)
        np.testing.assert_allclose(mu.weights * n, counts, atol=1e-6)
        table = bt.CountTable(A, k, n, counts)  # balanced by construction
        y = bt.realize_sample(table)
        np.testing.assert_allclose(
            bt.empirical_block_measure(y, k, A).weights, mu.weights, atol=1e-12
        )


def test_cycle_decompose_worked_example():
    nu = bt.BlockDistribution(2, 2, np.full(4, 0.25), stationary=True)
    parts = bt.cycle_decompose(nu)
    got = sorted((round(w, 12), c.arcs) for w, c in parts)
    assert got == [(0.25, (0,)), (0.25, (3,)), (0.5, (1, 2))]


def test_cycle_decompose_fixed_points():
    two_cycle = bt.BlockDistribution(
        2, 2, np.array([0, 0.5, 0.5, 0]), stationary=True
    )
    parts = bt.cycle_decompose(two_cycle)
    assert len(parts) == 1
    weight, cyc = parts[0]
    assert weight == pytest.approx(1.0, abs=1e-12)
    assert cyc.arcs == (1, 2)
    # CycleMeasure round trip: decomposing a cycle measure returns itself
    again = bt.cycle_decompose(cyc.distribution)
    assert len(again) == 1 and again[0][1].arcs == (1, 2)


def test_cycle_decompose_properties(make_stationary):
    rng = np.random.default_rng(9)
    for _ in range(60):
        A = int(rng.integers(2, 4))
        k = int(rng.integers(1, 4))
        nu = make_stationary(rng, A, k)
        parts = bt.cycle_decompose(nu)
        assert len(parts) <= A**k
        assert sum(w for w, _ in parts) == pytest.approx(1.0, abs=1e-10)
        recombined = np.zeros(A**k)
        for w, cyc in parts:
            recombined += w * cyc.distribution.weights
            # zero conditional entropy, exactly
            assert bt.conditional_block_entropy(cyc.distribution) == 0.0
        np.testing.assert_allclose(recombined, nu.weights, atol=1e-10)


def test_cycle_measure_validation():
    with pytest.raises(ValueError):
        bt.CycleMeasure(2, 2, (1,))  # 01 does not close on itself
    cyc = bt.CycleMeasure(2, 2, (1, 2))
    assert cyc.distribution.stationary


def test_euler_bounds_sandwich_from_fractions():
    # bounds are exact rationals; verify one by hand via Fractions
    table = bt.CountTable(2, 2, 6, np.array([2, 2, 2, 0]))
    exact = bt.type_class_size(table, mode="exact")
    bounds = bt.type_class_size(table, mode="bounds")
    out_deg = [4, 2]  # vertex 0: 2+2, vertex 1: 2+0
    lower = Fraction(
        math.factorial(out_deg[0] - 1) * math.factorial(out_deg[1] - 1),
        math.factorial(2) ** 3,
    )
    upper = 6 * Fraction(
        math.factorial(out_deg[0]) * math.factorial(out_deg[1]),
        math.factorial(2) ** 3,
    )
    assert bounds.euler_lower == pytest.approx(float(lower))
    assert bounds.euler_upper == pytest.approx(float(upper))
    assert float(lower) <= exact <= float(upper)
    # entropy-form bounds hold as well
    assert bounds.entropy_lower <= exact <= bounds.entropy_upper


def test_enumerate_simple_cycles_counts():
    # full 2-letter de Bruijn graph on 2 vertices: 0, 1, 01->10 = 3 cycles
    assert len(bt.enumerate_simple_cycles(2, 2)) == 3
    # k=1 collapses to one vertex with A self-loops
    assert len(bt.enumerate_simple_cycles(3, 1)) == 3
    cycles = bt.enumerate_simple_cycles(2, 3)
    # every returned arc sequence closes on itself through the word graph
    for cyc in cycles:
        V = 4
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            assert a % V == b // 2
