#!/usr/bin/env python3
"""
Tests for R-vine matrices: validation, normalization, max-matrix lookups and
dependence tracing
"""
import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from src.bicop import FamilyCode, FamilyTag
from src.errors import StructureError
from src.evaluate import evaluate
from src.structure import (
    RVineMatrix,
    dependence_matrix,
    max_matrix,
    normalizing_permutation,
    random_structure,
    second_argument,
    validate,
)
from src.vine_spec import RVineSpec

M3 = [[3, 0, 0], [1, 2, 0], [2, 1, 1]]

EXCHANGE = [
    [8, 0, 0, 0, 0, 0, 0, 0],
    [7, 7, 0, 0, 0, 0, 0, 0],
    [2, 2, 6, 0, 0, 0, 0, 0],
    [3, 3, 2, 5, 0, 0, 0, 0],
    [6, 4, 3, 2, 4, 0, 0, 0],
    [4, 1, 4, 3, 2, 3, 0, 0],
    [1, 5, 1, 4, 3, 2, 2, 0],
    [5, 6, 5, 1, 1, 1, 1, 1],
]


def _flagged(flags):
    return sorted((k, i) for k, i in zip(*np.nonzero(flags)))


def test_three_dim_trees():
    rvm = RVineMatrix(M3)
    trees = validate(rvm)
    assert [len(t) for t in trees] == [2, 1]
    edge = rvm.edge(2, 1)
    assert edge.tree == 2
    assert edge.conditioned == (3, 1)
    assert edge.conditioning == frozenset({2})
    assert edge.label(["A", "B", "C"]) == "C,A|B"
    assert rvm.positions() == [(3, 2), (3, 1), (2, 1)]
    print("✓ 3-dim structure decodes into two trees")


def test_exchange_rate_structure_is_valid():
    rvm = RVineMatrix(EXCHANGE)
    assert rvm.is_normalized()
    trees = validate(rvm)
    assert [len(t) for t in trees] == [7, 6, 5, 4, 3, 2, 1]
    tree1 = {frozenset(e.conditioned) for e in trees[0]}
    assert tree1 == {frozenset(pair) for pair in ((8, 5), (7, 6), (6, 5), (5, 1), (4, 1), (3, 1), (2, 1))}
    print("✓ 8-dim exchange-rate structure validates")


def test_invalid_structures():
    # repeated entry in a column
    with pytest.raises(StructureError):
        validate(RVineMatrix([[3, 0, 0], [3, 2, 0], [1, 1, 1]]))
    # diagonal is not a permutation
    with pytest.raises(StructureError):
        validate(RVineMatrix([[3, 0, 0], [1, 3, 0], [2, 1, 1]]))
    # tree 2 edge {4,1}|3 needs node {1,3}, which is not a tree-1 edge of the path 4-3-2-1
    with pytest.raises(StructureError):
        validate(RVineMatrix([[4, 0, 0, 0], [2, 3, 0, 0], [1, 1, 2, 0], [3, 2, 1, 1]]))
    with pytest.raises(StructureError):
        RVineMatrix([[1]])
    print("✓ invalid structures are rejected")


def test_max_matrix_and_argument_routing():
    rvm = RVineMatrix(M3)
    mtil = max_matrix(rvm)
    assert mtil[3, 1] == 2 and mtil[2, 1] == 2 and mtil[1, 1] == 3
    assert mtil[3, 2] == 1 and mtil[2, 2] == 2
    assert second_argument(rvm, mtil, 3, 1) == (2, True)
    assert second_argument(rvm, mtil, 3, 2) == (3, True)
    assert second_argument(rvm, mtil, 2, 1) == (2, False)
    print("✓ max-matrix routes direct and indirect arguments")


def test_dependence_flags():
    rvm = RVineMatrix(M3)
    assert _flagged(dependence_matrix(rvm, 3, 2)) == [(2, 1), (3, 2)]
    assert _flagged(dependence_matrix(rvm, 3, 1)) == [(2, 1), (3, 1)]
    assert _flagged(dependence_matrix(rvm, 2, 1)) == [(2, 1)]
    with pytest.raises(IndexError):
        dependence_matrix(rvm, 1, 1)
    print("✓ dependence flags follow the edge index sets")


def test_dependence_never_reaches_lower_trees():
    rvm = RVineMatrix(EXCHANGE)
    for k, i in rvm.positions():
        flags = dependence_matrix(rvm, k, i)
        assert flags[k, i] == 1
        rows = [r for r, _ in _flagged(flags)]
        assert max(rows) == k
    print("✓ a parameter only affects its own tree and those above")


def test_random_structures_are_valid():
    rng = np.random.default_rng(12)
    for d in range(2, 8):
        for _ in range(5):
            rvm = random_structure(d, rng)
            assert rvm.is_normalized()
            assert [len(t) for t in validate(rvm)] == list(range(d - 1, 0, -1))
    print("✓ generated structures validate")


def _changed(before, after, positions):
    return sorted(pos for pos in positions if np.max(np.abs(after[pos] - before[pos])) > 1e-12)


def test_bumped_parameter_changes_exactly_the_flagged_terms():
    rng = np.random.default_rng(606)
    rvm = random_structure(6, rng)
    gauss = FamilyTag(FamilyCode.GAUSSIAN)
    params = {pos: (rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 0.6),) for pos in rvm.positions()}
    spec = RVineSpec(rvm, {pos: gauss for pos in params}, params)
    u = rng.uniform(0.05, 0.95, size=(30, 6))
    base = evaluate(spec, u)
    theta = spec.get_vector()
    below = [(k - 1, i) for k, i in rvm.positions()]
    for j, p in enumerate(spec.param_index()):
        bumped = theta.copy()
        bumped[j] += 0.05
        ws = evaluate(spec.with_vector(bumped), u)
        expected = _flagged(dependence_matrix(rvm, p.k, p.i))
        assert _changed(base.vvalues, ws.vvalues, rvm.positions()) == expected
        # h outputs of (k, i) land in row k - 1
        shifted = [(k + 1, i) for k, i in _changed(base.vdirect, ws.vdirect, below)]
        assert sorted(shifted) == expected
        shifted = [(k + 1, i) for k, i in _changed(base.vindirect, ws.vindirect, below)]
        assert sorted(shifted) == expected
    print("✓ a parameter moves exactly the terms flagged for it")


def test_normalize_relabels_variables():
    rvm = RVineMatrix([[1, 0, 0], [3, 2, 0], [2, 3, 3]])
    assert not rvm.is_normalized()
    validate(rvm)
    assert normalizing_permutation(rvm) == {1: 3, 2: 2, 3: 1}
    spec = RVineSpec(rvm, labels=["A", "B", "C"])
    normalized = spec.normalize()
    assert normalized.structure == RVineMatrix(M3)
    assert normalized.labels == ["C", "B", "A"]
    assert normalized.permutation == (3, 2, 1)
    assert normalized.normalize() is normalized
    print("✓ normalization keeps edges and records the permutation")


if __name__ == "__main__":
    print("=" * 60)
    print("Testing R-vine structures")
    print("=" * 60)
    test_three_dim_trees()
    test_exchange_rate_structure_is_valid()
    test_invalid_structures()
    test_max_matrix_and_argument_routing()
    test_dependence_flags()
    test_dependence_never_reaches_lower_trees()
    test_random_structures_are_valid()
    test_bumped_parameter_changes_exactly_the_flagged_terms()
    test_normalize_relabels_variables()
