"""Matrix enumeration: golden order, dedup, pruning, and worker modes."""

import itertools

import numpy as np
import pytest

from bn2pscm.errors import CapacityError, DomainError, ShapeError
from bn2pscm.linsys import assemble_extended, solve_via_lp
from bn2pscm.search import (
    SearchConfig,
    SearchStats,
    apply_column_permutation,
    canonical_matrix,
    powerset,
    search_solutions,
    sorted_columns_key,
)

GOLDEN_B = [0.99, 0.1]


def test_powerset_doubling_order():
    assert powerset([0, 1]) == [[], [0], [1], [0, 1]]
    assert powerset([0, 1, 2]) == [
        [], [0], [1], [0, 1], [2], [0, 2], [1, 2], [0, 1, 2]]
    assert powerset([]) == [[]]
    with pytest.raises(CapacityError):
        powerset(range(21))


def test_sorted_columns_key():
    a = [[1, 1, 0], [1, 0, 0]]
    b = [[1, 1, 0], [0, 1, 0]]  # column swap of a
    assert sorted_columns_key(a) == sorted_columns_key(b)
    assert sorted_columns_key(a) == ((0, 0), (1, 0), (1, 1))
    c = [[1, 1, 0], [0, 0, 1]]
    assert sorted_columns_key(a) != sorted_columns_key(c)
    assert canonical_matrix(a).tolist() == canonical_matrix(b).tolist()


def test_apply_column_permutation():
    a = np.array([[1, 1, 0], [0, 1, 0]])
    out = apply_column_permutation(a, (1, 0, 2))
    assert out.tolist() == [[1, 1, 0], [1, 0, 0]]
    with pytest.raises(DomainError):
        apply_column_permutation(a, (0, 0, 1))


def test_golden_emission_order():
    cfg = SearchConfig(m=2, n=3, limit=2)
    results = list(search_solutions(GOLDEN_B, cfg))
    assert len(results) == 2
    assert results[0].matrix.tolist() == [[1, 1, 0], [1, 0, 0]]
    assert np.allclose(results[0].lp_result.x[:3], [0.1, 0.89, 0.01], atol=1e-9)
    assert results[1].matrix.tolist() == [[1, 1, 0], [1, 0, 1]]
    assert np.allclose(results[1].lp_result.x[:3], [0.09, 0.9, 0.01], atol=1e-9)
    # emissions carry distinct keys while dedup is on
    assert results[0].key != results[1].key
    # at the full subset limit the same two classes are all there is
    full = list(search_solutions(GOLDEN_B, SearchConfig(m=2, n=3)))
    assert [r.matrix.tolist() for r in full] == [r.matrix.tolist() for r in results]


def test_stats_counters():
    stats = SearchStats()
    list(search_solutions(GOLDEN_B, SearchConfig(m=2, n=3, limit=2), stats=stats))
    assert stats.emitted == 2
    assert stats.exhausted
    assert stats.leaves == 36
    assert stats.lp_solved == 26
    assert stats.dedup_skips == 10
    assert stats.pruned == 0


def test_no_dedup_emits_permutation_classes():
    stats = SearchStats()
    results = list(search_solutions(
        GOLDEN_B, SearchConfig(m=2, n=3, limit=2, dedup=False), stats=stats))
    assert len(results) == 12
    dups = [r for r in results if r.duplicate_of is not None]
    assert len(dups) == 10
    assert len({r.key for r in results}) == 2
    # every duplicate points at a key that was emitted fresh earlier
    fresh = {r.key for r in results if r.duplicate_of is None}
    assert all(d.duplicate_of in fresh for d in dups)
    # each emission solves its own system
    for r in results:
        assert np.allclose(r.system.a_ext @ r.lp_result.x, r.system.b_ext,
                           atol=1e-8)


def test_max_solutions_stops_early():
    stats = SearchStats()
    results = list(search_solutions(
        GOLDEN_B, SearchConfig(m=2, n=3, limit=2, max_solutions=1), stats=stats))
    assert len(results) == 1 and stats.emitted == 1
    assert not stats.exhausted


def test_zero_target_gets_zero_row_first():
    results = list(search_solutions([0.0], SearchConfig(m=1, n=2)))
    assert results[0].matrix.tolist() == [[0, 0]]
    # non-zero targets never see a zero row
    for r in search_solutions([0.25], SearchConfig(m=1, n=2)):
        assert r.matrix.sum() > 0


def test_single_value_trivial_case():
    results = list(search_solutions([1.0, 1.0], SearchConfig(m=1, n=1)))
    assert len(results) == 1
    assert results[0].matrix.tolist() == [[1]]
    assert np.allclose(results[0].lp_result.x, [1.0, 0.0])


def test_empty_matrix_when_no_targets():
    # m = 0: only the normalization row; one empty matrix emission
    results = list(search_solutions([1.0], SearchConfig(m=0, n=2)))
    assert len(results) == 1
    assert results[0].matrix.shape == (0, 2)


def test_b_normalization_variants():
    cfg = SearchConfig(m=2, n=3, limit=2)
    base = [r.key for r in search_solutions(GOLDEN_B, cfg)]
    with_one = [r.key for r in search_solutions(GOLDEN_B + [1.0], cfg)]
    with_slack = [r.key for r in search_solutions(
        GOLDEN_B + [1.0, 1.0, 1.0, 1.0], cfg)]
    assert base == with_one == with_slack
    with pytest.raises(DomainError):
        list(search_solutions([0.99, 1.7], cfg))
    with pytest.raises(DomainError):
        # right length for targets+normalization, wrong trailing entry
        list(search_solutions([0.99, 0.1, 0.5], cfg))
    with pytest.raises(ShapeError):
        list(search_solutions([0.99, 0.1, 1.0, 1.0], cfg))


def test_jobs_reach_the_same_solution_set():
    cfg = SearchConfig(m=2, n=3, limit=2)
    serial = {r.key for r in search_solutions(GOLDEN_B, cfg)}
    for jobs in (2, 4):
        parallel = {r.key for r in search_solutions(GOLDEN_B, cfg, jobs=jobs)}
        assert parallel == serial


def test_prune_disabled_same_results():
    cfg = SearchConfig(m=2, n=3, limit=2)
    pruned, raw = SearchStats(), SearchStats()
    with_prune = [r.key for r in search_solutions(GOLDEN_B, cfg, stats=pruned)]
    without = [r.key for r in search_solutions(GOLDEN_B, cfg, prune=False,
                                               stats=raw)]
    assert with_prune == without
    assert raw.pruned == 0


def test_prune_fires_on_impossible_prefixes():
    # three rows, the first two being jointly infeasible early: with
    # pruning some subtrees are cut before reaching depth m-1
    stats = SearchStats()
    list(search_solutions([1.0, 1.0, 0.5], SearchConfig(m=3, n=3), stats=stats))
    assert stats.pruned > 0


def test_conflict_groups_keep_rows_disjoint():
    # two stacked rows for one parent config: subsets must not overlap
    b = [0.6, 0.4]
    cfg = SearchConfig(m=2, n=2)
    plain = list(search_solutions(b, cfg))
    constrained = list(search_solutions(b, cfg, conflict_groups=[(0, 1)]))
    for r in constrained:
        assert not (r.matrix[0] & r.matrix[1]).any()
    # the constraint can only remove solutions, never add
    plain_keys = {r.key for r in plain}
    assert {r.key for r in constrained} <= plain_keys


def _brute_force_keys(b_targets, n, limit=None):
    """All sorted-column keys solvable under the same row rules."""
    m = len(b_targets)
    limit = n if limit is None else limit
    keys = set()
    rows = []
    for bits in itertools.product((0, 1), repeat=n):
        size = sum(bits)
        if size == 0 or size > limit:
            continue
        rows.append(bits)
    options = []
    for t in b_targets:
        opts = list(rows)
        if t == 0.0:
            opts = [(0,) * n] + opts
        options.append(opts)
    for combo in itertools.product(*options):
        a = np.array(combo)
        sys = assemble_extended(a, list(b_targets) + [1.0])
        out, lp = solve_via_lp(sys)
        if lp.optimal and out.feasible:
            keys.add(sorted_columns_key(a))
    return keys


def test_search_matches_brute_force_small():
    rng = np.random.default_rng(31)
    for _ in range(12):
        m = int(rng.integers(1, 3))
        n = int(rng.integers(1, 4))
        b = np.round(rng.random(m), 2).tolist()
        found = {r.key for r in search_solutions(b, SearchConfig(m=m, n=n))}
        assert found == _brute_force_keys(b, n), (b, n)


def test_same_solution_under_two_distinct_keys():
    # the dedup key identifies column-permutation classes, not solution
    # vectors: these two matrices share a solution u yet are distinct
    # classes (0.3 = u_3 = u_1 + u_4 + u_5), and both stay emitted
    u = np.array([0.1, 0.4, 0.3, 0.19, 0.01])
    rows_a = [[1, 0, 0, 0, 0],
              [1, 1, 1, 1, 0],
              [0, 1, 0, 0, 0],
              [0, 1, 1, 0, 0],
              [0, 0, 1, 0, 0]]
    rows_b = rows_a[:4] + [[1, 0, 0, 1, 1]]
    b = [float(r @ u) for r in np.array(rows_a)]
    # row replacement changes the sum only at the last float digit
    assert np.allclose(b, [r @ u for r in np.array(rows_b)], atol=1e-12)
    assert sorted_columns_key(rows_a) != sorted_columns_key(rows_b)
    for rows in (rows_a, rows_b):
        out, lp = solve_via_lp(assemble_extended(rows, b + [1.0]))
        assert lp.optimal and out.feasible
        assert np.allclose(np.array(rows) @ lp.x[:5], b, atol=1e-9)


def test_config_validation():
    with pytest.raises(DomainError):
        SearchConfig(m=2, n=0)
    with pytest.raises(DomainError):
        SearchConfig(m=2, n=3, limit=4)
    with pytest.raises(DomainError):
        SearchConfig(m=2, n=3, limit=0)
    with pytest.raises(DomainError):
        SearchConfig(m=2, n=3, max_solutions=0)
