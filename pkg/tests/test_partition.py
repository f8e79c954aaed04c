import math

import numpy as np
import pytest

from rsse2h2t import partition as P


def test_error_symbol_table():
    expected = [(0, 0), (4, 0), (-4, 0), (0, 4), (0, -4), (2, 2), (-2, -2), (2, -2), (-2, 2)]
    assert [tuple(e) for e in P.ERROR_SYMBOLS.tolist()] == expected
    # (e^a, e^b) in {0, +-2}^2 and consistent with (e+, e-)
    for (ep, em), (ea, eb) in zip(P.ERROR_SYMBOLS, P.ERROR_SYMBOLS_AB):
        assert (ea + eb, ea - eb) == (ep, em)
    assert all(P.NEGATE[P.NEGATE] == np.arange(9))
    assert all(P.SWAP[P.SWAP] == np.arange(9))


def test_espd_examples():
    assert P.espd((2, 0), (-2, 0), 0.1) == pytest.approx(9.68)
    assert P.espd((0, 2), (0, -2), 0.1) == pytest.approx(6.48)
    assert P.espd((2, 0), (0, -2), 0.1) == pytest.approx(4.04)
    assert P.delta_squares(0.1) == pytest.approx((9.68, 6.48, 4.04))
    for c1 in range(4):
        for c2 in range(4):
            d = P.espd(c1, c2, 0.3)
            assert d == P.espd(c2, c1, 0.3)
            assert (d == 0) == (c1 == c2)
    with pytest.raises(ValueError):
        P.espd((1, 1), (2, 0), 0.1)


def test_level_minimum_espd():
    assert P.level_min_espd(P.L2, 0.2) == pytest.approx(5.12)
    assert P.level_min_espd(P.L3, 0.2) == pytest.approx(11.52)
    assert P.level_min_espd(P.L1, 0.1) == pytest.approx(4.04)
    assert P.level_min_espd(P.L4, 0.1) == math.inf


def test_crossover():
    knee = 2 - math.sqrt(3)
    for eps in np.linspace(0.0, 0.95, 191):
        _, d2, d3 = P.delta_squares(eps)
        if abs(eps - knee) > 1e-9:
            assert (d3 < d2) == (eps < knee)
    _, d2, d3 = P.delta_squares(knee)
    assert d2 == pytest.approx(d3, abs=1e-12)


def test_error_sets():
    assert P.intrasubset_errors(P.L1) == frozenset(range(9))
    assert P.intrasubset_errors(P.L2) == frozenset({0, 1, 2, 3, 4})
    assert P.intersubset_errors(P.L2) == frozenset({5, 6, 7, 8})
    assert P.intrasubset_errors(P.L3) == frozenset({0, 1, 2})
    assert P.intersubset_errors(P.L3) == frozenset({3, 4, 5, 6, 7, 8})
    assert P.intrasubset_errors(P.L4) == frozenset({0})
    assert P.intersubset_errors(P.L4) == frozenset(range(1, 9))
    for lvl in P.LEVELS.values():
        assert not P.intrasubset_errors(lvl) & P.intersubset_errors(lvl)
    assert not P.intersubset_errors(P.L1)


def test_subset_indices_and_refinement():
    assert P.subset_index((2, 0), P.L2) == 0
    assert P.subset_index((0, 2), P.L4) != P.subset_index((0, -2), P.L4)
    assert P.subset_index((2, 0), P.L1) == P.subset_index((0, -2), P.L1) == 0
    assert P.L3.index_of == (0, 1, 2, 0)
    order = [P.L4, P.L3, P.L2, P.L1]
    for i, fine in enumerate(order):
        for coarse in order[i:]:
            assert P.refines(fine, coarse)
            m = P.reindex_map(fine, coarse)
            for c in range(4):
                assert m[fine.index_of[c]] == coarse.index_of[c]
    assert not P.refines(P.L1, P.L2)
    with pytest.raises(ValueError):
        P.reindex_map(P.L2, P.L3)
    for lvl in P.LEVELS.values():
        assert sorted(c for s in lvl.subsets for c in s) == [0, 1, 2, 3]
