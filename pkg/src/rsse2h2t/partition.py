"""Set-partition tree of the transformed 4-point constellation.

Symbols are handled by integer code throughout the package, in the fixed
order ``(+2,0)=0, (0,+2)=1, (0,-2)=2, (-2,0)=3``.  That order doubles as the
subset numbering of level L4 and as the detector's tie-break order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

CONSTELLATION = np.array([(2, 0), (0, 2), (0, -2), (-2, 0)], dtype=np.int64)
SYMBOL_CODE = {tuple(int(v) for v in z): c for c, z in enumerate(CONSTELLATION)}

# Error symbols by index, in (e+, e-) coordinates.
ERROR_SYMBOLS = np.array(
    [(0, 0), (4, 0), (-4, 0), (0, 4), (0, -4), (2, 2), (-2, -2), (2, -2), (-2, 2)],
    dtype=np.int64,
)
ERROR_INDEX = {tuple(int(v) for v in e): i for i, e in enumerate(ERROR_SYMBOLS)}

# (e^a, e^b) = ((e+ + e-)/2, (e+ - e-)/2)
ERROR_SYMBOLS_AB = np.stack(
    [(ERROR_SYMBOLS[:, 0] + ERROR_SYMBOLS[:, 1]) // 2, (ERROR_SYMBOLS[:, 0] - ERROR_SYMBOLS[:, 1]) // 2],
    axis=1,
)

# Symmetry images of an error index: negation and track swap (e- -> -e-).
NEGATE = np.array([ERROR_INDEX[(-int(p), -int(m))] for p, m in ERROR_SYMBOLS])
SWAP = np.array([ERROR_INDEX[(int(p), -int(m))] for p, m in ERROR_SYMBOLS])


@dataclass(frozen=True)
class PartitionLevel:
    name: str
    subsets: tuple[frozenset[int], ...]  # sets of symbol codes, ordered by subset index

    @property
    def count(self) -> int:
        return len(self.subsets)

    @property
    def index_of(self) -> tuple[int, ...]:
        """Subset index for each symbol code."""
        out = [0] * 4
        for i, sub in enumerate(self.subsets):
            for c in sub:
                out[c] = i
        return tuple(out)


L1 = PartitionLevel("L1", (frozenset({0, 1, 2, 3}),))
L2 = PartitionLevel("L2", (frozenset({0, 3}), frozenset({1, 2})))
L3 = PartitionLevel("L3", (frozenset({0, 3}), frozenset({1}), frozenset({2})))
L4 = PartitionLevel("L4", (frozenset({0}), frozenset({1}), frozenset({2}), frozenset({3})))

LEVELS = {1: L1, 2: L2, 3: L3, 4: L4}


def level(j: int) -> PartitionLevel:
    """Partition level with ``j`` subsets."""
    try:
        return LEVELS[int(j)]
    except KeyError:
        raise ValueError(f"subset count must be 1..4, got {j}") from None


def _code(z) -> int:
    if isinstance(z, (int, np.integer)):
        if not 0 <= int(z) < 4:
            raise ValueError(f"symbol code out of range: {z}")
        return int(z)
    key = (int(z[0]), int(z[1]))
    if key not in SYMBOL_CODE:
        raise ValueError(f"{key} is not in the 2H2T constellation")
    return SYMBOL_CODE[key]


def espd(z1, z2, epsilon: float) -> float:
    """Effective symbol pair distance between two constellation points."""
    a = CONSTELLATION[_code(z1)]
    b = CONSTELLATION[_code(z2)]
    dp, dm = float(a[0] - b[0]), float(a[1] - b[1])
    return 0.5 * (1 + epsilon) ** 2 * dp * dp + 0.5 * (1 - epsilon) ** 2 * dm * dm


def delta_squares(epsilon: float) -> tuple[float, float, float]:
    """(Delta_1^2, Delta_2^2, Delta_3^2) of the constellation."""
    return 8 * (1 + epsilon) ** 2, 8 * (1 - epsilon) ** 2, 4 * (1 + epsilon**2)


def level_min_espd(lvl: PartitionLevel, epsilon: float) -> float:
    best = math.inf
    for sub in lvl.subsets:
        members = sorted(sub)
        for i, c1 in enumerate(members):
            for c2 in members[i + 1 :]:
                best = min(best, espd(c1, c2, epsilon))
    return best


def subset_index(z, lvl: PartitionLevel) -> int:
    return lvl.index_of[_code(z)]


@lru_cache(maxsize=None)
def _error_sets(name: str) -> tuple[frozenset[int], frozenset[int]]:
    lvl = {l.name: l for l in LEVELS.values()}[name]
    idx = lvl.index_of
    intra, inter = set(), set()
    for c1 in range(4):
        for c2 in range(4):
            e = tuple(int(v) for v in CONSTELLATION[c1] - CONSTELLATION[c2])
            (intra if idx[c1] == idx[c2] else inter).add(ERROR_INDEX[e])
    return frozenset(intra), frozenset(inter)


def intrasubset_errors(lvl: PartitionLevel) -> frozenset[int]:
    """Error indices z - z' with z, z' in one subset of ``lvl``."""
    return _error_sets(lvl.name)[0]


def intersubset_errors(lvl: PartitionLevel) -> frozenset[int]:
    """Error indices z - z' with z, z' in different subsets of ``lvl``."""
    return _error_sets(lvl.name)[1]


def refines(fine: PartitionLevel, coarse: PartitionLevel) -> bool:
    """True when every subset of ``fine`` lies inside one subset of ``coarse``."""
    return all(any(sub <= big for big in coarse.subsets) for sub in fine.subsets)


def reindex_map(fine: PartitionLevel, coarse: PartitionLevel) -> tuple[int, ...]:
    """Map a subset index of ``fine`` to the index of its enclosing ``coarse`` subset."""
    if not refines(fine, coarse):
        raise ValueError(f"{fine.name} does not refine {coarse.name}")
    out = []
    for sub in fine.subsets:
        (big,) = [i for i, b in enumerate(coarse.subsets) if sub <= b]
        out.append(big)
    return tuple(out)
