"""Subset trellises built from a configuration vector J = [J_1, ..., J_nu]."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np

from . import partition
from .channel import ChannelTarget
from .partition import PartitionLevel


@dataclass(frozen=True)
class SubsetConfig:
    J: tuple[int, ...]

    def __post_init__(self):
        j = tuple(int(v) for v in self.J)
        object.__setattr__(self, "J", j)
        if not j:
            raise ValueError("configuration must have at least one entry")
        if any(v < 1 or v > 4 for v in j):
            raise ValueError(f"each J_k must be in 1..4, got {list(j)}")
        if any(j[k] < j[k + 1] for k in range(len(j) - 1)):
            raise ValueError(f"configuration {list(j)} is not monotone (need J_1 >= J_2 >= ...)")

    @classmethod
    def parse(cls, text: str) -> "SubsetConfig":
        text = text.strip().strip("[]")
        try:
            return cls(tuple(int(t) for t in text.replace(" ", "").split(",") if t))
        except ValueError as exc:
            raise ValueError(f"bad configuration {text!r}: {exc}") from None

    @classmethod
    def full(cls, nu: int) -> "SubsetConfig":
        return cls((4,) * nu)

    @property
    def nu(self) -> int:
        return len(self.J)

    @property
    def levels(self) -> tuple[PartitionLevel, ...]:
        return tuple(partition.level(j) for j in self.J)

    @property
    def n_states(self) -> int:
        return int(np.prod(self.J))

    @property
    def is_full(self) -> bool:
        return all(j == 4 for j in self.J)

    def __str__(self) -> str:
        return "[" + ",".join(str(j) for j in self.J) + "]"


def _reindex_maps(config: SubsetConfig) -> list[tuple[int, ...]]:
    lv = config.levels
    return [partition.reindex_map(lv[k], lv[k + 1]) for k in range(config.nu - 1)]


def successor(s, z, config: SubsetConfig) -> tuple[int, ...]:
    """Next subset state after input ``z`` (code or (z+, z-) pair) from state vector ``s``."""
    s = tuple(int(v) for v in s)
    if len(s) != config.nu or any(not 0 <= a < j for a, j in zip(s, config.J)):
        raise ValueError(f"state {list(s)} is not valid for configuration {config}")
    maps = _reindex_maps(config)
    head = partition.subset_index(z, config.levels[0])
    return (head,) + tuple(maps[k][s[k]] for k in range(config.nu - 1))


def parallel_groups(s, config: SubsetConfig) -> list[tuple[int, ...]]:
    """Inputs (symbol codes) leaving ``s`` that share a successor.

    Membership depends only on the subset of the input in Omega(1), so the
    grouping is the same for every state; ``s`` is accepted for symmetry with
    the trellis API.
    """
    idx = config.levels[0].index_of
    groups: dict[int, list[int]] = {}
    for c in range(4):
        groups.setdefault(idx[c], []).append(c)
    return [tuple(groups[g]) for g in sorted(groups)]


@dataclass(frozen=True)
class SubsetTrellis:
    """Transition structure of a subset trellis.

    States are numbered in mixed radix with a(1) most significant.  Branch
    output labels are not stored on edges: they depend on each state's
    survivor symbols and come from :func:`rsse2h2t.wssjd.output_lookup`.
    """

    config: SubsetConfig
    states: np.ndarray  # (S, nu) subset indices
    succ: np.ndarray  # (S, 4) successor index per input code
    groups: tuple[tuple[int, ...], ...]
    group_of: np.ndarray  # (4,) group index of each input code
    in_state: np.ndarray = field(repr=False)  # (S, max_in) predecessor states, -1 padded
    in_group: np.ndarray = field(repr=False)
    in_count: np.ndarray = field(repr=False)

    @property
    def nu(self) -> int:
        return self.config.nu

    @property
    def n_states(self) -> int:
        return self.states.shape[0]

    def index(self, s) -> int:
        idx = 0
        for a, j in zip(s, self.config.J):
            idx = idx * j + int(a)
        return idx

    @cached_property
    def projection(self) -> np.ndarray:
        """Subset state index of every base-4 ML state code."""
        nu = self.nu
        lv = [lvl.index_of for lvl in self.config.levels]
        out = np.empty(4**nu, dtype=np.int64)
        for p in range(4**nu):
            digits = [(p // 4 ** (nu - k)) % 4 for k in range(1, nu + 1)]
            out[p] = self.index([lv[k][d] for k, d in enumerate(digits)])
        return out


def build(config: SubsetConfig, target: ChannelTarget) -> SubsetTrellis:
    if config.nu != target.memory:
        raise ValueError(
            f"configuration {config} has length {config.nu} but target memory is {target.memory}"
        )
    states = np.array(list(product(*[range(j) for j in config.J])), dtype=np.int64)
    groups = tuple(parallel_groups(states[0], config))
    group_of = np.empty(4, dtype=np.int64)
    for g, members in enumerate(groups):
        group_of[list(members)] = g
    S = states.shape[0]
    index = {tuple(int(v) for v in s): i for i, s in enumerate(states)}
    succ = np.empty((S, 4), dtype=np.int64)
    for i, s in enumerate(states):
        for c in range(4):
            succ[i, c] = index[successor(s, c, config)]
    incoming: list[list[tuple[int, int]]] = [[] for _ in range(S)]
    for i in range(S):
        for g, members in enumerate(groups):
            incoming[succ[i, members[0]]].append((i, g))
    width = max(len(v) for v in incoming)
    in_state = np.full((S, width), -1, dtype=np.int64)
    in_group = np.full((S, width), -1, dtype=np.int64)
    in_count = np.array([len(v) for v in incoming], dtype=np.int64)
    for t, preds in enumerate(incoming):
        for k, (s, g) in enumerate(sorted(preds)):
            in_state[t, k], in_group[t, k] = s, g
    return SubsetTrellis(config, states, succ, groups, group_of, in_state, in_group, in_count)
