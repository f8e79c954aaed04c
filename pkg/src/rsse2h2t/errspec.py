"""Error events, distance parameters and distance-spectrum search.

Error symbols are integers 0..8 (see :data:`rsse2h2t.partition.ERROR_SYMBOLS`).
States of the error state diagram are nu-tuples of error symbols, packed in
base 9 with the most recent symbol most significant.  A closed error event
starts from the all-zero state with a nonzero symbol and stops at the first
merging state it reaches; its distance is the sum of the edge outputs along
the way.

Zero cycles (closed walks with zero output) make families of events share
one distance.  The search collapses every such family into one
:class:`ErrorEvent` whose literal goes round each cycle once, with the cycle
pattern marked as repeatable.
"""
from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import partition
from .channel import ChannelTarget, ItiModel
from .partition import ERROR_SYMBOLS, NEGATE, SWAP
from .trellis import SubsetConfig

MAX_MEMORY = 5
DEFAULT_MARGIN = 1.3
# Slack added to d_max so that events sitting exactly on the threshold survive
# rounding in the accumulated sums.
TOLERANCE = 1e-9

_CLOSED_FORM_D0 = {"dicode": 8.0, "pr2": 16.0, "epr4": 16.0}


# ---------------------------------------------------------------- distances


def _inner_sums(seq, taps):
    e = ERROR_SYMBOLS[np.asarray(seq, dtype=np.int64)].astype(np.float64)
    return np.convolve(e[:, 0], taps), np.convolve(e[:, 1], taps)


def _output_energy(sp, sm, iti: ItiModel):
    """Distance increment(s) for inner sums (sum_i h_i e+, sum_i h_i e-).

    Equals half the weighted WSSJD metric of the difference, which is also the
    plain Euclidean distance in the original (a, b) coordinates.
    """
    eps, de = iti.epsilon, iti.delta_epsilon
    u = (1.0 + eps) * sp + de * sm
    v = (1.0 - eps) * sm - de * sp
    return 0.5 * (u * u + v * v)


def merging_sets(config: SubsetConfig) -> list[frozenset[int]]:
    """Intrasubset error sets E_a(Omega(k)) for k = 1..nu."""
    return [partition.intrasubset_errors(lvl) for lvl in config.levels]


def is_merging(tail, config: SubsetConfig) -> bool:
    """True when ``tail`` (most recent first) lies in a merging state, zero state included."""
    tail = [int(t) for t in tail]
    if len(tail) != config.nu:
        raise ValueError(f"tail must have nu = {config.nu} symbols")
    return all(t in ea for t, ea in zip(tail, merging_sets(config)))


def is_early_merged(tail, config: SubsetConfig) -> bool:
    """Early-merging condition: nonzero tail with tail[k] in E_a(Omega(k)) for every k."""
    tail = [int(t) for t in tail]
    return any(tail) and is_merging(tail, config)


def event_distance(
    e,
    target: ChannelTarget,
    iti: ItiModel,
    mode: str = "ml",
    config: SubsetConfig | None = None,
) -> float:
    """Distance parameter of the literal error sequence ``e``.

    ``mode="ml"`` lets the convolution tail run out (all outputs counted).
    ``mode="rsse"`` stops at the first time the trailing nu symbols (zeros
    assumed after the literal) form a merging state of ``config``.
    """
    seq = [int(v) for v in e]
    if not seq:
        raise ValueError("error sequence is empty")
    if any(not 0 <= v < 9 for v in seq):
        raise ValueError("error symbols are indices 0..8")
    sp, sm = _inner_sums(seq, target.taps)
    d = _output_energy(sp, sm, iti)
    if mode == "ml":
        return float(d.sum())
    if mode not in ("rsse", "rsse-truncated"):
        raise ValueError(f"unknown mode {mode!r}")
    if config is None:
        raise ValueError("truncated distance needs a subset configuration")
    nu = target.memory
    if config.nu != nu:
        raise ValueError("configuration length differs from target memory")
    padded = seq + [0] * nu
    for k in range(1, len(padded) + 1):
        tail = [padded[k - 1 - i] if k - 1 - i >= 0 else 0 for i in range(nu)]
        if is_merging(tail, config):
            return float(d[:k].sum())
    return float(d.sum())  # pragma: no cover - the zero tail always merges


def dmin_closed_form(target: ChannelTarget | str, epsilon: float, delta_epsilon: float = 0.0,
                     d0: float | None = None) -> float:
    """ML minimum distance from the closed-form expressions.

    Symmetric channels need a dicode, PR2 or EPR4 target.  The asymmetric
    formula scales the single-track distance ``d0`` (taken from the preset
    when omitted).
    """
    name = target if isinstance(target, str) else (target.name or "")
    name = name.lower()
    eps, de = float(epsilon), float(delta_epsilon)
    ItiModel(eps, de)
    if de == 0.0:
        knee = 2.0 - math.sqrt(3.0)
        if name == "dicode":
            return 8.0 * (1 + eps * eps) if eps <= knee else 16.0 * (1 - eps) ** 2
        if name in ("pr2", "epr4"):
            return 16.0 * (1 + eps * eps) if eps <= knee else 32.0 * (1 - eps) ** 2
        if d0 is None:
            raise ValueError(f"no symmetric closed form for target {name or 'custom'!r}")
    if d0 is None:
        if name not in _CLOSED_FORM_D0:
            raise ValueError(f"single-track distance d0 is required for target {name or 'custom'!r}")
        d0 = _CLOSED_FORM_D0[name]
    if (eps + de) ** 2 - 4 * eps + 1 >= 0:
        return (1 + (eps - de) ** 2) * d0
    return 2 * ((1 - eps) ** 2 + de * de) * d0


def e1_min_distance(j1: int, h0: float, epsilon: float, delta_epsilon: float = 0.0) -> float:
    """Minimum distance of events early-merged one step after they start."""
    j1 = int(j1)
    if j1 not in (2, 3):
        raise ValueError("parallel-branch events need J_1 in {2, 3}")
    d1, d2, _ = partition.delta_squares(epsilon)
    return h0 * h0 * (d1 if j1 == 3 else d2) + 8 * delta_epsilon**2 * h0 * h0


# ---------------------------------------------------------------- diagram


def _integer_taps(taps: np.ndarray) -> np.ndarray | None:
    """Taps scaled to integers by a power of ten, or None when none fits."""
    for k in range(7):
        scaled = taps * 10**k
        if np.all(np.abs(scaled - np.round(scaled)) < 1e-9):
            return np.round(scaled).astype(np.int64)
    return None


@dataclass(frozen=True)
class ZeroCycle:
    pattern: tuple[int, ...]  # least rotation of the input labels
    states: tuple[int, ...]  # cycle states, state k entered by input pattern k (before rotation)
    labels: tuple[int, ...]  # input labels aligned with ``states``

    def __str__(self) -> str:
        return "(" + ",".join(str(v) for v in self.pattern) + ")^inf"


def least_rotation(pattern) -> tuple[int, ...]:
    p = tuple(int(v) for v in pattern)
    return min(p[i:] + p[:i] for i in range(len(p))) if p else p


class ErrorStateDiagram:
    """Error state diagram of a target under an ITI model and subset configuration."""

    def __init__(self, target: ChannelTarget, iti: ItiModel, config: SubsetConfig | None = None):
        nu = target.memory
        if nu > MAX_MEMORY:
            raise ValueError(f"error state diagram limited to memory <= {MAX_MEMORY}, got {nu}")
        if config is None:
            config = SubsetConfig.full(nu)
        if config.nu != nu:
            raise ValueError(f"configuration {config} has length {config.nu}, target memory is {nu}")
        self.target, self.iti, self.config, self.nu = target, iti, config, nu
        n = 9**nu
        self.n_states = n
        s = np.arange(n)
        digits = np.empty((n, nu), dtype=np.int64)  # digits[:, i] = e_{k-1-i}
        rest = s.copy()
        for i in range(nu - 1, -1, -1):
            digits[:, i] = rest % 9
            rest //= 9
        self.digits = digits
        top = 9 ** (nu - 1)
        e = np.arange(9)
        self.next = (e[None, :] * top + s[:, None] // 9).astype(np.int64)

        past = ERROR_SYMBOLS[digits]  # (n, nu, 2)
        cur = ERROR_SYMBOLS  # (9, 2)
        taps = target.taps
        sp = past[:, :, 0].astype(np.float64) @ taps[1:]
        sm = past[:, :, 1].astype(np.float64) @ taps[1:]
        sp = sp[:, None] + taps[0] * cur[None, :, 0]
        sm = sm[:, None] + taps[0] * cur[None, :, 1]
        self.out = _output_energy(sp, sm, iti)
        itaps = _integer_taps(taps)
        if itaps is not None:
            ip = past[:, :, 0] @ itaps[1:]
            im = past[:, :, 1] @ itaps[1:]
            self.zero = ((ip[:, None] + itaps[0] * cur[None, :, 0]) == 0) & (
                (im[:, None] + itaps[0] * cur[None, :, 1]) == 0
            )
            self.exact = True
        else:
            self.zero = (np.abs(sp) < 1e-12) & (np.abs(sm) < 1e-12)
            self.exact = False
        self.out = np.where(self.zero, 0.0, self.out)

        ea = merging_sets(config)
        merge = np.ones(n, dtype=bool)
        for i in range(nu):
            merge &= np.isin(digits[:, i], sorted(ea[i]))
        self.merging = merge
        self._find_cycles()

    # -- structure

    def state(self, tail) -> int:
        """Index of the state whose symbols, most recent first, are ``tail``."""
        idx = 0
        for t in tail:
            idx = idx * 9 + int(t)
        return idx

    def tail(self, s: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.digits[s])

    @property
    def merging_states(self) -> np.ndarray:
        return np.flatnonzero(self.merging)

    def _find_cycles(self):
        n = self.n_states
        succ = np.full(n, -1, dtype=np.int64)
        label = np.full(n, -1, dtype=np.int64)
        for s in np.flatnonzero(~self.merging):
            z = np.flatnonzero(self.zero[s])
            if len(z) > 1:  # pragma: no cover - h_0 != 0 makes the zero input unique
                raise RuntimeError("zero-output successor is not unique")
            if len(z) == 1 and not self.merging[self.next[s, z[0]]]:
                succ[s], label[s] = self.next[s, z[0]], z[0]
        color = np.zeros(n, dtype=np.int8)  # 0 new, 1 on stack, 2 done
        cycles: list[ZeroCycle] = []
        cycle_of = np.full(n, -1, dtype=np.int64)
        position = np.full(n, -1, dtype=np.int64)
        for start in range(n):
            if color[start]:
                continue
            walk = []
            s = start
            while s >= 0 and color[s] == 0:
                color[s] = 1
                walk.append(s)
                s = succ[s]
            if s >= 0 and color[s] == 1:
                k = walk.index(s)
                loop = walk[k:]
                # state loop[i+1] is entered from loop[i] by label[loop[i]]
                entered = tuple(int(v) for v in loop[1:] + loop[:1])
                labels = tuple(int(label[v]) for v in loop)
                cid = len(cycles)
                cycles.append(ZeroCycle(least_rotation(labels), entered, labels))
                for i, v in enumerate(entered):
                    cycle_of[v], position[v] = cid, i
            for v in walk:
                color[v] = 2
        self.cycles = cycles
        self.cycle_of = cycle_of
        self.position = position
        self.zero_successor = succ

    def gamma(self, s: int) -> ZeroCycle | None:
        c = self.cycle_of[s]
        return None if c < 0 else self.cycles[c]

    def gamma_path(self, s: int, j: int) -> tuple[int, ...]:
        """Input labels walking the zero cycle from state ``s`` to state ``j``."""
        cyc = self.gamma(s)
        if cyc is None or self.cycle_of[j] != self.cycle_of[s]:
            raise ValueError("states are not on a common zero cycle")
        p = len(cyc.states)
        i, k = int(self.position[s]), int(self.position[j])
        steps = (k - i) % p
        # moving from entered[i] to entered[i+1] uses the label of entered[i]
        return tuple(int(self.zero_label(cyc.states[(i + t) % p])) for t in range(steps))

    def zero_label(self, s: int) -> int:
        return int(np.flatnonzero(self.zero[s])[0])

    # -- shortest paths

    def _start_edges(self):
        return [(float(self.out[0, e]), int(self.next[0, e]), e) for e in range(1, 9)]

    def forward_bounds(self) -> np.ndarray:
        """Minimum distance from the zero state (first symbol nonzero) to every state."""
        dist = np.full(self.n_states, np.inf)
        heap = []
        for d, t, _ in self._start_edges():
            if d < dist[t]:
                dist[t] = d
                heapq.heappush(heap, (d, t))
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u] or self.merging[u]:
                continue
            for e in range(9):
                v = self.next[u, e]
                nd = d + self.out[u, e]
                if nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        g = dist.copy()
        g[0] = 0.0
        return g

    @cached_property
    def _predecessors(self):
        pred = [[] for _ in range(self.n_states)]
        for u in range(self.n_states):
            if self.merging[u]:
                continue
            for e in range(9):
                pred[self.next[u, e]].append((u, e))
        return pred

    def backward_bounds(self, targets: np.ndarray) -> np.ndarray:
        """Minimum distance from every state to a state in ``targets`` (boolean mask).

        Paths stop at the first merging state, so merging states only appear
        as endpoints.  The zero state is treated as an endpoint here; see
        :meth:`closed_bound` for events leaving it.
        """
        dist = np.full(self.n_states, np.inf)
        heap = []
        for t in np.flatnonzero(targets):
            dist[t] = 0.0
            heapq.heappush(heap, (0.0, int(t)))
        pred = self._predecessors
        while heap:
            d, v = heapq.heappop(heap)
            if d > dist[v]:
                continue
            for u, e in pred[v]:
                nd = d + self.out[u, e]
                if nd < dist[u]:
                    dist[u] = nd
                    heapq.heappush(heap, (nd, u))
        if not targets[0]:
            dist[0] = np.inf
        return dist

    def closed_bound(self, targets: np.ndarray) -> float:
        """Shortest closed event from the zero state into ``targets``."""
        dist = self.backward_bounds(targets)
        return float(min((d + dist[t] for d, t, _ in self._start_edges()), default=np.inf))


def find_zero_cycles(target: ChannelTarget, config: SubsetConfig | None = None,
                     iti: ItiModel | None = None) -> list[ZeroCycle]:
    """Zero cycles avoiding merging states, plus the zero-state loop 0^inf first.

    Which edges have zero output does not depend on the ITI levels, so ``iti``
    is optional.
    """
    diagram = ErrorStateDiagram(target, iti or ItiModel(0.0), config)
    zero_loop = ZeroCycle((0,), (0,), (0,))
    return [zero_loop] + sorted(diagram.cycles, key=lambda c: (len(c.pattern), c.pattern))


# ---------------------------------------------------------------- events


def _image(symbols, k: int) -> tuple[int, ...]:
    if k == 0:
        return tuple(symbols)
    if k == 1:
        return tuple(int(NEGATE[s]) for s in symbols)
    if k == 2:
        return tuple(int(SWAP[s]) for s in symbols)
    return tuple(int(NEGATE[SWAP[s]]) for s in symbols)


def _positive_first(sym: int, symmetric: bool) -> bool:
    ea, eb = partition.ERROR_SYMBOLS_AB[sym]
    if ea > 0:
        return True
    # Without track-swap symmetry a track-b-only first symbol cannot be
    # moved onto track a; take the one with positive e^b instead.
    return not symmetric and ea == 0 and eb > 0


@dataclass(frozen=True)
class ErrorEvent:
    """A closed error event, possibly standing for a family through zero cycles.

    ``symbols`` is the literal with every zero cycle traversed once.  Each
    entry ``(q, p)`` of ``cycles`` marks that after the first ``q`` symbols the
    event sits on a zero cycle of period ``p``; when ``p <= q`` the marker
    covers ``symbols[q-p:q]``, otherwise the pattern is inserted unrolled
    zero times (marker only).
    """

    symbols: tuple[int, ...]
    distance: float
    merge_kind: str  # "zero-state" or "early"
    cycles: tuple[tuple[int, int], ...] = ()
    patterns: tuple[tuple[int, ...], ...] = ()
    multiplicity: int = 1

    @property
    def literal(self) -> tuple[int, ...]:
        return self.symbols

    @property
    def has_cycles(self) -> bool:
        return bool(self.cycles)

    def render(self, with_distance: bool = True) -> str:
        marks: dict[int, list] = {}
        for (q, p), pat in zip(self.cycles, self.patterns):
            marks.setdefault(q, []).append((p, pat))
        syms = self.symbols
        # Build tokens left to right; in-place markers swallow the preceding p symbols.
        tokens: list[str] = []
        for q in range(len(syms) + 1):
            for p, pat in marks.get(q, []):
                if p <= q and tuple(syms[q - p : q]) == tuple(pat) and len(tokens) >= p:
                    inner = " ".join(tokens[-p:])
                    del tokens[-p:]
                    tokens.append(f"({inner})^inf")
                else:
                    tokens.append("(" + " ".join(str(v) for v in pat) + ")^inf")
            if q < len(syms):
                tokens.append(str(syms[q]))
        text = "[" + " ".join(tokens) + "]"
        return f"{text}/{self.distance:.4f}" if with_distance else text

    def __str__(self) -> str:
        return self.render()

    def images(self, symmetric: bool = True) -> list["ErrorEvent"]:
        ks = (0, 1, 2, 3) if symmetric else (0, 1)
        out = []
        for k in ks:
            out.append(
                ErrorEvent(
                    _image(self.symbols, k),
                    self.distance,
                    self.merge_kind,
                    self.cycles,
                    tuple(_image(p, k) for p in self.patterns),
                    self.multiplicity,
                )
            )
        return out

    def canonical(self, symmetric: bool = True) -> "ErrorEvent":
        imgs = self.images(symmetric)
        distinct = {img.symbols for img in imgs}
        good = [img for img in imgs if _positive_first(img.symbols[0], symmetric)]
        best = min(good or imgs, key=lambda ev: ev.symbols)
        return ErrorEvent(best.symbols, best.distance, best.merge_kind, best.cycles, best.patterns, len(distinct))

    def expand(self, max_length: int, patterns_by_mark=None) -> list[tuple[int, ...]]:
        """All literal sequences in the family with length <= ``max_length``.

        Each cycle may be traversed any number of extra full times.
        """
        results: list[tuple[int, ...]] = []
        syms = self.symbols
        marks = sorted(zip(self.cycles, self.patterns))

        def rec(k: int, prefix: tuple[int, ...], start: int):
            if k == len(marks):
                seq = prefix + tuple(syms[start:])
                if len(seq) <= max_length:
                    results.append(seq)
                return
            (q, p), pat = marks[k]
            head = prefix + tuple(syms[start:q])
            rot = tuple(syms[q - p : q]) if p <= q else tuple(pat)
            extra = 0
            while len(head) + extra * p + (len(syms) - q) <= max_length:
                rec(k + 1, head + rot * extra, q)
                extra += 1

        rec(0, (), 0)
        return results


@dataclass
class DistanceReport:
    target: ChannelTarget
    iti: ItiModel
    config: SubsetConfig
    d_max: float
    events: list[ErrorEvent]
    mode: str = "all"
    warnings: list[str] = field(default_factory=list)
    d_min_ml: float | None = None

    @property
    def d_min(self) -> float:
        return min((e.distance for e in self.events), default=math.inf)

    @property
    def d_min_early(self) -> float:
        return min((e.distance for e in self.events if e.merge_kind == "early"), default=math.inf)

    @property
    def early_below_ml(self) -> bool | None:
        if self.d_min_ml is None:
            return None
        return self.d_min_early < self.d_min_ml - TOLERANCE

    def lines(self) -> list[str]:
        return [e.render() for e in self.events]

    def serialize(self) -> str:
        return "".join(line + "\n" for line in self.lines())


def _search(diagram: ErrorStateDiagram, d_max: float, mode: str, cap: int):
    """Enumerate closed events with distance <= d_max.

    Step 1 collects fragments: walks from an anchor (zero state or a zero
    cycle state) that avoid zero-cycle states and merging states until they
    hit one.  Step 2 walks the fragment graph, hopping along each reached
    cycle to any of its states before taking the next fragment.  Without
    zero cycles step 2 degenerates to plain depth-first search from the zero
    state.
    """
    n = diagram.n_states
    merging = diagram.merging
    if mode == "all":
        targets = merging.copy()
    elif mode == "early":
        targets = merging.copy()
        targets[0] = False
    elif mode == "zero":
        targets = np.zeros(n, dtype=bool)
        targets[0] = True
    else:
        raise ValueError(f"unknown search mode {mode!r}")
    on_cycle = diagram.cycle_of >= 0
    g = diagram.forward_bounds()
    h = diagram.backward_bounds(targets)
    limit = d_max + TOLERANCE
    out, nxt = diagram.out, diagram.next
    notes: list[str] = []
    fragments: dict[int, list[tuple[int, tuple[int, ...], float]]] = {}

    def collect(anchor: int):
        base = g[anchor]
        found = []
        skip = diagram.zero_label(anchor) if on_cycle[anchor] else 0
        first = [e for e in range(9) if e != skip] if anchor else list(range(1, 9))
        stack = [(int(nxt[anchor, e]), (e,), float(out[anchor, e])) for e in reversed(first)]
        while stack:
            s, path, d = stack.pop()
            if base + d + h[s] > limit:
                continue
            if merging[s] or on_cycle[s]:
                if targets[s] or on_cycle[s]:
                    found.append((s, path, d))
                continue
            if len(path) >= cap:
                notes.append(f"fragment length cap {cap} reached below d_max at {list(path)}")
                continue
            for e in range(8, -1, -1):
                stack.append((int(nxt[s, e]), path + (e,), d + float(out[s, e])))
        return found

    def frags(anchor: int):
        if anchor not in fragments:
            fragments[anchor] = collect(anchor)
        return fragments[anchor]

    events: list[ErrorEvent] = []

    def walk(anchor: int, lit: tuple[int, ...], acc: float, marks, pats):
        for end, path, d in frags(anchor):
            tot = acc + d
            if tot + h[end] > limit:
                continue
            seq = lit + path
            if not on_cycle[end]:
                kind = "zero-state" if end == 0 else "early"
                events.append(ErrorEvent(seq, tot, kind, marks, pats))
                continue
            cyc = diagram.gamma(end)
            q = len(seq)
            p = len(cyc.states)
            pat = _pattern_into(diagram, end)
            for j in cyc.states:
                if tot + h[j] > limit:
                    continue
                walk(int(j), seq + diagram.gamma_path(end, int(j)), tot, marks + ((q, p),), pats + (pat,))

    walk(0, (), 0.0, (), ())
    return events, notes


def _pattern_into(diagram: ErrorStateDiagram, s: int) -> tuple[int, ...]:
    """Cycle labels ending at state ``s`` (the p inputs that lead round into ``s``)."""
    cyc = diagram.gamma(s)
    p = len(cyc.states)
    k = int(diagram.position[s])
    # entered[k] is reached by labels[k]; going backwards round the cycle
    return tuple(cyc.labels[(k - p + 1 + t) % p] for t in range(p))


def search_events(
    target: ChannelTarget,
    config: SubsetConfig | None,
    iti: ItiModel,
    d_max: float | None = None,
    mode: str = "all",
    cap: int | None = None,
    diagram: ErrorStateDiagram | None = None,
) -> DistanceReport:
    """All closed error events with distance <= ``d_max``.

    ``mode`` selects the endpoints: ``"all"`` (any merging state), ``"early"``
    (nonzero merging states only) or ``"zero"`` (all-zero state only).
    Events are canonicalized under the channel's symmetries, deduplicated and
    sorted by distance then literal.
    """
    if config is None:
        config = SubsetConfig.full(target.memory)
    if diagram is None:
        diagram = ErrorStateDiagram(target, iti, config)
    d_ml = None
    if d_max is None:
        d_ml = default_reference_distance(target, iti)
        d_max = DEFAULT_MARGIN * d_ml
    if not d_max > 0:
        raise ValueError("d_max must be positive")
    if cap is None:
        cap = 4 * (target.memory + 2)
    raw, notes = _search(diagram, float(d_max), mode, cap)
    symmetric = iti.symmetric
    seen: dict[tuple, ErrorEvent] = {}
    for ev in raw:
        c = ev.canonical(symmetric)
        key = (c.symbols, c.cycles)
        if key not in seen:
            seen[key] = c
    events = sorted(seen.values(), key=lambda e: (round(e.distance, 9), e.symbols, e.cycles))
    notes = sorted(set(notes))
    for msg in notes[:1]:
        warnings.warn(f"spectrum may be incomplete: {msg}", RuntimeWarning, stacklevel=2)
    report = DistanceReport(target, iti, config, float(d_max), events, mode, notes, d_ml)
    return report


def shortest_event(diagram: ErrorStateDiagram, mode: str = "zero") -> float:
    """Exact minimum event distance to the chosen endpoints (Dijkstra)."""
    targets = diagram.merging.copy()
    if mode == "zero":
        targets[:] = False
        targets[0] = True
    elif mode == "early":
        targets[0] = False
    elif mode != "all":
        raise ValueError(f"unknown mode {mode!r}")
    return diagram.closed_bound(targets)


def dmin_generic(target: ChannelTarget, iti: ItiModel) -> float:
    """ML minimum distance by search on the full configuration.

    The exact shortest closed event sets the search threshold; the search
    then confirms it with an explicit event.
    """
    diagram = ErrorStateDiagram(target, iti, SubsetConfig.full(target.memory))
    best = shortest_event(diagram, "zero")
    report = search_events(target, diagram.config, iti, best * (1 + 1e-9) + TOLERANCE, mode="zero",
                           diagram=diagram)
    if not report.events:  # pragma: no cover - Dijkstra and the search agree by construction
        raise RuntimeError("search found no event at the shortest-path distance")
    return report.d_min


def dmin_early(target: ChannelTarget, config: SubsetConfig, iti: ItiModel) -> float:
    """Minimum distance over early-merged events of ``config`` (inf if none)."""
    return shortest_event(ErrorStateDiagram(target, iti, config), "early")


def default_reference_distance(target: ChannelTarget, iti: ItiModel) -> float:
    if (target.name or "") in _CLOSED_FORM_D0:
        return dmin_closed_form(target, iti.epsilon, iti.delta_epsilon)
    return dmin_generic(target, iti)


def parse_event(text: str) -> tuple[tuple[int, ...], tuple[tuple[int, int], ...], float | None]:
    """Parse ``[5 (2 1)^inf 0]/24.2400`` into (literal, cycle marks, distance)."""
    text = text.strip()
    dist = None
    if "/" in text:
        text, d = text.rsplit("/", 1)
        dist = float(d)
    body = text.strip().strip("[]").replace("^\\infty", "^inf").replace("^∞", "^inf")
    syms: list[int] = []
    marks: list[tuple[int, int]] = []
    i = 0
    tokens = body.replace("(", " ( ").replace(")", " ) ").split()
    group: list[int] | None = None
    while i < len(tokens):
        tok = tokens[i]
        if tok == "(":
            group = []
        elif tok == ")":
            if group is None:
                raise ValueError(f"unbalanced parenthesis in {text!r}")
            syms.extend(group)
            marks.append((len(syms), len(group)))
            group = None
            if i + 1 < len(tokens) and tokens[i + 1].startswith("^"):
                i += 1
        elif tok.startswith("^"):
            pass
        else:
            (group if group is not None else syms).append(int(tok))
        i += 1
    if group is not None:
        raise ValueError(f"unbalanced parenthesis in {text!r}")
    return tuple(syms), tuple(marks), dist


def notation_members(text: str) -> set[tuple[int, ...]]:
    """Short literal sequences a table entry may stand for.

    Published tables write a zero cycle as ``(a b)^inf`` without fixing the
    phase at which the run starts or stops, so each marked group is read as
    any run of its periodic pattern with length p..2p and any starting phase.
    """
    body = text.split("/", 1)[0].strip().strip("[]")
    body = body.replace("^\\infty", "^inf").replace("^∞", "^inf")
    segments: list[tuple[int, ...] | list[tuple[int, ...]]] = []
    tokens = body.replace("(", " ( ").replace(")", " ) ").split()
    group = None
    for tok in tokens:
        if tok == "(":
            group = []
        elif tok == ")":
            pat = tuple(group)
            p = len(pat)
            runs = []
            for phase in range(p):
                cyc = pat[phase:] + pat[:phase]
                for length in range(p, 2 * p + 1):
                    runs.append(tuple(cyc[i % p] for i in range(length)))
            segments.append(runs)
            group = None
        elif tok.startswith("^"):
            continue
        elif group is not None:
            group.append(int(tok))
        else:
            segments.append((int(tok),))
    members: set[tuple[int, ...]] = {()}
    for seg in segments:
        options = seg if isinstance(seg, list) else [seg]
        members = {m + o for m in members for o in options}
    return members


def printed_tolerance(value: str) -> float:
    """Half a unit in the last printed decimal of ``value``."""
    value = value.strip()
    places = len(value.split(".", 1)[1]) if "." in value else 0
    return 0.5 * 10.0**-places + 1e-9


def listing_matches(text: str, events, symmetric: bool = True) -> bool:
    """True when a table entry ``[...]/d`` shares a member with a reported event at distance d.

    The distance is compared to the precision it is printed with.
    """
    _, _, dist = parse_event(text)
    tol = printed_tolerance(text.rsplit("/", 1)[1]) if "/" in text else None
    members = notation_members(text)
    longest = max(len(m) for m in members)
    for ev in events:
        if dist is not None and abs(ev.distance - dist) > tol:
            continue
        for seq in ev.expand(longest):
            if orbit(seq, symmetric) & members:
                return True
    return False


def orbit(symbols, symmetric: bool = True) -> set[tuple[int, ...]]:
    ks = (0, 1, 2, 3) if symmetric else (0, 1)
    return {_image(tuple(symbols), k) for k in ks}
