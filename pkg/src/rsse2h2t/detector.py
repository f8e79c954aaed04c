"""Viterbi detection on full and subset trellises with decision feedback."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels, wssjd
from .channel import ChannelTarget, ItiModel, ReceivedPair, TrackPair
from .trellis import SubsetTrellis
from .wssjd import TransformedReceived

RENORM_INTERVAL = 1 << 10
ML_STATE_LIMIT = 4096


def traceback_depth(nu: int) -> int:
    return max(32, 8 * (nu + 1))


@dataclass
class DetectorState:
    """Recursion state at one time step, for inspection and step-by-step tests.

    ``survivor_ml`` holds, per subset state, the base-4 code of its last nu
    decided symbols (most recent most significant).
    """

    path_metric: np.ndarray
    survivor_ml: np.ndarray
    time: int = 0


@dataclass(frozen=True)
class DecodeResult:
    decoded: TrackPair
    errors_a: int | None
    errors_b: int | None
    final_metric: float
    codes: np.ndarray  # decided symbol codes over the counted span

    @property
    def bit_errors(self) -> int | None:
        if self.errors_a is None:
            return None
        return self.errors_a + self.errors_b


@dataclass(frozen=True)
class KernelPlan:
    """Arrays handed to the Viterbi kernel for one (trellis, target, ITI) triple."""

    nu: int
    wp: float
    wm: float
    succ: np.ndarray
    members: np.ndarray
    gsize: np.ndarray
    gkind: np.ndarray
    in_state: np.ndarray
    in_group: np.ndarray
    in_count: np.ndarray
    out_p: np.ndarray
    out_m: np.ndarray
    traceback: int


def _group_kind(group: tuple[int, ...], symmetric: bool) -> int:
    if len(group) == 1:
        return kernels.GROUP_SINGLE
    if not symmetric or len(group) > 2:
        return kernels.GROUP_EXPLICIT
    z1, z2 = wssjd.codes_to_symbols(list(group))
    # Symmetric channel: a pair differing only in z+ leaves y- identical, so
    # the decision reduces to a threshold on r+ (and vice versa).
    return kernels.GROUP_THRESHOLD_PLUS if z1[1] == z2[1] else kernels.GROUP_THRESHOLD_MINUS


def prepare(trellis: SubsetTrellis, target: ChannelTarget, iti: ItiModel) -> KernelPlan:
    if trellis.nu != target.memory:
        raise ValueError(f"trellis memory {trellis.nu} does not match target memory {target.memory}")
    groups = trellis.groups
    members = np.zeros((len(groups), 4), dtype=np.int64)
    for g, grp in enumerate(groups):
        members[g, : len(grp)] = grp
    gsize = np.array([len(g) for g in groups], dtype=np.int64)
    gkind = np.array([_group_kind(g, iti.symmetric) for g in groups], dtype=np.int64)
    out_p, out_m = wssjd.output_lookup(target, iti)
    wp, wm = wssjd.metric_weights(iti)
    return KernelPlan(
        nu=trellis.nu,
        wp=wp,
        wm=wm,
        succ=np.ascontiguousarray(trellis.succ),
        members=members,
        gsize=gsize,
        gkind=gkind,
        in_state=np.ascontiguousarray(trellis.in_state),
        in_group=np.ascontiguousarray(trellis.in_group),
        in_count=np.ascontiguousarray(trellis.in_count),
        out_p=np.ascontiguousarray(out_p),
        out_m=np.ascontiguousarray(out_m),
        traceback=traceback_depth(trellis.nu),
    )


def _kernel_args(plan: KernelPlan, rp: np.ndarray, rm: np.ndarray):
    return (
        np.ascontiguousarray(rp, dtype=np.float64),
        np.ascontiguousarray(rm, dtype=np.float64),
        plan.wp,
        plan.wm,
        plan.succ,
        plan.members,
        plan.gsize,
        plan.gkind,
        plan.in_state,
        plan.in_group,
        plan.in_count,
        plan.out_p,
        plan.out_m,
        plan.nu,
        plan.traceback,
        RENORM_INTERVAL,
    )


def _finish(codes: np.ndarray, final: float, truth: TrackPair | None, guard: int) -> DecodeResult:
    n = codes.shape[0]
    if 2 * guard >= n:
        raise ValueError(f"guard {guard} leaves no symbols out of {n}")
    kept = codes[guard : n - guard]
    decoded = wssjd.codes_to_tracks(kept)
    ea = eb = None
    if truth is not None:
        if len(truth) != n:
            raise ValueError("ground truth length differs from received length")
        ea = int(np.count_nonzero(decoded.track_a != truth.track_a[guard : n - guard]))
        eb = int(np.count_nonzero(decoded.track_b != truth.track_b[guard : n - guard]))
    return DecodeResult(decoded, ea, eb, final, kept.astype(np.int8))


def detect(
    received: TransformedReceived,
    trellis: SubsetTrellis,
    target: ChannelTarget,
    iti: ItiModel,
    truth: TrackPair | None = None,
    guard: int = 0,
    plan: KernelPlan | None = None,
    backend: str | None = None,
) -> DecodeResult:
    """Decode transformed samples on ``trellis``.

    ``guard`` symbols are dropped at both ends of the decoded block (and of
    the error count when ``truth`` is given).  ``backend`` forces ``"numba"``
    or ``"numpy"``; by default the module-level switch decides.
    """
    if len(received) == 0:
        raise ValueError("received sequence is empty")
    if plan is None:
        plan = prepare(trellis, target, iti)
    args = _kernel_args(plan, received.r_plus, received.r_minus)
    if backend is None:
        codes, final = kernels.rsse_viterbi(*args)
    elif backend == "numba":
        codes, final = kernels.rsse_viterbi_loop(*args)
    elif backend == "numpy":
        codes, final = kernels.rsse_viterbi_numpy(*args)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return _finish(np.asarray(codes), float(final), truth, guard)


def step(state: DetectorState, r_n: tuple[float, float], plan: KernelPlan) -> tuple[DetectorState, np.ndarray, np.ndarray]:
    """One add-compare-select step; returns the new state and (predecessor, input) per state.

    Mirrors a single iteration of the kernel recursion without renormalization.
    """
    nu = plan.nu
    d = min(state.time, nu)
    n_st = plan.succ.shape[0]
    top = 4 ** (nu - 1)
    new_pm = np.full(n_st, np.inf)
    new_ml = np.zeros(n_st, dtype=np.int64)
    bp_s = np.zeros(n_st, dtype=np.int64)
    bp_z = np.zeros(n_st, dtype=np.int64)
    for t in range(n_st):
        for j in range(plan.in_count[t]):
            s = plan.in_state[t, j]
            if state.path_metric[s] == np.inf:
                continue
            grp = plan.members[plan.in_group[t, j], : plan.gsize[plan.in_group[t, j]]]
            p = state.survivor_ml[s]
            c = _select(grp, p, d, r_n, plan)
            m = state.path_metric[s] + _metric(p, d, c, r_n, plan)
            if m < new_pm[t]:
                new_pm[t], bp_s[t], bp_z[t] = m, s, c
                new_ml[t] = c * top + p // 4
    return DetectorState(new_pm, new_ml, state.time + 1), bp_s, bp_z


def initial_state(plan: KernelPlan) -> DetectorState:
    pm = np.full(plan.succ.shape[0], np.inf)
    pm[0] = 0.0
    return DetectorState(pm, np.zeros(plan.succ.shape[0], dtype=np.int64), 0)


def _metric(p, d, c, r_n, plan: KernelPlan) -> float:
    e1 = r_n[0] - plan.out_p[d, p, c]
    e2 = r_n[1] - plan.out_m[d, p, c]
    return plan.wp * e1 * e1 + plan.wm * e2 * e2


def _select(grp, p, d, r_n, plan: KernelPlan) -> int:
    best, choice = np.inf, int(grp[0])
    for c in grp:
        m = _metric(p, d, int(c), r_n, plan)
        if m < best:
            best, choice = m, int(c)
    return choice


def pre_select(group, window, r_n, target: ChannelTarget, iti: ItiModel) -> int:
    """Choose one input code from a parallel ``group``.

    ``window`` holds the predecessor's survivor symbols ``[z_{n-1}, ..., z_{n-nu}]``
    (codes or (z+, z-) pairs).  Symmetric channels threshold the one received
    component in which the pair differs; otherwise the explicit metrics are
    compared.  Ties go to the smaller code.
    """
    group = sorted(int(wssjd.symbols_to_codes([g])[0]) if not np.isscalar(g) else int(g) for g in group)
    if len(group) < 2:
        raise ValueError("pre-selection needs at least two parallel inputs")
    past = np.asarray(window)
    if past.ndim == 1:
        past = wssjd.codes_to_symbols(past)
    past = past.reshape(-1, 2)
    outs = {c: wssjd.noiseless_outputs(np.vstack([wssjd.codes_to_symbols([c]), past]), target, iti) for c in group}
    kind = _group_kind(tuple(group), iti.symmetric)
    if kind in (kernels.GROUP_THRESHOLD_PLUS, kernels.GROUP_THRESHOLD_MINUS):
        k = 0 if kind == kernels.GROUP_THRESHOLD_PLUS else 1
        c1, c2 = group
        return int(kernels._pick_threshold(r_n[k], outs[c1][k], outs[c2][k], c1, c2))
    best, choice = np.inf, group[0]
    for c in group:
        m = wssjd.branch_metric(r_n, outs[c], iti)
        if m < best:
            best, choice = m, c
    return choice


# Original (a, b) coordinates of each symbol code.
_CODE_AB = np.array([(1, 1), (1, -1), (-1, 1), (-1, -1)], dtype=np.float64)


def detect_ml_reference(
    received: ReceivedPair,
    target: ChannelTarget,
    iti: ItiModel,
    truth: TrackPair | None = None,
    guard: int = 0,
) -> DecodeResult:
    """Joint Viterbi on the untransformed channel with 4^nu states.

    Same state numbering, tie rules, traceback and renormalization as the
    transformed detector, but metrics are plain Euclidean in (a, b).
    """
    nu = target.memory
    n_ml = 4**nu
    if n_ml > ML_STATE_LIMIT:
        raise ValueError(f"joint trellis with 4^{nu} states exceeds the {ML_STATE_LIMIT}-state limit")
    ra = np.asarray(received.r_a, dtype=np.float64)
    rb = np.asarray(received.r_b, dtype=np.float64)
    n_sym = ra.shape[0]
    if n_sym == 0:
        raise ValueError("received sequence is empty")
    h = target.taps
    mix = iti.matrix
    top = 4 ** (nu - 1)
    p = np.arange(n_ml)
    past = np.empty((n_ml, nu), dtype=np.int64)
    rest = p.copy()
    for k in range(nu, 0, -1):
        past[:, k - 1] = rest % 4
        rest //= 4
    # Outputs by [depth, new state t, k]; t = c*top + p//4 with p = (t % top)*4 + k.
    t = np.arange(n_ml)
    pred = (t % top)[:, None] * 4 + np.arange(4)[None, :]  # (S, 4)
    cur = t // top
    ya = np.empty((nu + 1, n_ml, 4))
    yb = np.empty((nu + 1, n_ml, 4))
    for depth in range(nu + 1):
        hp = h[1:].copy()
        hp[depth:] = 0.0
        xa = _CODE_AB[past[pred], 0]  # (S, 4, nu)
        xb = _CODE_AB[past[pred], 1]
        ca = h[0] * _CODE_AB[cur, 0][:, None] + xa @ hp
        cb = h[0] * _CODE_AB[cur, 1][:, None] + xb @ hp
        ya[depth] = mix[0, 0] * ca + mix[0, 1] * cb
        yb[depth] = mix[1, 0] * ca + mix[1, 1] * cb
    T = traceback_depth(nu)
    pm = np.full(n_ml, np.inf)
    pm[0] = 0.0
    bp_k = np.zeros((n_sym, n_ml), dtype=np.int8)
    codes = np.zeros(n_sym, dtype=np.int8)
    rows = np.arange(n_ml)
    offset = 0.0
    released = 0

    def trace(st, stop, keep, upto):
        for m in range(upto, stop - 1, -1):
            if m < keep:
                codes[m] = st // top
            st = int(pred[st, bp_k[m, st]])

    for n in range(n_sym):
        d = min(n, nu)
        ea = ra[n] - ya[d]
        eb = rb[n] - yb[d]
        cand = pm[pred] + (ea * ea + eb * eb)
        k = np.argmin(cand, axis=1)
        pm = cand[rows, k]
        bp_k[n] = k
        if (n + 1) % RENORM_INTERVAL == 0:
            mn = pm.min()
            offset += mn
            pm = pm - mn
        if n + 1 - released >= 2 * T:
            keep = n + 1 - T
            trace(int(np.argmin(pm)), released, keep, n)
            released = keep
    st = int(np.argmin(pm))
    final = float(pm[st] + offset)
    trace(st, released, n_sym, n_sym - 1)
    return _finish(codes, final, truth, guard)
