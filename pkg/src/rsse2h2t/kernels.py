"""Viterbi recursion on a subset trellis with decision feedback.

Two interchangeable implementations share one contract:

* :func:`rsse_viterbi_loop` - scalar loops, compiled with numba;
* :func:`rsse_viterbi_numpy` - vectorized over states, one numpy pass per step.

Both return bit-identical decisions.  :func:`rsse_viterbi` dispatches on
:data:`rsse2h2t._accel.USE_NUMBA`.

Arguments (all arrays C-contiguous):

``rp, rm``            transformed received samples, float64[N]
``wp, wm``            metric weights (1+eps)^2, (1-eps)^2
``succ``              int64[S, 4] successor per input code
``members, gsize``    int64[G, 4] group members (ascending codes), int64[G]
``gkind``             int64[G]: 0 single input, 1 threshold on r+, 2 threshold
                      on r-, 3 explicit metric comparison
``in_state, in_group, in_count``  incoming (state, group) pairs per state,
                      sorted by state index
``out_p, out_m``      float64[nu+1, 4**nu, 4] noiseless outputs by
                      (depth, survivor ML state, input)
``traceback``         decision delay T; symbols are released in chunks once
                      2T undecided steps accumulate, so each release has
                      delay >= T
``renorm``            subtract the minimum path metric every ``renorm`` steps
"""
from __future__ import annotations

import numpy as np

from . import _accel

GROUP_SINGLE = 0
GROUP_THRESHOLD_PLUS = 1
GROUP_THRESHOLD_MINUS = 2
GROUP_EXPLICIT = 3


def _pick_threshold(r, y1, y2, c1, c2):
    # Inputs of a pair differ in one component only; choose the closer output.
    mid = 0.5 * (y1 + y2)
    if y1 >= y2:
        return c1 if r >= mid else c2
    return c1 if r <= mid else c2


_pick_threshold_jit = _accel.njit(_pick_threshold)


def _rsse_viterbi_loop(rp, rm, wp, wm, succ, members, gsize, gkind, in_state, in_group, in_count,
                       out_p, out_m, nu, traceback, renorm):
    n_sym = rp.shape[0]
    n_st = succ.shape[0]
    n_grp = gsize.shape[0]
    inf = np.inf
    top = 4 ** (nu - 1)

    pm = np.full(n_st, inf)
    pm[0] = 0.0
    new_pm = np.empty(n_st)
    ml = np.zeros(n_st, dtype=np.int64)
    new_ml = np.zeros(n_st, dtype=np.int64)
    bm = np.empty((n_st, n_grp))
    ch = np.zeros((n_st, n_grp), dtype=np.int64)
    bp_s = np.zeros((n_sym, n_st), dtype=np.int32)
    bp_z = np.zeros((n_sym, n_st), dtype=np.int8)
    codes = np.zeros(n_sym, dtype=np.int8)
    offset = 0.0
    released = 0

    for n in range(n_sym):
        d = n if n < nu else nu
        r1 = rp[n]
        r2 = rm[n]
        for s in range(n_st):
            if pm[s] == inf:
                continue
            p = ml[s]
            for g in range(n_grp):
                kind = gkind[g]
                if kind == 0:
                    c = members[g, 0]
                elif kind == 1:
                    c = _pick_threshold_jit(r1, out_p[d, p, members[g, 0]], out_p[d, p, members[g, 1]],
                                            members[g, 0], members[g, 1])
                elif kind == 2:
                    c = _pick_threshold_jit(r2, out_m[d, p, members[g, 0]], out_m[d, p, members[g, 1]],
                                            members[g, 0], members[g, 1])
                else:
                    c = members[g, 0]
                    best = inf
                    for k in range(gsize[g]):
                        ck = members[g, k]
                        e1 = r1 - out_p[d, p, ck]
                        e2 = r2 - out_m[d, p, ck]
                        m = wp * (e1 * e1) + wm * (e2 * e2)
                        if m < best:
                            best = m
                            c = ck
                e1 = r1 - out_p[d, p, c]
                e2 = r2 - out_m[d, p, c]
                bm[s, g] = wp * (e1 * e1) + wm * (e2 * e2)
                ch[s, g] = c
        for t in range(n_st):
            best = inf
            bs = in_state[t, 0]
            bc = 0
            for j in range(in_count[t]):
                s = in_state[t, j]
                if pm[s] == inf:
                    continue
                g = in_group[t, j]
                m = pm[s] + bm[s, g]
                if m < best:
                    best = m
                    bs = s
                    bc = ch[s, g]
            new_pm[t] = best
            bp_s[n, t] = bs
            bp_z[n, t] = bc
            new_ml[t] = bc * top + ml[bs] // 4
        for t in range(n_st):
            pm[t] = new_pm[t]
            ml[t] = new_ml[t]
        if (n + 1) % renorm == 0:
            mn = pm.min()
            offset += mn
            for t in range(n_st):
                pm[t] -= mn
        if n + 1 - released >= 2 * traceback:
            st = np.argmin(pm)
            keep = n + 1 - traceback
            for m in range(n, released - 1, -1):
                if m < keep:
                    codes[m] = bp_z[m, st]
                st = bp_s[m, st]
            released = keep
    st = np.argmin(pm)
    final = pm[st] + offset
    for m in range(n_sym - 1, released - 1, -1):
        codes[m] = bp_z[m, st]
        st = bp_s[m, st]
    return codes, final


rsse_viterbi_loop = _accel.njit(_rsse_viterbi_loop)


def rsse_viterbi_numpy(rp, rm, wp, wm, succ, members, gsize, gkind, in_state, in_group, in_count,
                       out_p, out_m, nu, traceback, renorm):
    n_sym = rp.shape[0]
    n_st = succ.shape[0]
    n_grp = gsize.shape[0]
    top = 4 ** (nu - 1)
    st_idx = np.arange(n_st)

    pm = np.full(n_st, np.inf)
    pm[0] = 0.0
    ml = np.zeros(n_st, dtype=np.int64)
    pad = in_state < 0
    in_s = np.where(pad, 0, in_state)
    in_g = np.where(pad, 0, in_group)
    bp_s = np.zeros((n_sym, n_st), dtype=np.int32)
    bp_z = np.zeros((n_sym, n_st), dtype=np.int8)
    codes = np.zeros(n_sym, dtype=np.int8)
    offset = 0.0
    released = 0

    for n in range(n_sym):
        d = min(n, nu)
        r1, r2 = rp[n], rm[n]
        yp = out_p[d][ml]  # (S, 4)
        ym = out_m[d][ml]
        e1 = r1 - yp
        e2 = r2 - ym
        metric = wp * (e1 * e1) + wm * (e2 * e2)
        ch = np.empty((n_st, n_grp), dtype=np.int64)
        for g in range(n_grp):
            kind = gkind[g]
            c1 = members[g, 0]
            if kind == GROUP_SINGLE:
                ch[:, g] = c1
            elif kind in (GROUP_THRESHOLD_PLUS, GROUP_THRESHOLD_MINUS):
                c2 = members[g, 1]
                y, r = (yp, r1) if kind == GROUP_THRESHOLD_PLUS else (ym, r2)
                y1, y2 = y[:, c1], y[:, c2]
                mid = 0.5 * (y1 + y2)
                first = np.where(y1 >= y2, r >= mid, r <= mid)
                ch[:, g] = np.where(first, c1, c2)
            else:
                cand = members[g, : gsize[g]]
                ch[:, g] = cand[np.argmin(metric[:, cand], axis=1)]
        bm = metric[st_idx[:, None], ch]  # (S, G)
        cand_m = pm[in_s] + bm[in_s, in_g]
        cand_m[pad] = np.inf
        j = np.argmin(cand_m, axis=1)
        bs = in_s[st_idx, j]
        bc = ch[bs, in_g[st_idx, j]]
        new_pm = cand_m[st_idx, j]
        bp_s[n] = bs
        bp_z[n] = bc
        ml = bc * top + ml[bs] // 4
        pm = new_pm
        if (n + 1) % renorm == 0:
            mn = pm.min()
            offset += mn
            pm = pm - mn
        if n + 1 - released >= 2 * traceback:
            st = int(np.argmin(pm))
            keep = n + 1 - traceback
            for m in range(n, released - 1, -1):
                if m < keep:
                    codes[m] = bp_z[m, st]
                st = bp_s[m, st]
            released = keep
    st = int(np.argmin(pm))
    final = float(pm[st] + offset)
    for m in range(n_sym - 1, released - 1, -1):
        codes[m] = bp_z[m, st]
        st = bp_s[m, st]
    return codes, final


def rsse_viterbi(*args):
    if _accel.USE_NUMBA:
        codes, final = rsse_viterbi_loop(*args)
        return codes, float(final)
    return rsse_viterbi_numpy(*args)
