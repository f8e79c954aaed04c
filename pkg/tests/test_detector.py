import time

import numpy as np
import pytest

from rsse2h2t import detector, kernels, wssjd
from rsse2h2t.channel import (
    ChannelTarget,
    ItiModel,
    ReceivedPair,
    generate_inputs,
    snr_to_sigma,
    transmit,
)
from rsse2h2t.trellis import SubsetConfig, build
from test_trellis import valid_configs

from oracles import ExhaustiveSequenceDetector


def _run(name, cfg, eps, snr, n=2000, seed=3, de=0.0, backend=None):
    tg = ChannelTarget.preset(name)
    iti = ItiModel(eps, de)
    x = generate_inputs(n, seed)
    r = transmit(x, tg, iti, snr_to_sigma(tg, snr), seed + 100)
    res = detector.detect(wssjd.output_transform(r, iti), build(SubsetConfig.parse(cfg), tg), tg, iti,
                          truth=x, backend=backend)
    return x, r, res


@pytest.mark.parametrize("name,cfg,de", [
    ("dicode", "2", 0.0), ("dicode", "3", 0.05), ("pr2", "4,2", 0.0), ("pr2", "3,3", 0.0),
    ("pr2", "2,1", 0.1), ("epr4", "4,4,2", 0.0), ("epr4", "3,3,3", 0.1), ("mp1", "4,2,2", 0.0),
])
def test_numba_matches_numpy(name, cfg, de):
    _, _, a = _run(name, cfg, 0.2, 7.0, n=1500, de=de, backend="numba")
    _, _, b = _run(name, cfg, 0.2, 7.0, n=1500, de=de, backend="numpy")
    assert np.array_equal(a.codes, b.codes)
    assert a.final_metric == b.final_metric


def test_noiseless_every_config():
    for name in ("dicode", "pr2", "epr4", "mp1"):
        tg = ChannelTarget.preset(name)
        for cfg in valid_configs(tg.memory):
            if min(cfg.J) < 2:
                continue
            for iti in (ItiModel(0.2), ItiModel(0.3, 0.1)):
                x = generate_inputs(10**4 // 2, 17)
                r = transmit(x, tg, iti, 0.0)
                res = detector.detect(wssjd.output_transform(r, iti), build(cfg, tg), tg, iti, truth=x)
                assert res.bit_errors == 0, (name, str(cfg), iti)
                assert res.final_metric == pytest.approx(0.0, abs=1e-9)


def test_guard_and_errors():
    x, r, res = _run("pr2", "4,2", 0.1, 6.0, n=500)
    assert len(res.decoded) == 500
    tg, iti = ChannelTarget.preset("pr2"), ItiModel(0.1)
    g = detector.detect(wssjd.output_transform(r, iti), build(SubsetConfig.parse("4,2"), tg), tg, iti,
                        truth=x, guard=2)
    assert len(g.decoded) == 496
    assert np.array_equal(g.codes, res.codes[2:-2])
    assert g.bit_errors > 0
    dec = wssjd.codes_to_tracks(res.codes)
    assert res.errors_a == int(np.count_nonzero(dec.track_a != x.track_a))
    with pytest.raises(ValueError):
        detector.detect(wssjd.output_transform(r, iti), build(SubsetConfig.parse("4,2"), tg), tg, iti,
                        guard=250)
    with pytest.raises(ValueError):
        detector.detect(wssjd.output_transform(r, iti), build(SubsetConfig.parse("4,2"), tg), tg, iti,
                        backend="gpu")
    empty = ReceivedPair(np.zeros(0), np.zeros(0))
    with pytest.raises(ValueError):
        detector.detect(wssjd.output_transform(empty, iti), build(SubsetConfig.parse("4,2"), tg), tg, iti)


def test_step_matches_kernel_and_picks_minimum():
    tg = ChannelTarget.preset("pr2")
    iti = ItiModel(0.1)
    tr = build(SubsetConfig.parse("4,2"), tg)
    plan = detector.prepare(tr, tg, iti)
    x = generate_inputs(60, 8)
    r = wssjd.output_transform(transmit(x, tg, iti, snr_to_sigma(tg, 4.0), 5), iti)
    st = detector.initial_state(plan)
    bps, bzs = [], []
    for n in range(len(r)):
        prev = st
        st, bp_s, bp_z = detector.step(st, (r.r_plus[n], r.r_minus[n]), plan)
        bps.append(bp_s)
        bzs.append(bp_z)
        assert st.survivor_ml.shape == (tr.n_states,)
        if n >= 2:
            d = min(n, 2)
            for t in range(tr.n_states):
                # survivor metric is the minimum over every incoming (state, input) pair
                cands = []
                for s in range(tr.n_states):
                    for c in range(4):
                        if tr.succ[s, c] == t:
                            grp = tr.groups[tr.group_of[c]]
                            chosen = detector._select(np.array(grp), prev.survivor_ml[s], d,
                                                      (r.r_plus[n], r.r_minus[n]), plan)
                            if chosen == c:
                                cands.append(prev.path_metric[s] + detector._metric(
                                    prev.survivor_ml[s], d, c, (r.r_plus[n], r.r_minus[n]), plan))
                assert st.path_metric[t] == pytest.approx(min(cands))
                assert st.survivor_ml[t] // 4 == bp_z[t]
    s = int(np.argmin(st.path_metric))
    codes = []
    for n in range(len(r) - 1, -1, -1):
        codes.append(bzs[n][s])
        s = bps[n][s]
    full = detector.detect(r, tr, tg, iti)
    assert st.path_metric.min() == pytest.approx(full.final_metric)
    assert np.array_equal(np.array(codes[::-1]), full.codes)


def test_pre_select_rules():
    dicode = ChannelTarget.preset("dicode")
    sym = ItiModel(0.0)
    # survivor (+2,0), channel 1+D: outputs +4 and 0 on r+, threshold +2
    one_plus_d = ChannelTarget((1.0, 1.0))
    assert detector.pre_select([(2, 0), (-2, 0)], [(2, 0)], (2.5, 0.0), one_plus_d, sym) == 0
    assert detector.pre_select([(2, 0), (-2, 0)], [(2, 0)], (1.5, 0.0), one_plus_d, sym) == 3
    assert detector.pre_select([(0, 2), (0, -2)], [(2, 0)], (0.0, 0.3), one_plus_d, sym) == 1
    assert detector.pre_select([(0, 2), (0, -2)], [(2, 0)], (0.0, -0.3), one_plus_d, sym) == 2
    with pytest.raises(ValueError):
        detector.pre_select([0], [0], (0, 0), dicode, sym)
    asym = ItiModel(0.2, 0.1)
    gen = np.random.default_rng(2)
    pr2 = ChannelTarget.preset("pr2")
    for _ in range(300):
        grp = [(0, 3), (1, 2)][gen.integers(2)]
        window = list(gen.integers(0, 4, 2))
        rn = tuple(gen.normal(size=2) * 4)
        full = [wssjd.codes_to_symbols([c] + window) for c in grp]
        ms = [wssjd.branch_metric(rn, wssjd.noiseless_outputs(f, pr2, asym), asym) for f in full]
        assert detector.pre_select(grp, window, rn, pr2, asym) == grp[int(np.argmin(ms))]
        # symmetric threshold rule equals the explicit comparison
        ms = [wssjd.branch_metric(rn, wssjd.noiseless_outputs(f, pr2, sym), sym) for f in full]
        assert detector.pre_select(grp, window, rn, pr2, sym) == grp[int(np.argmin(ms))]


def test_threshold_kernel_tie_goes_to_first():
    assert kernels._pick_threshold(2.0, 4.0, 0.0, 0, 3) == 0
    assert kernels._pick_threshold(2.0, 0.0, 4.0, 0, 3) == 0


def test_ml_reference_matches_full_wssjd():
    for name, eps in (("pr2", 0.1), ("pr2", 0.3), ("epr4", 0.2), ("dicode", 0.3)):
        tg = ChannelTarget.preset(name)
        iti = ItiModel(eps)
        x = generate_inputs(20000, 21)
        r = transmit(x, tg, iti, snr_to_sigma(tg, 9.0), 4)
        ml = detector.detect_ml_reference(r, tg, iti, truth=x)
        full = detector.detect(wssjd.output_transform(r, iti), build(SubsetConfig.full(tg.memory), tg), tg, iti,
                               truth=x)
        assert np.array_equal(ml.codes, full.codes)
        assert full.final_metric == pytest.approx(2 * ml.final_metric, rel=1e-9)
    clean = transmit(x, tg, iti, 0.0)
    assert detector.detect_ml_reference(clean, tg, iti, truth=x).bit_errors == 0
    with pytest.raises(ValueError):
        detector.detect_ml_reference(clean, ChannelTarget((1.0,) * 8), iti)


@pytest.mark.parametrize("name,eps", [("dicode", 0.2), ("pr2", 0.1)])
def test_exhaustive_oracle_small_blocks(name, eps):
    tg = ChannelTarget.preset(name)
    for de in (0.0, 0.1):
        iti = ItiModel(eps, min(de, eps))
        oracle = ExhaustiveSequenceDetector(8, tg, iti)
        for b in range(60):
            x = generate_inputs(8, 1000 + b)
            r = transmit(x, tg, iti, snr_to_sigma(tg, 3.0), 2000 + b)
            want = oracle.decide(r)
            got = detector.detect(wssjd.output_transform(r, iti), build(SubsetConfig.full(tg.memory), tg), tg, iti)
            assert np.array_equal(got.codes, want)
            assert np.array_equal(detector.detect_ml_reference(r, tg, iti).codes, want)


def test_complexity_grows_with_states():
    tg = ChannelTarget.preset("epr4")
    iti = ItiModel(0.1)
    x = generate_inputs(40000, 2)
    rt = wssjd.output_transform(transmit(x, tg, iti, snr_to_sigma(tg, 10.0), 3), iti)
    times = []
    for cfg in ("2,2,2", "4,4,4"):
        tr = build(SubsetConfig.parse(cfg), tg)
        plan = detector.prepare(tr, tg, iti)
        detector.detect(rt, tr, tg, iti, plan=plan)  # warm up
        t0 = time.perf_counter()
        for _ in range(3):
            detector.detect(rt, tr, tg, iti, plan=plan)
        times.append(time.perf_counter() - t0)
    assert times[0] < times[1]


@pytest.mark.parametrize("name,cfg,snr", [("pr2", "4,2", 9.0), ("epr4", "4,3,2", 11.0), ("dicode", "3", 8.0)])
def test_finite_traceback_matches_full_block(name, cfg, snr):
    from dataclasses import replace

    tg, iti = ChannelTarget.preset(name), ItiModel(0.1)
    x = generate_inputs(20000, 11)
    r = wssjd.output_transform(transmit(x, tg, iti, snr_to_sigma(tg, snr), 12), iti)
    tr = build(SubsetConfig.parse(cfg), tg)
    plan = detector.prepare(tr, tg, iti)
    short = detector.detect(r, tr, tg, iti, truth=x, plan=plan)
    full = detector.detect(r, tr, tg, iti, truth=x, plan=replace(plan, traceback=len(r) + 1))
    assert short.bit_errors > 0
    assert np.array_equal(short.codes, full.codes)
