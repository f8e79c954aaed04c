"""Throughput of the compiled and pure-numpy Viterbi kernels.

    python benchmarks/bench_kernels.py [--symbols 20000] [--repeat 3]

Both backends decode the same received block; the script checks that the
decisions agree and prints symbols per second for each.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from rsse2h2t import detector, wssjd
from rsse2h2t.channel import ChannelTarget, ItiModel, generate_inputs, snr_to_sigma, transmit
from rsse2h2t.trellis import SubsetConfig, build

CASES = [
    ("dicode", "3"),
    ("pr2", "4,2"),
    ("pr2", "4,4"),
    ("epr4", "4,3,2"),
    ("epr4", "4,4,4"),
    ("mp1", "4,2,2"),
]


def timed(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--symbols", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--epsilon", type=float, default=0.2)
    args = ap.parse_args()
    iti = ItiModel(args.epsilon)
    print(f"{'target':8s} {'config':8s} {'states':>6s} {'numba sym/s':>12s} {'numpy sym/s':>12s} {'speedup':>8s}")
    for name, cfg in CASES:
        tg = ChannelTarget.preset(name)
        tr = build(SubsetConfig.parse(cfg), tg)
        plan = detector.prepare(tr, tg, iti)
        x = generate_inputs(args.symbols, 1)
        rt = wssjd.output_transform(transmit(x, tg, iti, snr_to_sigma(tg, 9.0), 2), iti)
        detector.detect(rt, tr, tg, iti, plan=plan, backend="numba")  # compile outside the timing
        tn, a = timed(lambda: detector.detect(rt, tr, tg, iti, plan=plan, backend="numba"), args.repeat)
        tp, b = timed(lambda: detector.detect(rt, tr, tg, iti, plan=plan, backend="numpy"), 1)
        if not np.array_equal(a.codes, b.codes):
            raise SystemExit(f"backends disagree on {name} {cfg}")
        n = args.symbols
        print(f"{name:8s} {cfg:8s} {tr.n_states:6d} {n / tn:12.0f} {n / tp:12.0f} {tp / tn:8.1f}")


if __name__ == "__main__":
    main()
