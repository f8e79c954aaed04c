"""Sum/subtract coordinate transforms and the weighted branch metric."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelTarget, ItiModel, ReceivedPair, TrackPair
from .partition import CONSTELLATION


@dataclass(frozen=True)
class TransformedReceived:
    r_plus: np.ndarray
    r_minus: np.ndarray

    def __len__(self) -> int:
        return len(self.r_plus)


def input_transform(x: TrackPair) -> np.ndarray:
    """(N, 2) int array of (z+, z-) = (x^a + x^b, x^a - x^b)."""
    a = x.track_a.astype(np.int64)
    b = x.track_b.astype(np.int64)
    return np.stack([a + b, a - b], axis=1)


def inverse_input_transform(z) -> TrackPair:
    z = np.asarray(z, dtype=np.int64).reshape(-1, 2)
    zp, zm = z[:, 0], z[:, 1]
    ok = ((np.abs(zp) == 2) & (zm == 0)) | ((zp == 0) & (np.abs(zm) == 2))
    if not np.all(ok):
        bad = z[~ok][0]
        raise ValueError(f"symbol {tuple(int(v) for v in bad)} is outside the constellation")
    return TrackPair((zp + zm) // 2, (zp - zm) // 2)


def symbols_to_codes(z) -> np.ndarray:
    """Constellation points (N, 2) to symbol codes 0..3."""
    z = np.asarray(z, dtype=np.int64).reshape(-1, 2)
    # (+2,0)->0, (0,+2)->1, (0,-2)->2, (-2,0)->3
    codes = np.where(z[:, 0] > 0, 0, np.where(z[:, 0] < 0, 3, np.where(z[:, 1] > 0, 1, 2)))
    return codes.astype(np.int8)


def codes_to_symbols(codes) -> np.ndarray:
    return CONSTELLATION[np.asarray(codes, dtype=np.int64)]


def codes_to_tracks(codes) -> TrackPair:
    return inverse_input_transform(codes_to_symbols(codes))


def output_transform(r: ReceivedPair, iti: ItiModel) -> TransformedReceived:
    """r+ = (r^a + r^b)/(1+eps), r- = (r^a - r^b)/(1-eps)."""
    eps = iti.epsilon
    if eps >= 1.0:
        raise ValueError("epsilon must be < 1")
    ra = np.asarray(r.r_a, dtype=np.float64)
    rb = np.asarray(r.r_b, dtype=np.float64)
    return TransformedReceived((ra + rb) / (1.0 + eps), (ra - rb) / (1.0 - eps))


def cross_coefficients(iti: ItiModel) -> tuple[float, float]:
    """Residual crosstalk in transformed space: (z- into r+, z+ into r-)."""
    eps, de = iti.epsilon, iti.delta_epsilon
    return de / (1.0 + eps), de / (eps - 1.0)


def metric_weights(iti: ItiModel) -> tuple[float, float]:
    eps = iti.epsilon
    return (1.0 + eps) ** 2, (1.0 - eps) ** 2


def noiseless_outputs(z_window, target: ChannelTarget, iti: ItiModel) -> tuple[float, float]:
    """Noiseless (y+, y-) for a window ``[z_n, z_{n-1}, ..., z_{n-nu}]``."""
    w = np.asarray(z_window, dtype=np.float64).reshape(-1, 2)
    if w.shape[0] != target.memory + 1:
        raise ValueError(f"window must hold nu+1 = {target.memory + 1} symbols")
    h = target.taps
    sp = float(np.dot(h, w[:, 0]))
    sm = float(np.dot(h, w[:, 1]))
    if iti.symmetric:
        return sp, sm
    cp, cm = cross_coefficients(iti)
    return sp + cp * sm, sm + cm * sp


def branch_metric(r_pair, y_pair, iti: ItiModel) -> float:
    wp, wm = metric_weights(iti)
    dp = r_pair[0] - y_pair[0]
    dm = r_pair[1] - y_pair[1]
    return wp * (dp * dp) + wm * (dm * dm)


def output_lookup(target: ChannelTarget, iti: ItiModel) -> tuple[np.ndarray, np.ndarray]:
    """Noiseless outputs indexed ``[depth, ml_state, input]``.

    ``ml_state`` packs the previous nu symbol codes in base 4, most recent
    symbol most significant.  ``depth`` counts how many of those past symbols
    are real; older positions belong to the all-zero channel state before
    time 0 and contribute nothing.  ``depth = nu`` is the steady state.
    """
    nu = target.memory
    h = target.taps
    n_ml = 4**nu
    p = np.arange(n_ml)
    digits = np.empty((n_ml, nu), dtype=np.int64)  # digits[:, k-1] = code of z_{n-k}
    rest = p.copy()
    for k in range(nu, 0, -1):
        digits[:, k - 1] = rest % 4
        rest //= 4
    past = CONSTELLATION[digits].astype(np.float64)  # (n_ml, nu, 2)
    cur = CONSTELLATION.astype(np.float64)  # (4, 2)
    out_p = np.empty((nu + 1, n_ml, 4))
    out_m = np.empty((nu + 1, n_ml, 4))
    for depth in range(nu + 1):
        hp = h[1:].copy()
        hp[depth:] = 0.0
        sp = past[:, :, 0] @ hp  # (n_ml,)
        sm = past[:, :, 1] @ hp
        yp = sp[:, None] + h[0] * cur[None, :, 0]
        ym = sm[:, None] + h[0] * cur[None, :, 1]
        if not iti.symmetric:
            cp, cm = cross_coefficients(iti)
            yp, ym = yp + cp * ym, ym + cm * yp
        out_p[depth], out_m[depth] = yp, ym
    return out_p, out_m
