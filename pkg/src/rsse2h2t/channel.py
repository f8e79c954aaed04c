"""Two-head two-track channel: data, per-track ISI, ITI mixing and AWGN."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng

PRESETS: dict[str, tuple[float, ...]] = {
    "dicode": (1.0, -1.0),
    "pr2": (1.0, 2.0, 1.0),
    "epr4": (1.0, 1.0, -1.0, -1.0),
    "mp1": (1.0, 1.6, 1.1, 0.4),
    "mp2": (1.0, 1.9, 1.6, 0.8, 0.3),
}


@dataclass(frozen=True)
class ChannelTarget:
    """Equalization target h(D) = h_0 + h_1 D + ... + h_nu D^nu shared by both tracks."""

    coefficients: tuple[float, ...]
    name: str | None = None

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) < 2:
            raise ValueError("target needs memory >= 1 (at least two taps)")
        if coeffs[0] == 0.0:
            raise ValueError("leading tap h_0 must be nonzero")
        if not all(math.isfinite(c) for c in coeffs):
            raise ValueError("taps must be finite")

    @classmethod
    def preset(cls, name: str) -> "ChannelTarget":
        key = name.lower()
        if key not in PRESETS:
            raise ValueError(f"unknown target preset {name!r}; choose from {sorted(PRESETS)}")
        return cls(PRESETS[key], key)

    @classmethod
    def parse(cls, text: str) -> "ChannelTarget":
        """Preset name or comma-separated taps such as ``1,2,1``."""
        text = text.strip()
        if text.lower() in PRESETS:
            return cls.preset(text)
        try:
            taps = tuple(float(t) for t in text.replace(" ", "").split(",") if t)
        except ValueError:
            raise ValueError(f"cannot parse target {text!r}") from None
        return cls(taps)

    @property
    def memory(self) -> int:
        return len(self.coefficients) - 1

    @property
    def taps(self) -> np.ndarray:
        return np.asarray(self.coefficients, dtype=np.float64)

    @property
    def energy(self) -> float:
        return float(np.dot(self.taps, self.taps))

    @property
    def label(self) -> str:
        return self.name or "[" + ",".join(f"{c:g}" for c in self.coefficients) + "]"


@dataclass(frozen=True)
class ItiModel:
    """ITI mixing: symmetric level ``epsilon`` plus head offset ``delta_epsilon``."""

    epsilon: float
    delta_epsilon: float = 0.0

    def __post_init__(self):
        eps, de = float(self.epsilon), float(self.delta_epsilon)
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "delta_epsilon", de)
        if not 0.0 <= eps < 1.0:
            raise ValueError(f"epsilon must lie in [0, 1), got {eps}")
        # delta_epsilon == epsilon is allowed: one head then sees no crosstalk.
        if de < 0.0 or de > eps:
            raise ValueError(f"delta_epsilon must satisfy 0 <= delta_epsilon <= epsilon, got {de}")

    @property
    def symmetric(self) -> bool:
        return self.delta_epsilon == 0.0

    @property
    def matrix(self) -> np.ndarray:
        eps, de = self.epsilon, self.delta_epsilon
        return np.array([[1.0, eps - de], [eps + de, 1.0]])


@dataclass(frozen=True)
class TrackPair:
    """Recorded data on tracks a and b, entries in {-1, +1}."""

    track_a: np.ndarray
    track_b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.track_a, dtype=np.int8)
        b = np.asarray(self.track_b, dtype=np.int8)
        if a.ndim != 1 or a.shape != b.shape:
            raise ValueError("tracks must be 1-D sequences of equal length")
        if not (np.all(np.abs(a) == 1) and np.all(np.abs(b) == 1)):
            raise ValueError("track symbols must be -1 or +1")
        object.__setattr__(self, "track_a", a)
        object.__setattr__(self, "track_b", b)

    def __len__(self) -> int:
        return self.track_a.shape[0]


@dataclass(frozen=True)
class ReceivedPair:
    r_a: np.ndarray
    r_b: np.ndarray

    def __len__(self) -> int:
        return len(self.r_a)


def snr_to_sigma(target: ChannelTarget, snr_db: float) -> float:
    """Noise std for SNR(dB) = 10 log10(||h||^2 / (2 sigma^2))."""
    if not math.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    return math.sqrt(target.energy / (2.0 * 10.0 ** (snr_db / 10.0)))


def sigma_to_snr(target: ChannelTarget, sigma: float) -> float:
    return 10.0 * math.log10(target.energy / (2.0 * sigma * sigma))


def generate_inputs(n: int, rng_seed: int) -> TrackPair:
    """Two independent equiprobable +-1 sequences of length ``n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    a = rng.signs(rng.derive(rng_seed, rng.STREAM_DATA_A), n)
    b = rng.signs(rng.derive(rng_seed, rng.STREAM_DATA_B), n)
    return TrackPair(a, b)


def isi(x: np.ndarray, target: ChannelTarget) -> np.ndarray:
    """x * h with zero state before time 0, truncated to len(x)."""
    x = np.asarray(x, dtype=np.float64)
    return np.convolve(x, target.taps)[: x.shape[0]]


def transmit(
    inputs: TrackPair,
    target: ChannelTarget,
    iti: ItiModel,
    sigma: float,
    rng_seed: int = 0,
) -> ReceivedPair:
    """r = M (x^a * h, x^b * h) + n with i.i.d. N(0, sigma^2) noise per head."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    ya = isi(inputs.track_a, target)
    yb = isi(inputs.track_b, target)
    m = iti.matrix
    r_a = m[0, 0] * ya + m[0, 1] * yb
    r_b = m[1, 0] * ya + m[1, 1] * yb
    if sigma > 0:
        n = len(inputs)
        r_a = r_a + sigma * rng.gaussians(rng.derive(rng_seed, rng.STREAM_NOISE_A), n)
        r_b = r_b + sigma * rng.gaussians(rng.derive(rng_seed, rng.STREAM_NOISE_B), n)
    return ReceivedPair(r_a, r_b)
