"""Monte Carlo BER estimation, SNR-loss tables and canned reproductions."""
from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import detector, errspec, rng, wssjd
from .channel import ChannelTarget, ItiModel, generate_inputs, snr_to_sigma, transmit
from .trellis import SubsetConfig, build

log = logging.getLogger(__name__)

CSV_HEADER = ("detector", "snr_db", "bits", "errors_a", "errors_b", "ber")
STREAM_BLOCKS = 17


def parse_detector(label: str, nu: int) -> SubsetConfig:
    """``ml`` or a configuration such as ``4,2`` / ``[4,2]``."""
    text = label.strip().lower()
    if text == "ml":
        return SubsetConfig.full(nu)
    cfg = SubsetConfig.parse(text)
    if cfg.nu != nu:
        raise ValueError(f"detector {label!r} has length {cfg.nu}; target memory is {nu}")
    return cfg


def detector_label(label: str) -> str:
    text = label.strip().lower()
    return "ml" if text == "ml" else str(SubsetConfig.parse(text))


@dataclass(frozen=True)
class SimPlan:
    target: ChannelTarget
    epsilon: float
    delta_epsilon: float = 0.0
    detectors: tuple[str, ...] = ("ml",)
    snr_db: tuple[float, ...] = ()
    seed: int = 1
    max_bits: int = 2 * 10**8
    min_errors: int = 500
    block_length: int = 4096
    guard: int | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "detectors", tuple(detector_label(d) for d in self.detectors))
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        self.validate()

    @property
    def iti(self) -> ItiModel:
        return ItiModel(self.epsilon, self.delta_epsilon)

    @property
    def guard_symbols(self) -> int:
        return self.target.memory if self.guard is None else int(self.guard)

    @property
    def counted_symbols(self) -> int:
        return self.block_length - 2 * self.guard_symbols

    def validate(self):
        nu = self.target.memory
        self.iti
        if not self.detectors:
            raise ValueError("plan lists no detectors")
        for d in self.detectors:
            parse_detector(d, nu)
        if self.min_errors < 100:
            raise ValueError("min_errors must be >= 100")
        if self.block_length < 100 * nu:
            raise ValueError(f"block length must be >= 100*nu = {100 * nu}")
        if self.counted_symbols <= 0:
            raise ValueError("guard leaves no counted symbols")
        if self.max_bits <= 0:
            raise ValueError("max_bits must be positive")
        if not all(math.isfinite(s) for s in self.snr_db):
            raise ValueError("SNR grid must be finite")


@dataclass(frozen=True)
class BerPoint:
    detector: str
    snr_db: float
    bits: int
    errors_a: int
    errors_b: int

    @property
    def errors(self) -> int:
        return self.errors_a + self.errors_b

    @property
    def ber(self) -> float:
        return self.errors / self.bits if self.bits else float("nan")

    @property
    def std_error(self) -> float:
        p = self.ber
        return math.sqrt(p * (1 - p) / self.bits) if self.bits else float("nan")


def block_seed(seed: int, snr_db: float, block: int) -> int:
    """Seed of one simulated block.

    Keyed by the SNR value (in milli-dB) rather than its grid position, and
    shared by all detectors, so every detector sees the same data and noise.
    """
    return rng.derive(seed, STREAM_BLOCKS, int(round(snr_db * 1000)) & 0xFFFFFFFF, block)


def simulate_snr(plan: SimPlan, snr_db: float, detectors: tuple[str, ...] | None = None) -> list[BerPoint]:
    """BER of each detector at one SNR, until its stopping rule triggers."""
    labels = plan.detectors if detectors is None else tuple(detector_label(d) for d in detectors)
    target, iti = plan.target, plan.iti
    nu = target.memory
    kplans = {}
    for lab in labels:
        cfg = parse_detector(lab, nu)
        kplans[lab] = detector.prepare(build(cfg, target), target, iti)
    sigma = snr_to_sigma(target, snr_db)
    counts = {lab: [0, 0, 0] for lab in labels}  # bits, errors_a, errors_b
    active = list(labels)
    per_block = 2 * plan.counted_symbols
    g = plan.guard_symbols
    block = 0
    while active:
        seed = block_seed(plan.seed, snr_db, block)
        x = generate_inputs(plan.block_length, seed)
        r = transmit(x, target, iti, sigma, seed)
        rt = wssjd.output_transform(r, iti)
        for lab in active:
            kp = kplans[lab]
            res = detector.detect(rt, None, target, iti, truth=x, guard=g, plan=kp)
            c = counts[lab]
            c[0] += per_block
            c[1] += res.errors_a
            c[2] += res.errors_b
        block += 1
        active = [
            lab
            for lab in active
            if counts[lab][1] + counts[lab][2] < plan.min_errors and counts[lab][0] + per_block <= plan.max_bits
        ]
    return [BerPoint(lab, snr_db, *counts[lab]) for lab in labels]


def _simulate_snr_star(args):
    plan, snr = args
    return simulate_snr(plan, snr)


def run_ber(plan: SimPlan) -> list[BerPoint]:
    """All (detector, SNR) points of ``plan``, ordered by detector then SNR.

    With ``plan.workers > 1`` SNR points run in separate processes; counts do
    not depend on the worker count.
    """
    plan.validate()
    if plan.workers > 1 and len(plan.snr_db) > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            per_snr = list(pool.map(_simulate_snr_star, [(plan, s) for s in plan.snr_db]))
    else:
        per_snr = []
        for s in plan.snr_db:
            per_snr.append(simulate_snr(plan, s))
            log.info("snr %.2f dB: %s", s, ", ".join(f"{p.detector}={p.ber:.3g}" for p in per_snr[-1]))
    points = [p for pts in per_snr for p in pts]
    order = {d: i for i, d in enumerate(plan.detectors)}
    return sorted(points, key=lambda p: (order[p.detector], p.snr_db))


def bracket_ber(plan: SimPlan, detector_name: str, ber_target: float, start_db: float,
                step_db: float = 0.25, max_steps: int = 40) -> list[BerPoint]:
    """Walk the SNR axis from ``start_db`` until the BER curve crosses ``ber_target``.

    Returns the visited points in SNR order; the last two bracket the target.
    """
    lab = detector_label(detector_name)
    seen: dict[float, BerPoint] = {}

    def at(s: float) -> BerPoint:
        s = round(s, 6)
        if s not in seen:
            seen[s] = simulate_snr(plan, s, (lab,))[0]
        return seen[s]

    s = start_db
    p = at(s)
    direction = 1.0 if p.ber > ber_target else -1.0
    for _ in range(max_steps):
        s2 = s + direction * step_db
        q = at(s2)
        if (q.ber - ber_target) * (p.ber - ber_target) <= 0:
            break
        s, p = s2, q
    else:
        raise RuntimeError(f"no crossing of BER {ber_target:g} for {lab} within {max_steps} steps")
    return sorted(seen.values(), key=lambda pt: pt.snr_db)


def snr_at_ber(points, ber_target: float) -> float | None:
    """SNR where one detector's curve crosses ``ber_target`` (log-linear interpolation).

    Returns None when no adjacent pair of grid points brackets the target.
    """
    pts = sorted(points, key=lambda p: p.snr_db)
    lt = math.log10(ber_target)
    for a, b in zip(pts, pts[1:]):
        if a.errors == 0:
            continue
        if a.ber >= ber_target >= b.ber and a.ber > b.ber:
            if b.errors == 0:
                return None
            la, lb = math.log10(a.ber), math.log10(b.ber)
            return a.snr_db + (la - lt) / (la - lb) * (b.snr_db - a.snr_db)
    return None


def snr_loss_at(plan_or_points, ber_target: float = 1e-4, reference: str = "ml") -> dict[str, float | None]:
    """SNR loss of every detector against ``reference`` at ``ber_target``.

    Accepts a plan (which is simulated) or a list of points.  Detectors whose
    curve does not bracket the target map to None ("not reached").
    """
    points = run_ber(plan_or_points) if isinstance(plan_or_points, SimPlan) else list(plan_or_points)
    by_det: dict[str, list[BerPoint]] = {}
    for p in points:
        by_det.setdefault(p.detector, []).append(p)
    if reference not in by_det:
        raise ValueError(f"reference detector {reference!r} has no points")
    ref = snr_at_ber(by_det[reference], ber_target)
    out: dict[str, float | None] = {}
    for det, pts in by_det.items():
        s = snr_at_ber(pts, ber_target)
        out[det] = None if (s is None or ref is None) else s - ref
    return out


def format_loss(loss: float | None) -> str:
    return "not reached" if loss is None else f"{loss:.2f}"


# ---------------------------------------------------------------- CSV and config


def _g6(x: float) -> str:
    return f"{x:.6g}"


def points_to_csv(points) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for p in points:
        w.writerow([p.detector, _g6(p.snr_db), p.bits, p.errors_a, p.errors_b, _g6(p.ber)])
    return buf.getvalue()


def read_csv(text: str) -> list[BerPoint]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return [
        BerPoint(r["detector"], float(r["snr_db"]), int(r["bits"]), int(r["errors_a"]), int(r["errors_b"]))
        for r in rows
    ]


def parse_snr_grid(text: str) -> tuple[float, ...]:
    """``8:0.5:14`` (start:step:stop, inclusive) or a comma list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"SNR range must be start:step:stop, got {text!r}")
        a, st, b = (float(v) for v in parts)
        if st <= 0:
            raise ValueError("SNR step must be positive")
        n = int(math.floor((b - a) / st + 1e-9)) + 1
        return tuple(round(a + i * st, 10) for i in range(n))
    return tuple(float(v) for v in text.split(",") if v.strip())


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected key=value, got {line!r}")
        k, v = line.split("=", 1)
        out[k.strip().lower()] = v.strip()
    return out


_KNOWN_KEYS = {"target", "epsilon", "depsilon", "configs", "snr", "seed", "max_bits", "min_errors",
               "block", "guard", "workers"}


def plan_from_mapping(cfg: dict[str, str]) -> SimPlan:
    unknown = set(cfg) - _KNOWN_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in ("target", "epsilon", "snr"):
        if key not in cfg:
            raise ValueError(f"config is missing {key!r}")
    target = ChannelTarget.parse(cfg["target"])
    detectors = tuple(d for d in cfg.get("configs", "ml").split(";") if d.strip())
    return SimPlan(
        target=target,
        epsilon=float(cfg["epsilon"]),
        delta_epsilon=float(cfg.get("depsilon", 0.0)),
        detectors=detectors,
        snr_db=parse_snr_grid(cfg["snr"]),
        seed=int(cfg.get("seed", 1)),
        max_bits=int(float(cfg.get("max_bits", 2e8))),
        min_errors=int(cfg.get("min_errors", 500)),
        block_length=int(cfg.get("block", 4096)),
        guard=int(cfg["guard"]) if "guard" in cfg else None,
        workers=int(cfg.get("workers", 1)),
    )


# ---------------------------------------------------------------- spectra tables


def dominant_events(target: ChannelTarget, config: SubsetConfig, iti: ItiModel,
                    d_ml: float | None = None) -> tuple[float, float, list[errspec.ErrorEvent]]:
    """Early-merged events worth listing for one configuration.

    If the early-merged minimum reaches the ML minimum, only the events at
    that minimum are kept; otherwise every early-merged event up to the ML
    minimum.  Returns (ML d_min, early d_min, events).
    """
    if d_ml is None:
        d_ml = errspec.dmin_generic(target, iti)
    diagram = errspec.ErrorStateDiagram(target, iti, config)
    d_r = errspec.shortest_event(diagram, "early")
    if not math.isfinite(d_r):
        return d_ml, d_r, []
    limit = d_r if d_r >= d_ml else d_ml
    report = errspec.search_events(target, config, iti, limit + 1e-6, mode="early", diagram=diagram)
    return d_ml, d_r, report.events


@dataclass(frozen=True)
class SpectrumTable:
    key: str
    target: str
    configs: tuple[str, ...]
    epsilons: tuple[float, ...]
    deltas: tuple[float, ...] = (0.0,)
    summary_only: bool = False


SPECTRUM_TABLES = {
    "V": SpectrumTable("V", "mp1", ("3,3,3", "3,3,2", "4,3,2", "4,2,2", "3,2,2", "4,2,1"), (0.1, 0.2, 0.3, 0.4)),
    "VI": SpectrumTable("VI", "pr2", ("4,3", "4,2", "3,3"), (0.1, 0.2, 0.3, 0.4)),
    "VII": SpectrumTable("VII", "epr4", ("4,3,3", "4,3,2", "3,3,3"), (0.1, 0.2, 0.3, 0.4)),
    "VIII": SpectrumTable("VIII", "epr4", ("4,4,3", "4,4,2", "4,4,1", "4,3,3", "4,3,2", "3,3,3"), (0.1,),
                          (0.0, 0.05, 0.1), True),
    "IX": SpectrumTable("IX", "epr4", ("4,4,3", "4,4,2", "4,4,1", "4,3,3", "4,3,2", "3,3,3"), (0.4,),
                        (0.0, 0.05, 0.1), True),
}


def spectrum_table(table: SpectrumTable) -> tuple[str, str]:
    """(events report, CSV summary) for a canned spectrum table."""
    target = ChannelTarget.preset(table.target)
    lines: list[str] = []
    rows = [("config", "epsilon", "delta_epsilon", "dmin_ml", "dmin_early", "events")]
    for eps in table.epsilons:
        for de in table.deltas:
            iti = ItiModel(eps, de)
            d_ml = errspec.dmin_generic(target, iti)
            lines.append(f"# target={table.target} epsilon={eps:g} delta_epsilon={de:g} dmin={d_ml:.4f}")
            for c in table.configs:
                cfg = SubsetConfig.parse(c)
                if table.summary_only:
                    d_r = errspec.dmin_early(target, cfg, iti)
                    events = []
                else:
                    _, d_r, events = dominant_events(target, cfg, iti, d_ml)
                lines.append(f"{cfg} dmin_early={d_r:.4f}")
                lines.extend("  " + e.render() for e in events)
                rows.append((str(cfg), _g6(eps), _g6(de), f"{d_ml:.4f}", f"{d_r:.4f}", str(len(events))))
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return "".join(line + "\n" for line in lines), buf.getvalue()


# ---------------------------------------------------------------- BER reproductions


@dataclass(frozen=True)
class BerStudy:
    key: str
    target: str
    detectors: tuple[str, ...]
    epsilons: tuple[float, ...]
    snr: dict[float, tuple[float, ...]] = field(default_factory=dict)
    deltas: tuple[float, ...] = (0.0,)


# SNR grids bracket BER 1e-4 of every listed detector.
BER_STUDIES = {
    "10": BerStudy("10", "dicode", ("ml", "3", "2"), (0.1, 0.3),
                   {0.1: tuple(np.arange(8.0, 12.01, 0.5)), 0.3: tuple(np.arange(8.0, 12.51, 0.5))}),
    "11": BerStudy("11", "pr2", ("ml", "4,3", "4,2", "3,3", "4,1"), (0.1, 0.3),
                   {0.1: tuple(np.arange(9.0, 14.01, 0.5)), 0.3: tuple(np.arange(9.0, 14.51, 0.5))}),
    "12": BerStudy("12", "epr4", ("ml", "4,4,3", "4,4,2", "4,3,3", "4,3,2", "4,2,2", "3,3,3"), (0.1, 0.3),
                   {0.1: tuple(np.arange(9.0, 14.01, 0.5)), 0.3: tuple(np.arange(9.0, 14.51, 0.5))}),
    "13": BerStudy("13", "mp1", ("ml", "4,3,2", "4,2,2", "4,2,1", "3,2,2"), (0.1,),
                   {0.1: tuple(np.arange(8.0, 12.01, 0.5))}),
    "14": BerStudy("14", "epr4", ("ml", "4,4,2", "4,3,3", "3,3,3"), (0.1, 0.4),
                   {0.1: tuple(np.arange(9.0, 14.01, 0.5)), 0.4: tuple(np.arange(8.0, 13.51, 0.5))},
                   (0.0, 0.05, 0.1)),
}
BER_STUDIES["9"] = replace(BER_STUDIES["11"], key="9")
BER_STUDIES["13b"] = BerStudy("13b", "mp2", ("ml", "4,2,2,2", "4,2,2,1"), (0.1,),
                              {0.1: tuple(np.arange(8.0, 12.01, 0.5))})

LOSS_TABLES = {
    "II": BerStudy("II", "pr2", ("ml", "4,1", "4,2", "3,3", "4,3"), (0.1, 0.2, 0.3, 0.4)),
    "III": BerStudy("III", "epr4", ("ml", "4,3,3", "4,4,2", "4,3,2", "4,2,2", "3,3,3", "4,3,1"), (0.1, 0.2, 0.3, 0.4)),
}


def loss_study(target: ChannelTarget, epsilon: float, detectors, ber_target: float = 1e-4,
               start_db: float | None = None, seed: int = 1, delta_epsilon: float = 0.0,
               step_db: float = 0.25, **plan_kw) -> tuple[dict[str, float | None], list[BerPoint]]:
    """SNR loss of each detector against ML, locating each crossing adaptively."""
    base = SimPlan(target, epsilon, delta_epsilon, tuple(detectors), (), seed, **plan_kw)
    if start_db is None:
        start_db = _guess_snr(target, ItiModel(epsilon, delta_epsilon), ber_target)
    points: list[BerPoint] = []
    ref = bracket_ber(base, "ml", ber_target, start_db, step_db)
    points += ref
    ref_snr = snr_at_ber(ref, ber_target)
    for det in base.detectors:
        if det == "ml":
            continue
        points += bracket_ber(base, det, ber_target, round(ref_snr / step_db) * step_db, step_db)
    return snr_loss_at(points, ber_target), points


def _guess_snr(target: ChannelTarget, iti: ItiModel, ber_target: float) -> float:
    """Rough SNR where ML reaches ``ber_target``, from P ~ Q(d_min / 2 sigma)."""
    from statistics import NormalDist

    d = errspec.dmin_generic(target, iti)
    q = -NormalDist().inv_cdf(ber_target)
    sigma = math.sqrt(d) / (2 * q)
    return round(4 * 10 * math.log10(target.energy / (2 * sigma * sigma))) / 4


def reproduce(key: str, out_dir: str | os.PathLike = ".", **plan_kw) -> list[Path]:
    """Run a canned table or figure study and write its report files."""
    key = key.strip().upper().removeprefix("TABLE").removeprefix("FIG").strip()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if key in SPECTRUM_TABLES:
        report, summary = spectrum_table(SPECTRUM_TABLES[key])
        for name, text in ((f"table_{key}_events.txt", report), (f"table_{key}.csv", summary)):
            (out / name).write_text(text)
            written.append(out / name)
        return written
    if key in LOSS_TABLES:
        study = LOSS_TABLES[key]
        target = ChannelTarget.preset(study.target)
        rows = [("detector",) + tuple(f"eps={e:g}" for e in study.epsilons)]
        losses = {}
        all_points = []
        for eps in study.epsilons:
            losses[eps], pts = loss_study(target, eps, study.detectors, **plan_kw)
            all_points += pts
        for det in study.detectors[1:]:
            label = detector_label(det)
            rows.append((label,) + tuple(format_loss(losses[e][label]) for e in study.epsilons))
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(rows)
        (out / f"table_{key}.csv").write_text(buf.getvalue())
        (out / f"table_{key}_points.csv").write_text(points_to_csv(all_points))
        return [out / f"table_{key}.csv", out / f"table_{key}_points.csv"]
    lookup = {k.upper(): v for k, v in BER_STUDIES.items()}
    if key in lookup:
        study = lookup[key]
        target = ChannelTarget.preset(study.target)
        for eps in study.epsilons:
            for de in study.deltas:
                plan = SimPlan(target, eps, de, study.detectors, study.snr[eps], **plan_kw)
                tag = f"fig_{study.key}_eps{eps:g}" + (f"_de{de:g}" if de else "")
                path = out / f"{tag}.csv"
                path.write_text(points_to_csv(run_ber(plan)))
                written.append(path)
        return written
    known = sorted(SPECTRUM_TABLES) + sorted(LOSS_TABLES) + sorted(BER_STUDIES)
    raise ValueError(f"unknown reproduction id {key!r}; choose from {', '.join(known)}")
