"""Command-line entry point: ``rsse2h2t <subcommand> ...``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import errspec, harness
from .channel import ChannelTarget, ItiModel
from .trellis import SubsetConfig, build


def _target(text: str) -> ChannelTarget:
    return ChannelTarget.parse(text)


def _cmd_simulate(args) -> int:
    cfg = harness.parse_config_text(Path(args.config).read_text()) if args.config else {}
    overrides = {
        "target": args.target,
        "epsilon": args.epsilon,
        "depsilon": args.depsilon,
        "configs": args.configs,
        "snr": args.snr,
        "seed": args.seed,
        "max_bits": args.max_bits,
        "min_errors": args.min_errors,
        "workers": args.workers,
    }
    cfg.update({k: str(v) for k, v in overrides.items() if v is not None})
    plan = harness.plan_from_mapping(cfg)
    text = harness.points_to_csv(harness.run_ber(plan))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "ber.csv"
        path.write_text(text)
        print(path)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_dmin(args) -> int:
    target = _target(args.target)
    iti = ItiModel(args.epsilon, args.depsilon)
    d = errspec.dmin_generic(target, iti)
    print(f"dmin={d:.4f}")
    try:
        print(f"closed_form={errspec.dmin_closed_form(target, iti.epsilon, iti.delta_epsilon):.4f}")
    except ValueError:
        pass  # no closed form for this target
    return 0


def _cmd_search(args) -> int:
    target = _target(args.target)
    iti = ItiModel(args.epsilon, args.depsilon)
    cfg = SubsetConfig.parse(args.config) if args.config else None
    report = errspec.search_events(target, cfg, iti, args.dmax, mode=args.mode)
    sys.stdout.write(report.serialize())
    return 0


def _cmd_info(args) -> int:
    target = _target(args.target)
    cfg = SubsetConfig.parse(args.config)
    tr = build(cfg, target)
    iti = ItiModel(args.epsilon, args.depsilon)
    diagram = errspec.ErrorStateDiagram(target, iti, cfg)
    names = [",".join(str(c) for c in g) for g in tr.groups]
    print(f"configuration={cfg} target={target.label}")
    print(f"states={tr.n_states}")
    print(f"branches_per_state={len(tr.groups)} parallel_groups={' '.join('{' + n + '}' for n in names)}")
    print(f"merging_states={int(np.count_nonzero(diagram.merging))} of {diagram.n_states}")
    return 0


def _cmd_reproduce(args) -> int:
    kw = {}
    if args.seed is not None:
        kw["seed"] = args.seed
    for path in harness.reproduce(args.id, args.out, **kw):
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rsse2h2t", description="Reduced-state detection for two-head two-track channels.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="Monte Carlo BER of detectors over an SNR grid")
    s.add_argument("--config", help="key=value plan file")
    s.add_argument("--out", help="directory for ber.csv (stdout when omitted)")
    s.add_argument("--target")
    s.add_argument("--epsilon", type=float)
    s.add_argument("--depsilon", type=float)
    s.add_argument("--configs", help="detector list, e.g. 'ml;4,2;3,3'")
    s.add_argument("--snr", help="start:step:stop or comma list (dB)")
    s.add_argument("--seed", type=int)
    s.add_argument("--max-bits", type=int)
    s.add_argument("--min-errors", type=int)
    s.add_argument("--workers", type=int)
    s.set_defaults(func=_cmd_simulate)

    for name, fn, help_ in (("dmin", _cmd_dmin, "ML minimum distance"),
                            ("search-events", _cmd_search, "error events below a distance")):
        c = sub.add_parser(name, help=help_)
        c.add_argument("--target", required=True, help="preset (dicode, pr2, epr4, mp1, mp2) or taps")
        c.add_argument("--epsilon", type=float, required=True)
        c.add_argument("--depsilon", type=float, default=0.0)
        if name == "search-events":
            c.add_argument("--config", help="subset configuration, e.g. 4,3,2 (full trellis when omitted)")
            c.add_argument("--dmax", type=float, help="squared-distance threshold")
            c.add_argument("--mode", choices=("all", "early", "zero"), default="all")
        c.set_defaults(func=fn)

    i = sub.add_parser("info", help="structure of a subset trellis")
    i.add_argument("--config", required=True)
    i.add_argument("--target", required=True)
    i.add_argument("--epsilon", type=float, default=0.1)
    i.add_argument("--depsilon", type=float, default=0.0)
    i.set_defaults(func=_cmd_info)

    r = sub.add_parser("reproduce", help="run a canned table or figure study")
    r.add_argument("--id", required=True, help="II, III, V-IX or figure 9-14")
    r.add_argument("--out", default="results")
    r.add_argument("--seed", type=int)
    r.set_defaults(func=_cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"rsse2h2t: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
