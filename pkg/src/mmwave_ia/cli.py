"""Command-line interface.

    mmwave-ia gen-data --condition LoS --out los.mwds
    mmwave-ia train --dataset los.mwds --m 6 --out los_m6.ckpt
    mmwave-ia eval --dataset los.mwds --model los_m6.ckpt
    mmwave-ia sweep --out results/
    mmwave-ia timing --m 24 6 --speed 1.4 25
    mmwave-ia export-pattern --out pattern.txt

Every subcommand accepts ``--config FILE`` (JSON, see :mod:`mmwave_ia.config`),
``--set key.path=value`` overrides, ``--seed`` and ``--paper-scale``. Failures
print one ``error: <kind>: <message>`` line to stderr and exit with status 1.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import dataset, experiment, ia, nn, timing
from .antenna import BeamPattern, half_power_beamwidth
from .config import load_config
from .seeding import derive_seed


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config value (dotted path, JSON value); repeatable")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--paper-scale", action="store_true", help="use 1e6 receivers instead of 1e5")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmwave-ia", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="simulate receivers and write a dataset file")
    _common(p)
    p.add_argument("--condition", choices=["LoS", "NLoS"], default="LoS")
    p.add_argument("--samples", type=int, help="receiver count (overrides the config)")
    p.add_argument("--out", required=True, help="dataset file to write")
    p.add_argument("--csv", help="also write RSS per beam as CSV")

    p = sub.add_parser("train", help="train a network for one beam subset")
    _common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--m", type=int, required=True, help="number of swept beams")
    p.add_argument("--epochs", type=int, help="override the per-m epoch count")
    p.add_argument("--out", required=True, help="checkpoint to write")
    p.add_argument("--history", help="history CSV (default: <out>.history.csv)")

    p = sub.add_parser("eval", help="compare the network with the conventional sweep")
    _common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--predictions", help="per-receiver CSV of network predictions")

    p = sub.add_parser("sweep", help="train and evaluate every (condition, m) pair")
    _common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--save-models", action="store_true")

    p = sub.add_parser("timing", help="sweep, prediction and coherence times")
    _common(p)
    p.add_argument("--m", type=int, nargs="+", default=list(dataset.SUPPORTED_M))
    p.add_argument("--speed", type=float, nargs="+", default=[1.4, 25.0], help="m/s")
    p.add_argument("--fc", type=float, help="carrier frequency in Hz")
    p.add_argument("--comparators", type=int, choices=[1, 2])
    p.add_argument("--out", help="write the report here instead of stdout")

    p = sub.add_parser("export-pattern", help="write the tabulated beam pattern")
    _common(p)
    p.add_argument("--out", required=True)
    return parser


def _gen_data(args, cfg) -> None:
    if args.samples is not None:
        cfg = replace(cfg, sample_count=args.samples)
    ds = experiment.build_dataset(cfg, args.condition)
    dataset.save(ds, args.out)
    if args.csv:
        dataset.export_text(ds, args.csv)
    ch = ds.channel
    print(f"wrote {args.out}: samples={len(ds)} channel={ch.condition} ple={ch.ple:g} "
          f"sigma_db={ch.shadow_sigma_db:g} seed={cfg.master_seed}")


def _load_dataset(path) -> dataset.Dataset:
    if not Path(path).is_file():
        raise FileNotFoundError(f"dataset not found: {path}")
    return dataset.load(path)


def _train(args, cfg) -> None:
    if args.m not in dataset.SUPPORTED_M:
        raise ValueError(f"m must be one of {dataset.SUPPORTED_M}, got {args.m}")
    ds = _load_dataset(args.dataset)
    cond = ds.channel.condition
    subset = dataset.beam_subset(args.m)
    tcfg = replace(cfg.train, seed=derive_seed(cfg.master_seed, "shuffle", cond, args.m))
    model, hist = nn.train(dataset.split(ds), subset, tcfg,
                           init_seed=derive_seed(cfg.master_seed, "init", cond, args.m),
                           epochs=args.epochs)
    nn.save(model, args.out)
    hist_path = args.history or f"{args.out}.history.csv"
    hist.to_csv(hist_path)
    print(f"wrote {args.out}: condition={cond} m={args.m} epochs={len(hist)} "
          f"val_acc={100 * hist.val_acc[-1]:.2f}% history={hist_path}")


def _eval(args, cfg) -> None:
    ds = _load_dataset(args.dataset)
    model = nn.load(args.model)
    if model.subset is None:
        raise ValueError("checkpoint does not record its beam subset")
    subset = dataset.BeamSubset(len(model.subset), tuple(model.subset))
    test = dataset.split(ds)[2]
    deep, cbs = experiment.evaluate_cell(model, test, subset)
    in_subset = 100.0 * float(np.mean(np.isin(test.labels, subset.indices)))
    if args.predictions:
        ia.write_predictions(args.predictions, test.rss_dbm[:, subset.columns], subset,
                             deep, test.labels, ia.DEEPIA)
    print(json.dumps({"condition": ds.channel.condition, "m": subset.m, "test_samples": len(test),
                      "deepia_accuracy_pct": ia.accuracy_from_arrays(deep, test.labels),
                      "cbs_accuracy_pct": ia.accuracy_from_arrays(cbs, test.labels),
                      "true_in_subset_pct": in_subset}))


def _sweep(args, cfg) -> None:
    report = experiment.run(cfg, out_dir=args.out, save_models=args.save_models)
    for r in report.rows:
        print(f"{r['condition']:5s} m={r['m']:2d} {r['method']:6s} {r['accuracy_pct']:7.2f}%")
    print(f"wrote {args.out}: report_hash={report.content_hash()[:16]}")


def _timing(args, cfg) -> None:
    tcfg = cfg.timing
    if args.comparators is not None:
        tcfg = replace(tcfg, comparator_count=args.comparators)
    text = timing.timing_report(args.m, args.fc or cfg.carrier_hz, args.speed, tcfg)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)


def _export_pattern(args, cfg) -> None:
    BeamPattern(cfg.array).export(args.out)
    print(f"wrote {args.out}: hpbw_deg={half_power_beamwidth(cfg.array):.3f} "
          f"backlobe_region={cfg.array.backlobe_region}")


_COMMANDS = {"gen-data": _gen_data, "train": _train, "eval": _eval, "sweep": _sweep,
             "timing": _timing, "export-pattern": _export_pattern}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.overrides, args.seed, args.paper_scale)
        _COMMANDS[args.command](args, cfg)
    except Exception as e:  # one parsable line, no traceback
        msg = " ".join(str(e).split())
        print(f"error: {type(e).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
