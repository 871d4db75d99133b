"""Command line for the tube trainer: train on one synthetic volume, export
predictions in the curvefield wire format."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .losses import report_loss
from .train import TrainConfig, export_predictions, load_checkpoint, train


def build_parser():
    parser = argparse.ArgumentParser(prog="tube-trainer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on one volume per a JSON config")
    p.add_argument("--config", required=True)

    p = sub.add_parser("export", help="full-volume prediction from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--volume", required=True)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--report-loss", action="store_true",
                   help="also print the loss of the export vs the training ground truth")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "train":
        config = TrainConfig.from_json(args.config)
        _, history = train(config)
        if history:
            print(f"trained {len(history)} iterations; final total loss "
                  f"{history[-1]['total']:.4f}")
        else:
            print("trained 0 iterations (untrained checkpoint)")
        print(f"checkpoint: {Path(config.out_dir) / 'checkpoint.pt'}")
        return 0
    if args.command == "export":
        model, config = load_checkpoint(args.checkpoint)
        field, closeness = export_predictions(model, args.volume, args.out_prefix)
        print(f"export: wrote {args.out_prefix}.field and {args.out_prefix}.closeness")
        if args.report_loss:
            from . import wire

            _, gt_field = wire.read_volume(config["gt_field"])
            _, gt_closeness = wire.read_volume(config["gt_closeness"])
            report = report_loss(field, closeness, gt_field, gt_closeness,
                                 config["closeness_radius"], config["field_radius"])
            print(json.dumps(report, indent=2))
        return 0
    return 1


if __name__ == "__main__":
    sys.exit(main())
