"""Command-line entry point: ``emofuse <subcommand> [flags]``.

Exit status is 0 on success, 2 for unreadable or malformed input files,
3 for inputs that parse but violate a contract, and 4 for degenerate face
geometry.
"""
from __future__ import annotations

import argparse
import sys

from .errors import EmofuseError
from .pipeline import SUBCOMMANDS, RunConfig, run_pipeline

HELP = {
    "align": "write aligned landmarks (200x200 canvas, canonical pose)",
    "featurize": "write the 2307 distance/angle features per face",
    "train": "train the boosted-tree model on labelled landmarks",
    "predict": "write class probabilities for each face",
    "importance": "report per-feature gain and the above-average set",
    "fuse": "combine two probability files into one prediction",
    "evaluate": "confusion matrix, accuracy, macro-F1, entropy curve",
    "agreement": "compare two probability files against the truth",
    "subset": "balanced per-class subset of a label file",
    "split": "stratified train/test split of a label file",
    "dedup": "drop records with bit-identical landmarks",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="emofuse", description="Landmark alignment, features, boosted trees and probability fusion for 8-way emotion labels.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--landmarks", help="landmark CSV (id,width,height,x0,y0,...,x67,y67)")
        p.add_argument("--labels", help="label CSV (id,label)")
        p.add_argument("--probs-a", help="probability CSV for branch A")
        p.add_argument("--probs-b", help="probability CSV for branch B")
        p.add_argument("--model", help="model JSON")
        p.add_argument("--stats", help="feature statistics JSON")
        p.add_argument("--angle-table", help="angle table CSV (default: bundled table)")
        p.add_argument("--config", help="JSON run configuration; flags override it")
        p.add_argument("--seed", type=int)
        p.add_argument("--ratio", type=float, help="train fraction for split")
        p.add_argument("--bin-width", type=float, help="entropy bin width in nats")
        p.add_argument("--method", choices=["sum-softmax", "plain-sum", "min-entropy"])
        p.add_argument("--out", help="output file (directory for split)")
        if name == "featurize":
            p.add_argument("--fit-stats", action="store_true", help="fit z-score statistics and write them to --stats")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
        cfg = cfg.override(
            seed=args.seed,
            split_ratio=args.ratio,
            bin_width=args.bin_width,
            fusion_method=None if args.method is None else args.method.replace("-", "_"),
            angle_table=args.angle_table,
        )
        return run_pipeline(cfg, args.command, args)
    except EmofuseError as exc:
        print(f"emofuse {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
