"""Command line entry point for the sampling and training study."""

from __future__ import annotations

import argparse
import sys

from .errors import InputError, TrainingBackendUnavailable
from .experiment import run_experiment


def _sizes(text: str) -> list[int]:
    try:
        sizes = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError("sizes must be comma separated integers") from exc
    if not sizes or any(s < 1 for s in sizes):
        raise argparse.ArgumentTypeError("sizes must be positive")
    return sizes


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="ga2m-eval",
        description=(
            "sample a binary classifier through the ptfc tool, train an "
            "additive model with pairwise interactions, and compare the "
            "fitted polynomial against the ground truth"
        ),
    )
    ap.add_argument("--bnc", required=True, help="classifier JSON file")
    ap.add_argument(
        "--sizes", type=_sizes, default=[400, 800, 1200, 1600, 2000],
        help="comma separated sample sizes (default 400,800,1200,1600,2000)",
    )
    ap.add_argument("--folds", type=int, default=5)
    ap.add_argument("--interactions", type=int, default=12,
                    help="number of feature pairs the model may use")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--backend", choices=("hgb", "ebm"), default="hgb")
    ap.add_argument("--out", default="ga2m_out", help="output directory")
    ap.add_argument("--cli", default="ptfc", help="name of the sampling command")
    args = ap.parse_args(argv)

    try:
        rows = run_experiment(
            args.bnc,
            sizes=args.sizes,
            folds=args.folds,
            interactions=args.interactions,
            seed=args.seed,
            out_dir=args.out,
            backend=args.backend,
            cli=args.cli,
        )
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TrainingBackendUnavailable, EnvironmentError) as exc:
        print(f"environment error: {exc}", file=sys.stderr)
        return 3

    for r in rows:
        print(
            f"size {r['size']:>5}  held-out {r['cv_heldout_accuracy']:.4f}  "
            f"whole-domain {r['whole_domain_accuracy']:.4f}  "
            f"affine {r['affine_only_accuracy']:.4f}  overlap {r['overlap']:.2f}"
        )
    print(f"results in {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
