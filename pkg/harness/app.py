"""
Semcom CLI - Entry point for grid runs, tiny-network training and self-checks
Usage:
    semcom run --config configs/denoise.yaml [--seed N] [--workers N] [--out DIR]
    semcom train-denoiser --config configs/train_tiny.yaml [--out PATH]
    semcom selftest
"""

import argparse
import os
import sys
from typing import List, Optional

import numpy as np
from dotenv import load_dotenv
from pydantic import ValidationError

from core.denoiser import TinyDenoiser, save_denoiser, train_tiny_denoiser
from core.errors import SemcomError

from .config_loader import load_experiment_config
from .experiment import ExperimentConfig
from .experiment_runner import run_grid
from .selftest import run_selftest
from .shared_models import build_experiment_context


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semcom",
                                     description="Semantic communication restoration simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a PSNR x trial grid")
    run.add_argument("--config", required=True, help="experiment YAML file")
    run.add_argument("--seed", type=int, default=None, help="master seed override")
    run.add_argument("--workers", type=int, default=None, help="worker processes")
    run.add_argument("--out", default=None, help="output directory")
    run.add_argument("--verbose", action="store_true", help="progress bars")

    train = sub.add_parser("train-denoiser", help="train the tiny noise-prediction network")
    train.add_argument("--config", required=True, help="experiment YAML file")
    train.add_argument("--out", default=None, help="parameter file (.npy)")
    train.add_argument("--verbose", action="store_true")

    sub.add_parser("selftest", help="run the built-in invariant checks")
    return parser


def command_run(args) -> int:
    cfg = load_experiment_config(args.config, {
        "master_seed": args.seed,
        "workers": args.workers,
        "output_dir": args.out,
        "verbose": True if args.verbose else None,
    })
    run = run_grid(cfg)
    print(f"✅ Results written to {os.path.abspath(run.output_dir)}")
    return 0


def train_denoiser(cfg: ExperimentConfig, out_path: str, verbose: bool = False) -> str:
    """Train the tiny network on the configured data source and save it"""
    context = build_experiment_context(cfg, with_denoiser=False)
    training = cfg.training
    rng = np.random.default_rng(training.seed)
    latents, labels = context.draw_batch(training.dataset_size, rng)
    embeddings = context.embeddings[labels]

    net = TinyDenoiser(context.schedule, context.dim, embeddings.shape[1], training.hidden,
                       rng=rng)
    print(f"[TRAIN] {training.dataset_size} latents (d={context.dim}), hidden={training.hidden}, "
          f"{training.epochs} epochs")
    report = train_tiny_denoiser(net, latents, embeddings, training, verbose=verbose)
    print(f"[TRAIN] held-out loss {report.held_out_losses[0]:.4f} -> "
          f"{report.held_out_losses[-1]:.4f}")
    path = save_denoiser(net, out_path)
    print(f"💾 [TRAIN] Saved parameters to {path}")
    return path


def command_train(args) -> int:
    cfg = load_experiment_config(args.config)
    out_path = args.out or cfg.denoiser_path or os.path.join(cfg.output_dir, "tiny_denoiser.npy")
    train_denoiser(cfg, out_path, verbose=args.verbose)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return command_run(args)
        if args.command == "train-denoiser":
            return command_train(args)
        return 0 if run_selftest() else 1
    except (SemcomError, ValidationError) as e:
        print(f"❌ {type(e).__name__}: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
