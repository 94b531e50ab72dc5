"""Mini version of the Fisher-preconditioning ablation.

Compares the explicit-Fisher arm ("nes") against the plain search
gradient ("sg") on the two-input sketch across a couple of learning
rates.  The full sweep (see `disnes run-ablation`) uses five rates,
five seeds, and 10,000 iterations; this trims everything to run in
seconds, so treat the numbers as illustrative only.
"""

import numpy as np

from disnes import TrainConfig
from disnes.harness import ABLATION_SKETCH, ABLATION_SPEC, run_ablation
import tempfile


def main():
    with tempfile.TemporaryDirectory() as out:
        config = TrainConfig(iterations=1500, population=50, log_every=100)
        results = run_ablation(
            seeds=(1, 2, 3), out_dir=out, config=config,
            learning_rates=(0.1, 0.001))

        print(f"{'arm':5s} {'lr':>7s} {'median decode MSE':>20s}")
        for arm in ("nes", "sg"):
            for lr in (0.1, 0.001):
                losses = [r.final_loss for r in results
                          if r.arm == arm and r.learning_rate == lr]
                print(f"{arm:5s} {lr:7g} {float(np.median(losses)):20.6f}")

        best = min(results, key=lambda r: r.final_loss)
        print(f"\nbest cell: {best.arm} lr={best.learning_rate:g} "
              f"seed={best.seed}  MSE={best.final_loss:.6f}")
        print(best.program_text)


if __name__ == "__main__":
    main()
