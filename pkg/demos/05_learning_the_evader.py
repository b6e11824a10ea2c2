"""Replacing the evasion model with a network trained during the pursuit.

The pursuers normally predict the evader with the same switching law the
evader actually uses (minus its goal, which they cannot know). Here that
model is swapped for a small network that maps the evader-to-pursuer relative
positions to an escape direction, retrained every half second on a sliding
five-second window of observations. Tracking quality and accumulated game
cost stay close to the model-based run.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from nrpursuit import run_scenario
from nrpursuit.scenarios import two_pursuer_scenario

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)


def main():
    runs = {}
    for learning in (False, True):
        cfg = two_pursuer_scenario(learning=learning)
        trace, summary = run_scenario(cfg)
        runs["learned" if learning else "model-based"] = (trace, summary)
        print(
            f"{'learned' if learning else 'model-based':>12}: capture {summary.capture_time:5.1f}s, "
            f"post-capture mean error {summary.post_capture_mean_error:.2f} m, "
            f"final cost {summary.final_cost:.0f}"
        )

    fig, (ax1, ax2, ax3) = plt.subplots(1, 3, figsize=(15, 4.5))
    for name, (trace, _) in runs.items():
        ax1.plot(trace.t, trace.tracking_error(), lw=0.8, label=name)
        ax2.plot(trace.t, trace.cost, lw=1.2, label=name)
    ax1.set_xlabel("time [s]")
    ax1.set_ylabel("tracking error [m]")
    ax1.set_title("Tracking error, model vs learned prediction")
    ax1.legend()
    ax1.grid(True, alpha=0.3)

    ax2.set_xlabel("time [s]")
    ax2.set_ylabel("discounted cost J")
    ax2.set_title("Accumulated game cost")
    ax2.legend()
    ax2.grid(True, alpha=0.3)

    trace, _ = runs["learned"]
    trained = np.isfinite(trace.nn_loss)
    ax3.semilogy(trace.t[trained], trace.nn_loss[trained], "k-", lw=0.8)
    ax3.set_xlabel("time [s]")
    ax3.set_ylabel("windowed loss")
    ax3.set_title("Online training loss")
    ax3.grid(True, alpha=0.3)

    fig.tight_layout()
    fig.savefig(OUT / "learning_the_evader.png", dpi=120)
    print(f"wrote {OUT / 'learning_the_evader.png'}")


if __name__ == "__main__":
    main()
