"""Single pursuer against a game-theoretic evader.

The evader heads for its goal at (150, 60) while the pursuer is far away,
flees straight from it at medium range, and once inside the pursuer's turning
radius cuts sideways across its heading, where the vehicle cannot follow.
The pursuer circles back each time, so the tracking error settles into a
near-periodic sawtooth whose peaks sit a bit above twice the turning radius.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from nrpursuit import run_scenario
from nrpursuit.scenarios import single_adversarial_scenario

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)


def main():
    cfg = single_adversarial_scenario()
    trace, summary = run_scenario(cfg)
    radius = cfg.pursuers[0].turning_radius
    print(
        f"capture at {summary.capture_time:.1f}s; post-capture peak error "
        f"{summary.post_capture_peak_error:.2f} m (turning radius {radius:.1f} m, "
        f"expected between {2*radius:.1f} and {3*radius:.1f})"
    )

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(12, 5))
    ax1.plot(trace.evader[:, 0], trace.evader[:, 1], "g-", label="evader")
    ax1.plot(trace.pursuer_x[:, 0], trace.pursuer_y[:, 0], "b-", lw=0.8, label="pursuer")
    ax1.plot(*cfg.evader.goal, "r*", ms=14, label="evader goal")
    ax1.set_xlabel("x [m]")
    ax1.set_ylabel("y [m]")
    ax1.axis("equal")
    ax1.legend()
    ax1.grid(True, alpha=0.3)
    ax1.set_title("Trajectories")

    ax2.plot(trace.t, trace.tracking_error(), "r-", lw=0.8)
    ax2.axhline(2 * radius, color="gray", ls="--", label="2R")
    ax2.axvline(summary.capture_time, color="gray", ls=":", label="capture")
    ax2.set_xlabel("time [s]")
    ax2.set_ylabel("tracking error [m]")
    ax2.legend()
    ax2.grid(True, alpha=0.3)
    ax2.set_title("Near-periodic evasion cycles")

    fig.tight_layout()
    fig.savefig(OUT / "adversarial_evader.png", dpi=120)
    print(f"wrote {OUT / 'adversarial_evader.png'}")


if __name__ == "__main__":
    main()
