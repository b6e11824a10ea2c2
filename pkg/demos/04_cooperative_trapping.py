"""Two pursuers cooperating to trap the evader away from its goal.

The shared objective adds two terms to the summed squared distances: a
cooperation term that is happy as long as at least one pursuer is close, and
a repulsion term that keeps the pursuers from clumping together. The result
is an alternating harassment pattern: the evader shuttles between the two
pursuers, one distance peaking while the other bottoms out (their correlation
is strongly negative), and it never gets near its goal.
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
    cfg = two_pursuer_scenario()
    trace, summary = run_scenario(cfg)
    i0 = int(round(summary.capture_time / cfg.dt))
    corr = np.corrcoef(trace.distances[i0:, 0], trace.distances[i0:, 1])[0, 1]
    goal_gap = np.linalg.norm(trace.evader[-1] - cfg.evader.goal)
    print(
        f"capture at {summary.capture_time:.1f}s; post-capture corr(d1, d2) = {corr:.2f}; "
        f"evader ends {goal_gap:.1f} m from its goal"
    )

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(12, 5))
    ax1.plot(trace.evader[:, 0], trace.evader[:, 1], "g-", label="evader")
    ax1.plot(trace.pursuer_x[:, 0], trace.pursuer_y[:, 0], "b-", lw=0.8, label="pursuer 1")
    ax1.plot(trace.pursuer_x[:, 1], trace.pursuer_y[:, 1], "m-", lw=0.8, label="pursuer 2")
    ax1.plot(*cfg.evader.goal, "r*", ms=14, label="evader goal")
    ax1.set_xlabel("x [m]")
    ax1.set_ylabel("y [m]")
    ax1.axis("equal")
    ax1.legend()
    ax1.grid(True, alpha=0.3)
    ax1.set_title("Trajectories")

    ax2.plot(trace.t, trace.distances[:, 0], "b-", lw=0.8, label="d1")
    ax2.plot(trace.t, trace.distances[:, 1], "m-", lw=0.8, label="d2")
    ax2.set_xlabel("time [s]")
    ax2.set_ylabel("distance to evader [m]")
    ax2.set_xlim(summary.capture_time, trace.t[-1])
    ax2.set_ylim(0, 1.2 * max(trace.distances[i0:].max(), 1))
    ax2.legend()
    ax2.grid(True, alpha=0.3)
    ax2.set_title("Anti-phase harassment after capture")

    fig.tight_layout()
    fig.savefig(OUT / "cooperative_trapping.png", dpi=120)
    print(f"wrote {OUT / 'cooperative_trapping.png'}")


if __name__ == "__main__":
    main()
