"""Newton-flow tracking on a memoryless plant.

The controller du/dt = alpha * (dg/du)^-1 (r - g(u)) drives the plant output
g(u) toward the reference r. Two effects are shown here:

* a constant reference is reached exactly (the flow is a continuous-time
  Newton iteration);
* a ramp reference leaves a steady error of |dr/dt| / alpha, so cranking up
  the gain shrinks the lag.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from nrpursuit import ReferenceSignal, simulate_memoryless_tracking

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)


def main():
    # ---- constant reference: exact convergence ----
    a = np.array([[2.0, 0.3], [0.1, 1.5]])
    target = np.array([4.0, -2.0])
    ref = ReferenceSignal(r=lambda t: target)
    t, _, errs = simulate_memoryless_tracking(
        lambda u: a @ u, lambda u: a, ref, duration=8.0, dt=1e-3, alpha=1.0, u0=np.zeros(2)
    )
    print(f"constant reference: error {errs[0]:.2f} -> {errs[-1]:.2e} after {t[-1]:.0f}s")

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.semilogy(t, errs)
    ax1.set_xlabel("time [s]")
    ax1.set_ylabel("||r - g(u)||")
    ax1.set_title("Constant reference: exponential convergence")
    ax1.grid(True, alpha=0.3)

    # ---- ramp reference: steady error eta / alpha ----
    rate = 2.0
    for alpha in (1.0, 5.0, 20.0):
        ref = ReferenceSignal(r=lambda t: rate * t, eta=rate)
        t, _, errs = simulate_memoryless_tracking(
            lambda u: u, lambda u: 1.0, ref, duration=12.0 / alpha, dt=1e-3, alpha=alpha
        )
        ax2.plot(t, errs, label=f"alpha={alpha:g} (limit {rate/alpha:.2f})")
        print(
            f"ramp, alpha={alpha:4.1f}: steady error {errs[-1]:.4f}"
            f" vs rate/alpha = {rate/alpha:.4f}"
        )
    ax2.set_xlabel("time [s]")
    ax2.set_ylabel("|r - y|")
    ax2.set_title("Ramp reference: lag shrinks as 1/alpha")
    ax2.legend()
    ax2.grid(True, alpha=0.3)

    fig.tight_layout()
    fig.savefig(OUT / "newton_flow_basics.png", dpi=120)
    print(f"wrote {OUT / 'newton_flow_basics.png'}")


if __name__ == "__main__":
    main()
