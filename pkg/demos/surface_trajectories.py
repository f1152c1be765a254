"""Why the schedule decides where you land.

Runs plain gradient descent on the double well f(x,y) = (x^2-1)^2 + y^2
from one shared starting point under three policies: a small constant rate,
a two-milestone decaying schedule, and an exponentially damped triangle
cycle. The constant rate creeps into the left well; the two schedules that
open at 0.05 overshoot the hump on their first step and settle on the
right. Saves a contour plot when matplotlib is available.

Run:  python demos/surface_trajectories.py
"""

from pathlib import Path

import numpy as np

from lrtune import DoubleWellSurface, LRPolicy, converged_to, simulate
from lrtune.rng import labeled_rng

POLICIES = {
    "FIX": LRPolicy.fix(0.025),
    "NSTEP": LRPolicy.nstep(0.05, 0.1, [150, 180]),
    "TRIEXP": LRPolicy.triexp(0.05, 0.3, 0.94, 100),
}


def main() -> None:
    surface = DoubleWellSurface()
    rng = labeled_rng(0, "fig2-start")
    x0 = np.array([-2.5 + rng.uniform(-0.02, 0.02), 0.5])
    print(f"start: ({x0[0]:.4f}, {x0[1]:.4f}); minima at (-1, 0) and (1, 0)\n")

    trajectories = {}
    for name, policy in POLICIES.items():
        traj = simulate(surface, policy, x0, 200)
        trajectories[name] = traj
        final = traj.final_point()
        basin = "left" if final[0] < 0 else "right"
        target = (-1.0, 0.0) if final[0] < 0 else (1.0, 0.0)
        print(f"{name:<7} {policy.label()}")
        print(f"        final = ({final[0]:+.6f}, {final[1]:+.6f})  "
              f"basin = {basin}  settled = {converged_to(traj, target, 0.05)}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("\nmatplotlib not installed; skipping the contour plot")
        return

    xs = np.linspace(-2.8, 2.0, 300)
    ys = np.linspace(-1.2, 1.2, 200)
    grid_x, grid_y = np.meshgrid(xs, ys)
    z = (grid_x**2 - 1) ** 2 + grid_y**2

    fig, ax = plt.subplots(figsize=(9, 5))
    ax.contourf(grid_x, grid_y, np.log1p(z), levels=40, cmap="viridis")
    for (name, traj), color in zip(trajectories.items(), ("k", "r", "y")):
        pos = traj.positions()
        ax.plot(pos[:, 0], pos[:, 1], color=color, lw=1.4, label=name)
        ax.plot(*pos[-1], color=color, marker="*", ms=14)
    ax.plot([-1, 1], [0, 0], "w+", ms=10)
    ax.legend()
    ax.set_title("Gradient descent on the double well under three schedules")
    out = Path(__file__).parent / "output"
    out.mkdir(exist_ok=True)
    fig.savefig(out / "surface_trajectories.png", dpi=120, bbox_inches="tight")
    print(f"\nwrote {out / 'surface_trajectories.png'}")


if __name__ == "__main__":
    main()
