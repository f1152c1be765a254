"""A tour of the 13 schedule kinds.

Evaluates one representative policy per kind over 10k iterations, prints a
small table of sampled rates, and (when matplotlib is installed) saves a
gallery plot to demos/output/schedule_gallery.png.

Run:  python demos/schedule_gallery.py
"""

from pathlib import Path

from lrtune import LRPolicy, param_count, schedule_series, validate

POLICIES = [
    LRPolicy.fix(0.01),
    LRPolicy.step(0.1, 0.85, 1000),
    LRPolicy.nstep(0.01, 0.9, [5000, 7000, 8000, 9000, 9500]),
    LRPolicy.exp(0.01, 0.9995),
    LRPolicy.inv(0.01, 0.0001, 0.75),
    LRPolicy.poly(0.01, 1.2, 10000),
    LRPolicy.tri(0.01, 0.06, 2000),
    LRPolicy.tri2(0.01, 0.06, 2000),
    LRPolicy.triexp(0.01, 0.06, 0.99994, 2000),
    LRPolicy.sin(0.01, 0.06, 2000),
    LRPolicy.sin2(0.01, 0.06, 2000),
    LRPolicy.sinexp(0.01, 0.06, 0.99994, 2000),
    LRPolicy.cos(0.06, 0.01, 2000),
]

SAMPLE_ITERS = (0, 1000, 2000, 4000, 6000, 10000)


def main() -> None:
    print("kind     #param  " + "".join(f"lr@{t:<9}" for t in SAMPLE_ITERS))
    for policy in POLICIES:
        assert validate(policy).ok
        series = {p.t: p.lr for p in schedule_series(policy, 10000, 1000)}
        cells = "".join(f"{series[t]:<12.3g}" for t in SAMPLE_ITERS)
        print(f"{policy.kind.value:<9}{param_count(policy):<7} {cells}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("\nmatplotlib not installed; skipping the gallery plot")
        return

    fig, axes = plt.subplots(5, 3, figsize=(12, 14), sharex=True)
    for ax, policy in zip(axes.ravel(), POLICIES):
        points = schedule_series(policy, 10000, 10)
        ax.plot([p.t for p in points], [p.lr for p in points], lw=1.0)
        ax.set_title(policy.label(), fontsize=8)
    for ax in axes.ravel()[len(POLICIES):]:
        ax.axis("off")
    fig.suptitle("The 13 learning-rate schedule kinds")
    out = Path(__file__).parent / "output"
    out.mkdir(exist_ok=True)
    fig.savefig(out / "schedule_gallery.png", dpi=120, bbox_inches="tight")
    print(f"\nwrote {out / 'schedule_gallery.png'}")


if __name__ == "__main__":
    main()
