"""What the eight trial metrics say about a classifier.

Builds two toy prediction batches over 3 classes: a confident, balanced
model and a hesitant one biased toward class 0, then walks through top-k
accuracy, average confidence (AC), its deviation (CD), the across-class
deviation (CDAC), and loss difference (LD).

Run:  python demos/metrics_tour.py
"""

import numpy as np

from lrtune import (
    LossPair,
    PredictionBatch,
    average_confidence,
    confidence_deviation,
    confidence_deviation_across_classes,
    loss_difference,
    per_class_average_confidence,
    top_k_accuracy,
)

LABELS = np.array([0, 0, 1, 1, 2, 2])

CONFIDENT = PredictionBatch(np.array([
    [0.95, 0.03, 0.02],
    [0.90, 0.06, 0.04],
    [0.04, 0.93, 0.03],
    [0.05, 0.91, 0.04],
    [0.02, 0.04, 0.94],
    [0.03, 0.05, 0.92],
]), LABELS)

HESITANT = PredictionBatch(np.array([
    [0.70, 0.20, 0.10],
    [0.65, 0.25, 0.10],
    [0.30, 0.45, 0.25],
    [0.45, 0.40, 0.15],   # wrong: argmax is class 0
    [0.25, 0.30, 0.45],
    [0.40, 0.25, 0.35],   # wrong: argmax is class 0
]), LABELS)


def describe(name: str, batch: PredictionBatch) -> None:
    print(f"-- {name}")
    print(f"   top-1 {top_k_accuracy(batch, 1):6.2f}%   "
          f"top-2 {top_k_accuracy(batch, 2):6.2f}%")
    print(f"   AC   {average_confidence(batch):.4f}  (mean true-class "
          f"probability over correct samples)")
    print(f"   CD   {confidence_deviation(batch):.4f}  (spread of those "
          f"confidences; small = stable)")
    per_class = per_class_average_confidence(batch)
    cells = ", ".join("--" if np.isnan(v) else f"{v:.3f}" for v in per_class)
    print(f"   per-class AC [{cells}]")
    print(f"   CDAC {confidence_deviation_across_classes(batch):.4f}  "
          f"(imbalance across classes)\n")


def main() -> None:
    describe("confident, balanced model", CONFIDENT)
    describe("hesitant model leaning toward class 0", HESITANT)

    print("-- loss difference as an over-fitting signal")
    healthy = LossPair(train_loss=0.3254, test_loss=0.3463)
    overfit = LossPair(train_loss=0.05, test_loss=0.61)
    print(f"   healthy run  LD = {loss_difference(healthy):+.4f}")
    print(f"   over-fit run LD = {loss_difference(overfit):+.4f}  "
          f"(test loss far above train loss)")


if __name__ == "__main__":
    main()
