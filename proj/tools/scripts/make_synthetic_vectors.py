#!/usr/bin/env python3
"""Writes the bundled 50-d stand-in vectors for the ten apartment objects.

Each word is a weighted mix of a few latent "topic" directions (water and
hygiene, cooking, sleeping, furniture, electrical appliance) plus seeded
Gaussian noise. Replace the output with rows from a real pretrained release
(see extract_vectors.py) when one is available.
"""
import argparse

import numpy as np

TOPICS = ["hygiene", "cooking", "sleep", "furniture", "appliance"]

# word -> topic weights, in TOPICS order
WORDS = {
    "shower":     [1.00, 0.00, 0.05, 0.20, 0.05],
    "bathtub":    [0.95, 0.00, 0.05, 0.25, 0.00],
    "toilet":     [0.75, 0.05, 0.00, 0.10, 0.10],
    "stove":      [0.00, 1.00, 0.00, 0.10, 0.45],
    "toaster":    [0.00, 0.80, 0.00, 0.00, 0.70],
    "table":      [0.00, 0.35, 0.05, 0.90, 0.00],
    "microwave":  [0.00, 0.75, 0.00, 0.00, 0.80],
    "bed":        [0.05, 0.00, 1.00, 0.40, 0.00],
    "wardrobe":   [0.05, 0.00, 0.55, 0.85, 0.00],
    "nightstand": [0.00, 0.00, 0.70, 0.75, 0.05],
}


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--dim", type=int, default=50)
    p.add_argument("--seed", type=int, default=20200714)
    p.add_argument("--noise", type=float, default=0.25)
    p.add_argument("--out", default="data/objects50d.vec")
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    basis = rng.standard_normal((len(TOPICS), args.dim))
    common = rng.standard_normal(args.dim) * 0.5
    with open(args.out, "w") as f:
        f.write("# Synthetic stand-in vectors (NOT a pretrained release).\n")
        f.write(f"# make_synthetic_vectors.py --dim {args.dim} --seed {args.seed} --noise {args.noise}\n")
        for word, weights in WORDS.items():
            v = common + np.asarray(weights) @ basis + rng.standard_normal(args.dim) * args.noise
            f.write(word + " " + " ".join(f"{x:.6f}" for x in v) + "\n")


if __name__ == "__main__":
    main()
