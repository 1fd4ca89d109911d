"""Writes the synthetic velocity fixture and its tabulated background."""

import random
from statistics import NormalDist

SEED = 4242
N = 1200
ALPHA = 0.3
SIGNAL = NormalDist(220.0, 7.5)
PARTS = [(0.6, NormalDist(40.0, 50.0)), (0.4, NormalDist(120.0, 70.0))]


def background_cdf(x):
    return sum(w * d.cdf(x) for w, d in PARTS)


def draw_background(rng):
    d = PARTS[0][1] if rng.random() < PARTS[0][0] else PARTS[1][1]
    return rng.gauss(d.mean, d.stdev)


rng = random.Random(SEED)
with open("velocity_synthetic.csv", "w") as f:
    f.write("velocity\n")
    for _ in range(N):
        v = rng.gauss(SIGNAL.mean, SIGNAL.stdev) if rng.random() < ALPHA else draw_background(rng)
        f.write(f"{v:.3f}\n")

with open("velocity_background.csv", "w") as f:
    f.write("x,cdf\n")
    for x in range(-400, 601, 2):
        f.write(f"{x},{background_cdf(x):.10f}\n")
