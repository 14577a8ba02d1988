"""Frozen reference outputs for regression tests.

ENCODER_GOLDEN_S0: first sentence vector of the two-sentence toy document
encoded by the d_model=8 encoder initialised at torch seed 0.
"""

ENCODER_GOLDEN_S0 = [
    0.40190988779067993,
    -2.0377047061920166,
    0.22355926036834717,
    0.687808096408844,
    -0.12053199112415314,
    0.9988344311714172,
    0.9572314023971558,
    -1.111106514930725,
]
