"""Shared generators for randomized system tests."""
from __future__ import annotations

import numpy as np

from behavkernel import Complexity, random_system, simulate

SMALL_CLASSES = [
    Complexity(0, 1, 2, 2),
    Complexity(1, 1, 2, 2),
    Complexity(1, 1, 3, 3),
    Complexity(1, 2, 2, 1),
    Complexity(2, 1, 2, 2),
    Complexity(0, 2, 3, 2),
]


def random_case(seed: int, T: int | None = None, classes=SMALL_CLASSES):
    """(complexity, model, complete trajectory with random input and state)."""
    rng = np.random.default_rng(seed)
    cx = classes[int(rng.integers(len(classes)))]
    model = random_system(cx, seed=seed)
    T = T if T is not None else (cx.m + 1) * (cx.ell + 1 + cx.n) + 15
    w = simulate(model, rng.standard_normal(cx.n), rng.standard_normal((T, cx.m)))
    return cx, model, w


def fresh_trajectory(model, T: int, seed: int):
    rng = np.random.default_rng(seed)
    return simulate(model, rng.standard_normal(model.n), rng.standard_normal((T, model.m)))
