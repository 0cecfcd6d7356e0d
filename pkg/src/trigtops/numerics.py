"""Richardson-extrapolated finite differences.

These are deliberately independent of any closed-form derivative so that the
identities they feed act as cross-checks.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

ArrayFn = Callable[[complex], np.ndarray]


def richardson(values: list[np.ndarray], ratio: float = 2.0, order: int = 2) -> np.ndarray:
    """Extrapolate estimates A(h), A(h/ratio), ... whose error expands in h^order, h^(2 order), ..."""
    table = [np.asarray(v) for v in values]
    p = order
    while len(table) > 1:
        fac = ratio**p
        table = [(fac * table[i + 1] - table[i]) / (fac - 1) for i in range(len(table) - 1)]
        p += order
    return table[0]


def derivative(f: ArrayFn, x: complex, step: float = 1e-5, levels: int = 2) -> np.ndarray:
    """Central difference f'(x), Richardson-extrapolated over ``levels`` halvings."""
    ests = []
    h = step
    for _ in range(levels):
        ests.append((f(x + h) - f(x - h)) / (2 * h))
        h /= 2
    return richardson(ests)


def even_limit(g: ArrayFn, step: float = 0.02, levels: int = 4) -> np.ndarray:
    """lim_{h->0} g(h) from symmetric samples (g(h) + g(-h)) / 2."""
    ests = []
    h = step
    for _ in range(levels):
        ests.append((g(h) + g(-h)) / 2)
        h /= 2
    return richardson(ests)


def odd_slope(g: ArrayFn, step: float = 0.02, levels: int = 4) -> np.ndarray:
    """g'(0) from symmetric samples (g(h) - g(-h)) / (2h)."""
    ests = []
    h = step
    for _ in range(levels):
        ests.append((g(h) - g(-h)) / (2 * h))
        h /= 2
    return richardson(ests)
