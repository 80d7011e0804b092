"""Numerical derivatives of holomorphic functions of matrix entries.

``holo_grad`` evaluates the function on a small circle in each complex
coordinate direction and extracts the first Taylor coefficient with a
discrete Cauchy integral.  For functions analytic on the disc the error is
O(r^n), so moderate radii give near machine-precision derivatives without
subtractive cancellation.  ``central`` is a plain second-order difference kept
for comparison.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

CAUCHY_POINTS = 8


def holo_grad(F: Callable[[Sequence[np.ndarray]], np.ndarray],
              point: Sequence[np.ndarray], radius: float,
              method: str = "cauchy", n: int = CAUCHY_POINTS):
    """Gradient of a (vector-valued) holomorphic ``F`` at ``point``.

    ``point`` is a list of complex arrays.  Returns a list of arrays of shape
    ``value_shape + arr.shape`` holding ``dF/d(arr[idx])``.
    """
    arrays = [np.array(a, dtype=complex) for a in point]
    f0 = np.asarray(F(arrays), dtype=complex)
    if method == "cauchy":
        nodes = radius * np.exp(2j * np.pi * np.arange(n) / n)
        weights = np.conj(nodes / radius) / (n * radius)
    elif method == "central":
        nodes = np.array([radius, -radius], dtype=complex)
        weights = np.array([1, -1], dtype=complex) / (2 * radius)
    else:
        raise ValueError(f"unknown differentiation method {method!r}")
    grads = []
    for ai, arr in enumerate(arrays):
        g = np.zeros(f0.shape + arr.shape, dtype=complex)
        for idx in np.ndindex(arr.shape):
            acc = np.zeros(f0.shape, dtype=complex)
            for t, w in zip(nodes, weights):
                pert = [a if b != ai else a.copy() for b, a in enumerate(arrays)]
                pert[ai][idx] += t
                acc += w * np.asarray(F(pert), dtype=complex)
            g[(...,) + idx] = acc
        grads.append(g)
    return grads
