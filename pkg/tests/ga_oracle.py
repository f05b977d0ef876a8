"""Naive reference implementation of blade products, independent of the kernel.

Blades are tuples of 1-based generator indices; multivectors are
{blade: coefficient} dicts.  Products concatenate the generator lists and
bubble-sort them, flipping the sign per swap and contracting equal
neighbours through the metric.  Used as the oracle for the table kernel.
"""

from __future__ import annotations


def blade_times(a: tuple, b: tuple, metric: dict) -> tuple[float, tuple]:
    gens = list(a) + list(b)
    sign = 1.0
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(gens) - 1:
            if gens[i] > gens[i + 1]:
                gens[i], gens[i + 1] = gens[i + 1], gens[i]
                sign = -sign
                changed = True
                i += 1
            elif gens[i] == gens[i + 1]:
                sign *= metric[gens[i]]
                del gens[i : i + 2]
                changed = True
                i = 0
            else:
                i += 1
    return sign, tuple(gens)


def gp(A: dict, B: dict, metric: dict) -> dict:
    out: dict = {}
    for ga, ca in A.items():
        for gb, cb in B.items():
            s, g = blade_times(ga, gb, metric)
            out[g] = out.get(g, 0.0) + s * ca * cb
    return out


def outer(A: dict, B: dict, metric: dict) -> dict:
    out: dict = {}
    for ga, ca in A.items():
        for gb, cb in B.items():
            s, g = blade_times(ga, gb, metric)
            if len(g) == len(ga) + len(gb):
                out[g] = out.get(g, 0.0) + s * ca * cb
    return out


def inner(A: dict, B: dict, metric: dict) -> dict:
    out: dict = {}
    for ga, ca in A.items():
        for gb, cb in B.items():
            if len(ga) == 0 or len(gb) == 0:
                continue
            s, g = blade_times(ga, gb, metric)
            if len(g) == abs(len(ga) - len(gb)):
                out[g] = out.get(g, 0.0) + s * ca * cb
    return out


def scalar(A: dict, B: dict, metric: dict) -> float:
    return gp(A, B, metric).get((), 0.0)


def reverse(A: dict) -> dict:
    return {g: c * (-1.0) ** (len(g) * (len(g) - 1) // 2) for g, c in A.items()}


def grade(A: dict, k: int) -> dict:
    return {g: c for g, c in A.items() if len(g) == k}


def metric_for(p: int, q: int) -> dict:
    return {i: (1.0 if i <= p else -1.0) for i in range(1, p + q + 1)}


def to_kernel(alg, A: dict):
    """Convert an oracle dict to a kernel multivector."""
    import numpy as np

    coeffs = np.zeros(alg.dim)
    for g, c in A.items():
        mask = 0
        for i in g:
            mask |= 1 << (i - 1)
        coeffs[mask] += c
    return alg.from_coeffs(coeffs)


def from_kernel(mv) -> dict:
    out = {}
    for mask in range(mv.alg.dim):
        c = mv.coeffs[mask]
        if c != 0.0:
            out[tuple(i + 1 for i in range(mv.alg.n) if mask >> i & 1)] = float(c)
    return out
