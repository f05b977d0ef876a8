"""Built-in invariant checks behind the `cgareg selftest` subcommand.

A quick, seeded subset of the full test suite: kernel algebra laws, conformal
identities, spectral equivariance, and noise-free registration exactness.
"""

from __future__ import annotations

import math

import numpy as np

from .algebra import algebra
from .bench import perturb, random_motor, synth_cloud
from .conformal import CGA, FRAME, Motor, apply_versor, coefficients, coeffs_under_motor, embed
from .registration import estimate_rotor, estimate_translation_lsq, pose_errors, register_cga_evd
from .spectra import MultilinearMap


def _random_mv(alg, rng, scale=1.0):
    return alg.from_coeffs(rng.uniform(-scale, scale, alg.dim))


def _check_kernel(rng) -> bool:
    alg = algebra(4, 1)
    for _ in range(200):
        a, b, c = (_random_mv(alg, rng) for _ in range(3))
        lhs = a.gp(b).gp(c)
        rhs = a.gp(b.gp(c))
        scale = max(1.0, lhs.coeff_norm(), rhs.coeff_norm())
        if np.max(np.abs(lhs.coeffs - rhs.coeffs)) > 1e-10 * scale:
            return False
        rev = a.gp(b).reverse()
        rev2 = b.reverse().gp(a.reverse())
        if np.max(np.abs(rev.coeffs - rev2.coeffs)) > 1e-12 * scale:
            return False
        for k in range(alg.n + 1):
            for r in range(alg.n + 1):
                if r != k and abs(a.grade(k).scalar_product(b.grade(r))) > 1e-12 * scale:
                    return False
    return True


def _check_conformal(rng) -> bool:
    for _ in range(200):
        x = rng.uniform(-10, 10, 3)
        y = rng.uniform(-10, 10, 3)
        px, py = embed(x), embed(y)
        if abs(px.norm_sq()) > 1e-12 * (1 + float(x @ x) ** 2):
            return False
        want = -0.5 * float((x - y) @ (x - y))
        if abs(px.scalar_product(py) - want) > 1e-11 * max(1.0, abs(want)):
            return False
    return True


def _check_transport(rng) -> bool:
    for _ in range(200):
        P = _random_mv(CGA, rng)
        motor = _random_motor(rng)
        moved = apply_versor(motor.mv, P)
        got = coeffs_under_motor(coefficients(P), motor, "forward")
        want = coefficients(moved)
        for g, w in zip(got.as_tuple(), want.as_tuple()):
            if np.max(np.abs(g.coeffs - w.coeffs)) > 1e-12 * max(1.0, w.coeff_norm()):
                return False
    return True


def _random_motor(rng) -> Motor:
    from .bench import random_motor as rm

    return rm("random", float(rng.uniform(0, 1)), int(rng.integers(0, 2**63)))


def _check_solvers(rng) -> bool:
    for _ in range(20):
        motor = _random_motor(rng)
        vecs = [CGA.from_coeffs(_vec_coeffs(rng.uniform(-1, 1, 3))) for _ in range(4)]
        pairs = [(v, motor.rotate(v)) for v in vecs]
        rotor, lam = estimate_rotor(pairs)
        want = sum(v.norm_sq() for v in vecs)
        if abs(lam - want) > 1e-9 * max(1.0, abs(want)):
            return False
        pts = [rng.uniform(-1, 1, 3) for _ in range(4)]
        ppairs = [(motor.rotate(embed(p)), motor.apply(embed(p))) for p in pts]
        t = estimate_translation_lsq(ppairs)
        if np.linalg.norm(t - motor.t) > 1e-10:
            return False
    return True


def _vec_coeffs(v):
    arr = np.zeros(CGA.dim)
    arr[[1, 2, 4]] = v
    return arr


def _check_registration(rng) -> bool:
    for seed in (3, 17):
        cloud = synth_cloud(60, seed, "uniform-cube")
        motor = random_motor("random", 1.0, seed + 1)
        target = perturb(cloud, motor, 0.0, seed + 2, shuffle=True)
        result = register_cga_evd(cloud.points, target.points)
        rre, rte = pose_errors(result.motor, motor)
        if rre > 1e-6 or rte > 1e-8:
            return False
    return True


def _check_spectrum_invariance(rng) -> bool:
    cloud = synth_cloud(50, 5, "uniform-cube")
    motor = random_motor(33.0, 0.5, 6)
    moved = perturb(cloud, motor, 0.0, 7, shuffle=True)
    Fs = MultilinearMap.from_points(cloud.points)
    Ft = MultilinearMap.from_points(moved.points)
    for k in (1, 2):
        ws = np.sort(np.linalg.eigvals(Fs.grade_matrix(k)[0]).real)
        wt = np.sort(np.linalg.eigvals(Ft.grade_matrix(k)[0]).real)
        scale = max(1.0, float(np.max(np.abs(ws))))
        if np.max(np.abs(ws - wt)) > 1e-9 * scale:
            return False
    return True


CHECKS = [
    ("kernel algebra laws", _check_kernel),
    ("conformal embedding identities", _check_conformal),
    ("coefficient transport oracle", _check_transport),
    ("rotor and translation solvers", _check_solvers),
    ("spectrum rigid-motion invariance", _check_spectrum_invariance),
    ("noise-free registration exactness", _check_registration),
]


def run_selftest() -> bool:
    ok_all = True
    rng = np.random.default_rng(20240811)
    for name, fn in CHECKS:
        ok = fn(rng)
        ok_all &= ok
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    return ok_all
