import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make ga_oracle importable

import cgareg as cg
from cgareg.ply_io import PointCloud, load_ply


def random_mv(alg, rng, grades=None, scale=1.0):
    coeffs = rng.uniform(-scale, scale, alg.dim)
    if grades is not None:
        keep = np.isin(alg.grades, list(grades))
        coeffs = np.where(keep, coeffs, 0.0)
    return alg.from_coeffs(coeffs)


def mv_close(a, b, tol=1e-12):
    scale = max(1.0, a.coeff_norm(), b.coeff_norm())
    return float(np.max(np.abs(a.coeffs - b.coeffs))) <= tol * scale


def random_euclidean_mv(rng, scale=1.0):
    """Random multivector supported on the Euclidean subalgebra of G(4,1)."""
    coeffs = rng.uniform(-scale, scale, cg.CGA.dim)
    for mask in range(cg.CGA.dim):
        if mask & 0b11000:
            coeffs[mask] = 0.0
    return cg.CGA.from_coeffs(coeffs)


def random_motor(rng, t_scale=1.0):
    seed = int(rng.integers(0, 2**62))
    return cg.random_motor("random", float(rng.uniform(0, t_scale)), seed)


def shell_standin(n=35947, seed=71, offset=(-0.03, 0.095, -0.01)) -> PointCloud:
    """Deterministic scan-like stand-in for a desk-scale model: an asymmetric
    closed shell with surface roughness, sized and placed like the common
    Stanford scans (~0.15 m extent, centroid ~0.1 from the origin)."""
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((n, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    x, y, z = u.T
    r = 1.0 + 0.35 * x * y + 0.25 * z**3 + 0.2 * x**3 - 0.15 * y * z**2 + 0.18 * y**3
    pts = u * r[:, None] * np.array([0.055, 0.065, 0.045])
    pts += 0.003 * rng.standard_normal((n, 3))
    return PointCloud("shell-standin", pts + np.asarray(offset))


@pytest.fixture(scope="session")
def bench_cloud() -> PointCloud:
    """The benchmark model: a real scan if CGAREG_BUNNY_PLY points at one,
    otherwise the deterministic stand-in of matching size and scale."""
    path = os.environ.get("CGAREG_BUNNY_PLY")
    if path:
        return load_ply(path)
    return shell_standin()
