"""Conformal layer over G(4,1): point embedding, motors, the four-coefficient
split of a conformal multivector, coefficient transport under rigid motions,
the translation-aware distance, and the conformal image of Euclidean noise.

The null vectors e_o = (e- + e+)/sqrt(2) and e_inf = (e- - e+)/sqrt(2) are
derived from the two extra generators e+ (bit 3) and e- (bit 4); they are
never basis generators, so every product below reduces to kernel calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import Algebra, Multivector, ZERO_TOL, algebra
from .errors import (
    AlgebraUsageError,
    DegeneratePointError,
    DegenerateSphereError,
    NumericalDomainError,
)

G3 = algebra(3, 0)
CGA = algebra(4, 1)

_E1, _E2, _E3 = 1, 2, 4  # masks of the Euclidean generators
_EPLUS, _EMINUS = 8, 16
_EUCLIDEAN_MASKS = np.array([(m & (_EPLUS | _EMINUS)) == 0 for m in range(CGA.dim)])
ROTOR_BASIS_MASKS = (0, 3, 5, 6)  # 1, e12, e13, e23


class ConformalFrame:
    """The fixed null frame of G(4,1): e_o, e_inf, both pseudoscalars."""

    def __init__(self, alg: Algebra):
        if (alg.p, alg.q) != (4, 1):
            raise AlgebraUsageError("the conformal frame lives in G(4,1)")
        self.alg = alg
        s = 1.0 / math.sqrt(2.0)
        self.e_plus = alg.blade(_EPLUS)
        self.e_minus = alg.blade(_EMINUS)
        self.e_o = (self.e_minus + self.e_plus) * s
        self.e_inf = (self.e_minus - self.e_plus) * s
        self.E = self.e_o.outer(self.e_inf)  # e_o ^ e_inf == e+ e-
        self.I = alg.blade(7)  # e123
        self.i = self.I.gp(self.E)  # unit pseudoscalar of G(4,1)


FRAME = ConformalFrame(CGA)


def euclidean_part(X: Multivector) -> Multivector:
    """Fast path for the projection onto the Euclidean pseudoscalar e123.

    Equals project_onto_blade(X, e123): keeps the coefficients whose blades
    contain no e+/e- factor (scalars included), zeroes the rest.
    """
    return CGA.from_coeffs(np.where(_EUCLIDEAN_MASKS, X.coeffs, 0.0))


def is_euclidean(X: Multivector, tol: float = ZERO_TOL) -> bool:
    scale = max(1.0, X.coeff_norm())
    return bool(np.max(np.abs(X.coeffs[~_EUCLIDEAN_MASKS])) <= tol * scale)


def euclidean_vector(v) -> Multivector:
    """Lift a 3-vector (array-like) to a grade-1 Euclidean element of G(4,1)."""
    v = np.asarray(v, dtype=float).reshape(3)
    arr = np.zeros(CGA.dim)
    arr[[_E1, _E2, _E3]] = v
    return CGA.from_coeffs(arr)


def euclidean_coords(X: Multivector) -> np.ndarray:
    """The (e1, e2, e3) components of a multivector."""
    return np.array([X[_E1], X[_E2], X[_E3]])


def lift_g3(x: Multivector) -> Multivector:
    """Map a G(3,0) multivector onto the Euclidean subalgebra of G(4,1)."""
    if x.alg == CGA:
        return x
    if x.alg != G3:
        raise AlgebraUsageError("expected a multivector of G(3,0) or G(4,1)")
    arr = np.zeros(CGA.dim)
    arr[: G3.dim] = x.coeffs
    return CGA.from_coeffs(arr)


# -- embedding ---------------------------------------------------------------


def embed(x) -> Multivector:
    """Conformal embedding e_o + x + x^2/2 e_inf; the result is a null vector."""
    x = np.asarray(x, dtype=float).reshape(3)
    return FRAME.e_o + euclidean_vector(x) + FRAME.e_inf * (0.5 * float(x @ x))


def embed_points(points: np.ndarray) -> list[Multivector]:
    return [embed(p) for p in np.asarray(points, dtype=float)]


def embed_coeff_columns(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised embedding: (masks, (n, 5) coefficient columns).

    Column order follows ``masks`` = (e1, e2, e3, e+, e-).
    """
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    half_sq = 0.5 * np.einsum("ij,ij->i", pts, pts)
    s = 1.0 / math.sqrt(2.0)
    cols = np.empty((n, 5))
    cols[:, 0:3] = pts
    cols[:, 3] = s * (1.0 - half_sq)  # e+ component of e_o + x^2/2 e_inf
    cols[:, 4] = s * (1.0 + half_sq)  # e- component
    masks = np.array([_E1, _E2, _E3, _EPLUS, _EMINUS])
    return masks, cols


def unembed(P: Multivector, tol: float = ZERO_TOL) -> np.ndarray:
    """Euclidean point of a (scaled) conformal point."""
    alpha = -FRAME.e_inf.scalar_product(P)
    if abs(alpha) <= tol * max(1.0, P.coeff_norm()):
        raise DegeneratePointError("conformal element has vanishing e_o component")
    return euclidean_coords(P) / alpha


# -- versors -------------------------------------------------------------------


def translator(t) -> Multivector:
    """T = 1 + e_inf t / 2; satisfies T T^dagger = 1 exactly."""
    t = np.asarray(t, dtype=float).reshape(3)
    return CGA.scalar(1.0) + FRAME.e_inf.gp(euclidean_vector(t)) * 0.5


def rotor_exp(B: Multivector, theta: float, tol: float = 1e-10) -> Multivector:
    """Rotor for a rotation by ``theta`` in the plane of the unit bivector B.

    Sign convention: rotor_exp(e12, pi/2) maps e1 to e2 under x -> R x R^dagger,
    i.e. R = cos(theta/2) - sin(theta/2) B.
    """
    grades = B.grades_present(tol=tol * max(1.0, B.coeff_norm()))
    if grades not in ({2}, set()):
        raise AlgebraUsageError("rotor_exp needs a bivector")
    if abs(B.norm_sq() - 1.0) > tol:
        raise AlgebraUsageError("rotor_exp needs a unit bivector (|B|^2 = 1)")
    half = 0.5 * theta
    return B.alg.scalar(math.cos(half)) - B * math.sin(half)


def apply_versor(V: Multivector, Z: Multivector, tol: float = 1e-10) -> Multivector:
    """Sandwich V Z V^dagger for a unitary versor V."""
    V._check(Z)
    vv = V.gp(V.reverse())
    off = float(np.max(np.abs(vv.coeffs[1:])))
    if abs(vv.scalar_part - 1.0) > tol or off > tol * max(1.0, V.coeff_norm() ** 2):
        raise AlgebraUsageError("apply_versor needs a unitary versor (V V^dagger = 1)")
    return V.gp(Z).gp(V.reverse())


def _sandwich(V: Multivector, Z: Multivector) -> Multivector:
    return V.gp(Z).gp(V.reverse())


# -- motors --------------------------------------------------------------------


def _canonical_rotor(rotor: Multivector) -> Multivector:
    coeffs = [rotor.scalar_part] + [rotor[m] for m in ROTOR_BASIS_MASKS[1:]]
    for c in coeffs:
        if c > 0.0:
            return rotor
        if c < 0.0:
            return -rotor
    return rotor


@dataclass(frozen=True, eq=False)
class Motor:
    """Rigid transformation as (rotor of the Euclidean even subalgebra, translation).

    The stored rotor is canonical: unit norm, grades {0, 2}, scalar part >= 0
    (first nonzero bivector coefficient positive when the scalar part is 0).
    """

    rotor: Multivector
    t: np.ndarray

    @staticmethod
    def from_rotor_translation(rotor: Multivector, t, tol: float = 1e-10) -> "Motor":
        rotor = lift_g3(rotor)
        if not is_euclidean(rotor, tol):
            raise AlgebraUsageError("motor rotor must lie in the Euclidean subalgebra")
        if rotor.grades_present(tol=tol * max(1.0, rotor.coeff_norm())) - {0, 2}:
            raise AlgebraUsageError("motor rotor must have grades {0, 2}")
        nsq = rotor.norm_sq()
        if abs(nsq - 1.0) > tol:
            raise AlgebraUsageError("motor rotor must satisfy R R^dagger = 1")
        t = np.asarray(t, dtype=float).reshape(3).copy()
        t.flags.writeable = False
        return Motor(_canonical_rotor(rotor), t)

    @staticmethod
    def identity() -> "Motor":
        return Motor.from_rotor_translation(CGA.scalar(1.0), np.zeros(3))

    @property
    def translator_mv(self) -> Multivector:
        return translator(self.t)

    @property
    def mv(self) -> Multivector:
        """U = T R as a multivector of G(4,1)."""
        return self.translator_mv.gp(self.rotor)

    def rotor_coeffs(self) -> np.ndarray:
        """Rotor coefficients in basis order (1, e12, e13, e23)."""
        return np.array([self.rotor[m] for m in ROTOR_BASIS_MASKS])

    def rotation_matrix(self) -> np.ndarray:
        cols = []
        for mask in (_E1, _E2, _E3):
            img = _sandwich(self.rotor, CGA.blade(mask))
            cols.append(euclidean_coords(img))
        return np.column_stack(cols)

    def apply(self, Z: Multivector) -> Multivector:
        return _sandwich(self.mv, Z)

    def rotate(self, Z: Multivector) -> Multivector:
        return _sandwich(self.rotor, Z)

    def apply_points(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation_matrix().T + self.t

    def inverse(self) -> "Motor":
        R = self.rotation_matrix()
        return Motor.from_rotor_translation(self.rotor.reverse(), -(R.T @ self.t))


# -- the four-coefficient split -------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoeffQuad:
    """The four Euclidean-subalgebra coefficients of a G(4,1) multivector."""

    c1: Multivector
    c2: Multivector
    c3: Multivector
    c4: Multivector

    def as_tuple(self):
        return (self.c1, self.c2, self.c3, self.c4)


def coefficients(P: Multivector) -> CoeffQuad:
    """Split P = e_o c1 + e_inf c2 + (e_o ^ e_inf) c3 + c4 with c_i in G3."""
    if P.alg != CGA:
        raise AlgebraUsageError("coefficients are defined for G(4,1) multivectors")
    c1 = -euclidean_part(FRAME.e_inf.inner(P))
    c2 = -euclidean_part(FRAME.e_o.inner(P))
    c3 = euclidean_part(FRAME.E.inner(P))
    c4 = euclidean_part(P)
    return CoeffQuad(c1, c2, c3, c4)


def reconstruct(q: CoeffQuad, tol: float = ZERO_TOL) -> Multivector:
    """Inverse of :func:`coefficients` (geometric products on the left factors)."""
    for part in q.as_tuple():
        if not is_euclidean(part, tol):
            raise AlgebraUsageError("coefficient parts must lie in the Euclidean subalgebra")
    return FRAME.e_o.gp(q.c1) + FRAME.e_inf.gp(q.c2) + FRAME.E.gp(q.c3) + q.c4


def coeffs_under_motor(q: CoeffQuad, m: Motor, direction: str = "forward") -> CoeffQuad:
    """Transport the coefficient quadruple through a motor (or its inverse)."""
    t = euclidean_vector(m.t)
    t_sq = float(m.t @ m.t)
    if direction == "forward":
        r1, r2, r3, r4 = (m.rotate(c) for c in q.as_tuple())
        c1 = r1
        c3 = t.inner(r1) + r3
        c4 = t.outer(r1) + r4
        c2 = r1 * (0.5 * t_sq) - t.outer(t.inner(r1)) + r2 - t.outer(r3) + t.inner(r4)
        return CoeffQuad(c1, c2, c3, c4)
    if direction == "inverse":
        rrev = m.rotor.reverse()

        def rback(z: Multivector) -> Multivector:
            return _sandwich(rrev, z)

        # the t ^ (t . c1) term enters with a minus sign: substituting -t into
        # the forward translation expansion flips it (verified against the
        # direct sandwich product)
        c1 = rback(q.c1)
        c2 = (
            rback(q.c1) * (0.5 * t_sq)
            - rback(t.outer(t.inner(q.c1)))
            + rback(q.c2)
            + rback(t.outer(q.c3))
            - rback(t.inner(q.c4))
        )
        c3 = -rback(t.inner(q.c1)) + rback(q.c3)
        c4 = -rback(t.outer(q.c1)) + rback(q.c4)
        return CoeffQuad(c1, c2, c3, c4)
    raise AlgebraUsageError(f"unknown transport direction {direction!r}")


def coeff_distance_sq(P: Multivector, Q: Multivector) -> float:
    """Translation-aware squared distance: |c3(P)-c3(Q)|^2 + |c4(P)-c4(Q)|^2.

    A pseudo-distance: elements differing only in their e_o/e_inf scale parts
    (for instance e_o versus e_inf) are at distance zero.
    """
    qp, qq = coefficients(P), coefficients(Q)
    return (qp.c3 - qq.c3).norm_sq() + (qp.c4 - qq.c4).norm_sq()


def conformal_residual(x, n, m: Motor) -> Multivector:
    """Conformal image of additive Euclidean noise n at source point x under m."""
    x = np.asarray(x, dtype=float).reshape(3)
    n = np.asarray(n, dtype=float).reshape(3)
    moved = m.apply_points(x[None, :])[0]
    coef = float(n @ n) + 2.0 * float(n @ moved)
    return euclidean_vector(n) + FRAME.e_inf * (0.5 * coef)


def dual_sphere_params(v: Multivector, tol: float = ZERO_TOL) -> tuple[np.ndarray, float]:
    """(center, signed r^2) of the dual sphere encoded by a grade-1 element.

    Negative r^2 marks an imaginary sphere; the signed value is returned as is.
    """
    if v.grades_present(tol=tol * max(1.0, v.coeff_norm())) - {1}:
        raise AlgebraUsageError("dual_sphere_params needs a grade-1 multivector")
    alpha = -FRAME.e_inf.scalar_product(v)
    if abs(alpha) <= tol * max(1.0, v.coeff_norm()):
        raise DegenerateSphereError("flat or degenerate dual sphere (no e_o component)")
    center = euclidean_coords(v) / alpha
    r_sq = v.norm_sq() / (alpha * alpha)
    return center, float(r_sq)
