"""Dense geometric-algebra kernel for signatures G(p, q).

A multivector is a length-2^(p+q) coefficient vector over the basis blades
e_J, J a subset of generators encoded as a bitmask (bit k set means generator
e_{k+1} participates).  Generators are ordered so the p positive-square ones
come first, then the q negative-square ones; in the conformal algebra G(4,1)
this puts e1, e2, e3, e+ at bits 0..3 and e- at bit 4.

All products are realised through a sign table precomputed once per
signature: the reordering sign comes from counting generator swaps, the
metric sign from contracting repeated generators.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import AlgebraUsageError, NumericalDomainError, SignatureMismatchError

ZERO_TOL = 1e-12  # scaled by operand magnitude in zero tests


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _reorder_sign(a: int, b: int) -> int:
    """Sign from moving the generators of b through those of a (swap count)."""
    swaps = 0
    x = a >> 1
    while x:
        swaps += _popcount(x & b)
        x >>= 1
    return -1 if swaps & 1 else 1


class Algebra:
    """The geometric algebra of signature (p, q), with cached product tables."""

    def __init__(self, p: int, q: int):
        if p < 0 or q < 0 or p + q > 12:
            raise AlgebraUsageError(f"unsupported signature ({p},{q}); need p,q >= 0 and p+q <= 12")
        self.p = p
        self.q = q
        self.n = p + q
        self.dim = 1 << self.n
        self.metric = np.array([1.0] * p + [-1.0] * q)

        masks = np.arange(self.dim)
        self.grades = np.array([_popcount(m) for m in masks])
        # reversion sign per blade: (-1)^(k(k-1)/2)
        self.reverse_signs = np.where((self.grades * (self.grades - 1) // 2) % 2 == 0, 1.0, -1.0)
        # product of generator squares inside each blade
        metric_sq = np.ones(self.dim)
        for g in range(self.n):
            hit = (masks >> g) & 1 == 1
            metric_sq[hit] *= self.metric[g]
        self.blade_metric = metric_sq  # <e_J e_J^dagger> = eta_J

        sign = np.empty((self.dim, self.dim))
        for a in range(self.dim):
            for b in range(self.dim):
                s = _reorder_sign(a, b)
                common = a & b
                g = 0
                while common:
                    if common & 1 and self.metric[g] < 0:
                        s = -s
                    common >>= 1
                    g += 1
                sign[a, b] = s
        self.sign = sign
        self.xor = masks[:, None] ^ masks[None, :]

        ga = self.grades[:, None]
        gb = self.grades[None, :]
        gout = self.grades[self.xor]
        self.outer_keep = (gout == ga + gb).astype(float)
        contained = ((masks[:, None] & masks[None, :]) == masks[:, None]) | (
            (masks[:, None] & masks[None, :]) == masks[None, :]
        )
        self.inner_keep = (contained & (ga > 0) & (gb > 0)).astype(float)

    # -- constructors ------------------------------------------------------

    def mv(self, coeffs) -> "Multivector":
        arr = np.zeros(self.dim)
        arr[: len(coeffs)] = coeffs
        return Multivector(self, arr)

    def scalar(self, value: float) -> "Multivector":
        arr = np.zeros(self.dim)
        arr[0] = value
        return Multivector(self, arr)

    def blade(self, mask: int, value: float = 1.0) -> "Multivector":
        if not 0 <= mask < self.dim:
            raise AlgebraUsageError(f"blade mask {mask} out of range for G({self.p},{self.q})")
        arr = np.zeros(self.dim)
        arr[mask] = value
        return Multivector(self, arr)

    def e(self, *indices: int) -> "Multivector":
        """Basis blade from 1-based generator indices, e.g. e(1, 2) -> e12."""
        mask = 0
        for i in indices:
            if not 1 <= i <= self.n:
                raise AlgebraUsageError(f"generator index {i} out of range 1..{self.n}")
            bit = 1 << (i - 1)
            if mask & bit:
                raise AlgebraUsageError("repeated generator index in basis blade")
            mask |= bit
        return self.blade(mask)

    def from_coeffs(self, coeffs: np.ndarray) -> "Multivector":
        return Multivector(self, np.asarray(coeffs, dtype=float))

    def pseudoscalar(self) -> "Multivector":
        return self.blade(self.dim - 1)

    def grade_masks(self, k: int) -> list[int]:
        """Masks of the grade-k blades in lexicographic generator order."""
        masks = [int(m) for m in range(self.dim) if self.grades[m] == k]
        masks.sort(key=lambda m: tuple(i for i in range(self.n) if m >> i & 1))
        return masks

    def blade_name(self, mask: int) -> str:
        if mask == 0:
            return "1"
        gens = [str(i + 1) for i in range(self.n) if mask >> i & 1]
        return "e" + ("".join(gens) if self.n <= 9 else "_" + ",".join(gens))

    def __repr__(self):
        return f"Algebra({self.p},{self.q})"

    def __eq__(self, other):
        return isinstance(other, Algebra) and (self.p, self.q) == (other.p, other.q)

    def __hash__(self):
        return hash((self.p, self.q))


@lru_cache(maxsize=None)
def algebra(p: int, q: int) -> Algebra:
    return Algebra(p, q)


class Multivector:
    """Immutable dense multivector; all operations return new values."""

    __slots__ = ("alg", "coeffs")

    def __init__(self, alg: Algebra, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (alg.dim,):
            raise AlgebraUsageError(f"coefficient vector must have length {alg.dim}")
        if not np.all(np.isfinite(coeffs)):
            raise AlgebraUsageError("multivector coefficients must be finite")
        coeffs = coeffs.copy()
        coeffs.flags.writeable = False
        self.alg = alg
        self.coeffs = coeffs

    # -- bookkeeping ------------------------------------------------------

    def _check(self, other: "Multivector") -> None:
        if self.alg != other.alg:
            raise SignatureMismatchError(
                f"cannot combine multivectors of {self.alg} and {other.alg}"
            )

    @property
    def scalar_part(self) -> float:
        return float(self.coeffs[0])

    def __getitem__(self, mask: int) -> float:
        return float(self.coeffs[mask])

    def grades_present(self, tol: float = 0.0) -> set[int]:
        nz = np.abs(self.coeffs) > tol
        return {int(g) for g in np.unique(self.alg.grades[nz])}

    def coeff_norm(self) -> float:
        """Euclidean norm of the coefficient vector (always >= 0)."""
        return float(np.linalg.norm(self.coeffs))

    # -- linear structure --------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = self.alg.scalar(other)
        self._check(other)
        return Multivector(self.alg, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = self.alg.scalar(other)
        self._check(other)
        return Multivector(self.alg, self.coeffs - other.coeffs)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Multivector(self.alg, -self.coeffs)

    def __truediv__(self, value: float):
        return Multivector(self.alg, self.coeffs / float(value))

    # -- products ----------------------------------------------------------

    def _table_product(self, other: "Multivector", keep: np.ndarray | None) -> "Multivector":
        w = np.outer(self.coeffs, other.coeffs) * self.alg.sign
        if keep is not None:
            w = w * keep
        out = np.bincount(self.alg.xor.ravel(), weights=w.ravel(), minlength=self.alg.dim)
        return Multivector(self.alg, out)

    def gp(self, other: "Multivector") -> "Multivector":
        """Geometric product."""
        self._check(other)
        return self._table_product(other, None)

    def outer(self, other: "Multivector") -> "Multivector":
        self._check(other)
        return self._table_product(other, self.alg.outer_keep)

    def inner(self, other: "Multivector") -> "Multivector":
        """Inner product; annihilates scalar factors (A_r . B_s = 0 if r or s is 0)."""
        self._check(other)
        return self._table_product(other, self.alg.inner_keep)

    def scalar_product(self, other: "Multivector") -> float:
        """<AB>, the grade-0 part of the geometric product."""
        self._check(other)
        return float(np.dot(self.coeffs * other.coeffs, self.alg.sign.diagonal()))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Multivector(self.alg, self.coeffs * float(other))
        return self.gp(other)

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return Multivector(self.alg, self.coeffs * float(other))
        return NotImplemented

    def __xor__(self, other):
        return self.outer(other)

    def __or__(self, other):
        return self.inner(other)

    # -- involutions, grades, norms -----------------------------------------

    def reverse(self) -> "Multivector":
        return Multivector(self.alg, self.coeffs * self.alg.reverse_signs)

    def __invert__(self):
        return self.reverse()

    def grade(self, *grades: int) -> "Multivector":
        """Projection onto one or more grades."""
        if not grades:
            raise AlgebraUsageError("grade projection needs at least one grade")
        for g in grades:
            if not 0 <= g <= self.alg.n:
                raise AlgebraUsageError(f"grade {g} out of range 0..{self.alg.n}")
        keep = np.isin(self.alg.grades, list(grades))
        return Multivector(self.alg, np.where(keep, self.coeffs, 0.0))

    def norm_sq(self) -> float:
        """Signed norm <X X^dagger>; can be negative in mixed signatures."""
        return float(np.dot(self.coeffs * self.coeffs, self.alg.blade_metric))

    def magnitude(self) -> float:
        return float(np.sqrt(abs(self.norm_sq())))

    def is_simple(self, tol: float = ZERO_TOL) -> bool:
        """True when X X^dagger is a scalar within tolerance."""
        xxr = self.gp(self.reverse())
        scale = max(1.0, float(np.max(np.abs(xxr.coeffs))))
        return bool(np.max(np.abs(xxr.coeffs[1:])) <= tol * scale)

    def inverse(self, tol: float = ZERO_TOL) -> "Multivector":
        """Inverse of a simple multivector, X^dagger / <X X^dagger>."""
        xxr = self.gp(self.reverse())
        scale = max(1.0, float(np.max(np.abs(xxr.coeffs))))
        if np.max(np.abs(xxr.coeffs[1:])) > tol * scale:
            raise NumericalDomainError("inverse requires a simple multivector")
        denom = xxr.scalar_part
        if abs(denom) <= tol * scale:
            raise NumericalDomainError("inverse of a null multivector")
        return self.reverse() / denom

    def approx_eq(self, other: "Multivector", tol: float = 1e-12) -> bool:
        self._check(other)
        scale = max(1.0, self.coeff_norm(), other.coeff_norm())
        return bool(np.max(np.abs(self.coeffs - other.coeffs)) <= tol * scale)

    def __repr__(self):
        terms = []
        for mask in range(self.alg.dim):
            c = self.coeffs[mask]
            if c != 0.0:
                name = self.alg.blade_name(mask)
                terms.append(f"{c:g}" if mask == 0 else f"{c:g}*{name}")
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"


# -- module-level operations matching the kernel contract -------------------


def product(a: Multivector, b: Multivector, kind: str = "geometric"):
    """Dispatch to one of the four product kinds; 'scalar' returns a float."""
    if kind == "geometric":
        return a.gp(b)
    if kind == "outer":
        return a.outer(b)
    if kind == "inner":
        return a.inner(b)
    if kind == "scalar":
        return a.scalar_product(b)
    raise AlgebraUsageError(f"unknown product kind {kind!r}")


def grade_project(a: Multivector, grades) -> Multivector:
    if isinstance(grades, int):
        grades = (grades,)
    return a.grade(*grades)


def reverse(a: Multivector) -> Multivector:
    return a.reverse()


def norm_sq(a: Multivector) -> float:
    return a.norm_sq()


def inverse_simple(a: Multivector, tol: float = ZERO_TOL) -> Multivector:
    return a.inverse(tol)


def _validate_blade(A: Multivector, tol: float = ZERO_TOL) -> int:
    grades = A.grades_present(tol=tol * max(1.0, A.coeff_norm()))
    if len(grades) != 1:
        raise NumericalDomainError("projection target must be a homogeneous blade")
    if not A.is_simple(tol):
        raise NumericalDomainError("projection target must be a simple blade")
    return grades.pop()


def project_onto_blade(x: Multivector, A: Multivector, tol: float = ZERO_TOL) -> Multivector:
    """Projection P_A(x): scalars pass, grades 0<k<=s map to (x_k . A) A^-1, rest to 0."""
    x._check(A)
    s = _validate_blade(A, tol)
    A_inv = A.inverse(tol)
    out = x.grade(0)
    for k in range(1, s + 1):
        xk = x.grade(k)
        if np.any(xk.coeffs):
            out = out + xk.inner(A).gp(A_inv).grade(k)
    return out


def reciprocal_blade(alg: Algebra, mask: int) -> Multivector:
    """Blade e^J with <e_J e^K> = delta_JK over the blade basis."""
    if not 0 <= mask < alg.dim:
        raise AlgebraUsageError(f"blade mask {mask} out of range")
    e = alg.blade(mask)
    return e.reverse() * float(alg.blade_metric[mask])
