"""The cloud covariance map F(Z) = sum_i X_i Z X_i, its per-grade matrices,
eigendecomposition into eigenmultivectors, and reference-based normalization.

F is bilinear in the cloud, so it is fully determined by the coefficient
second-moment matrix S[a, b] = sum_i X_i[a] X_i[b]; assembling F from S makes
its value independent of cloud ordering (up to summation rounding) and keeps
matrix assembly cost independent of the cloud size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import Algebra, Multivector
from .conformal import CGA, FRAME, embed_coeff_columns
from .errors import AlgebraUsageError, DegeneracyError, NormalizationError

EIG_TOL = 1e-8  # eigen residual / imaginary-part rejection, relative
GAP_TOL = 1e-6  # relative eigenvalue gap below which a cluster is degenerate
REF_TOL = 1e-9  # reference-projection threshold below which a pair is dropped


class MultilinearMap:
    """Z -> sum_i X_i Z X_i for a cloud of multivectors X_i."""

    def __init__(self, alg: Algebra, moment: np.ndarray):
        if moment.shape != (alg.dim, alg.dim):
            raise AlgebraUsageError("moment matrix has the wrong shape")
        self.alg = alg
        self.moment = moment
        self._matrix: np.ndarray | None = None

    @classmethod
    def from_cloud(cls, cloud: list[Multivector]) -> "MultilinearMap":
        if not cloud:
            raise AlgebraUsageError("cloud must be non-empty")
        alg = cloud[0].alg
        for x in cloud:
            cloud[0]._check(x)
        C = np.stack([x.coeffs for x in cloud])
        return cls(alg, C.T @ C)

    @classmethod
    def from_points(cls, points: np.ndarray) -> "MultilinearMap":
        """Map of the conformally embedded point cloud (fast path)."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 3 or points.shape[0] == 0:
            raise AlgebraUsageError("points must be a non-empty (n, 3) array")
        masks, cols = embed_coeff_columns(points)
        small = cols.T @ cols
        moment = np.zeros((CGA.dim, CGA.dim))
        moment[np.ix_(masks, masks)] = small
        return cls(CGA, moment)

    def _column(self, j: int) -> np.ndarray:
        """Coefficients of F(e_j) = sum_{a,b} S[a,b] e_a e_j e_b."""
        alg = self.alg
        a = np.arange(alg.dim)
        sa = alg.sign[:, j]
        mid = a ^ j
        sb = alg.sign[mid, :]
        out_idx = mid[:, None] ^ a[None, :]
        contrib = self.moment * (sa[:, None] * sb)
        return np.bincount(out_idx.ravel(), weights=contrib.ravel(), minlength=alg.dim)

    def matrix(self) -> np.ndarray:
        """Full matrix M with F(Z).coeffs = M @ Z.coeffs (cached)."""
        if self._matrix is None:
            self._matrix = np.column_stack([self._column(j) for j in range(self.alg.dim)])
        return self._matrix

    def apply(self, Z: Multivector) -> Multivector:
        if Z.alg != self.alg:
            raise AlgebraUsageError("multivector belongs to a different algebra")
        return self.alg.from_coeffs(self.matrix() @ Z.coeffs)

    def grade_matrix(self, k: int) -> tuple[np.ndarray, list[int]]:
        """Matrix of F restricted to grade k, and the blade masks of its basis.

        Entry [K, J] is <F(e_J) e^K>, the coefficient of F(e_J) on blade K,
        over the grade-k blades in lexicographic generator order.
        """
        if k not in (1, 2):
            raise AlgebraUsageError("per-grade decomposition supports grades 1 and 2")
        masks = self.alg.grade_masks(k)
        M = self.matrix()
        return M[np.ix_(masks, masks)], masks


def build_cloud_map(cloud: list[Multivector]) -> MultilinearMap:
    return MultilinearMap.from_cloud(cloud)


def grade_matrix(F: MultilinearMap, k: int) -> np.ndarray:
    return F.grade_matrix(k)[0]


@dataclass
class EigenBasis:
    """Real eigenpairs of one grade, sorted by descending eigenvalue.

    ``scales`` records the normalization divisors applied so far, ``dropped``
    the rank indices removed by normalization, ``degenerate`` the rank indices
    flagged as members of an eigenvalue cluster.
    """

    grade: int
    pairs: list[tuple[float, Multivector]]
    scales: list[float] = field(default_factory=list)
    dropped: list[int] = field(default_factory=list)
    degenerate: list[int] = field(default_factory=list)

    def eigenvalues(self) -> list[float]:
        return [lam for lam, _ in self.pairs]


def _refine_eigenpair(M: np.ndarray, lam: float, v: np.ndarray, iters: int = 2):
    """Inverse-iteration polish of a computed eigenpair of a small dense matrix."""
    eye = np.eye(M.shape[0])
    for _ in range(iters):
        try:
            w = np.linalg.solve(M - lam * eye, v)
        except np.linalg.LinAlgError:
            break
        norm = np.linalg.norm(w)
        if not np.isfinite(norm) or norm == 0.0:
            break
        cand = w / norm
        if cand @ v < 0.0:
            cand = -cand
        cand_lam = float(cand @ (M @ cand))
        if np.linalg.norm(M @ cand - cand_lam * cand) <= np.linalg.norm(M @ v - lam * v):
            v, lam = cand, cand_lam
        else:
            break
    return lam, v


def eigen_grade(F: MultilinearMap, k: int, tol: float = EIG_TOL, gap_tol: float = GAP_TOL) -> EigenBasis:
    """Real eigenmultivectors of F on the grade-k subspace, eigenvalues descending.

    Pairs whose eigenvalue or eigenvector has an imaginary part above
    ``tol * |M|`` are rejected; eigenvalue clusters with relative gap below
    ``gap_tol`` are flagged as degenerate.
    """
    M, masks = F.grade_matrix(k)
    scale = float(np.linalg.norm(M, 2)) or 1.0
    vals, vecs = np.linalg.eig(M)

    kept: list[tuple[float, np.ndarray]] = []
    for idx in range(len(vals)):
        lam, vec = vals[idx], vecs[:, idx]
        if abs(lam.imag) > tol * scale or np.max(np.abs(vec.imag)) > tol:
            continue
        lam_r, vec_r = _refine_eigenpair(M, float(lam.real), vec.real.copy())
        kept.append((lam_r, vec_r))
    if len(kept) < 2:
        raise DegeneracyError(
            f"grade-{k} spectrum yields fewer than 2 usable real eigenpairs"
        )
    kept.sort(key=lambda p: -p[0])

    pairs = []
    for lam, vec in kept:
        arr = np.zeros(F.alg.dim)
        arr[masks] = vec
        P = F.alg.from_coeffs(arr)
        residual = np.linalg.norm(F.matrix() @ arr - lam * arr)
        if residual > tol * scale * max(1.0, np.linalg.norm(vec)):
            raise DegeneracyError(f"grade-{k} eigenpair residual {residual:g} above tolerance")
        pairs.append((lam, P))

    degenerate: set[int] = set()
    lams = [lam for lam, _ in pairs]
    for i in range(len(lams) - 1):
        if abs(lams[i] - lams[i + 1]) < gap_tol * scale:
            degenerate.update((i, i + 1))
    return EigenBasis(grade=k, pairs=pairs, degenerate=sorted(degenerate))


def reference_multivector(cloud: list[Multivector]) -> Multivector:
    """Equivariant reference (1 + i)(e_inf + mean(X) ^ e_inf) of a vector cloud."""
    if not cloud:
        raise AlgebraUsageError("cloud must be non-empty")
    acc = np.zeros(CGA.dim)
    for x in cloud:
        if x.alg != CGA:
            raise AlgebraUsageError("reference multivector needs G(4,1) vectors")
        acc += x.coeffs
    mean = CGA.from_coeffs(acc / len(cloud))
    return _reference_from_mean(mean)


def _reference_from_mean(mean: Multivector) -> Multivector:
    one_plus_i = CGA.scalar(1.0) + FRAME.i
    return one_plus_i.gp(FRAME.e_inf + mean.outer(FRAME.e_inf))


def reference_from_points(points: np.ndarray) -> Multivector:
    masks, cols = embed_coeff_columns(points)
    arr = np.zeros(CGA.dim)
    arr[masks] = cols.mean(axis=0)
    return _reference_from_mean(CGA.from_coeffs(arr))


def normalize_eigenbasis(basis: EigenBasis, P_ref: Multivector, ref_tol: float = REF_TOL) -> EigenBasis:
    """Scale each eigenmultivector P to P / <P P_ref>; drop near-orthogonal pairs.

    The drop test compares |<P P_ref>| against ``ref_tol`` times the product of
    coefficient norms (the signed norm can vanish on null elements, so it is
    unusable as a scale here).
    """
    ref_norm = P_ref.coeff_norm()
    pairs: list[tuple[float, Multivector]] = []
    scales: list[float] = []
    dropped: list[int] = list(basis.dropped)
    for rank, (lam, P) in enumerate(basis.pairs):
        denom = P.scalar_product(P_ref)
        if abs(denom) < ref_tol * P.coeff_norm() * ref_norm:
            dropped.append(rank)
            pairs.append((lam, P))
            scales.append(float("nan"))
            continue
        pairs.append((lam, P / denom))
        scales.append(denom)
    if len(dropped) >= len(basis.pairs):
        raise NormalizationError(
            f"all grade-{basis.grade} eigenmultivectors are orthogonal to the reference"
        )
    return EigenBasis(
        grade=basis.grade,
        pairs=pairs,
        scales=scales,
        dropped=sorted(set(dropped)),
        degenerate=list(basis.degenerate),
    )


def reciprocal_frame(mvs: list[Multivector]) -> list[Multivector]:
    """Multivectors P^j with <P_i P^j> = delta_ij, for a linearly independent set.

    In coefficients <X Y> = X^T D Y with D the diagonal of blade squares
    (entries +-1), so the reciprocals solve (A D) Y = I in the least-squares
    sense, A holding the coefficient rows of the inputs.
    """
    if not mvs:
        raise AlgebraUsageError("need at least one multivector")
    alg = mvs[0].alg
    A = np.stack([P.coeffs for P in mvs])
    AD = A * alg.sign.diagonal()[None, :]
    Y, *_ = np.linalg.lstsq(AD, np.eye(len(mvs)), rcond=None)
    if np.max(np.abs(AD @ Y - np.eye(len(mvs)))) > 1e-8 * max(1.0, np.max(np.abs(A))):
        raise DegeneracyError("multivector set is not linearly independent")
    return [alg.from_coeffs(Y[:, j]) for j in range(len(mvs))]
