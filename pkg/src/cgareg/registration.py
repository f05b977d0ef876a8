"""Motor estimation from corresponded multivector sets, the end-to-end
correspondence-free registration pipelines (conformal spectral method and the
Euclidean PCA-style baseline), pose-error metrics, and primitive export.

Rotation is recovered as the eigenrotator of a 4x4 matrix over the rotor
basis (1, e12, e13, e23); translation either in closed form from a single
corresponded pair or by least squares over all retained pairs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .algebra import Multivector
from .conformal import (
    CGA,
    Motor,
    ROTOR_BASIS_MASKS,
    _sandwich,
    coeff_distance_sq,
    coefficients,
    dual_sphere_params,
    euclidean_coords,
    euclidean_vector,
    is_euclidean,
    lift_g3,
)
from .errors import (
    AlgebraUsageError,
    AmbiguousRotationError,
    DegeneracyError,
    ExactTranslationUnavailableError,
    NumericalDomainError,
    UndeterminedTranslationError,
)
from .spectra import (
    EigenBasis,
    MultilinearMap,
    eigen_grade,
    normalize_eigenbasis,
    reference_from_points,
    EIG_TOL,
    GAP_TOL,
    REF_TOL,
)
from .validation import check_points


@dataclass
class RegistrationConfig:
    """Tunable tolerances of the registration pipelines."""

    eig_tol: float = EIG_TOL
    gap_tol: float = GAP_TOL
    ref_tol: float = REF_TOL
    exact_translation: bool = False
    rotor_gap_tol: float = 1e-10  # relative top-eigenvalue gap below which rotation is ambiguous
    # Robust translation: re-solve after discarding pairs whose transport
    # residual exceeds trim_factor * median (noise mixes eigenmultivectors with
    # small spectral gaps; their transport is inconsistent with the majority).
    # A no-op on noise-free data, where all residuals vanish together.
    trim_factor: float = 4.0  # <= 0 disables trimming
    trim_iters: int = 3


@dataclass
class RegistrationResult:
    motor: Motor
    spectra_source: dict[int, list[float]]
    spectra_target: dict[int, list[float]]
    rotor_eigenvalue: float
    residual: float
    flags: list[str] = field(default_factory=list)
    runtime_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "rotor": [float(c) for c in self.motor.rotor_coeffs()],
            "rotor_basis": ["1", "e12", "e13", "e23"],
            "translation": [float(v) for v in self.motor.t],
            "rotor_eigenvalue": float(self.rotor_eigenvalue),
            "residual": float(self.residual),
            "spectra": {
                "source": {str(k): v for k, v in self.spectra_source.items()},
                "target": {str(k): v for k, v in self.spectra_target.items()},
            },
            "flags": list(self.flags),
            "runtime_s": float(self.runtime_s),
        }


@dataclass
class PrimitiveRecord:
    kind: str  # sphere | circle-raw | arrow
    payload: dict
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "payload": self.payload, "flags": list(self.flags)}


# -- rotor estimation ----------------------------------------------------------


def _check_euclidean_pair(A: Multivector, B: Multivector) -> None:
    A._check(B)
    if A.alg == CGA and not (is_euclidean(A) and is_euclidean(B)):
        raise AlgebraUsageError("rotor estimation expects Euclidean-subalgebra multivectors")


def estimate_rotor(
    pairs: list[tuple[Multivector, Multivector]],
    gap_tol: float = 1e-10,
) -> tuple[Multivector, float]:
    """Optimal rotor R for B_i ~ R A_i R^dagger over G3 multivector pairs.

    Returns the eigenrotator of largest eigenvalue of the 4x4 matrix of
    R -> <L(R)>_{0,2} over the basis (1, e12, e13, e23), unit-normalized and
    sign-canonicalized, together with its eigenvalue lambda;
    in the exact case lambda = sum_i |A_i|^2.
    """
    usable = []
    for A, B in pairs:
        _check_euclidean_pair(A, B)
        if A.coeff_norm() > 0.0:
            usable.append((A, B))
    if len(usable) < 2:
        raise AlgebraUsageError("rotor estimation needs at least 2 pairs with non-zero source")

    alg = usable[0][0].alg
    basis = [alg.blade(m) for m in ROTOR_BASIS_MASKS]
    M = np.zeros((4, 4))
    for A, B in usable:
        Ar = A.reverse()
        Br = B.reverse()
        for j, bj in enumerate(basis):
            L = B.gp(bj).gp(Ar) + Br.gp(bj).gp(A)
            for i, mask in enumerate(ROTOR_BASIS_MASKS):
                M[i, j] += L[mask]
    M = 0.5 * (M + M.T)
    w, V = np.linalg.eigh(M)
    top, second = w[-1], w[-2]
    if top - second <= gap_tol * max(1.0, abs(top)):
        raise AmbiguousRotationError("rotor eigenproblem has a degenerate top eigenvalue")
    v = V[:, -1]
    v = v / np.linalg.norm(v)
    coeffs = np.zeros(alg.dim)
    for val, mask in zip(v, ROTOR_BASIS_MASKS):
        coeffs[mask] = val
    rotor = alg.from_coeffs(coeffs)
    if rotor.scalar_part < 0.0 or (
        rotor.scalar_part == 0.0
        and next((c for c in v[1:] if c != 0.0), 1.0) < 0.0
    ):
        rotor = -rotor
    return rotor, float(top) / 2.0


# -- translation estimation ------------------------------------------------------


def _single_grade(X: Multivector, tol: float = 1e-9) -> int:
    grades = X.grades_present(tol=tol * max(1.0, X.coeff_norm()))
    if len(grades) != 1:
        raise AlgebraUsageError("translation estimation expects single-grade multivectors")
    return grades.pop()


def estimate_translation_lsq(pairs: list[tuple[Multivector, Multivector]]) -> np.ndarray:
    """Least-squares translation over corresponded single-grade pairs (S_i, Q_i).

    S_i are the rotated sources; the result minimises the summed transport
    distance sum_i d^2(T S_i T~, Q_i) + d^2(S_i, T~ Q_i T).
    """
    if not pairs:
        raise AlgebraUsageError("translation estimation needs at least one pair")
    s_n = 0.0
    acc = None
    scale = 0.0
    for S, Q in pairs:
        S._check(Q)
        if S.alg != CGA:
            raise AlgebraUsageError("translation estimation works on G(4,1) multivectors")
        ks, kq = _single_grade(S), _single_grade(Q)
        if ks != kq or ks < 1:
            raise AlgebraUsageError("pairs must share a single grade k >= 1")
        qs, qq = coefficients(S), coefficients(Q)
        s_n += qs.c1.norm_sq() + qq.c1.norm_sq()
        scale += S.coeff_norm() ** 2 + Q.coeff_norm() ** 2
        delta = (qq.c3 + qq.c4) - (qs.c3 + qs.c4)
        term = (qs.c1 + qq.c1).gp(delta.reverse()).grade(1)
        acc = term if acc is None else acc + term
    if s_n <= 1e-12 * max(1.0, scale):
        raise UndeterminedTranslationError("translation normal equations are singular (s_N ~ 0)")
    return euclidean_coords(acc) / s_n


def estimate_translation_exact(S: Multivector, Q: Multivector) -> np.ndarray:
    """Closed-form translation from one corresponded pair (rotated source S, target Q)."""
    S._check(Q)
    if S.alg != CGA:
        raise AlgebraUsageError("translation estimation works on G(4,1) multivectors")
    qs, qq = coefficients(S), coefficients(Q)
    try:
        c1_inv = qq.c1.inverse()
    except NumericalDomainError as exc:
        raise ExactTranslationUnavailableError(
            "first coefficient of the target is not invertible"
        ) from exc
    delta = (qq.c3 + qq.c4) - (qs.c3 + qs.c4)
    return euclidean_coords(delta.gp(c1_inv).grade(1))


# -- pose error metrics -----------------------------------------------------------


def pose_errors(est: Motor, truth: Motor) -> tuple[float, float]:
    """(relative rotation error in degrees, relative translation error).

    The rotation error is the angle of the relative rotor, 2*acos(<R_est
    R_truth~>) after resolving the rotor double cover; it is evaluated through
    the equivalent atan2 form, which stays accurate near zero.
    """
    prod = est.rotor.gp(truth.rotor.reverse())
    s = prod.scalar_part
    if s < 0.0:
        prod = -prod
        s = -s
    biv = prod.grade(2)
    rre = 2.0 * math.atan2(biv.coeff_norm(), min(s, 1.0))
    rte = float(np.linalg.norm(est.t - truth.t))
    return math.degrees(rre), rte


# -- the conformal spectral pipeline ----------------------------------------------


def _rank_pairs(
    bs: EigenBasis, bt: EigenBasis, flags: list[str], grade: int
) -> list[tuple[Multivector, Multivector]]:
    """Correspond source/target eigenmultivectors by eigenvalue rank.

    Each corresponded pair is rescaled to unit geometric-mean magnitude;
    rescaling both sides of a pair by the same factor preserves the rigid
    relation exactly and stops near-reference-orthogonal pairs (whose
    normalization blew their coefficients up) from dominating the solvers.
    """
    excluded = set(bs.dropped) | set(bt.dropped) | set(bs.degenerate) | set(bt.degenerate)
    m = min(len(bs.pairs), len(bt.pairs))
    for side, b in (("source", bs), ("target", bt)):
        if b.degenerate:
            flags.append(f"degenerate-spectrum:grade{grade}:{side}:{b.degenerate}")
        if b.dropped:
            flags.append(f"dropped-eigenmultivectors:grade{grade}:{side}:{b.dropped}")
    pairs = []
    for i in range(m):
        if i in excluded:
            continue
        P, Q = bs.pairs[i][1], bt.pairs[i][1]
        alpha = 1.0 / math.sqrt(P.coeff_norm() * Q.coeff_norm())
        pairs.append((P * alpha, Q * alpha))
    return pairs


def _spectra_dict(bases: dict[int, EigenBasis]) -> dict[int, list[float]]:
    return {k: [float(l) for l in b.eigenvalues()] for k, b in bases.items()}


def _trimmed_translation(
    rotor: Multivector,
    pairs: list[tuple[Multivector, Multivector]],
    rotated: list[tuple[Multivector, Multivector]],
    cfg: RegistrationConfig,
    flags: list[str],
) -> np.ndarray:
    """Least-squares translation with median-based residual trimming.

    Noise mixes eigenmultivectors whose eigenvalues are close, making a few
    pairs transport-inconsistent with the rest; re-solving on the pairs whose
    residual stays within ``trim_factor`` times the median discards them.
    Noise-free, every residual vanishes and the first estimate is returned.
    """
    t_vec = estimate_translation_lsq(rotated)
    if cfg.trim_factor <= 0.0:
        return t_vec
    kept = list(range(len(pairs)))
    for _ in range(max(0, cfg.trim_iters)):
        motor = Motor.from_rotor_translation(rotor, t_vec)
        residuals = np.array([coeff_distance_sq(motor.apply(P), Q) for P, Q in pairs])
        cutoff = cfg.trim_factor * float(np.median(residuals)) + 1e-18
        keep = [i for i in range(len(pairs)) if residuals[i] <= cutoff]
        if len(keep) < 3 or set(keep) == set(kept):
            kept = keep if len(keep) >= 3 else kept
            break
        kept = keep
        t_vec = estimate_translation_lsq([rotated[i] for i in kept])
    if len(kept) < len(pairs):
        flags.append(f"translation-trimmed-pairs:{sorted(set(range(len(pairs))) - set(kept))}")
    return t_vec


def register_cga_evd(source, target, cfg: RegistrationConfig | None = None) -> RegistrationResult:
    """Correspondence-free registration through conformal eigenmultivectors.

    Embeds both clouds in G(4,1), eigendecomposes the covariance maps on
    grades 1 and 2, normalizes against the equivariant reference multivector,
    corresponds eigenmultivectors by eigenvalue rank, then estimates the rotor
    from the translation-invariant first coefficients of the eigenbivectors
    and the translation by least squares over all retained pairs.
    """
    cfg = cfg or RegistrationConfig()
    t0 = time.perf_counter()
    src = check_points(source, "source", min_points=4)
    tgt = check_points(target, "target", min_points=4)

    flags: list[str] = []
    bases_s: dict[int, EigenBasis] = {}
    bases_t: dict[int, EigenBasis] = {}
    retained: dict[int, list[tuple[Multivector, Multivector]]] = {}

    F_s = MultilinearMap.from_points(src)
    F_t = MultilinearMap.from_points(tgt)
    ref_s = reference_from_points(src)
    ref_t = reference_from_points(tgt)
    for k in (1, 2):
        bs = normalize_eigenbasis(eigen_grade(F_s, k, cfg.eig_tol, cfg.gap_tol), ref_s, cfg.ref_tol)
        bt = normalize_eigenbasis(eigen_grade(F_t, k, cfg.eig_tol, cfg.gap_tol), ref_t, cfg.ref_tol)
        bases_s[k], bases_t[k] = bs, bt
        retained[k] = _rank_pairs(bs, bt, flags, k)

    rotor_pairs = [
        (coefficients(P).c1, coefficients(Q).c1) for P, Q in retained[2]
    ]
    if len(rotor_pairs) < 2:
        raise DegeneracyError("fewer than 2 usable eigenbivector pairs for rotor estimation")
    try:
        rotor, lam = estimate_rotor(rotor_pairs, cfg.rotor_gap_tol)
    except AlgebraUsageError as exc:
        raise DegeneracyError(str(exc)) from exc

    pairs_all = [pq for k in (1, 2) for pq in retained[k]]
    trans_pairs = [(_sandwich(rotor, P), Q) for P, Q in pairs_all]
    t_vec: np.ndarray | None = None
    if cfg.exact_translation:
        best = max(trans_pairs, key=lambda sq: abs(coefficients(sq[1]).c1.norm_sq()))
        try:
            t_vec = estimate_translation_exact(*best)
        except ExactTranslationUnavailableError:
            flags.append("exact-translation-unavailable:fell-back-to-lsq")
    if t_vec is None:
        t_vec = _trimmed_translation(rotor, pairs_all, trans_pairs, cfg, flags)

    motor = Motor.from_rotor_translation(rotor, t_vec)
    residual = float(
        np.mean([coeff_distance_sq(motor.apply(P), Q) for P, Q in pairs_all])
    )
    return RegistrationResult(
        motor=motor,
        spectra_source=_spectra_dict(bases_s),
        spectra_target=_spectra_dict(bases_t),
        rotor_eigenvalue=lam,
        residual=residual,
        flags=flags,
        runtime_s=time.perf_counter() - t0,
    )


# -- the Euclidean PCA-style baseline ----------------------------------------------


def _axis_sign_criteria(U: np.ndarray, i: int) -> list[float]:
    """Odd-in-axis-i moment statistics, even under flips of the other axes."""
    u = U[:, i]
    rms = float(np.sqrt(np.mean(U**2, axis=0))[i]) or 1.0
    crits = [float(np.mean(u**3)) / rms**3]
    for j in (1, 2):
        other = U[:, (i + j) % 3]
        orms = float(np.sqrt(np.mean(other**2))) or 1.0
        crits.append(float(np.mean(u * other**2)) / (rms * orms**2))
    return crits


def _fix_axis_signs(centered: np.ndarray, axes: np.ndarray, flags: list[str], side: str,
                    tie_tol: float = 1e-12) -> np.ndarray:
    """Resolve the per-axis sign ambiguity of principal axes via odd moments."""
    axes = axes.copy()
    U = centered @ axes
    for i in range(3):
        for crit in _axis_sign_criteria(U, i):
            if abs(crit) > tie_tol:
                if crit < 0.0:
                    axes[:, i] = -axes[:, i]
                    U[:, i] = -U[:, i]
                break
        else:
            flags.append(f"sign-ambiguous-axis:{side}:{i}")
    return axes


def register_vga_evd(source, target, cfg: RegistrationConfig | None = None) -> RegistrationResult:
    """PCA-style baseline: centroids for translation, principal axes for rotation.

    Principal-axis signs are fixed so the third central moment along each axis
    is non-negative (ties fall back to mixed odd moments and are flagged).
    """
    cfg = cfg or RegistrationConfig()
    t0 = time.perf_counter()
    src = check_points(source, "source", min_points=4)
    tgt = check_points(target, "target", min_points=4)

    flags: list[str] = []
    xbar, ybar = src.mean(axis=0), tgt.mean(axis=0)
    cx, cy = src - xbar, tgt - ybar
    Cx = cx.T @ cx
    Cy = cy.T @ cy
    wx, Vx = np.linalg.eigh(Cx)
    wy, Vy = np.linalg.eigh(Cy)
    wx, Vx = wx[::-1], Vx[:, ::-1]
    wy, Vy = wy[::-1], Vy[:, ::-1]

    scale = max(wx[0], wy[0], 1e-300)
    if np.min(np.diff(wx[::-1])) < cfg.gap_tol * scale or np.min(np.diff(wy[::-1])) < cfg.gap_tol * scale:
        raise DegeneracyError("near-isotropic covariance: principal axes are not unique")

    Vx = _fix_axis_signs(cx, Vx, flags, "source")
    Vy = _fix_axis_signs(cy, Vy, flags, "target")

    pairs = [
        (euclidean_vector(Vx[:, i]), euclidean_vector(Vy[:, i])) for i in range(3)
    ]
    try:
        rotor, lam = estimate_rotor(pairs, cfg.rotor_gap_tol)
    except AlgebraUsageError as exc:
        raise DegeneracyError(str(exc)) from exc
    motor_r = Motor.from_rotor_translation(rotor, np.zeros(3))
    t_vec = ybar - motor_r.rotation_matrix() @ xbar
    motor = Motor.from_rotor_translation(rotor, t_vec)

    residual = float(
        np.mean([coeff_distance_sq(motor_r.rotate(p), q) for p, q in pairs])
    )
    return RegistrationResult(
        motor=motor,
        spectra_source={1: [float(v) for v in wx]},
        spectra_target={1: [float(v) for v in wy]},
        rotor_eigenvalue=lam,
        residual=residual,
        flags=flags,
        runtime_s=time.perf_counter() - t0,
    )


# -- primitive export ---------------------------------------------------------------


_GRADE1_MASKS = None
_GRADE2_MASKS = None


def export_primitives(bases: dict[int, EigenBasis]) -> list[PrimitiveRecord]:
    """Geometric interpretation of an eigenbasis: spheres, raw circles, arrows."""
    global _GRADE1_MASKS, _GRADE2_MASKS
    if _GRADE1_MASKS is None:
        _GRADE1_MASKS = CGA.grade_masks(1)
        _GRADE2_MASKS = CGA.grade_masks(2)
    records: list[PrimitiveRecord] = []
    for lam, P in bases.get(1, EigenBasis(1, [])).pairs:
        try:
            center, r_sq = dual_sphere_params(P)
            records.append(
                PrimitiveRecord(
                    "sphere",
                    {
                        "center": [float(v) for v in center],
                        "r_sq": float(r_sq),
                        "eigenvalue": float(lam),
                    },
                )
            )
        except NumericalDomainError:
            records.append(
                PrimitiveRecord(
                    "sphere",
                    {
                        "center": None,
                        "r_sq": None,
                        "raw": [float(P[m]) for m in _GRADE1_MASKS],
                        "eigenvalue": float(lam),
                    },
                    flags=["flat-or-degenerate"],
                )
            )
    for lam, P in bases.get(2, EigenBasis(2, [])).pairs:
        records.append(
            PrimitiveRecord(
                "circle-raw",
                {
                    "bivector": [float(P[m]) for m in _GRADE2_MASKS],
                    "eigenvalue": float(lam),
                },
            )
        )
        arrow = coefficients(P).c1.grade(1)
        records.append(
            PrimitiveRecord(
                "arrow",
                {"vector": [float(v) for v in euclidean_coords(arrow)], "eigenvalue": float(lam)},
            )
        )
    return records


def primitives_for_points(points, cfg: RegistrationConfig | None = None) -> list[PrimitiveRecord]:
    """Spectral primitives of a single point cloud (used by the CLI)."""
    cfg = cfg or RegistrationConfig()
    pts = check_points(points, "points", min_points=4)
    F = MultilinearMap.from_points(pts)
    ref = reference_from_points(pts)
    bases = {}
    for k in (1, 2):
        bases[k] = normalize_eigenbasis(
            eigen_grade(F, k, cfg.eig_tol, cfg.gap_tol), ref, cfg.ref_tol
        )
    return export_primitives(bases)
