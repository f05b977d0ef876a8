import numpy as np
import pytest

import cgareg as cg
from cgareg.errors import AlgebraUsageError, DegeneracyError, NormalizationError
from conftest import mv_close, random_mv, random_motor

CGA = cg.CGA
FRAME = cg.FRAME


def _moved_cloud(points, motor):
    return motor.apply_points(points)


def _direct_apply(cloud, Z):
    out = CGA.scalar(0.0)
    for X in cloud:
        out = out + X.gp(Z).gp(X)
    return out


# -- the multilinear map ----------------------------------------------------------


def test_single_point_cloud_map():
    F = cg.build_cloud_map([FRAME.e_o])
    got = F.apply(FRAME.e_inf)
    assert mv_close(got, -2.0 * FRAME.e_o, 1e-14)  # e_o e_inf e_o = -2 e_o


def test_apply_matches_direct_sandwich_sum():
    rng = np.random.default_rng(0)
    cloud = [random_mv(CGA, rng) for _ in range(5)]
    F = cg.build_cloud_map(cloud)
    for _ in range(20):
        Z = random_mv(CGA, rng)
        assert mv_close(F.apply(Z), _direct_apply(cloud, Z), 1e-11)


def test_apply_linearity():
    rng = np.random.default_rng(1)
    cloud = [cg.embed(p) for p in rng.uniform(-1, 1, (10, 3))]
    F = cg.build_cloud_map(cloud)
    for _ in range(50):
        Z1, Z2 = random_mv(CGA, rng), random_mv(CGA, rng)
        a, b = rng.uniform(-2, 2, 2)
        lhs = F.apply(Z1 * float(a) + Z2 * float(b))
        rhs = F.apply(Z1) * float(a) + F.apply(Z2) * float(b)
        assert mv_close(lhs, rhs, 1e-12)


def test_permutation_invariance_of_map():
    rng = np.random.default_rng(2)
    pts = rng.uniform(-1, 1, (40, 3))
    F1 = cg.MultilinearMap.from_points(pts)
    F2 = cg.MultilinearMap.from_points(pts[rng.permutation(40)])
    Z = random_mv(CGA, rng)
    assert mv_close(F1.apply(Z), F2.apply(Z), 1e-10)


def test_from_points_matches_from_cloud():
    rng = np.random.default_rng(3)
    pts = rng.uniform(-1, 1, (15, 3))
    F1 = cg.MultilinearMap.from_points(pts)
    F2 = cg.build_cloud_map([cg.embed(p) for p in pts])
    assert np.max(np.abs(F1.matrix() - F2.matrix())) <= 1e-11 * max(1.0, np.max(np.abs(F1.matrix())))


def test_empty_cloud_rejected():
    with pytest.raises(AlgebraUsageError):
        cg.build_cloud_map([])
    with pytest.raises(AlgebraUsageError):
        cg.MultilinearMap.from_points(np.zeros((0, 3)))


# -- grade matrices -----------------------------------------------------------------


def test_grade_matrix_dimensions():
    rng = np.random.default_rng(4)
    F = cg.MultilinearMap.from_points(rng.uniform(0, 1, (10, 3)))
    assert cg.grade_matrix(F, 1).shape == (5, 5)
    assert cg.grade_matrix(F, 2).shape == (10, 10)
    with pytest.raises(AlgebraUsageError):
        cg.grade_matrix(F, 3)


def test_grade_matrix_single_generator_cloud():
    F = cg.build_cloud_map([CGA.e(1)])
    M = cg.grade_matrix(F, 1)
    assert np.allclose(M, np.diag([1.0, -1.0, -1.0, -1.0, -1.0]))


def test_grade_matrix_finite_for_embedded_clouds():
    rng = np.random.default_rng(5)
    F = cg.MultilinearMap.from_points(rng.uniform(-5, 5, (100, 3)))
    assert np.all(np.isfinite(cg.grade_matrix(F, 1)))
    assert np.all(np.isfinite(cg.grade_matrix(F, 2)))


# -- eigendecomposition ----------------------------------------------------------------


def test_eigen_single_generator_cloud():
    F = cg.build_cloud_map([CGA.e(1)])
    basis = cg.eigen_grade(F, 1)
    assert np.allclose(basis.eigenvalues(), [1.0, -1.0, -1.0, -1.0, -1.0])
    # the fourfold -1 cluster is flagged as degenerate
    assert basis.degenerate == [1, 2, 3, 4]


def test_eigen_residual_contract():
    rng = np.random.default_rng(6)
    F = cg.MultilinearMap.from_points(rng.uniform(-1, 1, (30, 3)))
    for k in (1, 2):
        basis = cg.eigen_grade(F, k, tol=1e-8)
        scale = np.linalg.norm(F.grade_matrix(k)[0], 2)
        for lam, P in basis.pairs:
            resid = (F.apply(P) - P * lam).coeff_norm()
            assert resid <= 1e-8 * scale * max(1.0, P.coeff_norm())


def test_eigenvalues_invariant_under_rigid_motion():
    rng = np.random.default_rng(7)
    pts = rng.uniform(-1, 1, (50, 3))
    motor = random_motor(rng)
    moved = _moved_cloud(pts, motor)
    F = cg.MultilinearMap.from_points(pts)
    G = cg.MultilinearMap.from_points(moved)
    for k in (1, 2):
        ws = sorted(cg.eigen_grade(F, k).eigenvalues())
        wt = sorted(cg.eigen_grade(G, k).eigenvalues())
        scale = max(1.0, max(abs(w) for w in ws))
        assert np.max(np.abs(np.array(ws) - np.array(wt))) <= 1e-9 * scale


def test_eigenvalues_invariant_under_permutation():
    rng = np.random.default_rng(8)
    pts = rng.uniform(-1, 1, (50, 3))
    F1 = cg.MultilinearMap.from_points(pts)
    F2 = cg.MultilinearMap.from_points(pts[rng.permutation(50)])
    for k in (1, 2):
        w1 = np.array(cg.eigen_grade(F1, k).eigenvalues())
        w2 = np.array(cg.eigen_grade(F2, k).eigenvalues())
        assert np.max(np.abs(w1 - w2)) <= 1e-10 * max(1.0, np.max(np.abs(w1)))


# -- reference multivector ----------------------------------------------------------------


def test_reference_multivector_single_point():
    got = cg.reference_multivector([FRAME.e_o])
    one_plus_i = CGA.scalar(1.0) + FRAME.i
    want = one_plus_i.gp(FRAME.e_inf + FRAME.e_o.outer(FRAME.e_inf))
    assert mv_close(got, want, 1e-14)


def test_reference_equivariance():
    rng = np.random.default_rng(9)
    pts = rng.uniform(-1, 1, (20, 3))
    cloud = [cg.embed(p) for p in pts]
    for _ in range(20):
        motor = random_motor(rng)
        moved = [cg.apply_versor(motor.mv, X) for X in cloud]
        lhs = cg.reference_multivector(moved)
        rhs = cg.apply_versor(motor.mv, cg.reference_multivector(cloud))
        assert mv_close(lhs, rhs, 1e-11)
    # translation-only special case
    t_motor = cg.Motor.from_rotor_translation(CGA.scalar(1.0), rng.uniform(-1, 1, 3))
    moved = [cg.apply_versor(t_motor.mv, X) for X in cloud]
    assert mv_close(
        cg.reference_multivector(moved),
        cg.apply_versor(t_motor.mv, cg.reference_multivector(cloud)),
        1e-11,
    )


def test_reference_from_points_matches_cloud_form():
    rng = np.random.default_rng(10)
    pts = rng.uniform(-1, 1, (25, 3))
    a = cg.reference_from_points(pts)
    b = cg.reference_multivector([cg.embed(p) for p in pts])
    assert mv_close(a, b, 1e-13)


def test_reference_empty_cloud():
    with pytest.raises(AlgebraUsageError):
        cg.reference_multivector([])


# -- normalization ------------------------------------------------------------------------


def test_normalize_defining_property():
    rng = np.random.default_rng(11)
    pts = rng.uniform(-1, 1, (30, 3))
    F = cg.MultilinearMap.from_points(pts)
    ref = cg.reference_from_points(pts)
    for k in (1, 2):
        basis = cg.normalize_eigenbasis(cg.eigen_grade(F, k), ref)
        for rank, (lam, P) in enumerate(basis.pairs):
            if rank in basis.dropped:
                continue
            assert P.scalar_product(ref) == pytest.approx(1.0, abs=1e-10)


def test_normalize_equivariance_noise_free():
    rng = np.random.default_rng(12)
    pts = rng.uniform(-1, 1, (40, 3))
    motor = random_motor(rng)
    moved = _moved_cloud(pts, motor)
    Fs = cg.MultilinearMap.from_points(pts)
    Ft = cg.MultilinearMap.from_points(moved)
    ref_s = cg.reference_from_points(pts)
    ref_t = cg.reference_from_points(moved)
    for k in (1, 2):
        bs = cg.normalize_eigenbasis(cg.eigen_grade(Fs, k), ref_s)
        bt = cg.normalize_eigenbasis(cg.eigen_grade(Ft, k), ref_t)
        skip = set(bs.dropped) | set(bt.dropped) | set(bs.degenerate) | set(bt.degenerate)
        for rank, ((ls, P), (lt, Q)) in enumerate(zip(bs.pairs, bt.pairs)):
            if rank in skip:
                continue
            moved_P = cg.apply_versor(motor.mv, P)
            assert (moved_P - Q).coeff_norm() <= 1e-10 * max(1.0, P.coeff_norm())


def test_normalize_drops_orthogonal_pairs():
    # centro-symmetric cloud: +-a e1, +-b e2, +-c e3 with distinct moments;
    # its purely Euclidean eigenbivectors have no overlap with the reference
    pts = np.array(
        [
            [0.9, 0, 0], [-0.9, 0, 0],
            [0, 0.6, 0], [0, -0.6, 0],
            [0, 0, 0.3], [0, 0, -0.3],
        ]
    )
    F = cg.MultilinearMap.from_points(pts)
    ref = cg.reference_from_points(pts)
    basis = cg.normalize_eigenbasis(cg.eigen_grade(F, 2), ref)
    assert basis.dropped, "expected at least one dropped eigenbivector"
    for rank in basis.dropped:
        _, P = basis.pairs[rank]
        assert abs(P.scalar_product(ref)) <= 1e-9 * P.coeff_norm() * ref.coeff_norm()


def test_normalize_all_dropped_raises():
    basis = cg.EigenBasis(grade=2, pairs=[(1.0, CGA.e(1, 2)), (0.5, CGA.e(1, 3))])
    ref = cg.reference_from_points(np.array([[0.0, 0.0, 0.0], [0.1, 0, 0]]))
    with pytest.raises(NormalizationError):
        cg.normalize_eigenbasis(basis, ref)


# -- spectral reconstruction -----------------------------------------------------------------


def test_reciprocal_frame_pairing():
    rng = np.random.default_rng(13)
    mvs = [random_mv(CGA, rng) for _ in range(6)]
    recips = cg.reciprocal_frame(mvs)
    for i, P in enumerate(mvs):
        for j, R in enumerate(recips):
            want = 1.0 if i == j else 0.0
            assert P.scalar_product(R) == pytest.approx(want, abs=1e-9)


def test_spectral_reconstruction_on_grade_subspaces():
    rng = np.random.default_rng(14)
    pts = rng.uniform(-1, 1, (30, 3))
    F = cg.MultilinearMap.from_points(pts)
    for k in (1, 2):
        basis = cg.eigen_grade(F, k)
        eigs = [P for _, P in basis.pairs]
        lams = basis.eigenvalues()
        recips = cg.reciprocal_frame(eigs)
        for _ in range(20):
            Z = random_mv(CGA, rng, grades={k})
            want = F.apply(Z)
            got = CGA.scalar(0.0)
            for lam, P, Pr in zip(lams, eigs, recips):
                got = got + P * (lam * Z.scalar_product(Pr))
            assert (got - want).coeff_norm() <= 1e-9 * max(1.0, want.coeff_norm())


def test_degeneracy_error_when_no_real_pairs():
    class FakeMap:
        alg = CGA

        def grade_matrix(self, k):
            # rotation-like matrix with mostly complex spectrum
            theta = 0.7
            M = np.eye(5)
            M[0:2, 0:2] = [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
            M[2:4, 2:4] = [[np.cos(0.3), -np.sin(0.3)], [np.sin(0.3), np.cos(0.3)]]
            return M, CGA.grade_masks(1)

        def matrix(self):
            raise AssertionError("not needed")

    with pytest.raises(DegeneracyError):
        cg.eigen_grade(FakeMap(), 1)
