import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import cgareg as cg
import ga_oracle as oracle
from cgareg.errors import AlgebraUsageError, NumericalDomainError, SignatureMismatchError
from conftest import mv_close, random_mv

G3 = cg.algebra(3, 0)
CGA = cg.CGA


# -- products ----------------------------------------------------------------


def test_generator_squares():
    assert G3.e(1).gp(G3.e(1)).scalar_part == 1.0
    assert CGA.e(5).gp(CGA.e(5)).scalar_part == -1.0  # e- squares to -1


def test_anticommutation():
    assert mv_close(G3.e(2).gp(G3.e(1)), -G3.e(1, 2))


def test_scalar_product_of_bivector_with_itself():
    # oracle: expand e12 e12 = -e11 e22 by swap counting
    m = oracle.metric_for(3, 0)
    expect = oracle.scalar({(1, 2): 1.0}, {(1, 2): 1.0}, m)
    assert expect == -1.0
    assert G3.e(1, 2).scalar_product(G3.e(1, 2)) == expect


def test_inner_bivector_vector():
    # oracle: grade-1 part of e12 e2
    m = oracle.metric_for(3, 0)
    expect = oracle.inner({(1, 2): 1.0}, {(2,): 1.0}, m)
    assert expect == {(1,): 1.0}
    assert mv_close(G3.e(1, 2).inner(G3.e(2)), oracle.to_kernel(G3, expect))


def test_inner_annihilates_scalars():
    rng = np.random.default_rng(0)
    X = random_mv(CGA, rng)
    assert G3.scalar(2.5).inner(G3.e(1)).coeff_norm() == 0.0
    assert X.inner(CGA.scalar(3.0)).coeff_norm() == 0.0


def test_product_dispatcher():
    a, b = G3.e(1), G3.e(2)
    assert mv_close(cg.product(a, b, "geometric"), a.gp(b))
    assert mv_close(cg.product(a, b, "outer"), a.outer(b))
    assert mv_close(cg.product(a, b, "inner"), a.inner(b))
    assert cg.product(a, a, "scalar") == 1.0
    with pytest.raises(AlgebraUsageError):
        cg.product(a, b, "left-contraction")


def test_signature_mismatch():
    with pytest.raises(SignatureMismatchError):
        G3.e(1).gp(CGA.e(1))


@pytest.mark.parametrize("p,q", [(2, 1), (3, 0), (4, 1)])
def test_products_match_oracle(p, q):
    alg = cg.algebra(p, q)
    rng = np.random.default_rng(7 * p + q)
    metric = oracle.metric_for(p, q)
    for _ in range(40):
        a = random_mv(alg, rng)
        b = random_mv(alg, rng)
        da, db = oracle.from_kernel(a), oracle.from_kernel(b)
        assert mv_close(a.gp(b), oracle.to_kernel(alg, oracle.gp(da, db, metric)), 1e-12)
        assert mv_close(a.outer(b), oracle.to_kernel(alg, oracle.outer(da, db, metric)), 1e-12)
        assert mv_close(a.inner(b), oracle.to_kernel(alg, oracle.inner(da, db, metric)), 1e-12)
        assert abs(a.scalar_product(b) - oracle.scalar(da, db, metric)) <= 1e-12 * max(
            1.0, a.coeff_norm() * b.coeff_norm()
        )


# -- grade projection -----------------------------------------------------------


def test_grade_projection_examples():
    x = G3.scalar(1.0) + G3.e(1) + G3.e(1, 2)
    assert mv_close(x.grade(1), G3.e(1))
    assert G3.e(1, 2, 3).grade(2).coeff_norm() == 0.0
    even = G3.scalar(0.5) + 2.0 * G3.e(1, 2)
    assert mv_close(even.grade(0, 2), even)


def test_grade_projection_decomposition():
    rng = np.random.default_rng(1)
    x = random_mv(CGA, rng)
    total = CGA.scalar(0.0)
    for k in range(CGA.n + 1):
        total = total + x.grade(k)
    assert mv_close(total, x, 1e-15)


def test_grade_projection_errors():
    with pytest.raises(AlgebraUsageError):
        G3.e(1).grade()
    with pytest.raises(AlgebraUsageError):
        G3.e(1).grade(7)


# -- reversion, norms -------------------------------------------------------------


def test_reverse_examples():
    assert mv_close(G3.scalar(5.0).reverse(), G3.scalar(5.0))
    assert mv_close(G3.e(1, 2).reverse(), -G3.e(1, 2))
    assert mv_close(G3.e(1, 2, 3).reverse(), -G3.e(1, 2, 3))


def test_reverse_antiautomorphism():
    rng = np.random.default_rng(2)
    for _ in range(200):
        a, b = random_mv(CGA, rng), random_mv(CGA, rng)
        assert mv_close(a.gp(b).reverse(), b.reverse().gp(a.reverse()), 1e-12)


def test_norm_sq():
    assert G3.e(1).norm_sq() == 1.0
    assert CGA.e(5).norm_sq() == -1.0
    x = np.array([0.3, -1.2, 2.0])
    p = cg.embed(x)
    assert abs(p.norm_sq()) <= 1e-12 * (1 + float(x @ x) ** 2)
    assert G3.e(1).magnitude() == 1.0
    assert CGA.e(5).magnitude() == 1.0


def test_grade_orthogonality_exact():
    rng = np.random.default_rng(3)
    a, b = random_mv(CGA, rng), random_mv(CGA, rng)
    for k in range(CGA.n + 1):
        for r in range(CGA.n + 1):
            if r != k:
                assert a.grade(k).scalar_product(b.grade(r)) == 0.0


# -- inverses ---------------------------------------------------------------------


def test_inverse_examples():
    assert cg.inverse_simple(G3.scalar(2.0)).scalar_part == 0.5
    assert mv_close(cg.inverse_simple(G3.e(1)), G3.e(1))
    inv = cg.inverse_simple(G3.e(1, 2))
    assert mv_close(inv, -G3.e(1, 2))
    assert mv_close(G3.e(1, 2).gp(inv), G3.scalar(1.0))


def test_inverse_errors():
    with pytest.raises(NumericalDomainError):
        cg.inverse_simple(G3.scalar(1.0) + G3.e(1))  # not simple
    with pytest.raises(NumericalDomainError):
        cg.inverse_simple(cg.FRAME.e_o)  # null


# -- projections and reciprocal blades ----------------------------------------------


def test_project_onto_blade_examples():
    e12 = G3.e(1, 2)
    assert mv_close(cg.project_onto_blade(G3.e(1), e12), G3.e(1))
    assert cg.project_onto_blade(G3.e(3), e12).coeff_norm() == pytest.approx(0.0, abs=1e-15)
    assert mv_close(cg.project_onto_blade(G3.e(1) + G3.e(3), e12), G3.e(1))
    assert cg.project_onto_blade(G3.scalar(4.0), e12).scalar_part == 4.0
    assert cg.project_onto_blade(G3.e(1, 2, 3), e12).coeff_norm() == pytest.approx(0.0, abs=1e-15)


def test_project_onto_blade_idempotent():
    rng = np.random.default_rng(4)
    A = CGA.e(1, 2, 3)
    for _ in range(50):
        x = random_mv(CGA, rng)
        once = cg.project_onto_blade(x, A)
        twice = cg.project_onto_blade(once, A)
        assert mv_close(once, twice, 1e-13)


def test_project_onto_blade_errors():
    with pytest.raises(NumericalDomainError):
        cg.project_onto_blade(G3.e(1), G3.scalar(1.0) + G3.e(1, 2))  # not homogeneous
    with pytest.raises(NumericalDomainError):
        cg.project_onto_blade(CGA.e(1), cg.FRAME.e_o)  # null blade


def test_reciprocal_blades():
    assert mv_close(cg.reciprocal_blade(G3, 0b001), G3.e(1))
    assert mv_close(cg.reciprocal_blade(CGA, 0b10000), -CGA.e(5))
    assert mv_close(cg.reciprocal_blade(G3, 0b011), -G3.e(1, 2))
    for J in range(CGA.dim):
        rec = cg.reciprocal_blade(CGA, J)
        for K in range(CGA.dim):
            want = 1.0 if J == K else 0.0
            assert CGA.blade(K).scalar_product(rec) == want


# -- algebra laws -----------------------------------------------------------------


def test_associativity():
    rng = np.random.default_rng(5)
    for _ in range(300):
        a, b, c = (random_mv(CGA, rng) for _ in range(3))
        lhs = a.gp(b).gp(c)
        rhs = a.gp(b.gp(c))
        scale = max(1.0, lhs.coeff_norm(), rhs.coeff_norm())
        assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) <= 1e-10 * scale


def test_bilinearity_all_kinds():
    rng = np.random.default_rng(6)
    for _ in range(100):
        a, b, c = (random_mv(CGA, rng) for _ in range(3))
        alpha, beta = rng.uniform(-2, 2, 2)
        combo = a * float(alpha) + b * float(beta)
        for kind in ("geometric", "outer", "inner"):
            lhs = cg.product(combo, c, kind)
            rhs = cg.product(a, c, kind) * float(alpha) + cg.product(b, c, kind) * float(beta)
            assert mv_close(lhs, rhs, 1e-12)
        lhs_s = cg.product(combo, c, "scalar")
        rhs_s = alpha * cg.product(a, c, "scalar") + beta * cg.product(b, c, "scalar")
        assert abs(lhs_s - rhs_s) <= 1e-12 * max(1.0, abs(lhs_s))


def test_vector_geometric_is_inner_plus_outer():
    rng = np.random.default_rng(7)
    for _ in range(100):
        v = random_mv(CGA, rng, grades={1})
        k = int(rng.integers(1, 6))
        A = random_mv(CGA, rng, grades={k})
        assert mv_close(v.gp(A), v.inner(A) + v.outer(A), 1e-12)
        assert mv_close(A.gp(v), A.inner(v) + A.outer(v), 1e-12)


def test_sum_of_squares_identity():
    # |a ^ A|^2 + |a . A|^2 = a^2 |A|^2 in the Euclidean algebra
    rng = np.random.default_rng(8)
    for _ in range(200):
        a = random_mv(G3, rng, grades={1})
        A = random_mv(G3, rng)
        lhs = a.outer(A).norm_sq() + a.inner(A).norm_sq()
        rhs = a.norm_sq() * A.norm_sq()
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))


def test_finite_coefficients_required():
    with pytest.raises(AlgebraUsageError):
        G3.from_coeffs(np.array([np.nan] + [0.0] * 7))


@given(st.lists(st.floats(-1e3, 1e3), min_size=8, max_size=8), st.integers(0, 3))
@settings(max_examples=200, deadline=None)
def test_grade_projection_idempotent_hypothesis(coeffs, k):
    x = G3.from_coeffs(np.array(coeffs))
    assert mv_close(x.grade(k), x.grade(k).grade(k), 1e-15)


@given(st.lists(st.floats(-1e3, 1e3), min_size=8, max_size=8))
@settings(max_examples=200, deadline=None)
def test_reverse_involution_hypothesis(coeffs):
    x = G3.from_coeffs(np.array(coeffs))
    assert mv_close(x.reverse().reverse(), x, 1e-15)
