from fractions import Fraction as F

import pytest

from qeslab.algebra import (
    DiffOp,
    FieldMismatchError,
    MatDiffOp,
    Poly,
    QuadraticScalar,
    quadratic,
    scalar,
    solve_linear,
    sqrt_scalar,
    unipotent_inverse,
)


def test_poly_normal_form_and_degree():
    assert Poly((1, 2, 0, 0)) == Poly((1, 2))
    assert Poly().degree == -1
    assert Poly((0, 0, 3)).degree == 2
    assert Poly((1, 1)) ** 3 == Poly((1, 3, 3, 1))


def test_poly_rejects_floats():
    with pytest.raises(TypeError):
        Poly((0.5,))


def test_poly_divmod_and_gcd():
    a = Poly((-1, 0, 1))  # x² - 1
    b = Poly((1, 1))
    q, r = divmod(a, b)
    assert q == Poly((-1, 1)) and r == Poly()
    g = Poly.gcd(Poly((-1, 0, 1)) * Poly((2,)), Poly((-2, -1, 1)))  # (x-1)(x+1), (x-2)(x+1)
    assert g == Poly((1, 1))


def test_poly_eval_and_deriv():
    p = Poly((F(1, 2), 0, 3))
    assert p(F(2)) == F(25, 2)
    assert p.deriv() == Poly((0, 6))
    assert p.deriv(3) == Poly()


def test_quadratic_field_arithmetic():
    r2 = sqrt_scalar(2)
    assert isinstance(r2, QuadraticScalar)
    assert r2 * r2 == 2 and isinstance(r2 * r2, F)
    assert sqrt_scalar(F(9, 4)) == F(3, 2)
    x = quadratic(1, 1, 2)
    assert x * x.conjugate() == -1
    assert (1 / x) * x == 1
    assert sqrt_scalar(F(1, 2)) == quadratic(0, F(1, 2), 2)
    with pytest.raises(FieldMismatchError):
        sqrt_scalar(2) + sqrt_scalar(3)
    assert sqrt_scalar(2) > F(141, 100) and sqrt_scalar(2) < F(142, 100)


def test_scalar_coercion():
    assert scalar("5/2") == F(5, 2)
    assert scalar(3) == F(3)
    with pytest.raises(TypeError):
        scalar(0.5)


def test_diffop_apply_and_compose():
    D = DiffOp.d(1)
    x = DiffOp.mul(Poly.x())
    # [D, x] = 1
    assert D * x - x * D == DiffOp.identity()
    xD = x * D
    assert xD(Poly((0, 0, 0, 1))) == Poly((0, 0, 0, 3))
    assert (D * D)(Poly((1, 1, 1))) == Poly((2,))


def test_matdiffop_unipotent_inverse():
    M = MatDiffOp([[DiffOp.identity(), DiffOp.zero()], [DiffOp.d(1, 3), DiffOp.identity()]])
    Minv = unipotent_inverse(M)
    assert Minv * M == MatDiffOp.identity(2)
    U = MatDiffOp([[DiffOp.identity(), DiffOp.mul(Poly.x())], [DiffOp.zero(), DiffOp.identity()]])
    assert unipotent_inverse(U) * U == MatDiffOp.identity(2)
    with pytest.raises(ValueError):
        unipotent_inverse(MatDiffOp([[DiffOp.mul(2), DiffOp.zero()], [DiffOp.zero(), DiffOp.identity()]]))


def test_matdiffop_apply():
    M = MatDiffOp([[DiffOp.d(1), DiffOp.identity()], [DiffOp.zero(), DiffOp.mul(Poly.x())]])
    out = M((Poly((0, 0, 1)), Poly((1,))))
    assert out == (Poly((1, 2)), Poly((0, 1)))


def test_solve_linear_cases():
    part, null = solve_linear([[1, 1], [1, -1]], [F(3), F(1)])
    assert part == [2, 1] and null == []
    part, null = solve_linear([[1, 1]], [F(2)])
    assert len(null) == 1
    assert solve_linear([[1, 1], [1, 1]], [F(1), F(2)]) is None
