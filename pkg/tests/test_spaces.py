from fractions import Fraction as F

import pytest

from qeslab.algebra import DiffOp, MatDiffOp, Poly
from qeslab.spaces import (
    DressedSpace,
    NotInvariantError,
    Tower,
    charpoly,
    check_invariance,
    membership,
    residual_map,
    restriction_matrix,
)


def euler(n: int) -> MatDiffOp:
    """x d/dx on n channels: preserves every tower."""
    return MatDiffOp.scalar_identity(n, DiffOp({1: Poly.x()}))


def test_tower_basics():
    t = Tower((2, -1, 0))
    assert t.dimension == 4
    assert t.basis() == [(0, 0), (0, 1), (0, 2), (2, 0)]
    with pytest.raises(ValueError):
        Tower((-2,))


def test_invariance_and_restriction_of_euler_operator():
    S = DressedSpace(Tower((2, 1)))
    H = euler(2)
    assert check_invariance(H, S)
    R = restriction_matrix(H, S)
    assert [R.entries[i][i] for i in range(R.dim)] == [0, 1, 2, 0, 1]
    assert R.charpoly() == Poly((0, 1)) ** 2 * Poly((-1, 1)) ** 2 * Poly((-2, 1))


def test_raising_operator_is_not_invariant():
    S = DressedSpace(Tower((1,)))
    H = MatDiffOp([[DiffOp.mul(Poly.x())]])
    rep = check_invariance(H, S)
    assert not rep
    assert residual_map(H, S) == {((0, 1), 0, 2): 1}
    with pytest.raises(NotInvariantError):
        restriction_matrix(H, S)


def test_dressed_space_membership():
    T = MatDiffOp([[DiffOp.identity(), DiffOp.mul(Poly.x())], [DiffOp.zero(), DiffOp.identity()]])
    S = DressedSpace(Tower((0, 0)), T)
    assert membership((Poly((0, 1)), Poly((1,))), S)
    assert not membership((Poly((0, 1)), Poly((0,))), S)
    # the undressed Euler operator does not preserve it, its conjugate does
    assert not check_invariance(MatDiffOp.diagonal([DiffOp.identity(), DiffOp.mul(Poly.x())]), S)


def test_charpoly_faddeev_leverrier():
    M = [[F(2), F(1)], [F(1), F(2)]]
    assert charpoly(M) == Poly((3, -4, 1))
    assert charpoly([]) == Poly((1,))


def test_prefactor_tags_validated():
    with pytest.raises(ValueError):
        DressedSpace(Tower((0,)), prefactors=("tan",))
