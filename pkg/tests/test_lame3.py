from fractions import Fraction as F

import pytest

from qeslab.driver import fd_spectrum_line, match_levels, spectrum_from_restriction
from qeslab.lame import (
    LAME3_ALT_PREFACTORS,
    Lame3Constants,
    Lame3Inconsistent,
    lame3_double_algebraization,
    lame3_operator,
    lame3_solve,
    to_algebraic,
)
from qeslab.spaces import check_invariance, restriction_matrix


def printed_ones(n):
    """Closed forms quoted for α = β = γ = 1."""
    a12 = F(12 * n * n - 10 * n + 11, 3)
    b1 = F(4 * n - 3, 3)
    return {
        "a": (a12, a12, F(2 * (6 * n * n + n + 1), 3)),
        "b": (b1, b1, -2 * b1),
        "theta": (F(7 - 2 * n, 6), -F(4 * n + 1, 3), F(2 * (4 * n + 1), 3)),
    }


@pytest.mark.parametrize("n", range(1, 7))
def test_diagonal_constants_and_sum_rule(n):
    c = lame3_solve(n, 1, 1, 1)
    assert isinstance(c, Lame3Constants)
    ref = printed_ones(n)
    assert c.a == ref["a"] and c.b == ref["b"]
    assert c.sum_rule
    assert c.pinned == (n == 1)


@pytest.mark.parametrize("n", range(1, 7))
def test_solved_constants_are_invariant(n):
    c = lame3_solve(n, 1, 1, 1)
    S = c.space()
    assert check_invariance(to_algebraic(c.operator(), S.prefactors), S)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_theta_values_found_by_solver(n):
    c = lame3_solve(n, 1, 1, 1)
    assert c.theta == (-F(20 * n - 7, 3), -F(2 * (4 * n + 1), 3), -F(2 * (4 * n + 1), 3))


@pytest.mark.parametrize("n", [2, 3])
def test_quoted_theta_values_break_invariance(n):
    ref = printed_ones(n)
    H = lame3_operator(ref["a"], ref["b"], ref["theta"])
    c = lame3_solve(n, 1, 1, 1)
    S = c.space()
    assert not check_invariance(to_algebraic(H, S.prefactors), S)


@pytest.mark.parametrize("k2", [F(1, 2), F(3, 4)])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_inconsistent_away_from_k_one(n, k2):
    res = lame3_solve(n, 1, 1, 1, k2)
    assert isinstance(res, Lame3Inconsistent) and not res.consistent


def test_second_parameter_set():
    """The quoted family for α = -β = 1, γ = 0 is realized at (α, β, γ) = (1, 0, ±1)."""
    for n in (2, 3):
        a1 = F(2 * (6 * n * n - 7 * n + 3), 3)
        a23 = F(12 * n * n - 2 * n + 9, 3)
        b1, b2 = F(2 * (4 * n + 1), 3), -F(4 * n + 1, 3)
        for gamma in (1, -1):
            c = lame3_solve(n, 1, 0, gamma)
            assert c.a == (a1, a23, a23) and c.b == (b1, b2, -b1 - b2)
        c = lame3_solve(n, 1, -1, 0)
        assert not (isinstance(c, Lame3Constants) and c.a == (a1, a23, a23))


@pytest.mark.parametrize("n", [2, 3])
def test_double_algebraization(n):
    c = lame3_solve(n, 1, 1, 1)
    assert lame3_double_algebraization(c).both
    a = (c.a[0] + 1,) + c.a[1:]
    rep = lame3_double_algebraization(c, a=a)
    assert not rep.primary.invariant and not rep.alternative.invariant


def test_alternative_space_spectrum_agrees():
    c = lame3_solve(2, 1, 1, 1)
    H = c.operator()
    R1 = restriction_matrix(to_algebraic(H, c.space().prefactors), c.space())
    S2 = c.space(LAME3_ALT_PREFACTORS)
    R2 = restriction_matrix(to_algebraic(H, S2.prefactors), S2)
    assert R1.charpoly() == R2.charpoly()


def test_bound_states_on_the_line():
    c = lame3_solve(2, 1, 1, 1)
    H = c.operator()
    S = c.space()
    levels = spectrum_from_restriction(restriction_matrix(to_algebraic(H, S.prefactors), S)).real_values()
    floor = min(float(a + b) for a, b in zip(c.a, c.b))
    bound = [E for E in levels if E < floor]
    assert bound == levels
    oracle = fd_spectrum_line(H.potential, 20.0, 2048)
    assert all(m.ok for m in match_levels(bound, oracle.eigenvalues, 1e-3))


def test_solve_validation():
    with pytest.raises(ValueError):
        lame3_solve(0, 1, 1, 1)
