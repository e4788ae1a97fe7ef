import math
from fractions import Fraction as F

import pytest

from qeslab.driver import fd_spectrum_periodic, match_levels, spectrum_from_restriction
from qeslab.elliptic import complete_K
from qeslab.lame import (
    SINGLE_FACTOR_COUPLINGS,
    LameOperator,
    single_factor_nogo,
    to_algebraic,
    unipotent_2x2,
)
from qeslab.spaces import DressedSpace, Tower, check_invariance, restriction_matrix


@pytest.mark.parametrize("coupling", SINGLE_FACTOR_COUPLINGS)
def test_only_trivial_solutions_from_dimension_three(coupling):
    rep = single_factor_nogo(coupling, F(3, 5), m_max=2, min_dimension=3)
    assert rep.cases > 0
    assert rep.holds, rep.witnesses[:2]


def test_small_spaces_admit_coupled_operators():
    rep = single_factor_nogo("const", F(3, 5), m_max=1, min_dimension=1)
    assert not rep.holds
    assert all(Tower(w["tower"]).dimension <= 2 for w in rep.witnesses)


def witness_operator(k2):
    return LameOperator((F(18, 5), F(-18, 5)), (F(-16, 5), F(16, 5)), k2,
                        {(0, 1): (F(54, 35), (0, 0, 0))})


def witness_space():
    return DressedSpace(Tower((0, 0)), unipotent_2x2("upper_linear", F(7, 3)), ("one", "one"))


def test_constant_coupling_witness_is_exact_and_physical():
    k2 = F(3, 5)
    H, S = witness_operator(k2), witness_space()
    Ha = to_algebraic(H, S.prefactors)
    assert check_invariance(Ha, S)
    levels = spectrum_from_restriction(restriction_matrix(Ha, S)).real_values()
    oracle = fd_spectrum_periodic(H.potential, 4 * complete_K(math.sqrt(float(k2))), 512)
    assert all(m.ok for m in match_levels(levels, oracle.eigenvalues, 1e-6))


def test_witness_depends_on_modulus():
    H, S = witness_operator(F(1, 2)), witness_space()
    assert not check_invariance(to_algebraic(H, S.prefactors), S)


def test_unknown_coupling():
    with pytest.raises(ValueError):
        single_factor_nogo("sncn", F(1, 2))
