import math
from fractions import Fraction as F

import mpmath
import numpy as np
import pytest

from qeslab.algebra import Poly, QuadraticScalar
from qeslab.driver import fd_spectrum_periodic, match_levels
from qeslab.elliptic import PREF_EXPONENTS, complete_K
from qeslab.lame import (
    COUPLING_EXPONENTS,
    LameOperator,
    NonPolynomialError,
    case_params,
    coupling_poly,
    discover_kappa,
    fourier_coefficients,
    invariant_spaces,
    qes_spectrum_lame,
    solve_case,
    templates,
    theta_squared,
    to_algebraic,
    trig_limit_potential,
    unipotent_2x2,
)
from qeslab.spaces import DressedSpace, Tower, check_invariance, restriction_matrix

PYTHAGOREAN = ("sncn", 1, 1, F(5, 2), F(3, 5))
CASES = [
    ("sncn", 1, 0, F(5, 2), F(3, 5)),
    PYTHAGOREAN,
    ("sncn", 1, 2, F(7), F(1, 2)),
    ("sncn", 2, 1, F(5, 2), F(3, 5)),
    ("sncn", 2, 2, F(-9), F(1, 3)),
    ("sndn", 1, 1, F(3), F(1, 2)),
    ("sndn", 2, 0, F(3), F(1, 2)),
    ("sndn", 2, 1, F(5), F(2, 3)),
    ("cndn", 1, 1, F(1, 4), F(1, 2)),
    ("cndn", 2, 1, F(1, 4), F(1, 2)),
    ("cndn", 2, 0, F(1, 5), F(3, 5)),
]


def _id(case):
    return "-".join(str(x) for x in case)


# ---------------------------------------------------------------- engine


def _physical_action(H: LameOperator, prefs, polys, z):
    """(H ψ)(z) for ψ_i = f_i · p_i(sn²), by high-precision numerical differentiation."""
    m = mpmath.mpf(H.k2.numerator) / H.k2.denominator

    def psi(i, t):
        sn, cn, dn = (mpmath.ellipfun(kind, t, m=m) for kind in ("sn", "cn", "dn"))
        e = PREF_EXPONENTS[prefs[i]]
        x = sn**2
        val = sum(mpmath.mpf(c.numerator) / c.denominator * x**k for k, c in enumerate(polys[i].coeffs))
        return sn ** e[0] * cn ** e[1] * dn ** e[2] * val

    sn, cn, dn = (mpmath.ellipfun(kind, z, m=m) for kind in ("sn", "cn", "dn"))
    out = []
    for i in range(H.N):
        acc = -mpmath.diff(lambda t: psi(i, t), z, 2)
        acc += (mpmath.mpf(H.a[i].numerator) / H.a[i].denominator * sn**2
                + mpmath.mpf(H.b[i].numerator) / H.b[i].denominator) * psi(i, z)
        for (p, q), (theta, (e1, e2, e3)) in H.couplings.items():
            if i in (p, q):
                j = q if i == p else p
                th = mpmath.mpf(float(theta)) if isinstance(theta, QuadraticScalar) else \
                    mpmath.mpf(theta.numerator) / theta.denominator
                acc += th * sn**e1 * cn**e2 * dn**e3 * psi(j, z)
        out.append(acc)
    return out


@pytest.mark.parametrize("case", [PYTHAGOREAN, ("sndn", 2, 1, F(5), F(2, 3)), ("cndn", 1, 1, F(1, 4), F(1, 2))],
                         ids=_id)
def test_algebraic_form_matches_direct_conjugation(case):
    c = case_params(*case)
    H = c.operator(theta=F(7, 3))  # the bridge must hold for any θ
    polys = (Poly((1, F(-2, 3), F(1, 5))), Poly((F(1, 2), 3)))
    mpmath.mp.dps = 30
    for _, prefs, _, _ in templates(c.coupling, c.type):
        Ha = to_algebraic(H, prefs)
        img = Ha(polys)
        m = float(c.k2)
        for z in (0.3, 0.9, 1.7):
            lhs = _physical_action(H, prefs, polys, z)
            sn = mpmath.ellipfun("sn", z, m=m)
            for i in range(2):
                e = PREF_EXPONENTS[prefs[i]]
                f = sn ** e[0] * mpmath.ellipfun("cn", z, m=m) ** e[1] * mpmath.ellipfun("dn", z, m=m) ** e[2]
                rhs = f * sum(float(cf) * sn ** (2 * k) for k, cf in enumerate(img[i].coeffs))
                assert abs(lhs[i] - rhs) <= 1e-8 * (1 + abs(rhs))


def test_coupling_poly_parity_guard():
    with pytest.raises(NonPolynomialError):
        coupling_poly(COUPLING_EXPONENTS["sncn"], "one", "one", F(1, 2))
    # sn cn · cn / sn = cn² = 1 - x
    assert coupling_poly(COUPLING_EXPONENTS["sncn"], "sn", "cn", F(1, 2)) == Poly((1, -1))


def test_operator_validation():
    with pytest.raises(ValueError):
        LameOperator((1, 1), (1, 0), F(1, 2))
    with pytest.raises(ValueError):
        LameOperator((1, 1), (0, 0), F(1, 2), {(1, 0): (1, (0, 0, 0))})


# ---------------------------------------------------------------- catalog


@pytest.mark.parametrize("case", CASES, ids=_id)
def test_catalog_spaces_exactly_invariant(case):
    c = case_params(*case)
    spaces = invariant_spaces(c)
    assert len(spaces) == 4
    H = c.operator()
    for S in spaces:
        rep = check_invariance(to_algebraic(H, S.prefactors), S)
        assert rep.invariant, (S.label, rep.residuals[:3])


def test_pythagorean_fixture():
    c = case_params(*PYTHAGOREAN)
    assert c.theta == 4 and c.theta2 == 16
    assert (c.a1, c.a2) == (F(-4, 5), F(46, 5))
    assert c.kappas["V1"] == F(-1, 2)
    assert [S.label for S in invariant_spaces(c)] == ["V1", "V2", "V3", "V4"]


def test_theta_in_quadratic_field():
    c = case_params("sndn", 1, 1, F(3), F(1, 2))
    assert isinstance(c.theta, QuadraticScalar) and c.theta * c.theta == F(11, 2)


@pytest.mark.parametrize("case", CASES[1:], ids=_id)
def test_solver_reproduces_formulas(case):
    coupling, type_, m, b, k2 = case
    sol = solve_case(*case)
    c = case_params(*case)
    assert sol.consensus == (c.a1, c.a2, c.theta2)


def test_type2_diagonal_constant():
    """The quadratic in m carries +3 for Type 2; +1 breaks every space."""
    c = case_params("sncn", 2, 1, F(5, 2), F(3, 5))
    wrong = LameOperator((c.a1 - 2 * c.k2, c.a2 - 2 * c.k2), (c.b, -c.b), c.k2,
                         {(0, 1): (c.theta, COUPLING_EXPONENTS["sncn"])})
    for S in invariant_spaces(c):
        assert not check_invariance(to_algebraic(wrong, S.prefactors), S)


def test_cndn_theta_squared_denominator():
    """θ² = k²(s+4m)² - 4b²k²/(1+k²)² and s = 3 for Type 2."""
    b, k2 = F(1, 4), F(1, 2)
    assert theta_squared("cndn", 2, 1, b, k2) == k2 * 49 - 4 * b * b * k2 / (1 + k2) ** 2
    sol = solve_case("cndn", 2, 1, b, k2)
    assert sol.consensus[2] == theta_squared("cndn", 2, 1, b, k2)
    assert sol.consensus[2] != k2 * 25 - 4 * b * b * k2 / (1 + k2)


@pytest.mark.parametrize("type_,m,b,k2", [(1, 1, F(5, 2), F(3, 5)), (1, 2, F(-3), F(1, 2)),
                                          (2, 1, F(5, 2), F(3, 5)), (2, 0, F(4), F(2, 7))])
def test_sncn_kappa_closed_forms(type_, m, b, k2):
    c = case_params("sncn", type_, m, b, k2)
    H = c.operator()
    for label, prefs, shape, offs in templates("sncn", type_):
        tower = Tower(tuple(max(m + o, -1) for o in offs))
        if tower.dimension == 0:
            continue
        found = discover_kappa(to_algebraic(H, prefs), shape, tower)
        assert c.kappas[label] in found


def test_no_real_coupling_raises():
    with pytest.raises(ValueError):
        case_params("sncn", 1, 1, F(0), F(1, 2))
    with pytest.raises(ValueError):
        case_params("sncn", 3, 1, F(1), F(1, 2))


def test_theta_sign_is_a_gauge():
    c = case_params(*PYTHAGOREAN)
    for S in invariant_spaces(c):
        Hp = to_algebraic(c.operator(), S.prefactors)
        R = restriction_matrix(Hp, S)
        S2 = DressedSpace(S.tower, unipotent_2x2(_shape_of(S), -c.kappas[S.label]), S.prefactors)
        Hm = to_algebraic(c.operator(theta=-c.theta), S.prefactors)
        R2 = restriction_matrix(Hm, S2)
        assert R.charpoly() == R2.charpoly()


def _shape_of(S):
    e = S.dress.entries
    pos = "upper" if e[0][1].terms else "lower"
    D = e[0][1] if pos == "upper" else e[1][0]
    return f"{pos}_{'const' if D.terms[0].degree == 0 else 'linear'}"


def test_spectrum_levels_are_real():
    for case in CASES:
        c = case_params(*case)
        for _, sp in qes_spectrum_lame(c):
            sp.real_values(1e-10)


@pytest.mark.parametrize("case", CASES[1:], ids=_id)
def test_catalog_levels_in_periodic_oracle(case):
    c = case_params(*case)
    levels = [v for _, sp in qes_spectrum_lame(c) for v in sp.real_values()]
    K = complete_K(math.sqrt(float(c.k2)))
    oracle = fd_spectrum_periodic(c.operator().potential, 4 * K, 512)
    assert all(m.ok for m in match_levels(levels, oracle.eigenvalues, 1e-3))


def test_scalar_lame_exact():
    for k2 in (F(1, 2), F(3, 5)):
        H = LameOperator((2 * k2,), (0,), k2)
        vals = []
        for tag in ("sn", "cn", "dn"):
            S = DressedSpace(Tower((0,)), prefactors=(tag,))
            vals.append(restriction_matrix(to_algebraic(H, (tag,)), S).entries[0][0])
        assert vals == [1 + k2, 1, k2]


# ---------------------------------------------------------------- k -> 0


def test_fourier_coefficients():
    assert fourier_coefficients(2, 0) == {("const", 0): F(1, 2), ("cos", 2): F(1, 2)}
    assert fourier_coefficients(1, 1, 3) == {("sin", 2): F(3, 2)}
    assert fourier_coefficients(0, 0, 0) == {}


def test_trig_limit():
    V = trig_limit_potential(F(1, 2))
    # cos² - 1/2 = cos2/2, sin² - 1/2 = -cos2/2, cos sin = sin2/2
    assert V == [[{("cos", 2): F(1, 2)}, {("sin", 2): F(1, 2)}],
                 [{("sin", 2): F(1, 2)}, {("cos", 2): F(-1, 2)}]]
    assert trig_limit_potential(0) == [[{}, {}], [{}, {}]]
    V3 = trig_limit_potential(F(3, 2))
    assert V3[0][1] == {("sin", 2): F(3, 2)} and V3[1][1] == {("cos", 2): F(-3, 2)}


def test_trig_limit_numerically():
    z = np.linspace(0, 6, 13)
    b = 0.5
    # Type 1 at k=0 with a1 = -2b, θ = 2b: V11 = -2b sin² + b
    assert np.allclose(-2 * b * np.sin(z) ** 2 + b, np.cos(z) ** 2 - 0.5)
