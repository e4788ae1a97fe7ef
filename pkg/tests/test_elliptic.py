import math
from fractions import Fraction as F

import numpy as np
import pytest
from scipy.special import ellipj, ellipk

from qeslab.elliptic import (
    PREF_EXPONENTS,
    JacobiExpr,
    appendix_table,
    complete_K,
    derive_table_row,
    jacobi,
)


def test_limits():
    z = np.linspace(-3, 3, 11)
    sn, cn, dn = jacobi(z, 0.0)
    assert np.allclose(sn, np.sin(z)) and np.allclose(dn, 1)
    sn, cn, dn = jacobi(z, 1.0)
    assert np.allclose(sn, np.tanh(z)) and np.allclose(cn, 1 / np.cosh(z))
    assert abs(complete_K(0.0) - math.pi / 2) <= 1e-14


@pytest.mark.parametrize("k", [0.1, 0.5, 0.77, 0.999])
def test_against_scipy(k):
    z = np.linspace(-5, 5, 101)
    sn, cn, dn = jacobi(z, k)
    ref = ellipj(z, k * k)
    assert np.max(np.abs(sn - ref[0])) < 1e-12
    assert np.max(np.abs(cn - ref[1])) < 1e-12
    assert np.max(np.abs(dn - ref[2])) < 1e-12
    assert abs(complete_K(k) - ellipk(k * k)) < 1e-12


def test_period_4K():
    k = math.sqrt(0.6)
    K = complete_K(k)
    z = np.linspace(0, 1, 7)
    a, b = jacobi(z, k), jacobi(z + 4 * K, k)
    assert np.allclose(a.sn, b.sn, atol=1e-12) and np.allclose(a.cn, b.cn, atol=1e-12)
    assert abs(jacobi(K, k).sn - 1) < 1e-12


def test_bad_modulus():
    with pytest.raises(ValueError):
        jacobi(0.3, 1.2)
    with pytest.raises(ValueError):
        complete_K(1.0)


@pytest.mark.parametrize("tag", list(PREF_EXPONENTS))
@pytest.mark.parametrize("k2", [F(1, 2), F(3, 5), F(1, 7)])
def test_table_rederived(tag, k2):
    assert appendix_table(tag, k2) == derive_table_row(tag, k2)


def test_jacobi_expr_derivative_rules():
    k2 = F(1, 3)
    sn = JacobiExpr.from_tag("sn", k2)
    # (sn²)' = 2 sn cn dn
    assert (sn * sn).deriv().terms == {(1, 1, 1): 2}
    with pytest.raises(ValueError):
        sn.to_poly()
    assert (sn * sn).to_poly().coeffs == (0, 1)
