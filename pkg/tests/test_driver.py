import math
from fractions import Fraction as F

import numpy as np
import pytest

from qeslab.driver import (
    GridSpec,
    eig_dense,
    fd_spectrum_line,
    fd_spectrum_periodic,
    match_levels,
    residual_check,
    spectrum_from_restriction,
)
from qeslab.elliptic import complete_K
from qeslab.lame import LameOperator
from qeslab.spaces import RestrictionMatrix


def test_eig_dense_examples():
    assert eig_dense(np.diag([2.0, 0.0, 1.0])) == [0, 1, 2]
    assert np.allclose(eig_dense([[0, 1], [1, 0]]), [-1, 1])
    companion = [[0, 1, 0], [0, 0, 1], [0, 2, 0]]  # x³ - 2x
    vals = eig_dense(companion)
    assert np.allclose(vals, [-math.sqrt(2), 0, math.sqrt(2)], atol=1e-12)
    exact = eig_dense([[F(c) for c in r] for r in companion], exact=True)
    assert np.allclose(exact, [-math.sqrt(2), 0, math.sqrt(2)], atol=1e-14)


def test_eig_dense_complex_pair_sorted():
    vals = eig_dense([[0, -1], [1, 0]])
    assert vals[0].imag < 0 < vals[1].imag


def test_eig_dense_symmetric_real():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(40, 40))
    vals = eig_dense(A + A.T)
    assert max(abs(v.imag) for v in vals) <= 1e-12


def test_eig_dense_guards():
    with pytest.raises(ValueError):
        eig_dense(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        eig_dense(np.zeros((513, 513)))
    with pytest.raises(ValueError):
        eig_dense([[F(0)] * 13] * 13, exact=True)


def test_spectrum_from_restriction_vectors():
    R = RestrictionMatrix(((F(1), F(1)), (F(0), F(2))), ((0, 0), (0, 1)))
    sp = spectrum_from_restriction(R, "S")
    assert sp.real_values() == [1, 2]
    M = R.to_numpy()
    for lv in sp.levels:
        assert np.allclose(M @ lv.vector, lv.value * lv.vector)


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec((0, 1), 8)
    with pytest.raises(ValueError):
        GridSpec((0, 1), 32, "neumann")


def test_harmonic_line_oracle():
    r = fd_spectrum_line(lambda y: y**2, 10.0, 2000)
    assert np.max(np.abs(r.eigenvalues[:4] - [1, 3, 5, 7])) < 1e-6
    assert len(r.coarse) == 2000
    err_c = np.abs(r.coarse[:4] - [1, 3, 5, 7])
    err_f = np.abs(r.fine[:4] - [1, 3, 5, 7])
    assert np.allclose(err_c / err_f, 4, rtol=1e-2)


def test_particle_in_box():
    L = 1.0
    r = fd_spectrum_line(lambda y: 0 * y, L, 512)
    exact = [(n * math.pi / (2 * L)) ** 2 for n in range(1, 5)]
    assert np.allclose(r.eigenvalues[:4], exact, rtol=1e-7)


def test_free_circle():
    r = fd_spectrum_periodic(lambda z: 0 * z, 2 * math.pi, 256)
    assert np.allclose(r.eigenvalues[:9], [0, 1, 1, 4, 4, 9, 9, 16, 16], atol=1e-6)
    assert len(r.coarse) == 256


def test_periodic_matrix_channels_count():
    V = lambda z: np.stack([np.stack([np.cos(z), 0 * z], -1), np.stack([0 * z, np.sin(z)], -1)], -1)
    r = fd_spectrum_periodic(V, 2 * math.pi, 64, richardson=False)
    assert len(r.eigenvalues) == 128
    # decoupled channels: spectrum is the union of the scalar ones
    a = fd_spectrum_periodic(np.cos, 2 * math.pi, 64, richardson=False).eigenvalues
    b = fd_spectrum_periodic(np.sin, 2 * math.pi, 64, richardson=False).eigenvalues
    assert np.allclose(np.sort(np.concatenate([a, b])), r.eigenvalues)


def test_non_symmetric_potential_rejected():
    V = lambda z: np.stack([np.stack([0 * z, 1 + 0 * z], -1), np.stack([0 * z, 0 * z], -1)], -1)
    with pytest.raises(ValueError):
        fd_spectrum_periodic(V, 1.0, 32)


@pytest.mark.parametrize("k2", [F(1, 2), F(3, 5)])
def test_scalar_lame_band_edges(k2):
    H = LameOperator((2 * k2,), (0,), k2)
    K = complete_K(math.sqrt(float(k2)))
    r = fd_spectrum_periodic(H.potential, 4 * K, 1024)
    for E in (float(k2), 1.0, 1 + float(k2)):
        assert np.min(np.abs(r.eigenvalues - E)) < 1e-4


def test_residual_check():
    g = GridSpec((-5, 5), 10001)
    assert residual_check(lambda y: y**2, lambda y: np.exp(-y * y / 2), 1.0, g, h=1e-3) <= 1e-6
    # a non-eigenpair
    assert residual_check(lambda y: y**2, lambda y: np.exp(-y * y), 1.0, g, h=1e-3) > 1e-2


def test_match_levels_one_sided():
    ms = match_levels([1.0, 5.0], [0.0, 1.0000001, 2.0, 3.0], 1e-3)
    assert ms[0].ok and not ms[1].ok
    assert ms[1].numeric == 3.0
