"""Matrix anharmonic oscillators -d²/dy² + M₃(y²) with polynomial M₃.

With the gauge factor φ(y) = exp(-(p₂/2) y⁴ - p₁ y²) and x = y², the
operator becomes Ĥ = -(4x d²/dx² + 2 d/dx) + 8p₂ Q₊ + 8p₁ Q₀ + 8p₂ (W₃ + B)
with B = c J₊ and W₃ = -c (J₊ + J₋).  The space P·V(N, p) is preserved by
the Q-part for every N, but the kinetic part only lets it through for N = 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import DiffOp, MatDiffOp, Poly, scalar
from .driver import Spectrum, spectrum_from_restriction
from .sl2 import RepParams, build_P, build_Q, build_rep, const_op, mat_add, mat_scale, tower_V
from .spaces import DressedSpace, check_invariance, restriction_matrix

__all__ = [
    "AnhParams",
    "MatPoly",
    "GaugeIdentityError",
    "kinetic_operator",
    "build_gauged_operator",
    "gauge_from_potential",
    "derive_physical_potential",
    "anharmonic_space",
    "anharmonic_restriction",
    "qes_spectrum_anharmonic",
    "reconstruct_wavefunction",
    "check_matrix_extension",
]


class GaugeIdentityError(AssertionError):
    """The re-gauged potential disagrees with the Q-form of Ĥ."""


@dataclass(frozen=True)
class AnhParams:
    """Matrix size N, gauge frequencies p1, p2 > 0, coupling c, tower top degree p."""

    N: int
    p1: Fraction
    p2: Fraction
    c: Fraction
    p: int = 4

    def __post_init__(self):
        for name in ("p1", "p2", "c"):
            object.__setattr__(self, name, scalar(getattr(self, name)))
        if self.p2 <= 0:
            raise ValueError("p2 must be positive")
        self.rep_params()  # validates N and p

    def rep_params(self) -> RepParams:
        return RepParams.uniform(self.N, self.p, self.c)


@dataclass(frozen=True)
class MatPoly:
    """N×N matrix of polynomials in x (no derivatives)."""

    entries: tuple[tuple[Poly, ...], ...]

    @property
    def N(self) -> int:
        return len(self.entries)

    @property
    def symmetric(self) -> bool:
        n = self.N
        return all(self.entries[i][j] == self.entries[j][i] for i in range(n) for j in range(i))

    @property
    def max_degree(self) -> int:
        return max(p.degree for row in self.entries for p in row)

    def coefficient_matrix(self, k: int) -> list[list[Fraction]]:
        return [[p.coeff(k) for p in row] for row in self.entries]

    def as_operator(self) -> MatDiffOp:
        return MatDiffOp([[DiffOp.mul(p) for p in row] for row in self.entries])

    def __call__(self, x) -> np.ndarray:
        """Evaluate at an array of x; shape (len(x), N, N)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros((len(x), self.N, self.N))
        for i, row in enumerate(self.entries):
            for j, p in enumerate(row):
                acc = np.zeros_like(x)
                for c in reversed(p.to_floats()):
                    acc = acc * x + c
                out[:, i, j] = acc
        return out

    def sampler_y(self):
        """y ↦ M₃(y²), the potential of the physical operator on the line."""
        return lambda y: self(np.asarray(y, dtype=float) ** 2)

    def to_json(self) -> list:
        return [[[str(c) for c in p.coeffs] for p in row] for row in self.entries]


def kinetic_operator(N: int) -> MatDiffOp:
    """-(4x d²/dx² + 2 d/dx) on every channel."""
    return MatDiffOp.scalar_identity(N, DiffOp({2: Poly((0, -4)), 1: Poly((-2,))}))


def _W3_B(N: int, c):
    rep = build_rep(N)
    B = mat_scale(c, rep.j_plus)
    W3 = mat_scale(-c, mat_add(rep.j_plus, rep.j_minus))
    return W3, B


def build_gauged_operator(params: AnhParams) -> MatDiffOp:
    """Ĥ = -(4x D² + 2D) + 8p₂Q₊ + 8p₁Q₀ + 8p₂(W₃ + B)."""
    N, p1, p2 = params.N, params.p1, params.p2
    Qp, Q0, _, _ = build_Q(params.rep_params())
    W3, B = _W3_B(N, params.c)
    return (kinetic_operator(N) + _scaled(Qp, 8 * p2) + _scaled(Q0, 8 * p1)
            + _scaled(const_op(mat_add(W3, B)), 8 * p2))


def _scaled(M: MatDiffOp, c) -> MatDiffOp:
    return MatDiffOp([[e * DiffOp.mul(c) if c != 0 else DiffOp.zero() for e in row] for row in M.entries])


def _gauge_scalar(p1, p2) -> Poly:
    """4p₂²x³ + 8p₁p₂x² + (4p₁² - 6p₂)x - 2p₁, produced by φ''/φ in x."""
    return Poly((-2 * p1, 4 * p1 * p1 - 6 * p2, 8 * p1 * p2, 4 * p2 * p2))


def gauge_from_potential(M3: MatPoly, p1, p2) -> MatDiffOp:
    """φ⁻¹ (-d²/dy² + M₃(y²)) φ written in x = y²."""
    N = M3.N
    p1, p2 = scalar(p1), scalar(p2)
    drift = MatDiffOp.scalar_identity(N, DiffOp({1: Poly((0, 8 * p1, 8 * p2))}))
    shift = MatDiffOp.scalar_identity(N, DiffOp.mul(-_gauge_scalar(p1, p2)))
    return kinetic_operator(N) + drift + shift + M3.as_operator()


def derive_physical_potential(params: AnhParams, *, check: bool = True) -> MatPoly:
    """M₃(x) = g(x) I + 16p₂ x A + 8p₁ A + 8p₂ W₃ with g the gauge polynomial.

    With ``check`` the result is re-gauged and compared exactly with
    :func:`build_gauged_operator`.
    """
    N, p1, p2 = params.N, params.p1, params.p2
    rp = params.rep_params()
    A = rp.A()
    W3, _ = _W3_B(N, params.c)
    g = _gauge_scalar(p1, p2)
    rows = []
    for i in range(N):
        row = []
        for j in range(N):
            p = Poly((8 * p1 * A[i][j] + 8 * p2 * W3[i][j], 16 * p2 * A[i][j]))
            if i == j:
                p = p + g
            row.append(p)
        rows.append(tuple(row))
    M3 = MatPoly(tuple(rows))
    if check and gauge_from_potential(M3, p1, p2) != build_gauged_operator(params):
        raise GaugeIdentityError("re-gauged M3 does not reproduce the gauged operator")
    return M3


def anharmonic_space(params: AnhParams) -> DressedSpace:
    """V' = P·(P(p) + P(p-2) + ... + P(p-2N+2))."""
    return DressedSpace(tower_V(params.N, params.p), build_P(params.rep_params()), label="V'")


def anharmonic_restriction(params: AnhParams):
    return restriction_matrix(build_gauged_operator(params), anharmonic_space(params))


def qes_spectrum_anharmonic(params: AnhParams) -> Spectrum:
    """Algebraic levels of the N = 2 family on V'."""
    if params.N != 2:
        raise ValueError("the anharmonic family is quasi-exactly solvable only for N = 2")
    return spectrum_from_restriction(anharmonic_restriction(params), "V'")


def reconstruct_wavefunction(params: AnhParams, v: Sequence):
    """Sampler y ↦ φ(y) (P v)(y²), shape (len(y), N).

    ``v`` holds coordinates on the tower basis (component-major, degree-minor),
    e.g. an eigenvector of the restriction matrix.
    """
    S = anharmonic_space(params)
    labels = S.tower.basis()
    if len(v) != len(labels):
        raise ValueError(f"expected {len(labels)} coordinates, got {len(v)}")
    images = [S.dress(S.tower.basis_vector(lab)) for lab in labels]
    N = params.N
    deg = max((p.degree for img in images for p in img), default=-1) + 1
    C = np.zeros((N, max(deg, 1)), dtype=complex)
    for coef, img in zip(v, images):
        for i, p in enumerate(img):
            for k, a in enumerate(p.to_floats()):
                C[i, k] += coef * a
    p1, p2 = float(params.p1), float(params.p2)

    def psi(y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        x = y * y
        phi = np.exp(-0.5 * p2 * y**4 - p1 * x)
        out = np.zeros((len(y), N), dtype=complex)
        for i in range(N):
            acc = np.zeros_like(y, dtype=complex)
            for a in reversed(C[i]):
                acc = acc * x + a
            out[:, i] = acc * phi
        return out

    return psi


def check_matrix_extension(N: int, params: AnhParams | None = None) -> bool:
    """Whether the full Ĥ (kinetic line included) preserves V' for size N.

    ``params`` supplies p1, p2, c and p; its own N is overridden.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    if params is None:
        params = AnhParams(N, 0, Fraction(1, 2), Fraction(1, 4), max(4, 2 * N))
    else:
        params = AnhParams(N, params.p1, params.p2, params.c, max(params.p, 2 * (N - 1)))
    return check_invariance(build_gauged_operator(params), anharmonic_space(params)).invariant
