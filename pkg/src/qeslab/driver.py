"""Floating-point eigenvalues and finite-difference Schrödinger oracles.

The exact layers produce restriction matrices; this module turns them into
numbers and cross-checks them against independent discretizations of
``-d²/dz² + V(z)`` (units with ħ = 2m = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy.linalg import eig_banded

from .spaces import RestrictionMatrix, charpoly

__all__ = [
    "EigenConvergenceError",
    "Level",
    "Spectrum",
    "eig_dense",
    "spectrum_from_restriction",
    "GridSpec",
    "OracleResult",
    "fd_spectrum_line",
    "fd_spectrum_periodic",
    "residual_check",
    "Match",
    "match_levels",
]

MAX_DENSE_DIM = 512
EXACT_PATH_MAX_DIM = 12


class EigenConvergenceError(RuntimeError):
    """The QR iteration did not converge."""


@dataclass(frozen=True)
class Level:
    value: complex
    vector: np.ndarray | None = field(default=None, compare=False, repr=False)
    space: str = ""


@dataclass(frozen=True)
class Spectrum:
    levels: tuple[Level, ...]

    @property
    def values(self) -> list[complex]:
        return [lv.value for lv in self.levels]

    def real_values(self, tol: float = 1e-10) -> list[float]:
        """Real parts; raises if any imaginary part exceeds tol·(1+|E|)."""
        out = []
        for v in self.values:
            if abs(v.imag) > tol * (1 + abs(v)):
                raise ValueError(f"level {v} is not real within {tol}")
            out.append(v.real)
        return out

    def __len__(self):
        return len(self.levels)


def _as_array(M) -> np.ndarray:
    if isinstance(M, RestrictionMatrix):
        return M.to_numpy()
    return np.asarray([[complex(c) if isinstance(c, complex) else float(c) for c in row] for row in M])


def _sort_key(pair):
    v = pair[0]
    return (round(v.real, 12), round(v.imag, 12))


def eig_dense(M, *, exact: bool = False, vectors: bool = False):
    """Eigenvalues (and optionally right eigenvectors) of a square matrix.

    The float path is LAPACK's balanced Hessenberg-QR (``geev``).  With
    ``exact=True`` and an exact matrix of dimension <= 12 the characteristic
    polynomial is formed exactly and its roots polished with mpmath.
    Eigenvalues come sorted by (real, imag).
    """
    if exact:
        if vectors:
            raise ValueError("the exact path returns eigenvalues only")
        entries = M.entries if isinstance(M, RestrictionMatrix) else M
        n = len(entries)
        if n > EXACT_PATH_MAX_DIM:
            raise ValueError(f"exact path limited to dim <= {EXACT_PATH_MAX_DIM}")
        if n == 0:
            return []
        p = charpoly(entries)
        coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(p.coeffs)]
        with mpmath.workdps(40):
            roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=200)
        vals = sorted((complex(r) for r in roots), key=lambda v: (round(v.real, 12), round(v.imag, 12)))
        return [complex(v.real, 0.0) if abs(v.imag) < 1e-14 * (1 + abs(v)) else v for v in vals]
    A = _as_array(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"square matrix required, got shape {A.shape}")
    if A.shape[0] > MAX_DENSE_DIM:
        raise ValueError(f"dimension {A.shape[0]} exceeds {MAX_DENSE_DIM}")
    if A.shape[0] == 0:
        return ([], np.zeros((0, 0))) if vectors else []
    try:
        w, V = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(str(exc)) from exc
    order = sorted(range(len(w)), key=lambda i: _sort_key((complex(w[i]),)))
    vals = [complex(w[i]) for i in order]
    if vectors:
        return vals, V[:, order]
    return vals


def spectrum_from_restriction(R: RestrictionMatrix, space: str = "") -> Spectrum:
    vals, vecs = eig_dense(R, vectors=True)
    return Spectrum(tuple(Level(v, vecs[:, i], space) for i, v in enumerate(vals)))


# ---------------------------------------------------------------- FD oracles


@dataclass(frozen=True)
class GridSpec:
    domain: tuple[float, float]
    n_points: int
    boundary: str = "dirichlet"

    def __post_init__(self):
        if self.n_points < 16:
            raise ValueError("n_points must be >= 16")
        if self.boundary not in ("dirichlet", "periodic"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if not self.domain[1] > self.domain[0]:
            raise ValueError("empty domain")

    @property
    def step(self) -> float:
        a, b = self.domain
        if self.boundary == "periodic":
            return (b - a) / self.n_points
        return (b - a) / (self.n_points + 1)

    def points(self) -> np.ndarray:
        a, b = self.domain
        h = self.step
        if self.boundary == "periodic":
            return a + h * np.arange(self.n_points)
        return a + h * np.arange(1, self.n_points + 1)


@dataclass(frozen=True)
class OracleResult:
    eigenvalues: np.ndarray
    grid: GridSpec
    richardson: bool
    coarse: np.ndarray | None = field(default=None, repr=False)
    fine: np.ndarray | None = field(default=None, repr=False)


def _sample(V: Callable, z: np.ndarray) -> np.ndarray:
    """V(z) as an array of shape (len(z), N, N)."""
    out = np.asarray(V(z), dtype=float)
    if out.ndim == 1:
        out = out[:, None, None]
    if out.ndim != 3 or out.shape[1] != out.shape[2] or out.shape[0] != len(z):
        raise ValueError(f"potential sampler returned shape {out.shape}")
    if not np.allclose(out, np.transpose(out, (0, 2, 1)), atol=1e-12, rtol=0):
        raise ValueError("matrix potential must be symmetric")
    return out


def _banded_eigs(Vs: np.ndarray, h: float, periodic: bool) -> np.ndarray:
    """All eigenvalues of the FD Hamiltonian in symmetric banded storage.

    Unknowns are ordered site-major, channel-minor.  For the cyclic stencil
    the sites are laid out zigzag (0, n-1, 1, n-2, ...) so that every
    neighbor pair, the wrap-around included, sits within two positions.
    """
    n, N, _ = Vs.shape
    if periodic:
        pos = np.empty(n, dtype=int)
        half = (n + 1) // 2
        pos[:half] = 2 * np.arange(half)
        pos[n - 1:half - 1:-1] = 2 * np.arange(n - half) + 1
        bonds = [(s, (s + 1) % n) for s in range(n)]
        site_band = 2
    else:
        pos = np.arange(n)
        bonds = [(s, s + 1) for s in range(n - 1)]
        site_band = 1
    u = site_band * N + N - 1
    M = n * N
    ab = np.zeros((u + 1, M))

    def put(i, j, val):
        i, j = np.minimum(i, j), np.maximum(i, j)
        np.add.at(ab, (u + i - j, j), val)

    kin = 1.0 / (h * h)
    base = pos * N
    for c in range(N):
        put(base + c, base + c, Vs[:, c, c] + 2 * kin)
        for c2 in range(c + 1, N):
            put(base + c, base + c2, Vs[:, c, c2])
    if n == 2 and periodic:
        bonds = [(0, 1)]  # both wrap bonds coincide; the stencil doubles them
    s1 = np.array([b[0] for b in bonds])
    s2 = np.array([b[1] for b in bonds])
    weight = -kin * (2.0 if (n == 2 and periodic) else 1.0)
    for c in range(N):
        put(pos[s1] * N + c, pos[s2] * N + c, np.full(len(bonds), weight))
    return eig_banded(ab, lower=False, eigvals_only=True, check_finite=False)


def _richardson(coarse: np.ndarray, fine: np.ndarray) -> np.ndarray:
    k = min(len(coarse), len(fine))
    return (4.0 * fine[:k] - coarse[:k]) / 3.0


def fd_spectrum_line(V: Callable, L: float, n: int, *, richardson: bool = True) -> OracleResult:
    """Spectrum of -d²/dy² + V on [-L, L] with Dirichlet ends.

    The coarse grid has n interior points (h = 2L/(n+1)); the Richardson
    partner has 2n+1 points, i.e. h/2 exactly.  Levels are paired by index.
    """
    g = GridSpec((-L, L), n, "dirichlet")
    coarse = _banded_eigs(_sample(V, g.points()), g.step, False)
    if not richardson:
        return OracleResult(coarse, g, False, coarse, None)
    gf = GridSpec((-L, L), 2 * n + 1, "dirichlet")
    fine = _banded_eigs(_sample(V, gf.points()), gf.step, False)
    return OracleResult(_richardson(coarse, fine), g, True, coarse, fine)


def fd_spectrum_periodic(V: Callable, period: float, n: int, *, richardson: bool = True,
                         start: float = 0.0) -> OracleResult:
    """Spectrum of -d²/dz² + V on the circle of length ``period``.

    h = period/n; the Richardson partner uses 2n points.
    """
    g = GridSpec((start, start + period), n, "periodic")
    coarse = _banded_eigs(_sample(V, g.points()), g.step, True)
    if not richardson:
        return OracleResult(coarse, g, False, coarse, None)
    gf = GridSpec((start, start + period), 2 * n, "periodic")
    fine = _banded_eigs(_sample(V, gf.points()), gf.step, True)
    return OracleResult(_richardson(coarse, fine), g, True, coarse, fine)


def residual_check(V: Callable, psi: Callable, E: float, grid: GridSpec, h: float | None = None) -> float:
    """max |-ψ'' + Vψ - Eψ| / (1 + |E|) with ψ scaled to max-norm one.

    ψ'' uses the three-point stencil with step ``h`` (default: grid step).
    """
    z = grid.points()
    h = grid.step if h is None else h
    p0 = np.asarray(psi(z), dtype=complex)
    pp = np.asarray(psi(z + h), dtype=complex)
    pm = np.asarray(psi(z - h), dtype=complex)
    if p0.ndim == 1:
        p0, pp, pm = p0[:, None], pp[:, None], pm[:, None]
    scale = np.abs(p0).max()
    if scale == 0:
        raise ValueError("psi vanishes on the grid")
    Vs = _sample(V, z)
    d2 = (pp - 2 * p0 + pm) / (h * h)
    r = -d2 + np.einsum("zij,zj->zi", Vs, p0) - E * p0
    return float(np.abs(r).max() / scale / (1.0 + abs(E)))


@dataclass(frozen=True)
class Match:
    algebraic: float
    numeric: float
    error: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.error <= self.tolerance


def match_levels(algebraic: Sequence[float], numeric: Sequence[float], rel_tol: float) -> list[Match]:
    """One-sided matching: each algebraic level against its nearest numeric level.

    The tolerance is rel_tol·(1 + |E|).
    """
    num = np.sort(np.asarray(numeric, dtype=float))
    out = []
    for E in algebraic:
        E = float(np.real(E))
        i = int(np.searchsorted(num, E))
        cands = [num[j] for j in (i - 1, i) if 0 <= j < len(num)]
        best = min(cands, key=lambda v: abs(v - E)) if cands else math.nan
        out.append(Match(E, float(best), abs(best - E), rel_tol * (1 + abs(E))))
    return out
