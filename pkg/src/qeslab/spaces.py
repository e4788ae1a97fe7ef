"""Dressed polynomial spaces, exact invariance checks and restriction matrices."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

from .algebra import MatDiffOp, Poly, QuadraticScalar, unipotent_inverse

__all__ = [
    "PREFACTOR_TAGS",
    "Tower",
    "DressedSpace",
    "Residual",
    "InvarianceReport",
    "RestrictionMatrix",
    "NotInvariantError",
    "check_invariance",
    "residual_map",
    "restriction_matrix",
    "membership",
    "charpoly",
]

PREFACTOR_TAGS = ("one", "sn", "cn", "dn", "cndn", "sndn", "sncn", "sncndn")


class NotInvariantError(ValueError):
    """Raised when a restriction is requested on a non-invariant pair."""


@dataclass(frozen=True)
class Tower:
    """Direct sum P(n_1) + ... + P(n_N); n_i = -1 is the zero space."""

    degrees: tuple[int, ...]

    def __post_init__(self):
        degs = tuple(int(n) for n in self.degrees)
        if any(n < -1 for n in degs):
            raise ValueError(f"tower degrees must be >= -1, got {degs}")
        object.__setattr__(self, "degrees", degs)

    @property
    def n_components(self) -> int:
        return len(self.degrees)

    @property
    def dimension(self) -> int:
        return sum(n + 1 for n in self.degrees if n >= 0)

    def basis(self) -> list[tuple[int, int]]:
        """Labels (component, degree), component-major, degree-minor."""
        return [(i, m) for i, n in enumerate(self.degrees) for m in range(n + 1)]

    def basis_vector(self, label: tuple[int, int]) -> tuple[Poly, ...]:
        i, m = label
        return tuple(Poly.monomial(m) if j == i else Poly() for j in range(self.n_components))


@dataclass(frozen=True)
class DressedSpace:
    """The space ``dress · tower`` times optional Jacobi scalar prefactors.

    The prefactors only matter when rebuilding physical eigenfunctions; the
    algebra acts on the operator already conjugated by them.
    """

    tower: Tower
    dress: MatDiffOp | None = None
    prefactors: tuple[str, ...] | None = None
    label: str = ""
    _inverse: MatDiffOp | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        n = self.tower.n_components
        if self.dress is None:
            object.__setattr__(self, "dress", MatDiffOp.identity(n))
        if self.dress.shape != (n, n):
            raise ValueError("dress shape does not match the tower")
        if self.prefactors is None:
            object.__setattr__(self, "prefactors", ("one",) * n)
        else:
            tags = tuple(self.prefactors)
            bad = [t for t in tags if t not in PREFACTOR_TAGS]
            if bad or len(tags) != n:
                raise ValueError(f"bad prefactor tags {tags}")
            object.__setattr__(self, "prefactors", tags)
        object.__setattr__(self, "_inverse", unipotent_inverse(self.dress))

    @property
    def dress_inverse(self) -> MatDiffOp:
        return self._inverse

    @property
    def dimension(self) -> int:
        return self.tower.dimension

    def conjugate(self, H: MatDiffOp) -> MatDiffOp:
        """dress⁻¹ ∘ H ∘ dress."""
        if H.shape != self.dress.shape:
            raise ValueError(f"operator shape {H.shape} does not match space with "
                             f"{self.tower.n_components} components")
        return self._inverse * (H * self.dress)


class Residual(NamedTuple):
    basis: tuple[int, int]
    component: int
    degree: int
    coeff: object


@dataclass(frozen=True)
class InvarianceReport:
    invariant: bool
    residuals: tuple[Residual, ...]

    def __bool__(self):
        return self.invariant


def _images(G: MatDiffOp, tower: Tower):
    for label in tower.basis():
        yield label, G(tower.basis_vector(label))


def _residuals_of(G: MatDiffOp, tower: Tower) -> list[Residual]:
    out = []
    for label, img in _images(G, tower):
        for i, p in enumerate(img):
            top = tower.degrees[i]
            for m in range(max(top + 1, 0), p.degree + 1):
                c = p.coeff(m)
                if c != 0:
                    out.append(Residual(label, i, m, c))
    return out


def check_invariance(H: MatDiffOp, S: DressedSpace) -> InvarianceReport:
    """Decide exactly whether H maps S into itself."""
    G = S.conjugate(H)
    res = _residuals_of(G, S.tower)
    return InvarianceReport(not res, tuple(res))


def residual_map(H: MatDiffOp, S: DressedSpace) -> dict:
    """Nonzero out-of-space coefficients keyed by (basis, component, degree)."""
    return {(r.basis, r.component, r.degree): r.coeff for r in _residuals_of(S.conjugate(H), S.tower)}


def _scalar_json(c):
    if isinstance(c, QuadraticScalar):
        return [c.a.numerator, c.a.denominator, str(c.b), str(c.d)]
    c = Fraction(c)
    return [c.numerator, c.denominator]


@dataclass(frozen=True)
class RestrictionMatrix:
    """Matrix of an operator on the tower basis of an invariant space.

    ``entries[r][j]`` is coordinate r of the image of basis element j.
    """

    entries: tuple[tuple, ...]
    basis_labels: tuple[tuple[int, int], ...]

    @property
    def dim(self) -> int:
        return len(self.basis_labels)

    def to_numpy(self):
        import numpy as np

        return np.array([[float(c) for c in row] for row in self.entries], dtype=float).reshape(
            self.dim, self.dim
        )

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "basis": [list(b) for b in self.basis_labels],
            "entries": [[_scalar_json(c) for c in row] for row in self.entries],
        }

    def __add__(self, other: "RestrictionMatrix") -> "RestrictionMatrix":
        if self.basis_labels != other.basis_labels:
            raise ValueError("restriction matrices on different bases")
        return RestrictionMatrix(
            tuple(tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self.entries, other.entries)),
            self.basis_labels,
        )

    def __matmul__(self, other: "RestrictionMatrix") -> "RestrictionMatrix":
        if self.basis_labels != other.basis_labels:
            raise ValueError("restriction matrices on different bases")
        n = self.dim
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = Fraction(0)
                for k in range(n):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            rows.append(tuple(row))
        return RestrictionMatrix(tuple(rows), self.basis_labels)

    def charpoly(self) -> Poly:
        return charpoly(self.entries)


def restriction_matrix(H: MatDiffOp, S: DressedSpace) -> RestrictionMatrix:
    """Exact matrix of H restricted to the invariant space S."""
    G = S.conjugate(H)
    tower = S.tower
    labels = tower.basis()
    index = {lab: k for k, lab in enumerate(labels)}
    n = len(labels)
    cols = []
    for label, img in _images(G, tower):
        col = [Fraction(0)] * n
        for i, p in enumerate(img):
            for m, c in enumerate(p.coeffs):
                if c == 0:
                    continue
                if m > tower.degrees[i]:
                    raise NotInvariantError(
                        f"image of basis {label} leaves the space at component {i}, degree {m}"
                    )
                col[index[(i, m)]] = c
        cols.append(col)
    rows = tuple(tuple(cols[j][r] for j in range(n)) for r in range(n))
    return RestrictionMatrix(rows, tuple(labels))


def membership(v: Sequence, S: DressedSpace) -> bool:
    """True iff the polynomial vector v lies in S."""
    if len(v) != S.tower.n_components:
        raise ValueError("component count mismatch")
    w = S.dress_inverse(v)
    return all(p.degree <= n for p, n in zip(w, S.tower.degrees))


def charpoly(M: Sequence[Sequence]) -> Poly:
    """Exact characteristic polynomial det(x I - M) (Faddeev-LeVerrier)."""
    n = len(M)
    if n == 0:
        return Poly.const(1)
    A = [list(r) for r in M]

    def mul(X, Y):
        return [[sum((X[i][k] * Y[k][j] for k in range(n)), Fraction(0)) for j in range(n)]
                for i in range(n)]

    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    Mk = [[Fraction(0)] * n for _ in range(n)]
    c_prev = Fraction(1)
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{n-k+1} I
        for i in range(n):
            Mk[i][i] = Mk[i][i] + c_prev
        AM = mul(A, Mk)
        tr = sum((AM[i][i] for i in range(n)), Fraction(0))
        c = -tr / k
        coeffs[n - k] = c
        Mk = AM
        c_prev = c
    return Poly(coeffs)
