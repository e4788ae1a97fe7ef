"""Jacobi elliptic functions, the complete integral K, and x = sn² identities.

Numerics use the arithmetic-geometric mean with descending Landen
transformations.  The symbolic side (:class:`JacobiExpr`) manipulates
monomials sn^i cn^j dn^l exactly and reduces even ones to polynomials in
x = sn², with cn² = 1 - x and dn² = 1 - k² x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .algebra import Poly, scalar

__all__ = [
    "JacobiTriple",
    "TablePair",
    "PREF_EXPONENTS",
    "jacobi",
    "complete_K",
    "appendix_table",
    "derive_table_row",
    "JacobiExpr",
    "SWITCH_TO_HYPERBOLIC",
]

# 1 - k below this uses the k = 1 closed forms
SWITCH_TO_HYPERBOLIC = 1e-10

# exponents (of sn, cn, dn) for each prefactor tag
PREF_EXPONENTS = {
    "one": (0, 0, 0),
    "sn": (1, 0, 0),
    "cn": (0, 1, 0),
    "dn": (0, 0, 1),
    "cndn": (0, 1, 1),
    "sndn": (1, 0, 1),
    "sncn": (1, 1, 0),
    "sncndn": (1, 1, 1),
}


class JacobiTriple(NamedTuple):
    sn: np.ndarray | float
    cn: np.ndarray | float
    dn: np.ndarray | float


def _check_modulus(k: float):
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"modulus k must lie in [0, 1], got {k}")


def _agm_ladder(k: float):
    """a_n, c_n of the AGM started at (1, k'), stopping when c_n is negligible."""
    kp = math.sqrt((1.0 - k) * (1.0 + k))
    a, b, c = [1.0], kp, [k]
    for _ in range(64):
        if abs(c[-1]) <= 1e-17 * a[-1]:
            break
        an, bn, cn = 0.5 * (a[-1] + b), math.sqrt(a[-1] * b), 0.5 * (a[-1] - b)
        a.append(an)
        c.append(cn)
        b = bn
    return a, c


def jacobi(z, k: float) -> JacobiTriple:
    """sn, cn, dn at real argument(s) z and modulus k in [0, 1]."""
    _check_modulus(k)
    z = np.asarray(z, dtype=float)
    if 1.0 - k < SWITCH_TO_HYPERBOLIC:
        sech = 1.0 / np.cosh(z)
        return _unwrap(JacobiTriple(np.tanh(z), sech, sech.copy()))
    if k == 0.0:
        return _unwrap(JacobiTriple(np.sin(z), np.cos(z), np.ones_like(z)))
    a, c = _agm_ladder(k)
    n = len(a) - 1
    phi = (2.0**n) * a[n] * z
    for m in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c[m] / a[m] * np.sin(phi)))
    sn, cn = np.sin(phi), np.cos(phi)
    # dn^2 = cn^2 + k'^2 sn^2 is free of cancellation
    dn = np.sqrt(cn * cn + (1.0 - k) * (1.0 + k) * sn * sn)
    return _unwrap(JacobiTriple(sn, cn, dn))


def _unwrap(t: JacobiTriple) -> JacobiTriple:
    if np.ndim(t.sn) == 0:
        return JacobiTriple(float(t.sn), float(t.cn), float(t.dn))
    return t


def complete_K(k: float) -> float:
    """Complete elliptic integral of the first kind, K(k) = pi / (2 AGM(1, k'))."""
    _check_modulus(k)
    if k >= 1.0:
        raise ValueError("K(1) diverges")
    a, b = 1.0, math.sqrt((1.0 - k) * (1.0 + k))
    for _ in range(64):
        if abs(a - b) <= 1e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


@dataclass(frozen=True)
class TablePair:
    """f''/f and (sn cn dn) f'/f as polynomials in x = sn²."""

    f_ratio: Poly
    drift: Poly


def appendix_table(tag: str, k2) -> TablePair:
    """Hard-coded identities for the eight admissible prefactors f."""
    k2 = scalar(k2)
    one = Fraction(1)
    rows = {
        "one": ((), ()),
        "sn": ((-(1 + k2), 2 * k2), (one, -(1 + k2), k2)),
        "cn": ((-one, 2 * k2), (0, -one, k2)),
        "dn": ((-k2, 2 * k2), (0, -k2, k2)),
        "cndn": ((-(1 + k2), 6 * k2), (0, -(1 + k2), 2 * k2)),
        "sndn": ((-(1 + 4 * k2), 6 * k2), (one, -(1 + 2 * k2), 2 * k2)),
        "sncn": ((-(4 + k2), 6 * k2), (one, -(2 + k2), 2 * k2)),
        "sncndn": ((-4 * (1 + k2), 12 * k2), (one, -2 * (1 + k2), 3 * k2)),
    }
    if tag not in rows:
        raise ValueError(f"unknown prefactor tag {tag!r}")
    ratio, drift = rows[tag]
    return TablePair(Poly(ratio), Poly(drift))


class JacobiExpr:
    """Exact linear combination of monomials sn^i cn^j dn^l.

    Exponents may be negative; ``k2`` fixes the modulus for derivatives and
    for the reduction to x = sn².
    """

    __slots__ = ("terms", "k2")

    def __init__(self, terms: dict, k2):
        self.k2 = scalar(k2)
        self.terms = {e: scalar(c) for e, c in terms.items() if c != 0}

    @classmethod
    def monomial(cls, exps, k2, coeff=1) -> "JacobiExpr":
        return cls({tuple(exps): coeff}, k2)

    @classmethod
    def from_tag(cls, tag: str, k2) -> "JacobiExpr":
        return cls.monomial(PREF_EXPONENTS[tag], k2)

    @classmethod
    def from_poly(cls, p: Poly, k2) -> "JacobiExpr":
        """p(sn²)."""
        return cls({(2 * i, 0, 0): c for i, c in enumerate(p.coeffs)}, k2)

    def _same_modulus(self, other: "JacobiExpr"):
        if other.k2 != self.k2:
            raise ValueError("JacobiExpr with different moduli")

    def __add__(self, other: "JacobiExpr") -> "JacobiExpr":
        self._same_modulus(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return JacobiExpr(out, self.k2)

    def __neg__(self):
        return JacobiExpr({e: -c for e, c in self.terms.items()}, self.k2)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, JacobiExpr):
            self._same_modulus(other)
            out: dict = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                    out[e] = out.get(e, 0) + c1 * c2
            return JacobiExpr(out, self.k2)
        c = scalar(other)
        return JacobiExpr({e: v * c for e, v in self.terms.items()}, self.k2)

    __rmul__ = __mul__

    def inverse_monomial(self) -> "JacobiExpr":
        if len(self.terms) != 1:
            raise ValueError("only single monomials can be inverted")
        (e, c), = self.terms.items()
        return JacobiExpr({(-e[0], -e[1], -e[2]): 1 / c}, self.k2)

    def deriv(self) -> "JacobiExpr":
        """d/dz using sn' = cn dn, cn' = -sn dn, dn' = -k² sn cn."""
        out: dict = {}

        def put(e, c):
            out[e] = out.get(e, 0) + c

        for (i, j, l), c in self.terms.items():
            if i:
                put((i - 1, j + 1, l + 1), c * i)
            if j:
                put((i + 1, j - 1, l + 1), -c * j)
            if l:
                put((i + 1, j + 1, l - 1), -c * l * self.k2)
        return JacobiExpr(out, self.k2)

    def to_poly(self) -> Poly:
        """Reduce to a polynomial in x; every exponent must be even and >= 0."""
        x = Poly.x()
        cn2 = Poly((1, -1))
        dn2 = Poly((1, -self.k2))
        acc = Poly()
        for (i, j, l), c in self.terms.items():
            if min(i, j, l) < 0 or i % 2 or j % 2 or l % 2:
                raise ValueError(f"monomial sn^{i} cn^{j} dn^{l} is not polynomial in sn^2")
            acc = acc + (x ** (i // 2)) * (cn2 ** (j // 2)) * (dn2 ** (l // 2)) * c
        return acc

    def __repr__(self):
        return f"JacobiExpr({self.terms}, k2={self.k2})"


def derive_table_row(tag: str, k2) -> TablePair:
    """Re-derive an appendix row from the derivative rules alone."""
    f = JacobiExpr.from_tag(tag, k2)
    finv = f.inverse_monomial()
    f1 = f.deriv()
    f2 = f1.deriv()
    sncndn = JacobiExpr.monomial((1, 1, 1), k2)
    return TablePair((f2 * finv).to_poly(), (sncndn * f1 * finv).to_poly())
