"""Exact polynomials and differential operators with polynomial coefficients.

Scalars are :class:`fractions.Fraction` or :class:`QuadraticScalar`
(elements ``a + b*sqrt(d)`` of a real quadratic field).  Everything here is
immutable; equality is decided on normal forms.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "FieldMismatchError",
    "QuadraticScalar",
    "scalar",
    "sqrt_scalar",
    "Poly",
    "DiffOp",
    "MatDiffOp",
    "diffop_apply",
    "diffop_compose",
    "matop_mul",
    "unipotent_inverse",
    "solve_linear",
    "to_float",
]


class FieldMismatchError(ValueError):
    """Arithmetic between elements of different quadratic fields."""


def _squarefree(n: int) -> tuple[int, int]:
    """Return (s, d) with n == s*s*d and d squarefree (n > 0)."""
    s = 1
    for p in (2, 3):
        while n % (p * p) == 0:
            n //= p * p
            s *= p
    i = 5
    # trial division is plenty for the parameter sizes used here
    while i * i <= n and i < 2_000_000:
        for q in (i, i + 2):
            while n % (q * q) == 0:
                n //= q * q
                s *= q
        i += 6
    r = math.isqrt(n)
    if r * r == n:
        s *= r
        n = 1
    return s, n


def _rational_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


class QuadraticScalar:
    """The number ``a + b*sqrt(d)`` with rational a, b and squarefree d > 1.

    Construct through :func:`quadratic` or :func:`sqrt_scalar`; arithmetic
    that lands back in the rationals returns a plain ``Fraction``.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d):
        a, b, d = Fraction(a), Fraction(b), Fraction(d)
        if d <= 0:
            raise ValueError(f"radicand must be positive, got {d}")
        if b == 0:
            raise ValueError("b == 0: use a Fraction for rational values")
        # sqrt(p/q) = sqrt(p*q)/q
        s, d0 = _squarefree(d.numerator * d.denominator)
        if d0 == 1:
            raise ValueError(f"radicand {d} is a rational square")
        self.a = a
        self.b = b * s / d.denominator
        self.d = d0

    @classmethod
    def _raw(cls, a: Fraction, b: Fraction, d: int):
        if b == 0:
            return a
        obj = object.__new__(cls)
        obj.a, obj.b, obj.d = a, b, d
        return obj

    def _split(self, other):
        if isinstance(other, QuadraticScalar):
            if other.d != self.d:
                raise FieldMismatchError(f"sqrt({self.d}) vs sqrt({other.d})")
            return other.a, other.b
        if isinstance(other, (int, Fraction)):
            return other, 0
        return None

    def __add__(self, other):
        o = self._split(other)
        if o is None:
            return NotImplemented
        return QuadraticScalar._raw(self.a + o[0], self.b + o[1], self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticScalar._raw(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._split(other)
        if o is None:
            return NotImplemented
        return QuadraticScalar._raw(self.a - o[0], self.b - o[1], self.d)

    def __rsub__(self, other):
        o = self._split(other)
        if o is None:
            return NotImplemented
        return QuadraticScalar._raw(o[0] - self.a, o[1] - self.b, self.d)

    def __mul__(self, other):
        o = self._split(other)
        if o is None:
            return NotImplemented
        c, e = o
        return QuadraticScalar._raw(
            self.a * c + self.b * e * self.d, self.a * e + self.b * c, self.d
        )

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        """Field norm (a + b√d)(a − b√d) = a² − d b²."""
        return self.a * self.a - self.d * self.b * self.b

    def conjugate(self):
        return QuadraticScalar._raw(self.a, -self.b, self.d)

    def inverse(self):
        n = self.norm()
        return QuadraticScalar._raw(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        if isinstance(other, QuadraticScalar):
            return self * other.inverse()
        if isinstance(other, (int, Fraction)):
            return QuadraticScalar._raw(self.a / other, self.b / other, self.d)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result: object = Fraction(1)
        base = self
        while n:
            if n & 1:
                result = base * result
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, QuadraticScalar):
            return (self.a, self.b, self.d) == (other.a, other.b, other.d)
        if isinstance(other, (int, Fraction)):
            return False
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def sign(self) -> int:
        """Exact sign of a + b√d."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == sb or sa == 0:
            return sb
        # opposite signs: compare a² with d b²
        return sa if self.a * self.a > self.d * self.b * self.b else sb

    def __lt__(self, other):
        return _sign(self - other) < 0

    def __gt__(self, other):
        return _sign(self - other) > 0

    def __repr__(self):
        return f"({self.a} + {self.b}*sqrt({self.d}))"


def _sign(c) -> int:
    if isinstance(c, QuadraticScalar):
        return c.sign()
    return (c > 0) - (c < 0)


def quadratic(a, b, d):
    """Build a + b*sqrt(d), collapsing to a Fraction when possible."""
    a, b, d = Fraction(a), Fraction(b), Fraction(d)
    if b == 0:
        return a
    r = _rational_sqrt(d)
    if r is not None:
        return a + b * r
    return QuadraticScalar(a, b, d)


def scalar(value):
    """Coerce ints, Fractions, quadratic scalars and "p/q" strings."""
    if isinstance(value, (Fraction, QuadraticScalar)):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"not an exact scalar: {value!r}")


def sqrt_scalar(q):
    """Exact square root of a non-negative rational.

    Returns a Fraction for perfect squares and a QuadraticScalar otherwise.
    """
    q = Fraction(q)
    if q < 0:
        raise ValueError(f"square root of negative rational {q}")
    r = _rational_sqrt(q)
    if r is not None:
        return r
    return QuadraticScalar(0, 1, q)


def to_float(c) -> float:
    return float(c)


def _norm_coeff(c):
    if isinstance(c, (Fraction, QuadraticScalar)):
        return c
    if isinstance(c, int) and not isinstance(c, bool):
        return Fraction(c)
    raise TypeError(f"coefficient must be exact, got {type(c).__name__}")


_ZERO = Fraction(0)
_ONE = Fraction(1)


class Poly:
    """Dense univariate polynomial; ``coeffs[i]`` multiplies x**i."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [_norm_coeff(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def _trusted(cls, cs: list) -> "Poly":
        while cs and cs[-1] == 0:
            cs.pop()
        obj = object.__new__(cls)
        obj.coeffs = tuple(cs)
        return obj

    @classmethod
    def const(cls, c) -> "Poly":
        return cls((c,))

    @classmethod
    def monomial(cls, n: int, c=1) -> "Poly":
        return cls([0] * n + [c])

    @classmethod
    def x(cls) -> "Poly":
        return cls((0, 1))

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def __bool__(self):
        return bool(self.coeffs)

    def coeff(self, i: int):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else _ZERO

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction, QuadraticScalar)):
            return self.coeffs == Poly.const(other).coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "Poly(0)"
        terms = [f"{c}*x^{i}" for i, c in enumerate(self.coeffs) if c != 0]
        return "Poly(" + " + ".join(terms) + ")"

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        cs = list(a)
        for i, c in enumerate(b):
            cs[i] = cs[i] + c
        return Poly._trusted(cs)

    __radd__ = __add__

    def __neg__(self):
        return Poly._trusted([-c for c in self.coeffs])

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Poly):
            a, b = self.coeffs, other.coeffs
            if not a or not b:
                return Poly()
            cs = [_ZERO] * (len(a) + len(b) - 1)
            for i, ca in enumerate(a):
                if ca == 0:
                    continue
                for j, cb in enumerate(b):
                    cs[i + j] = cs[i + j] + ca * cb
            return Poly._trusted(cs)
        other = _norm_coeff(other)
        if other == 0:
            return Poly()
        return Poly._trusted([c * other for c in self.coeffs])

    __rmul__ = __mul__

    def __truediv__(self, c):
        c = _norm_coeff(c)
        return Poly._trusted([x / c for x in self.coeffs])

    def __pow__(self, n: int):
        result = Poly.const(1)
        for _ in range(n):
            result = result * self
        return result

    def shift(self, k: int) -> "Poly":
        """Multiply by x**k."""
        if not self.coeffs:
            return self
        return Poly._trusted([_ZERO] * k + list(self.coeffs))

    def deriv(self, k: int = 1) -> "Poly":
        cs = self.coeffs
        if k == 0:
            return self
        if len(cs) <= k:
            return Poly()
        out = []
        for i in range(k, len(cs)):
            f = 1
            for t in range(i - k + 1, i + 1):
                f *= t
            out.append(cs[i] * f)
        return Poly._trusted(out)

    def __call__(self, x):
        acc = _ZERO
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def to_floats(self) -> list[float]:
        return [float(c) for c in self.coeffs]

    def leading(self):
        return self.coeffs[-1] if self.coeffs else _ZERO

    def __divmod__(self, other: "Poly"):
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        lead = other.leading()
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Poly(), self
        quot = [_ZERO] * (dq + 1)
        for k in range(dq, -1, -1):
            c = rem[k + len(other.coeffs) - 1] / lead
            quot[k] = c
            if c != 0:
                for j, oc in enumerate(other.coeffs):
                    rem[k + j] = rem[k + j] - c * oc
        return Poly._trusted(quot), Poly._trusted(rem[: len(other.coeffs) - 1])

    def monic(self) -> "Poly":
        return self / self.leading() if self else self

    @staticmethod
    def gcd(a: "Poly", b: "Poly") -> "Poly":
        while b:
            a, b = b, divmod(a, b)[1]
        return a.monic()


def _as_poly(p) -> Poly:
    return p if isinstance(p, Poly) else Poly.const(p)


def _binom_table(n: int) -> list[list[int]]:
    return [[math.comb(k, i) for i in range(k + 1)] for k in range(n + 1)]


class DiffOp:
    """Scalar differential operator ``sum_k p_k(x) d^k/dx^k``.

    ``terms`` maps derivative order to a nonzero :class:`Poly`.
    Multiplication ``D1 * D2`` is composition; calling ``D(p)`` applies it.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        clean = {}
        for k, p in (terms or {}).items():
            if k < 0:
                raise ValueError("negative derivative order")
            p = _as_poly(p)
            if p:
                clean[k] = p
        self.terms = clean

    @classmethod
    def _trusted(cls, terms: dict) -> "DiffOp":
        obj = object.__new__(cls)
        obj.terms = terms
        return obj

    @classmethod
    def mul(cls, p) -> "DiffOp":
        """Multiplication by the polynomial (or scalar) p."""
        return cls({0: _as_poly(p)})

    @classmethod
    def d(cls, k: int = 1, c=1) -> "DiffOp":
        """c * d^k/dx^k."""
        return cls({k: Poly.const(c)})

    @classmethod
    def identity(cls) -> "DiffOp":
        return cls.mul(1)

    @classmethod
    def zero(cls) -> "DiffOp":
        return cls._trusted({})

    @property
    def order(self) -> int:
        return max(self.terms) if self.terms else -1

    @property
    def max_degree(self) -> int:
        return max((p.degree for p in self.terms.values()), default=-1)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, DiffOp):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction, QuadraticScalar, Poly)):
            return self.terms == DiffOp.mul(other).terms
        return NotImplemented

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items(), key=lambda kv: kv[0])))

    def __repr__(self):
        if not self.terms:
            return "DiffOp(0)"
        parts = [f"[{p}]D^{k}" for k, p in sorted(self.terms.items())]
        return "DiffOp(" + " + ".join(parts) + ")"

    def __add__(self, other):
        if not isinstance(other, DiffOp):
            other = DiffOp.mul(other)
        out = dict(self.terms)
        for k, p in other.terms.items():
            q = out[k] + p if k in out else p
            if q:
                out[k] = q
            else:
                out.pop(k, None)
        return DiffOp._trusted(out)

    __radd__ = __add__

    def __neg__(self):
        return DiffOp._trusted({k: -p for k, p in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, DiffOp):
            other = DiffOp.mul(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, DiffOp):
            return diffop_compose(self, other)
        if isinstance(other, Poly):
            return diffop_compose(self, DiffOp.mul(other))
        c = _norm_coeff(other)
        if c == 0:
            return DiffOp.zero()
        return DiffOp._trusted({k: p * c for k, p in self.terms.items()})

    def __rmul__(self, other):
        if isinstance(other, Poly):
            return diffop_compose(DiffOp.mul(other), self)
        c = _norm_coeff(other)
        if c == 0:
            return DiffOp.zero()
        return DiffOp._trusted({k: c * p for k, p in self.terms.items()})

    def __call__(self, p) -> Poly:
        return diffop_apply(self, _as_poly(p))


def diffop_apply(D: DiffOp, p: Poly) -> Poly:
    """Return sum_k p_k * p^(k)."""
    acc: list = []
    for k, pk in D.terms.items():
        dp = p.deriv(k)
        if not dp:
            continue
        term = (pk * dp).coeffs
        if len(term) > len(acc):
            acc.extend([_ZERO] * (len(term) - len(acc)))
        for i, c in enumerate(term):
            acc[i] = acc[i] + c
    return Poly._trusted(acc)


def diffop_compose(D1: DiffOp, D2: DiffOp) -> DiffOp:
    """Normal form of D1∘D2 by Leibniz expansion.

    p D^k ∘ q D^l = sum_i C(k,i) p q^(i) D^(k-i+l)
    """
    if not D1.terms or not D2.terms:
        return DiffOp.zero()
    binom = _binom_table(D1.order)
    acc: dict[int, list] = {}
    for k, pk in D1.terms.items():
        for l, ql in D2.terms.items():
            for i in range(min(k, ql.degree) + 1):
                dq = ql.deriv(i)
                term = (pk * dq).coeffs
                if binom[k][i] != 1:
                    term = [c * binom[k][i] for c in term]
                slot = acc.setdefault(k - i + l, [])
                if len(term) > len(slot):
                    slot.extend([_ZERO] * (len(term) - len(slot)))
                for j, c in enumerate(term):
                    slot[j] = slot[j] + c
    out = {}
    for order, cs in acc.items():
        p = Poly._trusted(cs)
        if p:
            out[order] = p
    return DiffOp._trusted(out)


def _as_diffop(e) -> DiffOp:
    if isinstance(e, DiffOp):
        return e
    return DiffOp.mul(e)


class MatDiffOp:
    """Rectangular matrix of :class:`DiffOp` entries.

    ``M1 * M2`` composes, ``M(vector_of_polys)`` applies.  Entries may be
    given as DiffOp, Poly or scalars (multiplication operators).
    """

    __slots__ = ("entries", "shape")

    def __init__(self, rows: Sequence[Sequence]):
        rows = [tuple(_as_diffop(e) for e in row) for row in rows]
        if not rows or not rows[0]:
            raise ValueError("empty operator matrix")
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged operator matrix")
        self.entries = tuple(rows)
        self.shape = (len(rows), ncols)

    @classmethod
    def _trusted(cls, rows) -> "MatDiffOp":
        obj = object.__new__(cls)
        obj.entries = tuple(tuple(r) for r in rows)
        obj.shape = (len(obj.entries), len(obj.entries[0]))
        return obj

    @classmethod
    def identity(cls, n: int) -> "MatDiffOp":
        return cls.diagonal([DiffOp.identity()] * n)

    @classmethod
    def zeros(cls, n: int, m: int | None = None) -> "MatDiffOp":
        m = n if m is None else m
        return cls._trusted([[DiffOp.zero()] * m for _ in range(n)])

    @classmethod
    def diagonal(cls, entries: Sequence) -> "MatDiffOp":
        n = len(entries)
        rows = [[DiffOp.zero()] * n for _ in range(n)]
        for i, e in enumerate(entries):
            rows[i][i] = _as_diffop(e)
        return cls._trusted(rows)

    @classmethod
    def scalar_identity(cls, n: int, D: DiffOp) -> "MatDiffOp":
        """D acting componentwise (D times the identity matrix)."""
        return cls.diagonal([D] * n)

    @property
    def n_rows(self) -> int:
        return self.shape[0]

    @property
    def n_cols(self) -> int:
        return self.shape[1]

    def __getitem__(self, ij) -> DiffOp:
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        if not isinstance(other, MatDiffOp):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"MatDiffOp({[list(r) for r in self.entries]})"

    def _check_same_shape(self, other):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other):
        self._check_same_shape(other)
        return MatDiffOp._trusted(
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)]
        )

    def __sub__(self, other):
        self._check_same_shape(other)
        return MatDiffOp._trusted(
            [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)]
        )

    def __neg__(self):
        return MatDiffOp._trusted([[-a for a in r] for r in self.entries])

    def __mul__(self, other):
        if isinstance(other, MatDiffOp):
            return matop_mul(self, other)
        return MatDiffOp._trusted([[a * other for a in r] for r in self.entries])

    def __rmul__(self, other):
        return MatDiffOp._trusted([[other * a for a in r] for r in self.entries])

    def __call__(self, vec: Sequence) -> tuple[Poly, ...]:
        if len(vec) != self.n_cols:
            raise ValueError("vector length does not match operator columns")
        vec = [_as_poly(v) for v in vec]
        out = []
        for row in self.entries:
            acc = Poly()
            for D, v in zip(row, vec):
                if D.terms and v:
                    acc = acc + diffop_apply(D, v)
            out.append(acc)
        return tuple(out)

    def is_zero(self) -> bool:
        return not any(e.terms for r in self.entries for e in r)

    def is_unit_diagonal(self) -> bool:
        one = DiffOp.identity()
        return self.shape[0] == self.shape[1] and all(
            self.entries[i][i] == one for i in range(self.shape[0])
        )

    def is_strictly_lower(self) -> bool:
        return all(
            not self.entries[i][j].terms
            for i in range(self.n_rows)
            for j in range(self.n_cols)
            if j >= i
        )

    def is_strictly_upper(self) -> bool:
        return all(
            not self.entries[i][j].terms
            for i in range(self.n_rows)
            for j in range(self.n_cols)
            if j <= i
        )

    def transpose(self) -> "MatDiffOp":
        return MatDiffOp._trusted(list(zip(*self.entries)))


def matop_mul(M1: MatDiffOp, M2: MatDiffOp) -> MatDiffOp:
    """Operator-matrix product, entries composed with :func:`diffop_compose`."""
    if M1.n_cols != M2.n_rows:
        raise ValueError(f"inner dimensions differ: {M1.shape} * {M2.shape}")
    cols = list(zip(*M2.entries))
    rows = []
    for r in M1.entries:
        row = []
        for c in cols:
            acc = DiffOp.zero()
            for a, b in zip(r, c):
                if a.terms and b.terms:
                    acc = acc + diffop_compose(a, b)
            row.append(acc)
        rows.append(row)
    return MatDiffOp._trusted(rows)


def unipotent_inverse(M: MatDiffOp) -> MatDiffOp:
    """Exact inverse of I + L with L strictly triangular (hence nilpotent).

    Computed as the finite Neumann sum ``sum_k (-L)^k``.  Both lower and
    upper orientations are accepted.
    """
    n = M.n_rows
    if M.n_cols != n or not M.is_unit_diagonal():
        raise ValueError("operator matrix is not unipotent (square, unit diagonal)")
    L = M - MatDiffOp.identity(n)
    if not (L.is_strictly_lower() or L.is_strictly_upper()):
        raise ValueError("off-diagonal part is not strictly triangular")
    result = MatDiffOp.identity(n)
    term = MatDiffOp.identity(n)
    neg_L = -L
    for _ in range(n - 1):
        term = matop_mul(term, neg_L)
        if term.is_zero():
            break
        result = result + term
    return result


def solve_linear(rows: Sequence[Sequence], rhs: Sequence):
    """Solve ``rows @ u = rhs`` exactly by Gauss-Jordan elimination.

    Returns ``(particular, nullspace)`` where ``nullspace`` is a list of basis
    vectors, or ``None`` when the system is inconsistent.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    aug = [[_norm_coeff(c) for c in r] + [_norm_coeff(b)] for r, b in zip(rows, rhs)]
    pivots: list[int] = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, m) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][col] if isinstance(aug[r][col], QuadraticScalar) else Fraction(1) / aug[r][col]
        aug[r] = [c * inv for c in aug[r]]
        for i in range(m):
            if i != r and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if aug[i][n] != 0:
            return None
    particular = [_ZERO] * n
    for i, col in enumerate(pivots):
        particular[col] = aug[i][n]
    free = [c for c in range(n) if c not in pivots]
    nullspace = []
    for fcol in free:
        v = [_ZERO] * n
        v[fcol] = _ONE
        for i, col in enumerate(pivots):
            v[col] = -aug[i][fcol]
        nullspace.append(v)
    return particular, nullspace
