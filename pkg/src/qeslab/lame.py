"""Matrix Lamé-type operators in the variable x = sn²(z, k).

An operator ``-d²/dz² + sn² diag(a) + diag(b) + V_I`` is conjugated by a
diagonal matrix of Jacobi prefactors and rewritten with polynomial
coefficients in x.  On top of that engine sit the 2×2 coupling catalog
(sn·cn, sn·dn, cn·dn; two types each), the exact 3×3 constraint solver and
the k → 0 trigonometric limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .algebra import (
    DiffOp,
    MatDiffOp,
    Poly,
    QuadraticScalar,
    scalar,
    solve_linear,
    sqrt_scalar,
)
from .elliptic import PREF_EXPONENTS, appendix_table, jacobi
from .spaces import (
    DressedSpace,
    InvarianceReport,
    Tower,
    check_invariance,
    residual_map,
    restriction_matrix,
)

__all__ = [
    "COUPLING_EXPONENTS",
    "NonPolynomialError",
    "LameOperator",
    "CaseConstants",
    "Lame3Constants",
    "Lame3Inconsistent",
    "fush_operator",
    "kinetic_part",
    "coupling_poly",
    "to_algebraic",
    "case_params",
    "theta_squared",
    "unipotent_2x2",
    "invariant_spaces",
    "qes_spectrum_lame",
    "discover_kappa",
    "templates",
    "solve_template",
    "solve_case",
    "TemplateSolution",
    "CaseSolution",
    "KappaSolution",
    "lame3_operator",
    "lame3_space",
    "lame3_solve",
    "lame3_double_algebraization",
    "DoubleAlgebraization",
    "LAME3_PREFACTORS",
    "LAME3_ALT_PREFACTORS",
    "fourier_coefficients",
    "add_fourier",
    "trig_limit_potential",
    "SINGLE_FACTOR_COUPLINGS",
    "DRESS_SHAPES",
    "NoGoReport",
    "single_factor_nogo",
]

COUPLING_EXPONENTS = {
    "const": (0, 0, 0),
    "sn": (1, 0, 0),
    "cn": (0, 1, 0),
    "dn": (0, 0, 1),
    "sncn": (1, 1, 0),
    "sndn": (1, 0, 1),
    "cndn": (0, 1, 1),
    "cn2": (0, 2, 0),
}


class NonPolynomialError(ValueError):
    """The prefactors leave an odd or negative Jacobi exponent."""


# ---------------------------------------------------------------- operator


@dataclass(frozen=True)
class LameOperator:
    """-d²/dz² I + sn² diag(a) + diag(b) + V_I.

    ``couplings`` maps an index pair (i, j), i < j, to ``(theta, exponents)``
    where exponents are the powers of (sn, cn, dn); V_I is symmetric.
    """

    a: tuple
    b: tuple
    k2: Fraction
    couplings: dict = field(default_factory=dict)

    def __post_init__(self):
        a = tuple(scalar(x) for x in self.a)
        b = tuple(scalar(x) for x in self.b)
        if len(a) != len(b):
            raise ValueError("a and b must have the same length")
        if sum(b, Fraction(0)) != 0:
            raise ValueError("the constant shifts b must sum to zero")
        cpl = {}
        for (i, j), (theta, exps) in self.couplings.items():
            if not 0 <= i < j < len(a):
                raise ValueError(f"coupling index ({i},{j}) must satisfy i < j < N")
            if len(exps) != 3 or min(exps) < 0:
                raise ValueError(f"bad exponents {exps}")
            cpl[(i, j)] = (scalar(theta), tuple(int(e) for e in exps))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "k2", scalar(self.k2))
        object.__setattr__(self, "couplings", cpl)

    @property
    def N(self) -> int:
        return len(self.a)

    def potential(self, z) -> np.ndarray:
        """V(z) sampled on an array, shape (len(z), N, N)."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        k = math.sqrt(float(self.k2))
        sn, cn, dn = jacobi(z, k)
        sn, cn, dn = np.atleast_1d(sn), np.atleast_1d(cn), np.atleast_1d(dn)
        V = np.zeros((len(z), self.N, self.N))
        for i in range(self.N):
            V[:, i, i] = float(self.a[i]) * sn**2 + float(self.b[i])
        for (i, j), (theta, (e1, e2, e3)) in self.couplings.items():
            v = float(theta) * sn**e1 * cn**e2 * dn**e3
            V[:, i, j] = v
            V[:, j, i] = v
        return V


def fush_operator(k2) -> DiffOp:
    """d²/dz² written in x = sn²."""
    k2 = scalar(k2)
    return DiffOp({
        2: Poly((0, 4, -4 - 4 * k2, 4 * k2)),
        1: Poly((2, -4 * (1 + k2), 6 * k2)),
    })


def kinetic_part(prefactors: Sequence[str], k2) -> MatDiffOp:
    """diag(-f_i⁻¹ d²/dz² f_i) in x, via the appendix identities."""
    fush = fush_operator(k2)
    entries = []
    for tag in prefactors:
        row = appendix_table(tag, k2)
        entries.append(-(fush + DiffOp({1: row.drift * 4}) + DiffOp.mul(row.f_ratio)))
    return MatDiffOp.diagonal(entries)


def coupling_poly(exps: Sequence[int], pref_i: str, pref_j: str, k2) -> Poly:
    """f_i⁻¹ sn^e1 cn^e2 dn^e3 f_j as a polynomial in x."""
    fi, fj = PREF_EXPONENTS[pref_i], PREF_EXPONENTS[pref_j]
    e = [a + bj - bi for a, bi, bj in zip(exps, fi, fj)]
    if any(x < 0 or x % 2 for x in e):
        raise NonPolynomialError(
            f"sn^{exps[0]} cn^{exps[1]} dn^{exps[2]} between prefactors {pref_i}, {pref_j} "
            f"leaves exponents {e}"
        )
    k2 = scalar(k2)
    return Poly.x() ** (e[0] // 2) * Poly((1, -1)) ** (e[1] // 2) * Poly((1, -k2)) ** (e[2] // 2)


def _potential_diag(H: LameOperator) -> MatDiffOp:
    return MatDiffOp.diagonal([Poly((b, a)) for a, b in zip(H.a, H.b)])


def to_algebraic(H: LameOperator, prefactors: Sequence[str],
                 triangular: MatDiffOp | None = None) -> MatDiffOp:
    """U⁻¹ H U in the variable x = sn², U = diag(prefactors).

    With ``triangular`` given, the result is additionally conjugated by it.
    Raises :class:`NonPolynomialError` when an off-diagonal entry does not
    reduce to a polynomial in x.
    """
    if len(prefactors) != H.N:
        raise ValueError("one prefactor per component is required")
    M = kinetic_part(prefactors, H.k2) + _potential_diag(H)
    rows = [list(r) for r in M.entries]
    for (i, j), (theta, exps) in H.couplings.items():
        rows[i][j] = DiffOp.mul(coupling_poly(exps, prefactors[i], prefactors[j], H.k2) * theta)
        rows[j][i] = DiffOp.mul(coupling_poly(exps, prefactors[j], prefactors[i], H.k2) * theta)
    M = MatDiffOp(rows)
    if triangular is not None:
        M = DressedSpace(Tower((0,) * H.N), triangular).conjugate(M)
    return M


# ---------------------------------------------------------------- 2x2 catalog

_TYPE_SHIFT = {1: 1, 2: 3}  # 1+4m vs 3+4m
_TYPE_QUAD = {1: (2, 1), 2: (6, 3)}  # 4m²+2m+1 vs 4m²+6m+3


def theta_squared(coupling: str, type_: int, m: int, b, k2):
    """θ² for the given case; every branch is reproduced by :func:`solve_case`."""
    b, k2 = scalar(b), scalar(k2)
    s = _TYPE_SHIFT[type_] + 4 * m
    if coupling == "sncn":
        return 4 * b * b - k2 * k2 * s * s
    if coupling == "sndn":
        return 4 * k2 * b * b - k2 * s * s
    if coupling == "cndn":
        return k2 * s * s - 4 * b * b * k2 / ((1 + k2) * (1 + k2))
    raise ValueError(f"unknown coupling {coupling!r}")


def _diagonal_a(coupling: str, type_: int, m: int, b, k2):
    lin, const = _TYPE_QUAD[type_]
    q = k2 * (4 * m * m + lin * m + const)
    if coupling == "sncn":
        return q - 2 * b, q + 2 * b
    if coupling == "sndn":
        return q - 2 * b * k2, q + 2 * b * k2
    if coupling == "cndn":
        s = 2 * b * k2 / (1 + k2)
        return q - s, q + s
    raise ValueError(f"unknown coupling {coupling!r}")


@dataclass(frozen=True)
class CaseConstants:
    coupling: str
    type: int
    m: int
    b: Fraction
    k2: Fraction
    a1: Fraction
    a2: Fraction
    theta2: Fraction
    theta: object
    kappas: dict = field(default_factory=dict)

    def operator(self, theta=None) -> LameOperator:
        th = self.theta if theta is None else theta
        return LameOperator(
            (self.a1, self.a2), (self.b, -self.b), self.k2,
            {(0, 1): (th, COUPLING_EXPONENTS[self.coupling])},
        )

    def to_json_dict(self) -> dict:
        return {
            "coupling": self.coupling, "type": self.type, "m": self.m, "b": self.b,
            "k2": self.k2, "a1": self.a1, "a2": self.a2, "theta2": self.theta2,
            "theta": self.theta, "kappas": dict(self.kappas),
        }


def _sncn_kappas(type_: int, m: int, b, k2, theta) -> dict:
    """Closed-form κ for the sn·cn spaces (each one reproduced by discover_kappa)."""
    if type_ == 1:
        s = k2 * (1 + 4 * m)
        k1 = -theta / (2 * b + s)
        return {"V1": k1, "V2": -k1, "V3": k1, "V4": -1 / k1}
    s = k2 * (4 * m + 3)
    return {
        "V5": (s - 2 * b) / theta,
        "V6": (2 * b + s) / theta,
        "V7": (s - 2 * b) / theta,
        "V8": (2 * b - s) / theta,
    }


def case_params(coupling: str, type_: int, m: int, b, k2) -> CaseConstants:
    """Coupling constants (a1, a2, θ) and, for sn·cn, the κ of each space.

    θ is the positive square root, exact in Q or Q(√d).
    """
    if type_ not in (1, 2):
        raise ValueError("type must be 1 or 2")
    if m < 0:
        raise ValueError("m must be non-negative")
    b, k2 = scalar(b), scalar(k2)
    th2 = theta_squared(coupling, type_, m, b, k2)
    if th2 <= 0:
        raise ValueError(f"theta^2 = {th2} <= 0: no real coupling")
    theta = sqrt_scalar(th2)
    a1, a2 = _diagonal_a(coupling, type_, m, b, k2)
    kappas = _sncn_kappas(type_, m, b, k2, theta) if coupling == "sncn" else {}
    if coupling != "sncn":
        kappas = {label: kap for label, _, _, _, kap in _discovered_templates(coupling, type_, m, b, k2, theta, a1, a2)}
    return CaseConstants(coupling, type_, m, b, k2, a1, a2, th2, theta, kappas)


def unipotent_2x2(shape: str, kappa) -> MatDiffOp:
    """[[1, κ],[0,1]] style dresses; shape is '{upper,lower}_{const,linear}'."""
    pos, kind = shape.split("_")
    entry = Poly((kappa,)) if kind == "const" else Poly((0, kappa))
    rows = [[DiffOp.identity(), DiffOp.zero()], [DiffOp.zero(), DiffOp.identity()]]
    if pos == "upper":
        rows[0][1] = DiffOp.mul(entry)
    else:
        rows[1][0] = DiffOp.mul(entry)
    return MatDiffOp(rows)


# label, prefactors, dress shape, tower offsets relative to m, for each type
_SNCN_TEMPLATES = {
    1: [
        ("V1", ("sn", "cn"), "upper_const", (-1, 0)),
        ("V2", ("cn", "sn"), "upper_const", (-1, 0)),
        ("V3", ("dn", "sncndn"), "upper_linear", (-1, -1)),
        ("V4", ("sncndn", "dn"), "lower_linear", (-1, -1)),
    ],
    2: [
        ("V5", ("one", "sncn"), "upper_linear", (0, 0)),
        ("V6", ("sncn", "one"), "lower_linear", (0, 0)),
        ("V7", ("sndn", "cndn"), "upper_const", (-1, 0)),
        ("V8", ("cndn", "sndn"), "upper_const", (-1, 0)),
    ],
}

# the sn·cn patterns carried to the other couplings by relabelling functions
_RELABEL = {
    "sndn": {"sn": "sn", "cn": "dn", "dn": "cn"},
    "cndn": {"sn": "dn", "cn": "cn", "dn": "sn"},
}


def _relabel_tag(tag: str, mapping: dict) -> str:
    if tag == "one":
        return tag
    exps = [0, 0, 0]
    for name, idx in (("sn", 0), ("cn", 1), ("dn", 2)):
        if name in tag:
            exps["sncndn".index(mapping[name]) // 2] = 1
    for t, e in PREF_EXPONENTS.items():
        if list(e) == exps:
            return t
    raise AssertionError(tag)


def templates(coupling: str, type_: int):
    base = _SNCN_TEMPLATES[type_]
    if coupling == "sncn":
        return base
    mp = _RELABEL[coupling]
    return [(lab, tuple(_relabel_tag(t, mp) for t in prefs), shape, offs)
            for lab, prefs, shape, offs in base]


def _tower(m: int, offsets) -> Tower:
    return Tower(tuple(max(m + o, -1) for o in offsets))


def _discovered_templates(coupling, type_, m, b, k2, theta, a1, a2):
    H = LameOperator((a1, a2), (b, -b), k2, {(0, 1): (theta, COUPLING_EXPONENTS[coupling])})
    out = []
    for label, prefs, shape, offs in templates(coupling, type_):
        try:
            Halg = to_algebraic(H, prefs)
        except NonPolynomialError:
            continue
        tower = _tower(m, offs)
        for kap in discover_kappa(Halg, shape, tower):
            if kap != 0:
                out.append((label, prefs, shape, tower, kap))
                break
    return out


def invariant_spaces(c: CaseConstants) -> list[DressedSpace]:
    """The catalog spaces for the given constants."""
    spaces = []
    for label, prefs, shape, offs in templates(c.coupling, c.type):
        if label not in c.kappas:
            continue
        spaces.append(DressedSpace(
            _tower(c.m, offs), unipotent_2x2(shape, c.kappas[label]), prefs, label,
        ))
    return spaces


def qes_spectrum_lame(c: CaseConstants, spaces: Sequence[DressedSpace] | None = None):
    """Algebraic levels on each catalog space as ``[(label, Spectrum), ...]``.

    Every space is certified invariant (exactly) before its restriction is
    diagonalized.
    """
    from .driver import spectrum_from_restriction

    H = c.operator()
    out = []
    for S in (invariant_spaces(c) if spaces is None else spaces):
        Halg = to_algebraic(H, S.prefactors)
        rep = check_invariance(Halg, S)
        if not rep.invariant:
            raise ValueError(f"space {S.label} is not invariant: constants are inconsistent")
        if S.dimension == 0:
            continue
        out.append((S.label, spectrum_from_restriction(restriction_matrix(Halg, S), S.label)))
    return out


# ---------------------------------------------------------------- discovery


def _interp_quadratic(r0, r1, rm1) -> Poly:
    """q with q(0) = r0, q(1) = r1, q(-1) = rm1."""
    return Poly((r0, (r1 - rm1) / 2, (r1 + rm1) / 2 - r0))


def _residual_polys_keyed(fn: Callable[[Fraction], dict]) -> dict:
    """Residual coefficients as quadratics in κ, keyed like residual_map."""
    samples = {t: fn(Fraction(t)) for t in (0, 1, -1)}
    keys = set().union(*(s.keys() for s in samples.values()))
    zero = Fraction(0)
    out = {}
    for k in keys:
        p = _interp_quadratic(samples[0].get(k, zero), samples[1].get(k, zero), samples[-1].get(k, zero))
        if p:
            out[k] = p
    return out


def _field_sqrt(x):
    """Square root inside Q or the quadratic field of x, else None."""
    if isinstance(x, QuadraticScalar):
        n = x.norm()
        r = sqrt_scalar(n) if n >= 0 else None
        if not isinstance(r, Fraction):
            return None
        for u2 in ((x.a + r) / 2, (x.a - r) / 2):
            u = sqrt_scalar(u2) if u2 > 0 else None
            if isinstance(u, Fraction):
                cand = u + (x.b / (2 * u)) * QuadraticScalar(0, 1, x.d)
                if cand * cand == x:
                    return cand
        return None
    if x < 0:
        return None
    return sqrt_scalar(x)


def _roots(g: Poly) -> list:
    """Exact roots of a polynomial of degree <= 2 in its coefficient field."""
    if g.degree <= 0:
        return []
    if g.degree == 1:
        return [-g.coeff(0) / g.coeff(1)]
    if g.degree == 2:
        a, b_, c = g.coeff(2), g.coeff(1), g.coeff(0)
        disc = b_ * b_ - 4 * a * c
        if disc == 0:
            return [-b_ / (2 * a)]
        s = _field_sqrt(disc)
        if s is None:
            return []
        return [(-b_ + s) / (2 * a), (-b_ - s) / (2 * a)]
    raise ValueError("root finding is limited to degree <= 2 here")


def _rational_roots(g: Poly) -> list[Fraction]:
    """Rational roots (numerical candidates confirmed exactly)."""
    if g.degree <= 0:
        return []
    out = []
    for z in np.roots([float(c) for c in reversed(g.coeffs)]):
        if abs(z.imag) > 1e-6 * (1 + abs(z.real)):
            continue
        q = Fraction(z.real).limit_denominator(10**6)
        if q not in out and g(q) == 0:
            out.append(q)
    return out


def _quadratic_factors(g: Poly) -> list[Poly]:
    """Rational quadratic factors of g found from pairs of numerical roots."""
    if g.degree < 2:
        return []
    roots = np.roots([float(c) for c in reversed(g.coeffs)])
    out = []
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            s = roots[i] + roots[j]
            p = roots[i] * roots[j]
            if abs(s.imag) > 1e-8 or abs(p.imag) > 1e-8:
                continue
            q = Poly((Fraction(p.real).limit_denominator(10**8),
                      -Fraction(s.real).limit_denominator(10**8), 1))
            if q not in out and not divmod(g, q)[1]:
                out.append(q)
    return out


def _all_roots(g: Poly) -> list:
    """Roots of g lying in Q or in a quadratic extension."""
    if any(isinstance(c, QuadraticScalar) for c in g.coeffs):
        # coefficients already irrational: only low degree is supported
        return _roots(g.monic()) if g.degree <= 2 else []
    roots = _rational_roots(g)
    for q in _quadratic_factors(g):
        if not _rational_roots(q):
            roots.extend(_roots(q))
    return list(dict.fromkeys(roots))


def discover_kappa(Halg: MatDiffOp, shape: str, tower: Tower) -> list:
    """Every κ making ``unipotent_2x2(shape, κ) · tower`` invariant under Halg.

    The residual of the conjugated operator is quadratic in κ, so κ is a
    common root of all residual coefficients.  ``[0]`` is returned when the
    residual vanishes identically.
    """
    polys = list(_residual_polys_keyed(
        lambda kap: residual_map(Halg, DressedSpace(tower, unipotent_2x2(shape, kap)))).values())
    if not polys:
        return [Fraction(0)]
    g = polys[0]
    for p in polys[1:]:
        g = Poly.gcd(g, p)
        if g.degree <= 0:
            return []
    g = g.monic()
    return [r for r in _all_roots(g)
            if not residual_map(Halg, DressedSpace(tower, unipotent_2x2(shape, r)))]


# ---------------------------------------------------------------- elimination


def _unit(N, i, j, p: Poly) -> MatDiffOp:
    rows = [[DiffOp.zero()] * N for _ in range(N)]
    rows[i][j] = DiffOp.mul(p)
    return MatDiffOp(rows)


def _scale(M: MatDiffOp, c) -> MatDiffOp:
    c = DiffOp.mul(Poly.const(c))
    return MatDiffOp([[c * e for e in row] for row in M.entries])


def _pieces_2x2(prefs, exps, k2) -> dict:
    """Operator pieces multiplying each free constant (b1 = b, b2 = -b)."""
    x, one = Poly.x(), Poly.const(1)
    return {
        "a1": _unit(2, 0, 0, x),
        "a2": _unit(2, 1, 1, x),
        "b": _unit(2, 0, 0, one) - _unit(2, 1, 1, one),
        "theta": _unit(2, 0, 1, coupling_poly(exps, prefs[0], prefs[1], k2))
        + _unit(2, 1, 0, coupling_poly(exps, prefs[1], prefs[0], k2)),
    }


def _det(M: list[list[Poly]]) -> Poly:
    n = len(M)
    if n == 0:
        return Poly.const(1)
    if n == 1:
        return M[0][0]
    acc = Poly()
    for j in range(n):
        if not M[0][j]:
            continue
        term = M[0][j] * _det([row[:j] + row[j + 1:] for row in M[1:]])
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def _rank_pivots(rows: list[list]) -> tuple[list[int], list[int]]:
    """Pivot rows and columns of an exact numeric matrix."""
    A = [list(r) for r in rows]
    order = list(range(len(A)))
    prow, pcol = [], []
    r = 0
    for col in range(len(A[0]) if A else 0):
        piv = next((i for i in range(r, len(A)) if A[i][col] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        order[r], order[piv] = order[piv], order[r]
        for i in range(r + 1, len(A)):
            if A[i][col] != 0:
                f = A[i][col] / A[r][col]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        prow.append(order[r])
        pcol.append(col)
        r += 1
    return prow, pcol


@dataclass(frozen=True)
class KappaSolution:
    """Affine family of constants for one κ; ``kappa is None`` means any generic κ."""

    kappa: object
    particular: dict
    nullspace: tuple

    @property
    def unique(self) -> bool:
        return not self.nullspace


_PROBE = Fraction(7, 3)


def _eliminate(base: MatDiffOp, pieces: dict, shape: str, tower: Tower) -> list[KappaSolution]:
    """Solve invariance for constants entering linearly and a dress parameter κ.

    With ``shape == "none"`` the dress is the identity.  Otherwise, for fixed
    κ the system is linear; consistency requires every bordered minor to
    vanish, and those minors are polynomials in κ whose common roots are
    extracted exactly.
    """
    names = list(pieces)
    if shape == "none":
        def polys(H):
            return {k: Poly.const(v) for k, v in residual_map(H, DressedSpace(tower)).items()}
    else:
        def polys(H):
            return _residual_polys_keyed(
                lambda kap: residual_map(H, DressedSpace(tower, unipotent_2x2(shape, kap))))

    cols = [polys(pieces[u]) for u in names] + [polys(base)]
    keys = sorted(set().union(*cols), key=repr)
    zero = Poly()
    M = [[c.get(k, zero) for c in cols[:-1]] + [-cols[-1].get(k, zero)] for k in keys]

    def solve_at(kap):
        if not M:
            eye = tuple({u: Fraction(int(u == v)) for u in names} for v in names)
            return KappaSolution(kap, {u: Fraction(0) for u in names}, eye)
        sol = solve_linear([[p(kap if kap is not None else _PROBE) for p in row[:-1]] for row in M],
                           [row[-1](kap if kap is not None else _PROBE) for row in M])
        if sol is None:
            return None
        return KappaSolution(kap, dict(zip(names, sol[0])),
                             tuple(dict(zip(names, v)) for v in sol[1]))

    if shape == "none" or not M:
        s = solve_at(None)
        return [s] if s else []
    prow, pcol = _rank_pivots([[p(_PROBE) for p in row[:-1]] for row in M])
    base_det = _det([[M[i][j] for j in pcol] for i in prow])
    g = Poly()
    for i in range(len(M)):
        if i in prow:
            continue
        minor = _det([[M[r][j] for j in pcol + [len(names)]] for r in prow + [i]])
        if minor:
            g = minor if not g else Poly.gcd(g, minor)
    out = []
    if not g:
        generic = solve_at(None)
        if generic:
            out.append(generic)
        candidates = _all_roots(base_det.monic()) if base_det.degree > 0 else []
    else:
        candidates = _all_roots(g.monic()) + (_all_roots(base_det.monic()) if base_det.degree > 0 else [])
    for kap in dict.fromkeys(candidates):
        s = solve_at(kap)
        if s:
            out.append(s)
    return out


@dataclass(frozen=True)
class TemplateSolution:
    label: str
    prefactors: tuple
    shape: str
    tower: Tower
    kappa: object
    a1: object
    a2: object
    theta: object

    @property
    def theta2(self):
        return self.theta * self.theta


def solve_template(coupling: str, label: str, prefs, shape: str, tower: Tower, b, k2) -> list[TemplateSolution]:
    """Every isolated (κ, a1, a2, θ ≠ 0) making one template space invariant."""
    b, k2 = scalar(b), scalar(k2)
    pieces = _pieces_2x2(prefs, COUPLING_EXPONENTS[coupling], k2)
    base = kinetic_part(prefs, k2) + _scale(pieces.pop("b"), b)
    out = []
    for s in _eliminate(base, pieces, shape, tower):
        if s.kappa is None or not s.unique or s.particular["theta"] == 0:
            continue
        v = s.particular
        out.append(TemplateSolution(label, tuple(prefs), shape, tower, s.kappa, v["a1"], v["a2"], v["theta"]))
    return out


@dataclass(frozen=True)
class CaseSolution:
    """Constants recovered from invariance alone, per template and in consensus."""

    coupling: str
    type: int
    m: int
    b: Fraction
    k2: Fraction
    per_space: dict
    consensus: tuple | None  # (a1, a2, theta2)


def solve_case(coupling: str, type_: int, m: int, b, k2) -> CaseSolution:
    """Recompute (a1, a2, θ²) and κ from the template spaces, ignoring any formula.

    Spaces too small to pin the constants (isolated solutions absent) are
    left out of the consensus.
    """
    b, k2 = scalar(b), scalar(k2)
    per = {}
    for label, prefs, shape, offs in templates(coupling, type_):
        tower = _tower(m, offs)
        if tower.dimension == 0:
            continue
        try:
            per[label] = solve_template(coupling, label, prefs, shape, tower, b, k2)
        except NonPolynomialError:
            per[label] = []
    triples = [{(s.a1, s.a2, s.theta2) for s in sols} for sols in per.values() if sols]
    consensus = None
    if triples:
        common = set.intersection(*triples)
        if len(common) == 1:
            consensus = next(iter(common))
    return CaseSolution(coupling, type_, m, b, k2, per, consensus)


# ---------------------------------------------------------------- no-go search

SINGLE_FACTOR_COUPLINGS = ("const", "sn", "cn", "dn")
DRESS_SHAPES = ("none", "upper_const", "lower_const", "upper_linear", "lower_linear")


@dataclass(frozen=True)
class NoGoReport:
    coupling: str
    k2: Fraction
    m_max: int
    min_dimension: int
    cases: int
    witnesses: tuple

    @property
    def holds(self) -> bool:
        return not self.witnesses


def _decouplable_directions(coupling: str) -> list[dict]:
    """Linear conditions (on a1, a2, b, θ) under which V commutes with itself at all z.

    V = ((a1+a2)/2 sn²) I + ((a1-a2)/2 sn² + b) σ3 + θ g σ1.  For g = 1 the
    family commutes iff (a1 - a2) θ = 0; otherwise iff θ = 0 or
    a1 = a2 and b = 0.  Each returned dict lists the linear forms that must
    all vanish for one branch of triviality.
    """
    theta0 = [{"theta": 1}]
    if coupling == "const":
        return [theta0, [{"a1": 1, "a2": -1}]]
    return [theta0, [{"a1": 1, "a2": -1}, {"b": 1}]]


def _form(vals: dict, form: dict):
    return sum((c * vals.get(u, 0) for u, c in form.items()), Fraction(0))


def _family_inside(sol: KappaSolution, forms: list[dict]) -> bool:
    return all(_form(sol.particular, f) == 0 and all(_form(v, f) == 0 for v in sol.nullspace)
               for f in forms)


def _admissible_pairs(exps):
    for p1 in PREF_EXPONENTS:
        for p2 in PREF_EXPONENTS:
            try:
                coupling_poly(exps, p1, p2, Fraction(1, 2))
                coupling_poly(exps, p2, p1, Fraction(1, 2))
            except NonPolynomialError:
                continue
            yield p1, p2


def single_factor_nogo(coupling: str, k2, m_max: int = 2, min_dimension: int = 1) -> NoGoReport:
    """Search for non-trivial QES 2×2 operators with V12 = θ·(1 | sn | cn | dn).

    Every admissible prefactor pair, dress shape (identity or unipotent,
    constant or linear) and tower (n1, n2) with n_i in {m-1, m}, m <= m_max,
    is solved exactly with a1, a2, b, θ free.  A family counts as trivial
    when it lies inside θ = 0 or inside the constant-decouplable locus.
    Towers below ``min_dimension`` are skipped.
    """
    if coupling not in SINGLE_FACTOR_COUPLINGS:
        raise ValueError(f"coupling must be one of {SINGLE_FACTOR_COUPLINGS}")
    k2 = scalar(k2)
    exps = COUPLING_EXPONENTS[coupling]
    branches = _decouplable_directions(coupling)
    towers = sorted({(n1, n2) for m in range(m_max + 1)
                     for n1 in (m - 1, m) for n2 in (m - 1, m)
                     if Tower((n1, n2)).dimension >= max(min_dimension, 1)})
    cases = 0
    witnesses = []
    for prefs in _admissible_pairs(exps):
        pieces = _pieces_2x2(prefs, exps, k2)
        base = kinetic_part(prefs, k2)
        for shape in DRESS_SHAPES:
            for degs in towers:
                cases += 1
                tower = Tower(degs)
                for sol in _eliminate(base, pieces, shape, tower):
                    # an affine family is trivial only if it sits inside one branch
                    if not any(_family_inside(sol, br) for br in branches):
                        witnesses.append({"prefactors": prefs, "shape": shape, "tower": degs,
                                          "kappa": sol.kappa, "constants": sol.particular,
                                          "free": len(sol.nullspace)})
    return NoGoReport(coupling, k2, m_max, min_dimension, cases, tuple(witnesses))


# ---------------------------------------------------------------- 3x3 operator

LAME3_PREFACTORS = ("cn", "dn", "cn")
LAME3_ALT_PREFACTORS = ("dn", "cn", "dn")
LAME3_COUPLINGS = {(0, 1): "cndn", (1, 2): "cndn", (0, 2): "cn2"}
_LAME3_UNKNOWNS = ("a1", "a2", "a3", "b1", "b2", "b3", "theta1", "theta2", "theta3")


def lame3_dress(alpha, beta, gamma) -> MatDiffOp:
    c = [DiffOp.mul(Poly.const(scalar(v))) for v in (alpha, beta, gamma)]
    one, zero = DiffOp.identity(), DiffOp.zero()
    return MatDiffOp([[one, c[0], c[1]], [zero, one, c[2]], [zero, zero, one]])


def lame3_space(n: int, alpha, beta, gamma, prefactors=LAME3_PREFACTORS) -> DressedSpace:
    """diag(prefactors) · unitriangular(α, β, γ) · (P(n-2) + P(n-1) + P(n))."""
    return DressedSpace(Tower((max(n - 2, -1), n - 1, n)), lame3_dress(alpha, beta, gamma),
                        prefactors, "V3x3")


def lame3_operator(a, b, theta, k2=1) -> LameOperator:
    theta = tuple(theta)
    return LameOperator(tuple(a), tuple(b), k2, {
        (0, 1): (theta[0], COUPLING_EXPONENTS["cndn"]),
        (1, 2): (theta[1], COUPLING_EXPONENTS["cndn"]),
        (0, 2): (theta[2], COUPLING_EXPONENTS["cn2"]),
    })


def _lame3_pieces(prefs, k2) -> dict:
    x, one = Poly.x(), Poly.const(1)
    pieces = {}
    for i in range(3):
        pieces[f"a{i + 1}"] = _unit(3, i, i, x)
        pieces[f"b{i + 1}"] = _unit(3, i, i, one)
    for t, (i, j) in zip(("theta1", "theta2", "theta3"), ((0, 1), (1, 2), (0, 2))):
        exps = COUPLING_EXPONENTS[LAME3_COUPLINGS[(i, j)]]
        pieces[t] = (_unit(3, i, j, coupling_poly(exps, prefs[i], prefs[j], k2))
                     + _unit(3, j, i, coupling_poly(exps, prefs[j], prefs[i], k2)))
    return pieces


@dataclass(frozen=True)
class Lame3Constants:
    n: int
    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    k2: Fraction
    a: tuple
    b: tuple
    theta: tuple
    free: int = 0
    pinned: bool = False

    @property
    def sum_rule(self) -> bool:
        n = self.n
        return sum(self.a, Fraction(0)) == 2 * (6 * n * n - 3 * n + 4)

    def operator(self) -> LameOperator:
        return lame3_operator(self.a, self.b, self.theta, self.k2)

    def space(self, prefactors=LAME3_PREFACTORS) -> DressedSpace:
        return lame3_space(self.n, self.alpha, self.beta, self.gamma, prefactors)


@dataclass(frozen=True)
class Lame3Inconsistent:
    n: int
    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    k2: Fraction
    equations: int

    consistent = False


def lame3_solve(n: int, alpha, beta, gamma, k2=1):
    """Solve the linear invariance conditions for (a_i, b_i, θ_a).

    Returns :class:`Lame3Constants`, or :class:`Lame3Inconsistent` when the
    exact system has no solution.  For small n the system can leave a free
    direction; it is then pinned by a1 + a2 + a3 = 2(6n² - 3n + 4), which
    holds identically for larger n, and ``pinned`` is set.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    alpha, beta, gamma, k2 = (scalar(v) for v in (alpha, beta, gamma, k2))
    S = lame3_space(n, alpha, beta, gamma)
    pieces = _lame3_pieces(LAME3_PREFACTORS, k2)
    base = kinetic_part(LAME3_PREFACTORS, k2)
    cols = [residual_map(pieces[u], S) for u in _LAME3_UNKNOWNS]
    rhs_map = residual_map(base, S)
    keys = sorted(set(rhs_map).union(*cols), key=repr)
    zero = Fraction(0)
    rows = [[c.get(k, zero) for c in cols] for k in keys]
    rhs = [-rhs_map.get(k, zero) for k in keys]
    rows.append([0, 0, 0, 1, 1, 1, 0, 0, 0])
    rhs.append(zero)
    sol = solve_linear(rows, rhs)
    if sol is None:
        return Lame3Inconsistent(n, alpha, beta, gamma, k2, len(rows))
    pinned = False
    if sol[1]:
        pinned_sol = solve_linear(rows + [[1, 1, 1, 0, 0, 0, 0, 0, 0]],
                                  rhs + [Fraction(2 * (6 * n * n - 3 * n + 4))])
        if pinned_sol is not None:
            sol, pinned = pinned_sol, True
    v = dict(zip(_LAME3_UNKNOWNS, sol[0]))
    return Lame3Constants(n, alpha, beta, gamma, k2,
                          (v["a1"], v["a2"], v["a3"]), (v["b1"], v["b2"], v["b3"]),
                          (v["theta1"], v["theta2"], v["theta3"]), len(sol[1]), pinned)


@dataclass(frozen=True)
class DoubleAlgebraization:
    primary: InvarianceReport
    alternative: InvarianceReport

    @property
    def both(self) -> bool:
        return self.primary.invariant and self.alternative.invariant


def lame3_double_algebraization(c: Lame3Constants, a=None) -> DoubleAlgebraization:
    """Check invariance of both the cn-dn-cn and dn-cn-dn spaces under one operator.

    ``a`` optionally overrides the diagonal couplings (for negative controls).
    """
    H = c.operator() if a is None else lame3_operator(a, c.b, c.theta, c.k2)
    reports = []
    for prefs in (LAME3_PREFACTORS, LAME3_ALT_PREFACTORS):
        S = c.space(prefs)
        reports.append(check_invariance(to_algebraic(H, prefs), S))
    return DoubleAlgebraization(*reports)


# ---------------------------------------------------------------- k -> 0


def _gauss_mul(p: dict, q: dict) -> dict:
    """Product of Laurent polynomials in e^{iz} with Gaussian-rational coefficients."""
    out: dict = {}
    for e1, (r1, i1) in p.items():
        for e2, (r2, i2) in q.items():
            re, im = out.get(e1 + e2, (Fraction(0), Fraction(0)))
            out[e1 + e2] = (re + r1 * r2 - i1 * i2, im + r1 * i2 + i1 * r2)
    return out


_COS = {1: (Fraction(1, 2), Fraction(0)), -1: (Fraction(1, 2), Fraction(0))}
_SIN = {1: (Fraction(0), Fraction(-1, 2)), -1: (Fraction(0), Fraction(1, 2))}


def fourier_coefficients(cos_pow: int, sin_pow: int, coeff=1) -> dict:
    """coeff · cos^i sin^j as {("const", 0) | ("cos", n) | ("sin", n): value}."""
    acc = {0: (Fraction(1), Fraction(0))}
    for _ in range(cos_pow):
        acc = _gauss_mul(acc, _COS)
    for _ in range(sin_pow):
        acc = _gauss_mul(acc, _SIN)
    c = scalar(coeff)
    out: dict = {}
    for n, (re, im) in acc.items():
        if n == 0:
            if re:
                out[("const", 0)] = out.get(("const", 0), 0) + c * re
        elif n > 0:
            # c_n e^{inz} + c_{-n} e^{-inz} with c_{-n} = conj(c_n)
            if re:
                out[("cos", n)] = out.get(("cos", n), 0) + 2 * c * re
            if im:
                out[("sin", n)] = out.get(("sin", n), 0) - 2 * c * im
    return {k: v for k, v in out.items() if v != 0}


def add_fourier(*terms: dict) -> dict:
    out: dict = {}
    for t in terms:
        for k, v in t.items():
            out[k] = out.get(k, 0) + v
    return {k: v for k, v in out.items() if v != 0}


def trig_limit_potential(b) -> list[list[dict]]:
    """Fourier coefficients of the sn·cn Type 1 potential at k = 0.

    At k = 0 the Type 1 constants reduce to a1 = -2b, a2 = 2b, θ² = 4b²;
    θ = 2b is taken, and sn, cn, dn become sin, cos, 1.
    """
    b = scalar(b)
    a1, a2, theta = -2 * b, 2 * b, 2 * b
    const = {("const", 0): b} if b else {}
    neg = {("const", 0): -b} if b else {}
    v11 = add_fourier(fourier_coefficients(0, 2, a1), const)
    v22 = add_fourier(fourier_coefficients(0, 2, a2), neg)
    v12 = fourier_coefficients(1, 1, theta)
    return [[v11, v12], [v12, v22]]
