"""sl(2) matrices, the Q-operators and the change of basis P.

Conventions: ``j_plus`` is the unit subdiagonal, ``j_zero`` is
``diag(0..N-1) - (N-1)/2`` and ``j_minus`` carries ``i*(N-i)`` on the
superdiagonal, so that ``[J0, J±] = ±J±`` and ``[J+, J-] = 2 J0`` exactly.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import DiffOp, MatDiffOp, Poly, scalar, unipotent_inverse
from .spaces import DressedSpace, Tower, check_invariance, membership

__all__ = [
    "Sl2Triple",
    "RepParams",
    "IdentityCheck",
    "Report",
    "build_rep",
    "build_Q",
    "build_P",
    "tower_V",
    "const_op",
    "verify_prop1",
    "verify_prop2",
    "cg_params",
    "cg_matrix",
    "exp_nilpotent",
    "verify_cg_decomposition",
    "PROP2_MAX_N",
]

PROP2_MAX_N = 7

Matrix = tuple[tuple[Fraction, ...], ...]


def _zeros(n: int) -> list[list[Fraction]]:
    return [[Fraction(0)] * n for _ in range(n)]


def _freeze(m) -> Matrix:
    return tuple(tuple(r) for r in m)


def mat_mul(X: Sequence[Sequence], Y: Sequence[Sequence]) -> Matrix:
    n, k, m = len(X), len(Y), len(Y[0])
    return _freeze(
        [[sum((X[i][t] * Y[t][j] for t in range(k)), Fraction(0)) for j in range(m)] for i in range(n)]
    )


def mat_add(X, Y, s=1) -> Matrix:
    return _freeze([[a + s * b for a, b in zip(r1, r2)] for r1, r2 in zip(X, Y)])


def mat_scale(c, X) -> Matrix:
    return _freeze([[c * a for a in r] for r in X])


def commutator(X, Y) -> Matrix:
    return mat_add(mat_mul(X, Y), mat_mul(Y, X), -1)


def const_op(M: Sequence[Sequence]) -> MatDiffOp:
    """Constant matrix as a matrix of multiplication operators."""
    return MatDiffOp([[DiffOp.mul(c) if c != 0 else DiffOp.zero() for c in row] for row in M])


@dataclass(frozen=True)
class Sl2Triple:
    j_plus: Matrix
    j_zero: Matrix
    j_minus: Matrix

    @property
    def N(self) -> int:
        return len(self.j_zero)

    def commutation_defects(self) -> dict[str, Matrix]:
        """The three commutator relations, as differences that must vanish."""
        return {
            "[J0,J+]-J+": mat_add(commutator(self.j_zero, self.j_plus), self.j_plus, -1),
            "[J0,J-]+J-": mat_add(commutator(self.j_zero, self.j_minus), self.j_minus),
            "[J+,J-]-2J0": mat_add(commutator(self.j_plus, self.j_minus), self.j_zero, -2),
        }

    def is_valid(self) -> bool:
        return all(
            all(c == 0 for r in d for c in r) for d in self.commutation_defects().values()
        )


def build_rep(N: int) -> Sl2Triple:
    """The N-dimensional irreducible representation of sl(2)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    jp, j0, jm = _zeros(N), _zeros(N), _zeros(N)
    for i in range(N):
        j0[i][i] = Fraction(2 * i - (N - 1), 2)
    for i in range(N - 1):
        jp[i + 1][i] = Fraction(1)
        jm[i][i + 1] = Fraction((i + 1) * (N - i - 1))
    return Sl2Triple(_freeze(jp), _freeze(j0), _freeze(jm))


@dataclass(frozen=True)
class RepParams:
    """Size N, top tower degree p and the subdiagonal couplings c_1..c_{N-1}."""

    N: int
    p: int
    c: tuple = ()

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        c = tuple(scalar(x) for x in self.c)
        if len(c) != self.N - 1:
            raise ValueError(f"need {self.N - 1} couplings, got {len(c)}")
        object.__setattr__(self, "c", c)
        if self.p < 2 * (self.N - 1):
            raise ValueError(f"p={self.p} too small: tower degree p-2N+2 would be negative")
        for i, j, k in self._denominator_indices():
            if self.p + 2 - 2 * j - k == 0:
                raise ValueError(f"zero denominator p+2-2j-k at j={j}, k={k}")

    def _denominator_indices(self):
        for i in range(1, self.N + 1):
            for j in range(1, i):
                for k in range(i - j):
                    yield i, j, k

    @classmethod
    def uniform(cls, N: int, p: int, c=1) -> "RepParams":
        return cls(N, p, (scalar(c),) * (N - 1))

    def A(self) -> Matrix:
        A = _zeros(self.N)
        for i in range(self.N):
            A[i][i] = Fraction(i) - Fraction(self.p, 2)
        return _freeze(A)

    def B(self) -> Matrix:
        B = _zeros(self.N)
        for b in range(self.N - 1):
            B[b + 1][b] = self.c[b]
        return _freeze(B)


def tower_V(N: int, p: int) -> Tower:
    """P(p) + P(p-2) + ... + P(p-2N+2)."""
    return Tower(tuple(p - 2 * i for i in range(N)))


def _x2D() -> DiffOp:
    return DiffOp({1: Poly.monomial(2)})


def _xD() -> DiffOp:
    return DiffOp({1: Poly.monomial(1)})


def _x_times(M: Matrix) -> MatDiffOp:
    return MatDiffOp([[DiffOp.mul(Poly((0, c))) for c in row] for row in M])


def build_Q(params: RepParams):
    """Return ``(Q_plus, Q_zero, A, B)``.

    Q+ = x² d/dx + 2x A − B,  Q0 = x d/dx + A.
    """
    N = params.N
    A, B = params.A(), params.B()
    Qp = MatDiffOp.scalar_identity(N, _x2D()) + _x_times(mat_scale(2, A)) - const_op(B)
    Q0 = MatDiffOp.scalar_identity(N, _xD()) + const_op(A)
    return Qp, Q0, A, B


def build_P(params: RepParams) -> MatDiffOp:
    """Unit lower-triangular change of basis with derivative entries.

    P_ij = (prod_{k=0}^{i-j-1} c_{j+k} / (p+2-2j-k)) / (i-j)! d^{i-j}/dx^{i-j}
    for i > j (1-based indices).
    """
    N, p, c = params.N, params.p, params.c
    rows = [[DiffOp.zero()] * N for _ in range(N)]
    for i in range(1, N + 1):
        rows[i - 1][i - 1] = DiffOp.identity()
        for j in range(1, i):
            coef = Fraction(1, math.factorial(i - j))
            for k in range(i - j):
                coef = coef * c[j + k - 1] / (p + 2 - 2 * j - k)
            rows[i - 1][j - 1] = DiffOp.d(i - j, coef) if coef != 0 else DiffOp.zero()
    return MatDiffOp(rows)


@dataclass
class IdentityCheck:
    identity: str
    passed: bool
    residual: MatDiffOp | None = None

    def to_json(self) -> dict:
        return {
            "identity": self.identity,
            "pass": self.passed,
            "residual": None if self.residual is None else _dump_op(self.residual),
        }


@dataclass
class Report:
    name: str
    checks: list[IdentityCheck] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, identity: str, lhs: MatDiffOp, rhs: MatDiffOp):
        diff = lhs - rhs
        ok = diff.is_zero()
        self.checks.append(IdentityCheck(identity, ok, None if ok else diff))

    def add_bool(self, identity: str, ok: bool):
        self.checks.append(IdentityCheck(identity, bool(ok)))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "pass": self.passed,
            "checks": [c.to_json() for c in self.checks],
            **({"info": self.info} if self.info else {}),
        }


def _dump_op(M: MatDiffOp) -> list:
    return [[{str(k): [str(c) for c in p.coeffs] for k, p in sorted(e.terms.items())} for e in row]
            for row in M.entries]


def verify_prop1(params: RepParams) -> Report:
    """Check the three conjugation identities satisfied by P."""
    N = params.N
    Qp, Q0, A, B = build_Q(params)
    P = build_P(params)
    Pinv = unipotent_inverse(P)
    Bop = const_op(B)
    undressed_plus = MatDiffOp.scalar_identity(N, _x2D()) + _x_times(mat_scale(2, A))
    report = Report("prop1", info={"N": N, "p": params.p, "c": [str(x) for x in params.c]})
    conj_B = Pinv * (Bop * P)
    conj_QpB = Pinv * ((Qp + Bop) * P)
    report.add("P^-1 B P = P^-1 (Q+ + B) P - (Q+ + B)", conj_B, conj_QpB - (Qp + Bop))
    report.add("P^-1 Q+ P = x^2 d/dx + 2 x A", Pinv * (Qp * P), undressed_plus)
    report.add("P^-1 Q0 P = Q0", Pinv * (Q0 * P), Q0)
    return report


def _prop2_operator(N: int, c) -> tuple[Matrix, Matrix]:
    rep = build_rep(N)
    B = mat_scale(c, rep.j_plus)
    W3 = mat_scale(-c, mat_add(rep.j_plus, rep.j_minus))
    return B, W3


def _prop2_invariant(N: int, p: int, B: Matrix, W3: Matrix) -> bool:
    cs = tuple(B[b + 1][b] for b in range(N - 1))
    P = build_P(RepParams(N, p, cs))
    space = DressedSpace(tower_V(N, p), P)
    return check_invariance(const_op(mat_add(W3, B)), space).invariant


def _random_nonzero_rational(rng: random.Random) -> Fraction:
    while True:
        q = Fraction(rng.randint(-9, 9), rng.randint(1, 7))
        if q != 0:
            return q


def verify_prop2(N: int, p: int, c=1, mode: str = "sufficiency", *, allow_large_N: bool = False,
                 trials: int = 40, seed: int = 0) -> Report:
    """Invariance of V(N,p) under P⁻¹(W₃+B)P for B = cJ₊, W₃ = −c(J₊+J₋).

    ``mode="necessity_scan"`` instead perturbs single entries (the couplings
    c_b of B, diagonal entries of W₃, symmetric off-diagonal pairs of W₃)
    and counts how many perturbations destroy invariance.
    """
    c = scalar(c)
    if N < 1:
        raise ValueError("N must be >= 1")
    if mode == "sufficiency":
        if N > PROP2_MAX_N and not allow_large_N:
            raise ValueError(f"sufficiency checks are limited to N <= {PROP2_MAX_N}")
    elif mode == "necessity_scan":
        if not 2 <= N <= 3:
            raise ValueError("necessity scan supports 2 <= N <= 3")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    B, W3 = _prop2_operator(N, c)
    report = Report(f"prop2-{mode}", info={"N": N, "p": p, "c": str(c)})
    report.add_bool("P^-1 (W3 + B) P preserves V(N,p)", _prop2_invariant(N, p, B, W3))
    if mode == "sufficiency":
        return report

    rng = random.Random(seed)
    kinds = [("B", b, b) for b in range(N - 1)]
    kinds += [("W3", i, i) for i in range(N)]
    kinds += [("W3", i, j) for i in range(N) for j in range(i + 1, N)]
    broken = 0
    survivors = []
    for _ in range(trials):
        kind, i, j = rng.choice(kinds)
        delta = _random_nonzero_rational(rng)
        Bm, Wm = [list(r) for r in B], [list(r) for r in W3]
        if kind == "B":
            Bm[i + 1][i] += delta
        else:
            Wm[i][j] += delta
            if i != j:
                Wm[j][i] += delta
        if _prop2_invariant(N, p, _freeze(Bm), _freeze(Wm)):
            survivors.append({"kind": kind, "entry": [i, j], "delta": str(delta)})
        else:
            broken += 1
    report.info.update({"trials": trials, "broken": broken, "fraction_broken": broken / trials,
                        "survivors": survivors})
    return report


def cg_params(N: int, p: int) -> RepParams:
    """Parameters identifying the tensor-product generators with build_Q.

    The differential realization obeys [j+, j-] = -2 j0, so the matrix factor
    enters as (-J+, J0, J-).  Conjugation by e^{xJ-} then yields
    Q+ = x^2 d/dx + 2x A - J+, i.e. B = J+ (all c_b = 1).
    """
    return RepParams(N, p, (Fraction(1),) * (N - 1))


def exp_nilpotent(x_coeff: int, J: Matrix) -> MatDiffOp:
    """exp(x_coeff * x * J) for nilpotent J, as a polynomial matrix."""
    N = len(J)
    terms = [[Poly() for _ in range(N)] for _ in range(N)]
    power = _freeze([[Fraction(int(i == j)) for j in range(N)] for i in range(N)])
    for k in range(N):
        scale = Fraction(x_coeff) ** k / math.factorial(k)
        for i in range(N):
            for j in range(N):
                if power[i][j] != 0:
                    terms[i][j] = terms[i][j] + Poly.monomial(k, scale * power[i][j])
        power = mat_mul(power, J)
    return MatDiffOp(terms)


def cg_matrix(N: int, p: int) -> MatDiffOp:
    """Clebsch-Gordan operator exp(-x J-) P."""
    rep = build_rep(N)
    return exp_nilpotent(-1, rep.j_minus) * build_P(cg_params(N, p))


def verify_cg_decomposition(N: int, p: int) -> Report:
    """Check the two-step decomposition of the tensor product J ⊗ j.

    The second factor is the differential realization with mu = (N-p-1)/2,
    i.e. dimension p-N+2.
    """
    n = p - N + 1
    if n < 0:
        raise ValueError("p must be >= N - 1")
    mu = Fraction(N - p - 1, 2)
    rep = build_rep(N)
    params = cg_params(N, p)
    I = MatDiffOp.identity(N)
    D = MatDiffOp.scalar_identity(N, DiffOp.d(1))
    j_plus = MatDiffOp.scalar_identity(N, _x2D() + DiffOp.mul(Poly((0, 2 * mu))))
    j_zero = MatDiffOp.scalar_identity(N, _xD() + DiffOp.mul(mu))
    tilde = {
        "+": const_op(mat_scale(-1, rep.j_plus)) + j_plus,
        "0": const_op(rep.j_zero) + j_zero,
        "-": const_op(rep.j_minus) + D,
    }
    E, Einv = exp_nilpotent(1, rep.j_minus), exp_nilpotent(-1, rep.j_minus)
    Qp, Q0, A, _ = build_Q(params)
    shifted = {
        "+": Qp,
        "0": Q0,
        "-": D,
    }
    report = Report("cg", info={"N": N, "p": p, "mu": str(mu), "dims": [N, p - N + 2]})
    report.add_bool("A = J0 + mu", A == mat_add(rep.j_zero, mat_scale(mu, _freeze(
        [[Fraction(int(i == j)) for j in range(N)] for i in range(N)]))))
    for k in "+0-":
        report.add(f"e^(xJ-) Q~{k} e^(-xJ-) = Q{k}", E * (tilde[k] * Einv), shifted[k])
    P = build_P(params)
    Pinv = unipotent_inverse(P)
    undressed_plus = MatDiffOp.scalar_identity(N, _x2D()) + _x_times(mat_scale(2, A))
    bars = {"+": undressed_plus, "0": Q0, "-": D}
    for k in "+0-":
        report.add(f"P^-1 Q{k} P = Qbar{k}", Pinv * (shifted[k] * P), bars[k])
    Pcg = cg_matrix(N, p)
    Pcg_inv = Pinv * E
    report.add("P_cg^-1 P_cg = I", Pcg_inv * Pcg, I)
    for k in "+0-":
        report.add(f"P_cg^-1 Q~{k} P_cg = Qbar{k}", Pcg_inv * (tilde[k] * Pcg), bars[k])
    space = DressedSpace(tower_V(N, p), P)
    report.add_bool("J- preserves V'", check_invariance(const_op(rep.j_minus), space).invariant)
    report.add_bool("j- preserves V'", check_invariance(D, space).invariant)
    tower = tower_V(N, p)
    target = DressedSpace(Tower((n,) * N))
    report.add_bool(
        "P_cg maps V(N,p) into P(n)^N",
        all(membership(Pcg(tower.basis_vector(b)), target) for b in tower.basis()),
    )
    report.add_bool("dim V(N,p) = dim P(n)^N", tower.dimension == N * (n + 1))
    for k in "+0-":
        report.add_bool(f"Qbar{k} preserves V(N,p)",
                        check_invariance(bars[k], DressedSpace(tower)).invariant)
    return report
