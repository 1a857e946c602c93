"""Fox free differential calculus and the (reduced) Gassner representation.

Matrices act on column coordinate vectors.  For a pure braid g the full
Gassner matrix is

    a_ij = p( d/dx_j  sigma-bar(g)(x_i) ),     p: x_k -> t_k,

so column j holds the coordinates of g . (d/dx_j) in the basis d/dx_i.
The reduced matrix is the same operator written in the basis
d/dy_1 .. d/dy_{n-1}, y_k = x_1 ... x_k, restricted to derivations that
kill x_1 ... x_n.
"""
from __future__ import annotations

from dataclasses import dataclass
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

from .braids import Braid, Word, braid_act, is_pure
from .exactalg import LaurentMatrix, LaurentPoly, SINGULAR_COND, condition_number


class NonPureBraidError(ValueError):
    pass


@dataclass(frozen=True)
class GroupRingElement:
    """Finite Q-linear combination of reduced words in F_n."""

    n: int
    terms: tuple[tuple[Rational, Word], ...] = ()

    def __post_init__(self):
        acc: dict[tuple, Rational] = {}
        order: list[tuple] = []
        for c, w in self.terms:
            if w.n != self.n:
                raise ValueError("rank mismatch")
            if w.letters not in acc:
                order.append(w.letters)
                acc[w.letters] = 0
            acc[w.letters] += c
        clean = tuple((acc[k], Word(self.n, k)) for k in sorted(order) if acc[k] != 0)
        object.__setattr__(self, "terms", clean)

    @classmethod
    def of(cls, w: Word, c: Rational = 1) -> "GroupRingElement":
        return cls(w.n, ((c, w),))

    @classmethod
    def zero(cls, n: int) -> "GroupRingElement":
        return cls(n, ())

    def __add__(self, other: "GroupRingElement") -> "GroupRingElement":
        return GroupRingElement(self.n, self.terms + other.terms)

    def __neg__(self):
        return GroupRingElement(self.n, tuple((-c, w) for c, w in self.terms))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "GroupRingElement") -> "GroupRingElement":
        if isinstance(other, Word):
            other = GroupRingElement.of(other)
        return GroupRingElement(self.n, tuple(
            (c1 * c2, w1 * w2) for c1, w1 in self.terms for c2, w2 in other.terms))

    def __rmul__(self, other):
        if isinstance(other, Word):
            return GroupRingElement.of(other) * self
        return NotImplemented

    def as_dict(self) -> dict:
        return {w.letters: c for c, w in self.terms}

    def __eq__(self, other):
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        return self.n == other.n and self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash((self.n, frozenset(self.as_dict().items())))

    def abelianize(self) -> LaurentPoly:
        out: dict[tuple, Rational] = {}
        for c, w in self.terms:
            e = [0] * self.n
            for k, s in w.letters:
                e[k - 1] += s
            e = tuple(e)
            out[e] = out.get(e, 0) + c
        return LaurentPoly(self.n, out)

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*({w})" for c, w in self.terms)


def _check_index(w: Word, k: int):
    if not 1 <= k <= w.n:
        raise IndexError(f"derivative index {k} out of range 1..{w.n}")


def fox_derivative(w: Word, k: int) -> GroupRingElement:
    """d w / d x_k in Q[F_n].

    Scanning left to right with D(uv) = D(u) + u D(v): a letter x_k with
    prefix u contributes +u, a letter x_k^-1 contributes -u x_k^-1.
    """
    _check_index(w, k)
    terms = []
    for pos, (g, e) in enumerate(w.letters):
        if g != k:
            continue
        if e == 1:
            terms.append((1, Word(w.n, w.letters[:pos])))
        else:
            terms.append((-1, Word(w.n, w.letters[:pos + 1])))
    return GroupRingElement(w.n, tuple(terms))


def abelianized_fox(w: Word, k: int) -> LaurentPoly:
    """Image of d w / d x_k under x_j -> t_j, computed in one pass."""
    _check_index(w, k)
    acc: dict[tuple, int] = {}
    prefix = [0] * w.n
    for g, e in w.letters:
        if g == k and e == 1:
            key = tuple(prefix)
            acc[key] = acc.get(key, 0) + 1
        prefix[g - 1] += e
        if g == k and e == -1:
            key = tuple(prefix)
            acc[key] = acc.get(key, 0) - 1
    return LaurentPoly(w.n, acc)


def _require_pure(b: Braid):
    if not is_pure(b):
        raise NonPureBraidError(f"braid {b} is not pure")


def gassner(b: Braid) -> LaurentMatrix:
    """Full n x n Gassner matrix over Z[t^{+-1}]."""
    _require_pure(b)
    n = b.n
    rows = []
    for i in range(1, n + 1):
        img = braid_act(b, Word.gen(n, i))
        rows.append([abelianized_fox(img, j) for j in range(1, n + 1)])
    return LaurentMatrix(n, rows)


def _prefix_monomial(n: int, k: int, power: int = 1) -> LaurentPoly:
    """(t_1 ... t_k)^power"""
    return LaurentPoly.monomial(n, [power] * k + [0] * (n - k))


def y_basis_change(n: int) -> tuple[LaurentMatrix, LaurentMatrix]:
    """(L, L^-1) with y-coordinates = L x-coordinates.

    A derivation with values d_m = D(x_m) has D(y_k) = sum_{m<=k} t_1..t_{m-1} d_m.
    """
    zero = LaurentPoly.zero(n)
    fwd = [[_prefix_monomial(n, m) if m <= k else zero for m in range(n)] for k in range(n)]
    inv = []
    for k in range(n):
        row = [zero] * n
        row[k] = _prefix_monomial(n, k, -1)
        if k > 0:
            row[k - 1] = -_prefix_monomial(n, k, -1)
        inv.append(row)
    return LaurentMatrix(n, fwd), LaurentMatrix(n, inv)


def reduced_gassner(b: Braid) -> LaurentMatrix:
    """(n-1) x (n-1) reduced Gassner matrix in the d/dy basis."""
    full = gassner(b)
    n = b.n
    fwd, inv = y_basis_change(n)
    conj = fwd @ full @ inv
    one, zero = LaurentPoly.const(n, 1), LaurentPoly.zero(n)
    last = conj.entries[n - 1]
    if any(p != zero for p in last[:-1]) or last[-1] != one:
        raise AssertionError("derivations killing x_infinity are not invariant")
    return conj.block(n - 1, n - 1)


def derivation_from_y_column(col: Sequence[LaurentPoly]) -> list[LaurentPoly]:
    """x-coordinates D(x_1..x_n) of the derivation with D(y_k) = col_k, D(y_n) = 0."""
    n = col[0].nvars
    e = list(col) + [LaurentPoly.zero(n)]
    _, inv = y_basis_change(n)
    return [sum((inv[i, k] * e[k] for k in range(n)), LaurentPoly.zero(n)) for i in range(n)]


def evaluate_derivation(d_x: Sequence[LaurentPoly], w: Word) -> LaurentPoly:
    """D(w) = sum_k p(dw/dx_k) D(x_k)."""
    n = w.n
    return sum((abelianized_fox(w, k) * d_x[k - 1] for k in range(1, n + 1)), LaurentPoly.zero(n))


def coboundary_vector(n: int) -> list[LaurentPoly]:
    """Coordinates (1 - t_1, ..., 1 - t_n) of delta(1) in the d/dx basis."""
    if n < 1:
        raise ValueError("n must be positive")
    return [LaurentPoly.const(n, 1) - LaurentPoly.var(n, k) for k in range(1, n + 1)]


def coboundary_y(alpha: Sequence[complex]) -> np.ndarray:
    """Specialized coboundary in y-coordinates: (1 - alpha_1...alpha_k)_{k<n}."""
    alpha = np.asarray(alpha, dtype=complex)
    return 1 - np.cumprod(alpha)[:-1]


def _check_alpha(alpha: Sequence[complex], n: int) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (n,):
        raise ValueError(f"need {n} specialization values")
    if abs(np.prod(alpha) - 1) > 1e-10:
        raise ValueError("specialization values must multiply to 1")
    if np.any(np.abs(alpha) == 0) or np.any(np.abs(alpha - 1) < 1e-12):
        raise ValueError("specialization values must avoid 0 and 1")
    return alpha


def quotient_projector(alpha: Sequence[complex]) -> tuple[np.ndarray, np.ndarray]:
    """(q, s): q projects C^{n-1} onto C^{n-2} killing the coboundary line, s is a section.

    q(x) = first n-2 coordinates of x - (x_{n-1} / v_{n-1}) v, with v the
    specialized coboundary; s(y) = (y, 0).
    """
    v = coboundary_y(alpha)
    m = len(v)
    proj = np.eye(m, dtype=complex) - np.outer(v, np.eye(m)[-1]) / v[-1]
    q = proj[: m - 1, :]
    s = np.eye(m, dtype=complex)[:, : m - 1]
    return q, s


def quotient_rep(b: Braid, alpha: Sequence[complex]) -> np.ndarray:
    """Specialized reduced Gassner matrix on the quotient by the coboundary line."""
    _require_pure(b)
    alpha = _check_alpha(alpha, b.n)
    red = reduced_gassner(b).specialize(alpha)
    q, s = quotient_projector(alpha)
    return q @ red @ s


def dualize(m: np.ndarray, g_inverse_matrix: np.ndarray) -> np.ndarray:
    """Dual representation value: rho(g^-1)^T."""
    m = np.asarray(m, dtype=complex)
    gi = np.asarray(g_inverse_matrix, dtype=complex)
    for a in (m, gi):
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("dualize needs square matrices")
        if condition_number(a) > SINGULAR_COND:
            raise ValueError("dualize needs invertible matrices")
    return gi.T.copy()


def specialize_matrix(m: LaurentMatrix, alpha: Iterable[complex]) -> np.ndarray:
    return m.specialize(list(alpha))


def laurent_to_json(m: LaurentMatrix) -> dict:
    return m.to_dict()


def complex_matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]
