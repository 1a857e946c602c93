"""Exact Laurent polynomials over the rationals and small dense complex kernels.

Coefficients are Python ints when integral and :class:`fractions.Fraction`
otherwise, so the arithmetic stays exact while the common integer case
stays fast.  Complex matrices are plain ``numpy`` arrays of dtype complex128.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "LaurentPoly",
    "LaurentMatrix",
    "lp_arith",
    "lp_specialize",
    "mat_ops",
    "eigenvalues",
    "find_intertwiner",
    "intertwiner_residuals",
    "condition_number",
    "SingularMatrixError",
    "SINGULAR_COND",
    "MAX_EIG_DIM",
]

SINGULAR_COND = 1e12
MAX_EIG_DIM = 16


class SingularMatrixError(ValueError):
    """Matrix is singular to working tolerance."""


def _canon(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c.numerator)
    if isinstance(c, bool) or not isinstance(c, Rational):
        raise TypeError(f"coefficient must be rational, got {type(c).__name__}")
    return c


class LaurentPoly:
    """Element of Q[t_1^{+-1}, ..., t_n^{+-1}].

    ``terms`` maps exponent tuples of length ``nvars`` to nonzero rational
    coefficients.  Instances are treated as immutable.
    """

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[tuple, Rational] | None = None):
        if nvars < 1:
            raise ValueError("nvars must be positive")
        self.nvars = int(nvars)
        clean = {}
        if terms:
            for exp, c in terms.items():
                exp = tuple(int(e) for e in exp)
                if len(exp) != nvars:
                    raise ValueError(f"exponent {exp} does not have length {nvars}")
                c = _canon(c)
                if c != 0:
                    clean[exp] = c
        self.terms = clean
        self._hash = None

    # -- constructors -------------------------------------------------
    @classmethod
    def _raw(cls, nvars, terms):
        obj = cls.__new__(cls)
        obj.nvars = nvars
        obj.terms = terms
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, nvars: int) -> "LaurentPoly":
        return cls(nvars)

    @classmethod
    def const(cls, nvars: int, c: Rational = 1) -> "LaurentPoly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def monomial(cls, nvars: int, exponent: Sequence[int], c: Rational = 1) -> "LaurentPoly":
        return cls(nvars, {tuple(exponent): c})

    @classmethod
    def var(cls, nvars: int, k: int, power: int = 1) -> "LaurentPoly":
        """The monomial t_k**power (k is 1-based)."""
        if not 1 <= k <= nvars:
            raise IndexError(f"variable index {k} out of range 1..{nvars}")
        exp = [0] * nvars
        exp[k - 1] = power
        return cls(nvars, {tuple(exp): 1})

    # -- predicates ---------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, Rational):
            return self == LaurentPoly.const(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            if other.nvars != self.nvars:
                raise ValueError(
                    f"variable-count mismatch: {self.nvars} vs {other.nvars}")
            return other
        if isinstance(other, Rational) and not isinstance(other, bool):
            return LaurentPoly.const(self.nvars, other)
        raise TypeError(f"cannot combine LaurentPoly with {type(other).__name__}")

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self.terms)
        for exp, c in other.terms.items():
            s = out.get(exp, 0) + c
            if s == 0:
                out.pop(exp, None)
            else:
                out[exp] = _canon(s)
        return LaurentPoly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return LaurentPoly._raw(self.nvars, {e: _canon(c) for e, c in out.items() if c != 0})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            if len(self.terms) != 1:
                raise ValueError("only monomials can be inverted in the Laurent ring")
            (exp, c), = self.terms.items()
            inv = LaurentPoly._raw(self.nvars, {tuple(-e for e in exp): _canon(Fraction(1) / c)})
            return inv ** (-k)
        result = LaurentPoly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- evaluation ---------------------------------------------------
    def specialize(self, alpha: Sequence[complex]) -> complex:
        return lp_specialize(self, alpha)

    def degree_bounds(self):
        if not self.terms:
            return None
        cols = list(zip(*self.terms))
        return [(min(c), max(c)) for c in cols]

    # -- display / serialization --------------------------------------
    def to_dict(self) -> dict:
        return {
            "nvars": self.nvars,
            "terms": [
                {"exp": list(e), "coef": _coef_str(c)}
                for e, c in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "LaurentPoly":
        return cls(data["nvars"], {tuple(t["exp"]): Fraction(t["coef"]) for t in data["terms"]})

    def __repr__(self):
        return f"LaurentPoly({self.nvars}, {self!s})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exp, c in sorted(self.terms.items(), key=lambda kv: (sum(abs(e) for e in kv[0]), kv[0])):
            mono = "*".join(
                f"t{k + 1}" if e == 1 else f"t{k + 1}^{e}"
                for k, e in enumerate(exp) if e != 0)
            if not mono:
                parts.append(_coef_str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{_coef_str(c)}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def _coef_str(c) -> str:
    return str(c)


def lp_arith(a: LaurentPoly, b: LaurentPoly, op: str) -> LaurentPoly:
    if a.nvars != b.nvars:
        raise ValueError(f"variable-count mismatch: {a.nvars} vs {b.nvars}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def lp_specialize(p: LaurentPoly, alpha: Sequence[complex]) -> complex:
    """Evaluate ``p`` at t_j = alpha_j in complex double precision."""
    alpha = [complex(a) for a in alpha]
    if len(alpha) != p.nvars:
        raise ValueError(f"need {p.nvars} specialization values, got {len(alpha)}")
    if any(a == 0 for a in alpha):
        raise ValueError("specialization values must be nonzero")
    total = 0j
    for exp, c in p.terms.items():
        term = complex(c)
        for a, e in zip(alpha, exp):
            if e:
                term *= a ** e
        total += term
    return total


class LaurentMatrix:
    """Dense matrix with LaurentPoly entries sharing ``nvars``."""

    __slots__ = ("nvars", "rows", "cols", "entries")

    def __init__(self, nvars: int, entries: Sequence[Sequence[LaurentPoly]]):
        self.nvars = nvars
        self.entries = tuple(tuple(row) for row in entries)
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.rows else 0
        for row in self.entries:
            if len(row) != self.cols:
                raise ValueError("ragged matrix")
            for p in row:
                if p.nvars != nvars:
                    raise ValueError("all entries must share nvars")

    @classmethod
    def identity(cls, nvars: int, size: int) -> "LaurentMatrix":
        one, zero = LaurentPoly.const(nvars, 1), LaurentPoly.zero(nvars)
        return cls(nvars, [[one if i == j else zero for j in range(size)] for i in range(size)])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        if not isinstance(other, LaurentMatrix):
            return NotImplemented
        return self.nvars == other.nvars and self.entries == other.entries

    def __hash__(self):
        return hash((self.nvars, self.entries))

    def __matmul__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        zero = LaurentPoly.zero(self.nvars)
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = zero
                for k in range(self.cols):
                    a, b = self.entries[i][k], other.entries[k][j]
                    if a.terms and b.terms:
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return LaurentMatrix(self.nvars, out)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def block(self, nrows: int, ncols: int) -> "LaurentMatrix":
        return LaurentMatrix(self.nvars, [row[:ncols] for row in self.entries[:nrows]])

    def specialize(self, alpha: Sequence[complex]) -> np.ndarray:
        return np.array([[lp_specialize(p, alpha) for p in row] for row in self.entries],
                        dtype=complex)

    def to_dict(self) -> dict:
        return {
            "nvars": self.nvars,
            "variables": [f"t{k + 1}" for k in range(self.nvars)],
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[p.to_dict()["terms"] for p in row] for row in self.entries],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "LaurentMatrix":
        n = data["nvars"]
        return cls(n, [[LaurentPoly.from_dict({"nvars": n, "terms": cell}) for cell in row]
                       for row in data["entries"]])

    def __str__(self):
        return "\n".join("[ " + " , ".join(str(p) for p in row) + " ]" for row in self.entries)


# ---------------------------------------------------------------------------
# complex dense kernels
# ---------------------------------------------------------------------------

def condition_number(a: np.ndarray) -> float:
    s = np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False)
    if s[-1] == 0:
        return np.inf
    return float(s[0] / s[-1])


def mat_ops(a: np.ndarray, b: np.ndarray | None = None, op: str = "mul") -> np.ndarray:
    """mul / add / inverse / solve on complex matrices.

    ``solve`` returns X with X @ A = B (row-vector convention, matching the
    rest of the package), i.e. X = B A^{-1}.
    """
    a = np.asarray(a, dtype=complex)
    if op == "inverse":
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"inverse needs a square matrix, got {a.shape}")
        if condition_number(a) > SINGULAR_COND:
            raise SingularMatrixError("matrix is singular to tolerance")
        return np.linalg.inv(a)
    b = np.asarray(b, dtype=complex)
    if op == "mul":
        if a.shape[-1] != b.shape[0]:
            raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
        return a @ b
    if op == "add":
        if a.shape != b.shape:
            raise ValueError(f"shape mismatch {a.shape} + {b.shape}")
        return a + b
    if op == "solve":
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"solve needs a square matrix, got {a.shape}")
        if b.shape[-1] != a.shape[0]:
            raise ValueError(f"shape mismatch {b.shape} vs {a.shape}")
        if condition_number(a) > SINGULAR_COND:
            raise SingularMatrixError("matrix is singular to tolerance")
        return np.linalg.solve(a.T, b.T).T
    raise ValueError(f"unknown op {op!r}")


def eigenvalues(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("eigenvalues need a square matrix")
    if a.shape[0] > MAX_EIG_DIM:
        raise ValueError(f"dimension {a.shape[0]} exceeds limit {MAX_EIG_DIM}")
    return np.linalg.eigvals(a)


def _phase_fixed(v: np.ndarray) -> np.ndarray:
    # make the largest entry positive real so results are reproducible
    ph = v[np.argmax(np.abs(v))]
    return v * (abs(ph) / ph)


def find_intertwiner(pairs: Iterable[tuple[np.ndarray, np.ndarray]]):
    """Best X with A_k X = X B_k for all pairs, in the least-squares sense.

    Returns ``(X, residual)`` where X has unit Frobenius norm and
    ``residual = max_k ||A_k X - X B_k||_2``.  Returns ``None`` for an empty
    input.  Deciding whether X witnesses an equivalence (residual small,
    X well conditioned) is left to the caller.
    """
    pairs = [(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)) for a, b in pairs]
    if not pairs:
        return None
    d = pairs[0][0].shape[0]
    for a, b in pairs:
        if a.shape != (d, d) or b.shape != (d, d):
            raise ValueError("all matrices must be square of one common size")
    eye = np.eye(d)
    blocks = []
    for a, b in pairs:
        # vec(A X - X B) = (I (x) A - B^T (x) I) vec(X), column-major vec
        op = np.kron(eye, a) - np.kron(b.T, eye)
        scale = max(np.linalg.norm(a, 2), np.linalg.norm(b, 2), 1.0)
        blocks.append(op / scale)
    stacked = np.vstack(blocks)
    _, s, vh = np.linalg.svd(stacked)
    # near-null space; when it has dimension > 1 (commuting data) pick the
    # best-conditioned of a few deterministic candidates inside it
    cut = max(10.0 * s[-1], 1e-10 * s[0])
    null = vh[s <= cut].conj()
    candidates = [null[-1], null.T @ (null.conj() @ np.eye(d).ravel(order="F"))]
    if len(null) > 1:
        candidates.append(sum(_phase_fixed(v) for v in null))
    best, best_cond = None, np.inf
    for c in candidates:
        nrm = np.linalg.norm(c)
        if nrm < 1e-8:
            continue
        x = _phase_fixed(c / nrm).reshape((d, d), order="F")
        cond = condition_number(x)
        if best is None or cond < best_cond * (1 - 1e-9):
            best, best_cond = x, cond
    x = best / np.linalg.norm(best)
    residual = max(np.linalg.norm(a @ x - x @ b, 2) for a, b in pairs)
    return x, float(residual)


def intertwiner_residuals(pairs: Iterable[tuple[np.ndarray, np.ndarray]], x: np.ndarray) -> tuple[float, float]:
    """(absolute, relative) residuals of a candidate intertwiner.

    The relative residual divides each ||A_k X - X B_k|| by
    max(||A_k||, ||B_k||, 1), so it does not grow with the size of the
    matrix entries (monodromy eigenvalues such as exp(6 pi) are routine).
    """
    x = np.asarray(x, dtype=complex)
    absolute, relative = 0.0, 0.0
    for a, b in pairs:
        a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
        r = float(np.linalg.norm(a @ x - x @ b, 2))
        scale = max(np.linalg.norm(a, 2), np.linalg.norm(b, 2), 1.0)
        absolute = max(absolute, r)
        relative = max(relative, r / scale)
    return absolute, relative
