"""Free-group words, the Artin action of braids on F_n, and characters.

Letters are ``(index, exponent)`` pairs with 1-based generator indices and
exponent +1 or -1.  The Artin generator sigma_k acts on F_n by the
substitution

    x_k     -> x_k x_{k+1} x_k^{-1}
    x_{k+1} -> x_k

and braids act on the *right*: for a braid word s_1 s_2 ... s_m the
substitution of s_1 is applied first, so
``braid_act(b1 * b2, w) == braid_act(b2, braid_act(b1, w))``.
With this order the Fox-calculus Gassner matrices are multiplicative.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

Letter = tuple[int, int]


def _check_letters(letters: Iterable[Letter], bound: int, what: str) -> list[Letter]:
    out = []
    for k, e in letters:
        k, e = int(k), int(e)
        if e not in (1, -1):
            raise ValueError(f"exponent must be +1 or -1, got {e}")
        if not 1 <= k <= bound:
            raise IndexError(f"{what} index {k} out of range 1..{bound}")
        out.append((k, e))
    return out


def _free_reduce(letters: Iterable[Letter]) -> tuple[Letter, ...]:
    stack: list[Letter] = []
    for k, e in letters:
        if stack and stack[-1][0] == k and stack[-1][1] == -e:
            stack.pop()
        else:
            stack.append((k, e))
    return tuple(stack)


@dataclass(frozen=True)
class Word:
    """Freely reduced element of the free group F_n."""

    n: int
    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        reduced = _free_reduce(_check_letters(self.letters, self.n, "generator"))
        object.__setattr__(self, "letters", reduced)

    @classmethod
    def gen(cls, n: int, k: int, e: int = 1) -> "Word":
        return cls(n, ((k, e),))

    @classmethod
    def identity(cls, n: int) -> "Word":
        return cls(n, ())

    @classmethod
    def x_infinity(cls, n: int) -> "Word":
        """x_1 x_2 ... x_n"""
        return cls(n, tuple((k, 1) for k in range(1, n + 1)))

    def __mul__(self, other: "Word") -> "Word":
        if self.n != other.n:
            raise ValueError("rank mismatch")
        return Word(self.n, self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(self.n, tuple((k, -e) for k, e in reversed(self.letters)))

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        if not self.letters:
            return "1"
        return " ".join(f"x{k}" if e == 1 else f"x{k}^-1" for k, e in self.letters)


def word_reduce(raw: Iterable[Letter], n: int) -> Word:
    return Word(n, tuple(raw))


@dataclass(frozen=True)
class Braid:
    """Word in the Artin generators sigma_1..sigma_{n-1} (not normalized)."""

    n: int
    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("strand count must be positive")
        object.__setattr__(self, "letters",
                           tuple(_check_letters(self.letters, self.n - 1, "Artin generator")))

    def __mul__(self, other: "Braid") -> "Braid":
        if self.n != other.n:
            raise ValueError("strand-count mismatch")
        return Braid(self.n, self.letters + other.letters)

    def inverse(self) -> "Braid":
        return Braid(self.n, tuple((k, -e) for k, e in reversed(self.letters)))

    def mirror(self) -> "Braid":
        """Relabel sigma_k -> sigma_{n-k} (conjugation by the half twist)."""
        return Braid(self.n, tuple((self.n - k, e) for k, e in self.letters))

    def permutation(self) -> tuple[int, ...]:
        """Strand permutation as a tuple p with p[start] = end (0-based)."""
        perm = list(range(self.n))
        for k, _ in self.letters:
            perm[k - 1], perm[k] = perm[k], perm[k - 1]
        # perm[position] = strand now at that position
        out = [0] * self.n
        for pos, strand in enumerate(perm):
            out[strand] = pos
        return tuple(out)

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        if not self.letters:
            return "1"
        return " ".join(f"s{k}" if e == 1 else f"s{k}^-1" for k, e in self.letters)


def is_pure(b: Braid) -> bool:
    return b.permutation() == tuple(range(b.n))


def pure_braid_generator(i: int, j: int, n: int) -> Braid:
    """A_ij = (s_{j-1} ... s_{i+1}) s_i^2 (s_{i+1}^-1 ... s_{j-1}^-1)."""
    if not 1 <= i < j <= n:
        raise ValueError(f"need 1 <= i < j <= n, got i={i}, j={j}, n={n}")
    left = [(k, 1) for k in range(j - 1, i, -1)]
    right = [(k, -1) for k in range(i + 1, j)]
    return Braid(n, tuple(left + [(i, 1), (i, 1)] + right))


def pure_generators(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]


# ---------------------------------------------------------------------------
# action on F_n
# ---------------------------------------------------------------------------

def _images(n: int, k: int, sign: int) -> dict[int, tuple[Letter, ...]]:
    if sign == 1:
        return {k: ((k, 1), (k + 1, 1), (k, -1)), k + 1: ((k, 1),)}
    # inverse substitution: x_k -> x_{k+1}, x_{k+1} -> x_{k+1}^-1 x_k x_{k+1}
    return {k: ((k + 1, 1),), k + 1: ((k + 1, -1), (k, 1), (k + 1, 1))}


def _substitute(w: Word, images: dict[int, tuple[Letter, ...]]) -> Word:
    out: list[Letter] = []
    for g, e in w.letters:
        img = images.get(g)
        if img is None:
            out.append((g, e))
        elif e == 1:
            out.extend(img)
        else:
            out.extend((h, -f) for h, f in reversed(img))
    return Word(w.n, tuple(out))


def artin_act(k: int, sign: int, w: Word) -> Word:
    if w.n < 2 or not 1 <= k < w.n:
        raise IndexError(f"Artin generator index {k} out of range for n={w.n}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return _substitute(w, _images(w.n, k, sign))


def braid_act(b: Braid, w: Word) -> Word:
    """Image of w under the braid b (right action, first letter first)."""
    if b.n != w.n:
        raise ValueError(f"rank mismatch: braid on {b.n} strands, word in F_{w.n}")
    for k, e in b.letters:
        w = artin_act(k, e, w)
    return w


# ---------------------------------------------------------------------------
# abelianization and characters
# ---------------------------------------------------------------------------

def abelianize(w: Word) -> tuple[int, ...]:
    v = [0] * w.n
    for k, e in w.letters:
        v[k - 1] += e
    return tuple(v)


@dataclass(frozen=True)
class Character:
    """Homomorphism F_n -> C^*, given by its values on the generators."""

    n: int
    values: tuple[complex, ...]

    def __post_init__(self):
        vals = tuple(complex(v) for v in self.values)
        if len(vals) != self.n:
            raise ValueError("need one value per generator")
        if any(v == 0 for v in vals):
            raise ValueError("character values must be nonzero")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_lambda(cls, lam: Sequence[complex]) -> "Character":
        """chi(x_j) = exp(2 pi i lambda_j)"""
        lam = np.asarray(lam, dtype=complex)
        return cls(len(lam), tuple(np.exp(2j * np.pi * lam)))

    @property
    def admissible(self) -> bool:
        return all(abs(v - 1) > 1e-12 for v in self.values)


def char_eval(chi: Character, w: Word) -> complex:
    if chi.n != w.n:
        raise ValueError("rank mismatch")
    out = 1 + 0j
    for v, e in zip(chi.values, abelianize(w)):
        if e:
            out *= v ** e
    return out


# ---------------------------------------------------------------------------
# text syntax: "s1 s2^-1 s1", "A(1,3) A(2,3)^-1"
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(s)(\d+)|A\(\s*(\d+)\s*,\s*(\d+)\s*\))(?:\^(-?\d+))?\s*")


def parse_braid(text: str, n: int) -> Braid:
    letters: list[Letter] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse braid word at {text[pos:]!r}")
        power = int(m.group(5)) if m.group(5) else 1
        if m.group(1):
            piece = Braid(n, ((int(m.group(2)), 1),))
        else:
            piece = pure_braid_generator(int(m.group(3)), int(m.group(4)), n)
        if power < 0:
            piece, power = piece.inverse(), -power
        for _ in range(power):
            letters.extend(piece.letters)
        pos = m.end()
    return Braid(n, tuple(letters))


def random_pure_braid(n: int, length: int, rng: np.random.Generator) -> Braid:
    gens = pure_generators(n)
    b = Braid(n)
    for _ in range(length):
        i, j = gens[rng.integers(len(gens))]
        g = pure_braid_generator(i, j, n)
        b = b * (g if rng.integers(2) else g.inverse())
    return b
