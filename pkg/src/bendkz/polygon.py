"""Polygon linkages in R^3, bending Hamiltonians and the tangent model at
degenerate (collinear) polygons.

Edge indices are 1-based throughout, matching the pair labels (i, j) used in
:mod:`bendkz.kz`.  Tangent vectors are stored as ``(n, 3)`` arrays; linear
maps on them act on the row-major flattening (length ``3n``).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .kz import jp_matrix

EDGE_TOL = 1e-10
DEGENERATE_TOL = 1e-10
RANK_TOL = 1e-8


class NonDegenerateError(ValueError):
    """Raised when an operation needs a collinear (degenerate) polygon."""


class ClosureError(ValueError):
    pass


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrientationVector:
    signs: tuple[int, ...]

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if any(s not in (1, -1) for s in signs):
            raise ValueError(f"orientation entries must be +1 or -1, got {signs}")
        object.__setattr__(self, "signs", signs)

    @classmethod
    def parse(cls, text: str) -> "OrientationVector":
        """Accepts '+,+,-', '++-' or '1,1,-1'."""
        text = text.replace(" ", "")
        parts = text.split(",") if "," in text else list(text)
        table = {"+": 1, "-": -1, "+1": 1, "-1": -1, "1": 1}
        try:
            return cls(tuple(table[p] for p in parts if p))
        except KeyError as exc:
            raise ValueError(f"cannot parse orientation {text!r}") from exc

    @property
    def n(self) -> int:
        return len(self.signs)

    def array(self) -> np.ndarray:
        return np.array(self.signs, dtype=float)

    def __str__(self):
        return "(" + ",".join("+" if s > 0 else "-" for s in self.signs) + ")"


def _signs(eps) -> np.ndarray:
    if isinstance(eps, OrientationVector):
        return eps.array()
    return OrientationVector(tuple(eps)).array()


@dataclass(frozen=True, eq=False)
class LinkageConfig:
    """Edges e_1..e_n with |e_k| = r_k; ``closed`` marks a point of M~_r."""

    edges: np.ndarray
    radii: np.ndarray
    closed: bool = False

    def __post_init__(self):
        e = np.array(self.edges, dtype=float)
        r = np.array(self.radii, dtype=float)
        if e.ndim != 2 or e.shape[1] != 3:
            raise ValueError("edges must be an (n, 3) array")
        if r.shape != (e.shape[0],):
            raise ValueError("need one radius per edge")
        if np.any(r <= 0):
            raise ValueError("radii must be positive")
        if np.any(np.abs(np.linalg.norm(e, axis=1) - r) > EDGE_TOL * np.maximum(r, 1.0)):
            raise ValueError("edge lengths do not match radii")
        if self.closed and np.linalg.norm(e.sum(axis=0)) > EDGE_TOL * max(r.max(), 1.0):
            raise ClosureError("closed flag set but edges do not sum to zero")
        e.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "edges", e)
        object.__setattr__(self, "radii", r)

    @classmethod
    def from_edges(cls, edges, closed: bool | None = None) -> "LinkageConfig":
        e = np.asarray(edges, dtype=float)
        r = np.linalg.norm(e, axis=1)
        if closed is None:
            closed = bool(np.linalg.norm(e.sum(axis=0)) <= EDGE_TOL * max(r.max(), 1.0))
        return cls(e, r, closed)

    @property
    def n(self) -> int:
        return self.edges.shape[0]

    def edge(self, k: int) -> np.ndarray:
        return self.edges[k - 1]

    def to_dict(self) -> dict:
        return {"n": self.n, "radii": [float(x) for x in self.radii],
                "edges": [[float(x) for x in row] for row in self.edges],
                "closed": bool(self.closed)}

    @classmethod
    def from_dict(cls, data: dict) -> "LinkageConfig":
        cfg = cls(np.array(data["edges"], dtype=float), np.array(data["radii"], dtype=float),
                  bool(data.get("closed", False)))
        if "n" in data and int(data["n"]) != cfg.n:
            raise ValueError("edge count does not match n")
        return cfg


@dataclass(frozen=True, eq=False)
class TangentVector:
    deltas: np.ndarray

    def __post_init__(self):
        d = np.array(self.deltas, dtype=float)
        if d.ndim != 2 or d.shape[1] != 3:
            raise ValueError("deltas must be an (n, 3) array")
        d.setflags(write=False)
        object.__setattr__(self, "deltas", d)

    @classmethod
    def at(cls, e: LinkageConfig, deltas) -> "TangentVector":
        """Tangent vector anchored at ``e``; checks tangency to the spheres."""
        t = cls(deltas)
        if t.n != e.n:
            raise ValueError("size mismatch")
        dots = np.abs(np.einsum("ij,ij->i", t.deltas, e.edges))
        if np.any(dots > EDGE_TOL * e.radii * np.maximum(np.linalg.norm(t.deltas, axis=1), 1.0)):
            raise ValueError("deltas are not tangent to the edge spheres")
        return t

    @property
    def n(self) -> int:
        return self.deltas.shape[0]

    def flat(self) -> np.ndarray:
        return self.deltas.reshape(-1)

    def total(self) -> np.ndarray:
        return self.deltas.sum(axis=0)


def random_config(n: int, rng: np.random.Generator, closed: bool = True) -> LinkageConfig:
    e = rng.normal(size=(n, 3))
    if closed:
        e -= e.mean(axis=0)
    return LinkageConfig.from_edges(e, closed=closed)


# ---------------------------------------------------------------------------
# bending Hamiltonians
# ---------------------------------------------------------------------------

def _index_set(I: Iterable[int], n: int) -> list[int]:
    idx = sorted(set(int(i) for i in I))
    for i in idx:
        if not 1 <= i <= n:
            raise IndexError(f"edge index {i} out of range 1..{n}")
    return idx


def partial_sum(e: LinkageConfig, I: Iterable[int]) -> np.ndarray:
    idx = _index_set(I, e.n)
    if not idx:
        return np.zeros(3)
    return e.edges[[i - 1 for i in idx]].sum(axis=0)


def bending_potential(e: LinkageConfig, I: Iterable[int]) -> float:
    """f_I(e) = |sum_{i in I} e_i|^2"""
    s = partial_sum(e, I)
    return float(s @ s)


def bending_field(e: LinkageConfig, I: Iterable[int]) -> TangentVector:
    """delta_i = e_I x e_i for i in I, zero elsewhere."""
    idx = _index_set(I, e.n)
    s = partial_sum(e, idx)
    d = np.zeros_like(e.edges)
    for i in idx:
        d[i - 1] = np.cross(s, e.edges[i - 1])
    return TangentVector(d)


def rotation_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues: rotation by ``angle`` about the unit vector ``axis``."""
    k = np.asarray(axis, dtype=float)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * kx + (1 - np.cos(angle)) * (kx @ kx)


def bending_flow(e: LinkageConfig, I: Iterable[int], t: float) -> LinkageConfig:
    """exp(t ad e_I) applied to the edges in I; the other edges stay put."""
    idx = _index_set(I, e.n)
    s = partial_sum(e, idx)
    norm = np.linalg.norm(s)
    if norm == 0 or t == 0:
        return e
    rot = rotation_matrix(s / norm, t * norm)
    edges = e.edges.copy()
    for i in idx:
        edges[i - 1] = rot @ edges[i - 1]
    # rescale against rounding so |e_k| = r_k holds to the last bit we can get
    edges *= (e.radii / np.linalg.norm(edges, axis=1))[:, None]
    return LinkageConfig(edges, e.radii, closed=e.closed)


def flow_trajectory_csv(e: LinkageConfig, I: Iterable[int], times: Sequence[float]) -> str:
    """Bending-flow samples as CSV rows (t, edge, x, y, z, f_I)."""
    idx = _index_set(I, e.n)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "edge", "x", "y", "z", "f_I"])
    for t in times:
        cur = bending_flow(e, idx, float(t))
        f = bending_potential(cur, idx)
        for k, v in enumerate(cur.edges, start=1):
            w.writerow([repr(float(t)), k, repr(float(v[0])), repr(float(v[1])),
                        repr(float(v[2])), repr(f)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Poisson brackets on prod S^2(r_k)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Potential:
    """Linear combination of f_I, g_ij = e_i.e_j and h_ijk = e_i.(e_j x e_k).

    A ``callable`` potential carries no closed-form gradient and is
    differentiated numerically.
    """

    terms: tuple[tuple[float, str, tuple[int, ...]], ...] = ()
    fn: Callable[[np.ndarray], float] | None = field(default=None, compare=False)

    @classmethod
    def f(cls, *I: int) -> "Potential":
        return cls(((1.0, "f", tuple(I)),))

    @classmethod
    def g(cls, i: int, j: int) -> "Potential":
        return cls(((1.0, "g", (i, j)),))

    @classmethod
    def h(cls, i: int, j: int, k: int) -> "Potential":
        return cls(((1.0, "h", (i, j, k)),))

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], float]) -> "Potential":
        return cls((), fn)

    def _combine(self, other: "Potential", sign: float) -> "Potential":
        if self.fn is not None or other.fn is not None:
            a, b = self, other
            return Potential.from_callable(lambda x: a.value_at(x) + sign * b.value_at(x))
        return Potential(self.terms + tuple((sign * c, k, i) for c, k, i in other.terms))

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, c: float):
        if self.fn is not None:
            a = self
            return Potential.from_callable(lambda x: c * a.value_at(x))
        return Potential(tuple((c * a, k, i) for a, k, i in self.terms))

    __rmul__ = __mul__

    @property
    def analytic(self) -> bool:
        return self.fn is None

    def value_at(self, edges: np.ndarray) -> float:
        if self.fn is not None:
            return float(self.fn(edges))
        total = 0.0
        for c, kind, idx in self.terms:
            ix = [i - 1 for i in idx]
            if kind == "f":
                s = edges[ix].sum(axis=0) if ix else np.zeros(3)
                total += c * float(s @ s)
            elif kind == "g":
                total += c * float(edges[ix[0]] @ edges[ix[1]])
            else:
                total += c * float(edges[ix[0]] @ np.cross(edges[ix[1]], edges[ix[2]]))
        return total

    def value(self, e: LinkageConfig) -> float:
        return self.value_at(e.edges)

    def gradient(self, e: LinkageConfig) -> np.ndarray:
        """Ambient gradient, shape (n, 3)."""
        x = e.edges
        if self.fn is not None:
            return _fd_gradient(self.value_at, x, e.radii)
        for _, _, idx in self.terms:
            _index_set(idx, e.n)
        grad = np.zeros_like(x)
        for c, kind, idx in self.terms:
            ix = [i - 1 for i in idx]
            if kind == "f":
                s = x[ix].sum(axis=0) if ix else np.zeros(3)
                for i in set(ix):
                    grad[i] += 2 * c * s
            elif kind == "g":
                i, j = ix
                grad[i] += c * x[j]
                grad[j] += c * x[i]
            else:
                i, j, k = ix
                grad[i] += c * np.cross(x[j], x[k])
                grad[j] += c * np.cross(x[k], x[i])
                grad[k] += c * np.cross(x[i], x[j])
        return grad


def _fd_gradient(fn, x: np.ndarray, radii: np.ndarray) -> np.ndarray:
    grad = np.zeros_like(x)
    for k in range(x.shape[0]):
        h = 1e-6 * radii[k]
        for a in range(3):
            xp, xm = x.copy(), x.copy()
            xp[k, a] += h
            xm[k, a] -= h
            grad[k, a] = (fn(xp) - fn(xm)) / (2 * h)
    return grad


def poisson_bracket(F: Potential, G: Potential, e: LinkageConfig) -> float:
    """{F, G}(e) = sum_k e_k . (grad_k F x grad_k G)"""
    gf, gg = F.gradient(e), G.gradient(e)
    return float(np.einsum("ij,ij->", e.edges, np.cross(gf, gg)))


# ---------------------------------------------------------------------------
# degenerate polygons and the linearization
# ---------------------------------------------------------------------------

def _unit(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    norm = np.linalg.norm(u)
    if u.shape != (3,) or abs(norm - 1) > 1e-12:
        raise ValueError("direction u must be a unit 3-vector")
    return u / norm


def degenerate_config(eps, r: Sequence[float], u=(0.0, 0.0, 1.0)) -> LinkageConfig:
    """e = (r_1 eps_1 u, ..., r_n eps_n u)"""
    s = _signs(eps)
    r = np.asarray(r, dtype=float)
    if s.shape != r.shape:
        raise ValueError("eps and r must have equal length")
    if np.any(r <= 0):
        raise ValueError("radii must be positive")
    if abs(float(s @ r)) > 1e-12 * max(1.0, r.max()) * len(r):
        raise ClosureError(f"sum eps_j r_j = {float(s @ r)} is not zero")
    u = _unit(u)
    return LinkageConfig(np.outer(s * r, u), r, closed=True)


def is_degenerate(e: LinkageConfig) -> bool:
    for i in range(e.n):
        for j in range(i + 1, e.n):
            if np.linalg.norm(np.cross(e.edges[i], e.edges[j])) >= DEGENERATE_TOL * e.radii[i] * e.radii[j]:
                return False
    return True


def degenerate_data(e: LinkageConfig, u=None) -> tuple[np.ndarray, np.ndarray]:
    """(u, eps) with e_k = eps_k r_k u; u defaults to e_1 / r_1."""
    if not is_degenerate(e):
        raise NonDegenerateError("configuration is not collinear")
    u = e.edges[0] / e.radii[0] if u is None else _unit(u)
    eps = np.sign(e.edges @ u)
    if np.any(eps == 0) or np.linalg.norm(e.edges - np.outer(eps * e.radii, u)) > 1e-8 * e.radii.max():
        raise NonDegenerateError("edges are not parallel to u")
    return u, eps


def _cross_matrix(u: np.ndarray) -> np.ndarray:
    return np.array([[0, -u[2], u[1]], [u[2], 0, -u[0]], [-u[1], u[0], 0]])


def linearization_closed(e_deg: LinkageConfig, i: int, j: int, u=None) -> np.ndarray:
    """Linearization of the bending field B_ij at a degenerate polygon.

    Returns the 3n x 3n real matrix of
    delta'_i =  eps_j r_j (u x delta_i) - eps_i r_i (u x delta_j),
    delta'_j = -eps_j r_j (u x delta_i) + eps_i r_i (u x delta_j).
    """
    u, eps = degenerate_data(e_deg, u)
    n = e_deg.n
    _pair_check(i, j, n)
    a_i, a_j = eps[i - 1] * e_deg.radii[i - 1], eps[j - 1] * e_deg.radii[j - 1]
    ux = _cross_matrix(u)
    m = np.zeros((3 * n, 3 * n))
    bi, bj = slice(3 * (i - 1), 3 * i), slice(3 * (j - 1), 3 * j)
    m[bi, bi] = a_j * ux
    m[bi, bj] = -a_i * ux
    m[bj, bi] = -a_j * ux
    m[bj, bj] = a_i * ux
    return m


def _pair_check(i: int, j: int, n: int):
    if not (1 <= i <= n and 1 <= j <= n and i != j):
        raise IndexError(f"need distinct edge indices in 1..{n}, got ({i}, {j})")


def sphere_frame(u) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal (f1, f2) spanning u-perp with f1 x f2 = u; (e_x, e_y) for u = e_z."""
    u = _unit(u)
    a = np.eye(3)[int(np.argmin(np.abs(u)))] if abs(u[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    f1 = a - (a @ u) * u
    f1 /= np.linalg.norm(f1)
    f2 = np.cross(u, f1)
    return f1, f2


def tangent_basis(e: LinkageConfig) -> np.ndarray:
    """3n x 2n orthonormal basis of T_e(prod S^2(r_k)), two columns per edge."""
    n = e.n
    basis = np.zeros((3 * n, 2 * n))
    for k in range(n):
        f1, f2 = sphere_frame(e.edges[k] / e.radii[k])
        basis[3 * k:3 * k + 3, 2 * k] = f1
        basis[3 * k:3 * k + 3, 2 * k + 1] = f2
    return basis


def _retract(x: np.ndarray, radii: np.ndarray) -> np.ndarray:
    return x * (radii / np.linalg.norm(x, axis=1))[:, None]


def _pair_field(x: np.ndarray, i: int, j: int) -> np.ndarray:
    out = np.zeros_like(x)
    out[i - 1] = np.cross(x[j - 1], x[i - 1])
    out[j - 1] = np.cross(x[i - 1], x[j - 1])
    return out.reshape(-1)


def linearization_fd(e_deg: LinkageConfig, i: int, j: int, h: float = 1e-5,
                     basis: np.ndarray | None = None) -> np.ndarray:
    """Central-difference derivative of B_ij along a tangent basis.

    Returns the matrix in ``basis`` coordinates (default :func:`tangent_basis`);
    compare with ``basis.T @ linearization_closed(...) @ basis``.
    """
    if not 1e-6 <= h <= 1e-3:
        raise ValueError(f"step h={h} outside [1e-6, 1e-3]")
    n = e_deg.n
    _pair_check(i, j, n)
    if not is_degenerate(e_deg):
        raise NonDegenerateError("bending field does not vanish at a non-degenerate polygon")
    basis = tangent_basis(e_deg) if basis is None else np.asarray(basis, dtype=float)
    x0 = e_deg.edges
    cols = []
    for c in range(basis.shape[1]):
        d = basis[:, c].reshape(n, 3)
        fp = _pair_field(_retract(x0 + h * d, e_deg.radii), i, j)
        fm = _pair_field(_retract(x0 - h * d, e_deg.radii), i, j)
        cols.append(basis.T @ ((fp - fm) / (2 * h)))
    return np.column_stack(cols)


# ---------------------------------------------------------------------------
# tangent model and the complex coordinates psi
# ---------------------------------------------------------------------------

def _orthonormal_columns(a: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    rank = int(np.sum(s > tol * max(s.max(initial=0.0), 1.0)))
    return u[:, :rank]


def _null_space(a: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    _, s, vh = np.linalg.svd(a)
    rank = int(np.sum(s > tol * max(s.max(initial=0.0), 1.0)))
    return vh[rank:].T


@dataclass(frozen=True, eq=False)
class TangentModel:
    """Linear-algebra model of T_e at a degenerate polygon.

    All bases are real orthonormal columns in R^{3n}.  ``J`` acts on R^{3n}
    by delta_k -> u x delta_k.  ``psi`` is the complex n x 3n matrix with
    psi(delta)_k = delta_k . f1 + i delta_k . f2, the coordinate along
    f1 - i f2 (the +i eigenvector of u x .).
    """

    e: LinkageConfig
    u: np.ndarray
    eps: np.ndarray
    frame: tuple[np.ndarray, np.ndarray]
    tangent: np.ndarray
    closed_tangent: np.ndarray
    v_e: np.ndarray
    quotient: np.ndarray
    J: np.ndarray
    psi: np.ndarray

    @property
    def n(self) -> int:
        return self.e.n

    def dims(self) -> dict:
        return {"V_e": self.v_e.shape[1], "T_tilde_M": self.closed_tangent.shape[1],
                "quotient": self.quotient.shape[1], "T_tilde_N": self.tangent.shape[1]}

    def psi_inverse(self, z: np.ndarray) -> np.ndarray:
        """Real 3n-vector with psi(delta) = z."""
        z = np.asarray(z, dtype=complex)
        f1, f2 = self.frame
        return (np.outer(z.real, f1) + np.outer(z.imag, f2)).reshape(-1)

    def j_squared_defect(self) -> float:
        t = self.tangent
        return float(np.linalg.norm(t.T @ self.J @ self.J @ t + np.eye(t.shape[1])))

    def psi_j_defect(self) -> float:
        """|psi J - i psi| on T_e"""
        return float(np.linalg.norm((self.psi @ self.J - 1j * self.psi) @ self.tangent))

    def v_line(self) -> np.ndarray:
        return self.eps * self.e.radii


def tangent_model(e_deg: LinkageConfig, u=None) -> TangentModel:
    u, eps = degenerate_data(e_deg, u)
    n = e_deg.n
    f1, f2 = sphere_frame(u)
    tangent = np.zeros((3 * n, 2 * n))
    for k in range(n):
        tangent[3 * k:3 * k + 3, 2 * k] = f1
        tangent[3 * k:3 * k + 3, 2 * k + 1] = f2
    # sum of deltas as a map R^{2n} -> R^3
    total = np.hstack([np.eye(3)] * n) @ tangent
    closed_tangent = tangent @ _null_space(total)
    # V_e: delta_k = e_k x v for v in R^3
    gen = np.vstack([_cross_matrix(e_deg.edges[k]) for k in range(n)])
    v_e = _orthonormal_columns(gen)
    # orthogonal complement of V_e inside T(M~)
    proj = closed_tangent.T @ v_e
    quotient = closed_tangent @ _null_space(proj.T)
    J = np.kron(np.eye(n), _cross_matrix(u))
    psi = np.kron(np.eye(n), (f1 + 1j * f2)[None, :])
    return TangentModel(e_deg, u, eps, (f1, f2), tangent, closed_tangent, v_e, quotient, J, psi)


def theorem_a_matrices(eps, r: Sequence[float], u=(0.0, 0.0, 1.0)) -> dict:
    """Linearized bending fields written in the coordinates psi.

    Returns {(i, j): M} with psi(A_ij delta) = psi(delta) @ M, i.e. the row
    k of M is psi(A_ij psi^{-1}(e_k)).  Complex linearity is checked on the
    way.
    """
    e = degenerate_config(eps, r, u)
    model = tangent_model(e, u)
    n = e.n
    out = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            a = linearization_closed(e, i, j, model.u)
            rows = []
            for k in range(n):
                basis = np.zeros(n, dtype=complex)
                basis[k] = 1.0
                row = model.psi @ a @ model.psi_inverse(basis)
                row_i = model.psi @ a @ model.psi_inverse(1j * basis)
                if np.linalg.norm(row_i - 1j * row) > 1e-12 * max(1.0, np.linalg.norm(row)):
                    raise AssertionError("linearization is not complex linear in psi")
                rows.append(row)
            out[(i, j)] = np.array(rows)
    return out


def theorem_a_deviation(eps, r: Sequence[float]) -> float:
    """max over pairs of |psi A_ij psi^-1 - i J_ij(eps r)|_2"""
    lam = _signs(eps) * np.asarray(r, dtype=float)
    mats = theorem_a_matrices(eps, r)
    return max(float(np.linalg.norm(m - 1j * jp_matrix(i, j, lam), 2)) for (i, j), m in mats.items())
