"""Jordan-Pochhammer residues, the logarithmic flat connection and its monodromy.

Sections are *row* vectors F and are parallel when dF = F omega with

    omega = sum_{i<j} (dz_i - dz_j)/(z_i - z_j) (x) J_ij(lambda).

``transport`` returns the matrix T with F(end) = F(start) T.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .exactalg import eigenvalues


class ClearanceError(ValueError):
    """Punctures collide (or come too close) along a configuration path."""


class TransportError(RuntimeError):
    """Integrator failed on a path segment."""


MIN_GAP = 1e-9


# ---------------------------------------------------------------------------
# lambda and the Jordan-Pochhammer matrices
# ---------------------------------------------------------------------------

def _sum_tol(vals) -> float:
    # float rounding of sums like 1 + 1 + 1 - 1.5 - 1.5 scales with the entries
    return 1e-12 * max([1.0] + [abs(complex(v)) for v in vals]) * max(len(vals), 1)


@dataclass(frozen=True)
class LambdaVector:
    values: tuple
    sum_zero: bool = False

    def __post_init__(self):
        vals = tuple(self.values)
        if self.sum_zero and abs(sum(complex(v) for v in vals)) >= _sum_tol(vals):
            raise ValueError("lambda entries do not sum to zero")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_linkage(cls, eps: Sequence[int], r: Sequence[float]) -> "LambdaVector":
        """lambda_k = i eps_k r_k."""
        if len(eps) != len(r):
            raise ValueError("eps and r must have equal length")
        vals = tuple(1j * e * x for e, x in zip(eps, r))
        if any(v == 0 for v in vals):
            raise ValueError("linkage-derived lambda must be nonzero")
        return cls(vals, sum_zero=abs(sum(vals)) < _sum_tol(vals))

    @property
    def n(self) -> int:
        return len(self.values)

    def array(self) -> np.ndarray:
        return np.array([complex(v) for v in self.values])


def _as_values(lam):
    if isinstance(lam, LambdaVector):
        return lam.values
    return tuple(lam)


def jp_matrix(i: int, j: int, lam) -> np.ndarray:
    """J_ij(lambda); J_ii = 0 and J_ji = J_ij.

    Exact rational input (ints / Fractions) yields an object array.
    """
    vals = _as_values(lam)
    n = len(vals)
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"index out of range 1..{n}")
    exact = all(isinstance(v, (int, Fraction)) for v in vals)
    m = np.zeros((n, n), dtype=object if exact else complex)
    if exact:
        m[:] = 0
    if i == j:
        return m
    if i > j:
        i, j = j, i
    a, b = i - 1, j - 1
    m[a, a] = vals[b]
    m[a, b] = -vals[b]
    m[b, a] = -vals[a]
    m[b, b] = vals[a]
    return m


def jp_stack(lam) -> tuple[list[tuple[int, int]], np.ndarray]:
    vals = _as_values(lam)
    n = len(vals)
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    return pairs, np.array([jp_matrix(i, j, [complex(v) for v in vals]) for i, j in pairs])


def check_infinitesimal_braid(lam) -> dict:
    """Max entry of every infinitesimal-braid commutator.

    Both relation families are checked over all index choices.  With
    rational lambda the commutators are formed exactly and ``max_abs`` is
    the exact maximum.
    """
    vals = _as_values(lam)
    n = len(vals)
    mats = {(i, j): jp_matrix(i, j, vals) for i in range(1, n + 1) for j in range(1, n + 1)}
    exact = all(isinstance(v, (int, Fraction)) for v in vals)

    def comm(a, b):
        return a.dot(b) - b.dot(a)

    def size(m):
        return max((abs(x) for x in m.ravel()), default=0)

    worst_disjoint = 0
    worst_triangle = 0
    count = 0
    idx = range(1, n + 1)
    for i, j in itertools.combinations(idx, 2):
        for k, l in itertools.combinations(idx, 2):
            if {i, j} & {k, l}:
                continue
            worst_disjoint = max(worst_disjoint, size(comm(mats[i, j], mats[k, l])))
            count += 1
    for i, j, k in itertools.permutations(idx, 3):
        tri = mats[i, j] + mats[j, k] + mats[k, i]
        worst_triangle = max(worst_triangle, size(comm(mats[i, j], tri)))
        count += 1
    worst = max(worst_disjoint, worst_triangle)
    return {
        "n": n,
        "exact": exact,
        "relations_checked": count,
        "max_disjoint": worst_disjoint if exact else float(worst_disjoint),
        "max_triangle": worst_triangle if exact else float(worst_triangle),
        "max_abs": worst if exact else float(worst),
        "ok": worst == 0 if exact else float(worst) < 1e-12,
    }


def _check_distinct(z: np.ndarray, min_gap: float = MIN_GAP) -> float:
    gap = min_pairwise_gap(z)
    if gap <= min_gap:
        raise ClearanceError(f"punctures coincide (min gap {gap:.3g})")
    return gap


def min_pairwise_gap(z: np.ndarray) -> float:
    z = np.asarray(z, dtype=complex)
    if len(z) < 2:
        return math.inf
    d = np.abs(z[:, None] - z[None, :])
    d[np.diag_indices(len(z))] = np.inf
    return float(d.min())


def connection_matrix(z, zdot, lam) -> np.ndarray:
    """omega evaluated on the tangent vector zdot at z (an n x n matrix)."""
    z = np.asarray(z, dtype=complex)
    zdot = np.asarray(zdot, dtype=complex)
    _check_distinct(z)
    pairs, stack = jp_stack(lam)
    coef = np.array([(zdot[i - 1] - zdot[j - 1]) / (z[i - 1] - z[j - 1]) for i, j in pairs])
    return np.tensordot(coef, stack, axes=1)


def omega_apply(z, zdot, lam, v) -> np.ndarray:
    """Right-hand side of dF = F omega: the row v times omega(z)[zdot]."""
    return np.asarray(v, dtype=complex) @ connection_matrix(z, zdot, lam)


# ---------------------------------------------------------------------------
# configuration-space paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LineSegment:
    start: np.ndarray
    end: np.ndarray

    def pos(self, s: float) -> np.ndarray:
        return self.start + s * (self.end - self.start)

    def vel(self, s: float) -> np.ndarray:
        return self.end - self.start

    def reversed(self) -> "LineSegment":
        return LineSegment(self.end, self.start)

    def speed(self) -> float:
        return float(np.abs(self.end - self.start).max())


@dataclass(frozen=True)
class CircleSegment:
    """Coordinate ``index`` (0-based) runs along a circular arc; others frozen."""

    base: np.ndarray
    index: int
    center: complex
    radius: float
    theta0: float
    theta1: float

    def pos(self, s: float) -> np.ndarray:
        z = self.base.copy()
        th = self.theta0 + s * (self.theta1 - self.theta0)
        z[self.index] = self.center + self.radius * np.exp(1j * th)
        return z

    def vel(self, s: float) -> np.ndarray:
        v = np.zeros_like(self.base)
        th = self.theta0 + s * (self.theta1 - self.theta0)
        v[self.index] = 1j * self.radius * (self.theta1 - self.theta0) * np.exp(1j * th)
        return v

    def reversed(self) -> "CircleSegment":
        return CircleSegment(self.base, self.index, self.center, self.radius,
                             self.theta1, self.theta0)

    def speed(self) -> float:
        return abs(self.radius * (self.theta1 - self.theta0))


@dataclass(frozen=True)
class ConfigPath:
    segments: tuple = ()
    samples_per_segment: int = field(default=256, compare=False)

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ValueError("a path needs at least one segment")
        for a, b in zip(segs, segs[1:]):
            if np.abs(a.pos(1.0) - b.pos(0.0)).max() > 1e-12:
                raise ValueError("path segments are not contiguous")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def constant(cls, z) -> "ConfigPath":
        z = np.asarray(z, dtype=complex)
        return cls((LineSegment(z, z.copy()),))

    @classmethod
    def polyline(cls, points) -> "ConfigPath":
        pts = [np.asarray(p, dtype=complex) for p in points]
        return cls(tuple(LineSegment(a, b) for a, b in zip(pts, pts[1:])))

    @property
    def start(self) -> np.ndarray:
        return self.segments[0].pos(0.0)

    @property
    def end(self) -> np.ndarray:
        return self.segments[-1].pos(1.0)

    def __add__(self, other: "ConfigPath") -> "ConfigPath":
        return ConfigPath(self.segments + other.segments)

    def reversed(self) -> "ConfigPath":
        return ConfigPath(tuple(s.reversed() for s in reversed(self.segments)))

    def sample(self, per_segment: int | None = None):
        m = per_segment or self.samples_per_segment
        for seg in self.segments:
            for s in np.linspace(0.0, 1.0, m):
                yield seg.pos(s)

    def clearance(self) -> float:
        return min(min_pairwise_gap(z) for z in self.sample())

    def is_closed(self) -> bool:
        return bool(np.abs(self.start - self.end).max() < 1e-12)


def winding_number(path: ConfigPath, moving: int, center: int, per_segment: int = 512) -> float:
    """Winding of z_moving around z_center (1-based) by argument accumulation."""
    total = 0.0
    prev = None
    for z in path.sample(per_segment):
        w = z[moving - 1] - z[center - 1]
        if prev is not None:
            total += np.angle(w / prev)
        prev = w
    return total / (2 * np.pi)


def base_configuration(n: int) -> np.ndarray:
    return np.arange(n, dtype=float).astype(complex)


def pure_braid_loop(i: int, j: int, base=None, radius: float = 0.3) -> ConfigPath:
    """Loop in which z_j dips below the axis, runs left, circles z_i once ccw, returns.

    ``base`` must be real and increasing; ``radius`` is both the circle radius
    and the depth of the detour and has to stay below half the minimal gap.
    """
    if base is None:
        raise ValueError("base configuration required")
    base = np.asarray(base, dtype=complex)
    n = len(base)
    if not 1 <= i < j <= n:
        raise ValueError(f"need 1 <= i < j <= n, got ({i}, {j})")
    if np.abs(base.imag).max() > 0 or np.any(np.diff(base.real) <= 0):
        raise ValueError("base punctures must be real and increasing")
    gap = float(np.diff(base.real).min()) if n > 1 else math.inf
    if not 0 < radius < gap / 2:
        raise ClearanceError(f"radius {radius} must lie in (0, {gap / 2})")
    a, b = i - 1, j - 1
    zi, zj = base[a], base[b]

    def moved(w):
        z = base.copy()
        z[b] = w
        return z

    down = LineSegment(moved(zj), moved(zj - 1j * radius))
    left = LineSegment(moved(zj - 1j * radius), moved(zi - 1j * radius))
    circle = CircleSegment(moved(zi - 1j * radius), b, zi, radius, -np.pi / 2, 3 * np.pi / 2)
    out = ConfigPath((down, left, circle))
    back = ConfigPath((left.reversed(), down.reversed()))
    return out + back


# ---------------------------------------------------------------------------
# transport
# ---------------------------------------------------------------------------

def _transport_segment(seg, pairs, stack, n, tol, clearance, index):
    speed = seg.speed()
    eye = np.eye(n, dtype=complex)
    if speed == 0:
        return eye
    ii = np.array([p[0] - 1 for p in pairs])
    jj = np.array([p[1] - 1 for p in pairs])

    def rhs(s, y):
        z = seg.pos(s)
        v = seg.vel(s)
        coef = (v[ii] - v[jj]) / (z[ii] - z[jj])
        omega = np.tensordot(coef, stack, axes=1)
        return (y.reshape(n, n) @ omega).ravel()

    max_step = min(1.0, clearance / (10.0 * speed))
    sol = solve_ivp(rhs, (0.0, 1.0), eye.ravel(), method="DOP853",
                    rtol=tol, atol=tol, max_step=max_step)
    if sol.status != 0:
        raise TransportError(f"integration failed on segment {index} ({seg!r}): {sol.message}")
    return sol.y[:, -1].reshape(n, n)


def transport(path: ConfigPath, lam, tol: float = 1e-10) -> np.ndarray:
    """Fundamental solution T with F(end) = F(start) T along ``path``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    clearance = path.clearance()
    if clearance <= MIN_GAP:
        raise ClearanceError(f"path clearance {clearance:.3g} too small")
    pairs, stack = jp_stack(lam)
    n = stack.shape[1]
    total = np.eye(n, dtype=complex)
    for k, seg in enumerate(path.segments):
        total = total @ _transport_segment(seg, pairs, stack, n, tol, clearance, k)
    return total


# ---------------------------------------------------------------------------
# filtration C lambda < C^n_0 < C^n and the monodromy representation
# ---------------------------------------------------------------------------

def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v) > 1e-12 * np.abs(v).max()))
    return v * (abs(v[k]) / v[k])


def _orthonormal_complement(constraints: list[np.ndarray], n: int) -> np.ndarray:
    """Rows: Gram-Schmidt of e_1..e_n after projecting out ``constraints``."""
    basis: list[np.ndarray] = [c / np.linalg.norm(c) for c in constraints]
    # make constraints orthonormal first
    ortho: list[np.ndarray] = []
    for c in basis:
        w = c - sum((np.vdot(o, c) * o for o in ortho), np.zeros(n, dtype=complex))
        ortho.append(w / np.linalg.norm(w))
    out: list[np.ndarray] = []
    for k in range(n):
        w = np.eye(n, dtype=complex)[k]
        for o in ortho + out:
            w = w - np.vdot(o, w) * o
        if np.linalg.norm(w) > 1e-8:
            out.append(_fix_phase(w / np.linalg.norm(w)))
        if len(out) == n - len(ortho):
            break
    return np.array(out).reshape(len(out), n)


@dataclass(frozen=True)
class Filtration:
    n: int
    lam: np.ndarray
    basis_full: np.ndarray
    basis_zero_sum: np.ndarray
    basis_line: np.ndarray
    basis_quotient: np.ndarray

    def restrict_zero_sum(self, t: np.ndarray) -> np.ndarray:
        return self.basis_zero_sum @ t @ self.basis_zero_sum.conj().T

    def quotient(self, t: np.ndarray) -> np.ndarray:
        return self.basis_quotient @ t @ self.basis_quotient.conj().T

    def project_quotient(self, v: np.ndarray) -> np.ndarray:
        """Quotient coordinates of a row vector in C^n_0."""
        return np.asarray(v) @ self.basis_quotient.conj().T

    def zero_sum_defect(self, t: np.ndarray) -> float:
        b = self.basis_zero_sum
        return float(np.linalg.norm(b @ t - self.restrict_zero_sum(t) @ b))

    def line_defect(self, t: np.ndarray) -> float:
        lam = self.basis_line
        return float(np.linalg.norm(lam @ t - lam))


def filtration_basis(lam) -> Filtration:
    vals = np.array([complex(v) for v in _as_values(lam)])
    n = len(vals)
    if np.abs(vals).max() == 0:
        raise ValueError("lambda must be nonzero")
    if abs(vals.sum()) >= _sum_tol(vals):
        raise ValueError("lambda must sum to zero")
    ones = np.ones(n, dtype=complex)
    zero_sum = _orthonormal_complement([ones], n)
    quotient = _orthonormal_complement([ones, vals], n)
    return Filtration(n, vals, np.eye(n, dtype=complex), zero_sum, vals.copy(), quotient)


@dataclass
class GeneratorMonodromy:
    pair: tuple[int, int]
    full: np.ndarray
    zero_sum: np.ndarray
    quotient: np.ndarray
    zero_sum_defect: float
    line_defect: float


def monodromy_rep(lam, tol: float = 1e-10, radius: float = 0.3, base=None,
                  inverse_loops: bool = False) -> dict:
    """Transport around every A_ij loop; restrict to C^n_0 and project to W_lambda.

    With ``inverse_loops`` each loop is run backwards, giving rho(g) defined
    by continuation S(g^-1 z) = S(z) rho(g) (no numerical matrix inverse).
    """
    if isinstance(lam, LambdaVector) and not lam.sum_zero:
        raise ValueError("lambda must sum to zero")
    vals = [complex(v) for v in _as_values(lam)]
    n = len(vals)
    filt = filtration_basis(vals)
    base = base_configuration(n) if base is None else np.asarray(base, dtype=complex)
    out = {}
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            loop = pure_braid_loop(i, j, base, radius)
            t = transport(loop.reversed() if inverse_loops else loop, vals, tol)
            out[(i, j)] = GeneratorMonodromy(
                (i, j), t, filt.restrict_zero_sum(t), filt.quotient(t),
                filt.zero_sum_defect(t), filt.line_defect(t))
    return out


def local_monodromy_spectrum(i: int, j: int, lam) -> np.ndarray:
    """exp(2 pi i spec J_ij): n-1 ones and exp(2 pi i (lambda_i + lambda_j))."""
    vals = [complex(v) for v in _as_values(lam)]
    return np.exp(2j * np.pi * eigenvalues(jp_matrix(i, j, vals)))


def minimal_polynomial_defect(t: np.ndarray, i: int, j: int, lam) -> float:
    """Relative size of (T - I)(T - mu I), mu = exp(2 pi i (lambda_i + lambda_j)).

    J_ij has rank one with J_ij^2 = (lambda_i + lambda_j) J_ij, so any
    conjugate of exp(2 pi i J_ij) is killed by this quadratic.  Unlike an
    eigenvalue comparison this stays well conditioned when lambda_i +
    lambda_j = 0 and the monodromy is a Jordan block.
    """
    vals = [complex(v) for v in _as_values(lam)]
    mu = np.exp(2j * np.pi * (vals[i - 1] + vals[j - 1]))
    t = np.asarray(t, dtype=complex)
    eye = np.eye(len(t))
    scale = (np.linalg.norm(t, 2) + 1) * (np.linalg.norm(t, 2) + abs(mu))
    return float(np.linalg.norm((t - eye) @ (t - mu * eye), 2) / scale)
