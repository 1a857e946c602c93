"""Branch-tracked hypergeometric integrals over twisted cycles.

The integrand is Phi(xi) = prod_k (xi - z_k)^{lambda_k}.  Paths are chains
of straight segments and circular arcs; along each arc the logarithms
log(xi - z_k) are continued analytically (closed forms, no sampling), so
Phi is evaluated on a single consistent branch over a whole loop.

A loop starts at a basepoint with principal logarithms.  Going once
counterclockwise around z_k multiplies Phi by chi_k = exp(2 pi i lambda_k).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad_vec

from .kz import LambdaVector

TWO_PI_I = 2j * np.pi


class BranchError(ValueError):
    """A path comes too close to a puncture or violates the branch-step rule."""


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class IntegrandSpec:
    z: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        z = np.array(self.z, dtype=complex)
        lam = LambdaVector(tuple(self.lam)).array() if not isinstance(self.lam, LambdaVector) \
            else self.lam.array()
        if z.shape != lam.shape or z.ndim != 1:
            raise ValueError("need one exponent per puncture")
        if len(z) > 1 and min_gap(z) <= 0:
            raise ValueError("punctures must be distinct")
        if np.any(np.abs(lam - np.round(lam.real)) < 1e-12):
            raise ValueError("exponents must not be integers")
        z.setflags(write=False)
        lam.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "lam", lam)

    @property
    def n(self) -> int:
        return len(self.z)

    @property
    def chi(self) -> np.ndarray:
        return np.exp(TWO_PI_I * self.lam)

    def moved(self, z) -> "IntegrandSpec":
        return IntegrandSpec(np.asarray(z, dtype=complex), self.lam)


def min_gap(z: np.ndarray) -> float:
    z = np.asarray(z, dtype=complex)
    d = np.abs(z[:, None] - z[None, :])
    d[np.diag_indices(len(z))] = np.inf
    return float(d.min())


# ---------------------------------------------------------------------------
# arcs with analytic log continuation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    a: complex
    b: complex

    def point(self, t):
        return self.a + np.asarray(t) * (self.b - self.a)

    def deriv(self, t):
        return np.full(np.shape(t), self.b - self.a, dtype=complex)

    def log_increment(self, t, z: np.ndarray) -> np.ndarray:
        """log(xi(t) - z_k) - log(a - z_k); shape (len(t), n)"""
        t = np.atleast_1d(t)[:, None]
        return np.log1p(t * (self.b - self.a) / (self.a - z[None, :]))

    def distance(self, p: complex) -> float:
        d = self.b - self.a
        if d == 0:
            return abs(p - self.a)
        s = np.clip(((p - self.a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
        return abs(self.a + s * d - p)

    def reversed(self) -> "Segment":
        return Segment(self.b, self.a)


@dataclass(frozen=True)
class CircleArc:
    center: complex
    radius: float
    theta0: float
    theta1: float

    def _theta(self, t):
        return self.theta0 + np.asarray(t) * (self.theta1 - self.theta0)

    def point(self, t):
        return self.center + self.radius * np.exp(1j * self._theta(t))

    def deriv(self, t):
        return 1j * self.radius * (self.theta1 - self.theta0) * np.exp(1j * self._theta(t))

    def log_increment(self, t, z: np.ndarray) -> np.ndarray:
        t = np.atleast_1d(t)
        th = self._theta(t)[:, None]
        w = (self.center - z)[None, :]
        inside = np.abs(w) < self.radius
        with np.errstate(divide="ignore", invalid="ignore"):
            # outside: xi - z = w (1 + rho e^{i th} / w)
            out_val = np.log1p(self.radius * np.exp(1j * th) / w) \
                - np.log1p(self.radius * np.exp(1j * self.theta0) / w)
            # inside: xi - z = rho e^{i th} (1 + w e^{-i th} / rho)
            in_val = 1j * (th - self.theta0) + np.log1p(w * np.exp(-1j * th) / self.radius) \
                - np.log1p(w * np.exp(-1j * self.theta0) / self.radius)
        return np.where(inside, in_val, out_val)

    def distance(self, p: complex) -> float:
        # distance to the full circle; adequate as a clearance bound
        return abs(abs(p - self.center) - self.radius)

    def reversed(self) -> "CircleArc":
        return CircleArc(self.center, self.radius, self.theta1, self.theta0)


Arc = Segment | CircleArc


class BranchPath:
    """Chain of arcs together with continued logs log(xi - z_k)."""

    def __init__(self, arcs: Sequence[Arc], z, start_logs=None, samples_per_arc: int = 64,
                 min_clearance: float = 1e-9):
        self.arcs = [a for a in arcs if not (isinstance(a, Segment) and a.a == a.b)]
        if not self.arcs:
            raise ValueError("empty path")
        self.z = np.asarray(z, dtype=complex)
        start = complex(self.arcs[0].point(0.0))
        for a in self.arcs:
            for p in self.z:
                if a.distance(p) <= min_clearance:
                    raise BranchError(f"path passes within {min_clearance} of puncture {p}")
        if start_logs is None:
            start_logs = np.log(start - self.z)
        logs = [np.asarray(start_logs, dtype=complex)]
        for a in self.arcs:
            logs.append(logs[-1] + a.log_increment(1.0, self.z)[0])
        self.arc_start_logs = logs[:-1]
        self.end_logs = logs[-1]
        self.samples_per_arc = samples_per_arc

    @property
    def start(self) -> complex:
        return complex(self.arcs[0].point(0.0))

    @property
    def end(self) -> complex:
        return complex(self.arcs[-1].point(1.0))

    @property
    def start_logs(self) -> np.ndarray:
        return self.arc_start_logs[0]

    def is_closed(self, tol: float = 1e-12) -> bool:
        return abs(self.end - self.start) <= tol * max(1.0, abs(self.start))

    def windings(self) -> np.ndarray:
        return ((self.end_logs - self.start_logs) / TWO_PI_I).real

    def monodromy(self, lam) -> complex:
        """Phi(end) / Phi(start) along the path."""
        return complex(np.exp(np.sum(np.asarray(lam) * (self.end_logs - self.start_logs))))

    def arc_logs(self, k: int, t) -> np.ndarray:
        return self.arc_start_logs[k][None, :] + self.arcs[k].log_increment(t, self.z)

    def samples(self, per_arc: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Sample points xi_0..xi_m and their continued logs."""
        m = per_arc or self.samples_per_arc
        t = np.linspace(0.0, 1.0, m + 1)
        pts, logs = [], []
        for k, a in enumerate(self.arcs):
            tt = t if k == 0 else t[1:]
            pts.append(np.atleast_1d(a.point(tt)))
            logs.append(self.arc_logs(k, tt))
        return np.concatenate(pts), np.vstack(logs)

    def check_branch_steps(self, per_arc: int | None = None) -> float:
        """Largest |delta arg(xi - z_k)| between consecutive samples; must be < pi/2."""
        _, logs = self.samples(per_arc)
        step = float(np.abs(np.diff(logs.imag, axis=0)).max()) if len(logs) > 1 else 0.0
        if step >= np.pi / 2:
            raise BranchError(f"branch step {step:.3f} exceeds pi/2")
        return step

    def reversed(self) -> "BranchPath":
        return BranchPath([a.reversed() for a in reversed(self.arcs)], self.z, self.end_logs,
                          self.samples_per_arc)


def phi_eval(spec: IntegrandSpec, path: BranchPath, t: int) -> complex:
    """Phi at sample index t of the path's default sampling."""
    _, logs = path.samples()
    if not -len(logs) <= t < len(logs):
        raise IndexError(f"sample index {t} out of range")
    return complex(np.exp(logs[t] @ spec.lam))


# ---------------------------------------------------------------------------
# twisted cycles
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TwistedCycle:
    """Weighted sum of closed loops; Phi is continued along each loop from
    the principal branch at its start."""

    components: tuple[tuple[BranchPath, complex], ...]
    label: str = ""

    def boundary_defect(self, lam) -> complex:
        """sum weight * (chi(loop) - 1): vanishes for a twisted cycle."""
        return complex(sum(w * (p.monodromy(lam) - 1) for p, w in self.components))

    def scaled(self, c: complex) -> "TwistedCycle":
        return TwistedCycle(tuple((p, c * w) for p, w in self.components), self.label)


@dataclass(frozen=True)
class CycleGeometry:
    """Loop placement relative to the minimal puncture gap g: circles of radius
    ``radius * g``, connectors ``offset * g`` below the lowest puncture,
    basepoint ``base_shift * g`` right of the rightmost one."""

    radius: float = 0.25
    offset: float = 0.5
    base_shift: float = 1.0
    infinity_margin: float = 1.0


def puncture_loop(z: np.ndarray, i: int, geom: CycleGeometry = CycleGeometry()) -> BranchPath:
    """Counterclockwise loop around z_i (1-based) from the common basepoint,
    running below all punctures."""
    z = np.asarray(z, dtype=complex)
    g = min_gap(z) if len(z) > 1 else 1.0
    rho = geom.radius * g
    base = complex(z.real.max() + geom.base_shift * g, 0.0)
    y_low = min(z.imag.min(), 0.0) - geom.offset * g
    zi = z[i - 1]
    p1, p2, p3 = complex(base.real, y_low), complex(zi.real, y_low), zi - 1j * rho
    out = [Segment(base, p1), Segment(p1, p2), Segment(p2, p3)]
    arcs = out + [CircleArc(zi, rho, -np.pi / 2, 3 * np.pi / 2)] + [s.reversed() for s in reversed(out)]
    return BranchPath(arcs, z, min_clearance=0.05 * g)


def infinity_loop(z: np.ndarray, geom: CycleGeometry = CycleGeometry()) -> BranchPath:
    z = np.asarray(z, dtype=complex)
    c = z.mean()
    radius = float(np.abs(z - c).max()) + geom.infinity_margin
    return BranchPath([CircleArc(c, radius, 0.0, 2 * np.pi)], z)


def cycle_basis(spec: IntegrandSpec, geom: CycleGeometry = CycleGeometry()):
    """(w_1..w_{n-1}, w_inf).

    w_i = gamma_i / (chi_i - 1) - gamma_{i+1} / (chi_{i+1} - 1), so that the
    boundary terms (chi - 1) Phi(base) cancel.  This is the cycle
    (chi_{i+1} - 1) gamma_i - (chi_i - 1) gamma_{i+1} divided by
    (chi_i - 1)(chi_{i+1} - 1), which keeps rows of comparable size when
    |chi| is far from 1.  w_inf is the big circle with
    weight -1/(2 pi i); Phi -> 1 at infinity on its branch.
    """
    chi = spec.chi
    if np.any(np.abs(chi - 1) < 1e-12):
        raise ValueError("trivial local monodromy: weights degenerate")
    loops = [puncture_loop(spec.z, k, geom) for k in range(1, spec.n + 1)]
    basis = []
    for i in range(spec.n - 1):
        comps = ((loops[i], complex(1 / (chi[i] - 1))), (loops[i + 1], complex(-1 / (chi[i + 1] - 1))))
        basis.append(TwistedCycle(comps, f"w{i + 1}"))
    w_inf = None
    if abs(spec.lam.sum()) < 1e-10 * max(1.0, np.abs(spec.lam).max()):
        w_inf = TwistedCycle(((infinity_loop(spec.z, geom), -1 / TWO_PI_I),), "w_inf")
    return basis, w_inf


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

FormFn = Callable[[np.ndarray], np.ndarray]


def _eta_factors(spec: IntegrandSpec) -> FormFn:
    """xi -> (lambda_j / (xi - z_j))_j, shape (len(xi), n)"""
    return lambda xi: spec.lam[None, :] / (xi[:, None] - spec.z[None, :])


def integrate(c: TwistedCycle | BranchPath, spec: IntegrandSpec, form: FormFn,
              tol: float = 1e-9) -> np.ndarray:
    """sum weight * int form(xi) Phi(xi) dxi, for a vector-valued ``form``."""
    comps = c.components if isinstance(c, TwistedCycle) else ((c, 1.0),)
    total = None
    for idx, (path, weight) in enumerate(comps):
        acc = None
        for k, arc in enumerate(path.arcs):
            def integrand(t, k=k, arc=arc):
                tt = np.array([t])
                xi = np.atleast_1d(arc.point(tt))
                phi = np.exp(path.arc_logs(k, tt) @ spec.lam)
                vals = form(xi) * (phi * arc.deriv(tt))[:, None]
                return np.concatenate([vals[0].real, vals[0].imag])
            res, err = quad_vec(integrand, 0.0, 1.0, epsabs=tol, epsrel=1e-12, limit=2000)
            if not np.all(np.isfinite(res)) or err > 100 * tol * max(1.0, np.abs(res).max()):
                raise QuadratureError(f"no convergence on component {idx}, arc {k} (error {err:.2e})")
            m = len(res) // 2
            val = res[:m] + 1j * res[m:]
            acc = val if acc is None else acc + val
        total = weight * acc if total is None else total + weight * acc
    return total


def cycle_periods(c: TwistedCycle, spec: IntegrandSpec, tol: float = 1e-9) -> np.ndarray:
    """(int_c eta_1, ..., int_c eta_n) with eta_j = lambda_j Phi dxi / (xi - z_j)."""
    return integrate(c, spec, _eta_factors(spec), tol)


def period(c: TwistedCycle, j: int, spec: IntegrandSpec, tol: float = 1e-9) -> complex:
    if not 1 <= j <= spec.n:
        raise IndexError(f"form index {j} out of range 1..{spec.n}")
    return complex(cycle_periods(c, spec, tol)[j - 1])


def period_matrix(spec: IntegrandSpec, tol: float = 1e-9,
                  geom: CycleGeometry = CycleGeometry()) -> np.ndarray:
    """(n-1) x n matrix of int_{w_i} eta_j."""
    basis, _ = cycle_basis(spec, geom)
    return np.array([cycle_periods(w, spec, tol) for w in basis])


def exactness_defect(c: TwistedCycle, spec: IntegrandSpec, coeffs: Sequence[complex],
                     tol: float = 1e-9) -> complex:
    """int_c d(f Phi) for the polynomial f with the given coefficients
    (lowest degree first); zero on a genuine twisted cycle."""
    f = np.polynomial.Polynomial(np.asarray(coeffs, dtype=complex))
    df = f.deriv()

    def form(xi):
        log_d = (spec.lam[None, :] / (xi[:, None] - spec.z[None, :])).sum(axis=1)
        return (df(xi) + f(xi) * log_d)[:, None]

    return complex(integrate(c, spec, form, tol)[0])


def numerical_rank(m: np.ndarray, ratio: float = 1e-6, equilibrate: bool = True) -> tuple[int, np.ndarray]:
    """Rank by the singular-value ratio test.

    With ``equilibrate`` the rows are first scaled to unit length, which
    amounts to rescaling each basis cycle and leaves the rank unchanged
    while removing the arbitrary per-cycle normalization from the ratio.
    """
    m = np.asarray(m)
    if equilibrate:
        norms = np.linalg.norm(m, axis=1)
        m = m / np.where(norms > 0, norms, 1.0)[:, None]
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > ratio * s[0])), s
