"""Warping functions phi for metrics dr^2 + phi^2(r) g_omega on R^n.

Every family satisfies the weak-model axioms phi(0) = 0, phi'(0) = 1 and
phi > 0 for r > 0.  Evaluation returns (phi, phi', phi'') and is vectorized
over r.  Each family carries a growth descriptor consumed by the criterion
module for analytic tail bounds.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import InvalidFamily, OutOfDomain

_AXIOM_TOL = 1e-10


# ---------------------------------------------------------------------------
# Growth descriptors: phi(r) ~ scale * psi(r) for large r, where psi is
# exp(rate*r), r^exponent or r*(log r)^log_exponent.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentialGrowth:
    rate: float
    scale: float

    def describe(self):
        return f"phi ~ {self.scale:.6g}*exp({self.rate:.6g}*r)"


@dataclass(frozen=True)
class PowerLawGrowth:
    exponent: float
    scale: float = 1.0

    def describe(self):
        return f"phi ~ {self.scale:.6g}*r^{self.exponent:.6g}"


@dataclass(frozen=True)
class PowerLogGrowth:
    log_exponent: float
    scale: float

    def describe(self):
        return f"phi ~ {self.scale:.6g}*r*(log r)^{self.log_exponent:.6g}"


@dataclass(frozen=True)
class UnknownGrowth:
    def describe(self):
        return "tail growth unknown"


class WarpingFunction:
    """Base class.  Subclasses implement eval(r) -> (phi, dphi, ddphi)."""

    closed_form = True
    growth_class = UnknownGrowth()

    def eval(self, r):
        raise NotImplementedError

    def phi(self, r):
        return self.eval(r)[0]

    def log_phi(self, r):
        """log phi(r), overridable for families where phi overflows."""
        return np.log(self.eval(r)[0])

    def _check_axioms(self):
        phi0, dphi0, _ = self.eval(0.0)
        if abs(phi0) > _AXIOM_TOL or abs(dphi0 - 1.0) > _AXIOM_TOL:
            raise InvalidFamily(
                f"{self!r}: phi(0)={phi0!r}, phi'(0)={dphi0!r} violate the "
                "weak-model axioms")


class Euclidean(WarpingFunction):
    """phi(r) = r."""

    growth_class = PowerLawGrowth(1.0)

    def __init__(self):
        self._check_axioms()

    def eval(self, r):
        r = np.asarray(r, dtype=float)
        return r + 0.0, np.ones_like(r), np.zeros_like(r)

    def log_phi(self, r):
        return np.log(np.asarray(r, dtype=float))

    def __repr__(self):
        return "Euclidean()"


class Hyperbolic(WarpingFunction):
    """phi(r) = sinh(a*r)/a, constant radial curvature -a^2."""

    def __init__(self, a):
        if not (a > 0 and math.isfinite(a)):
            raise InvalidFamily(f"Hyperbolic rate must be positive, got {a!r}")
        self.a = float(a)
        self.growth_class = ExponentialGrowth(rate=self.a, scale=1.0 / (2 * self.a))
        self._check_axioms()

    def eval(self, r):
        r = np.asarray(r, dtype=float)
        ar = self.a * r
        return np.sinh(ar) / self.a, np.cosh(ar), self.a * np.sinh(ar)

    def log_phi(self, r):
        # log(sinh(ar)/a) without overflow for large ar
        ar = self.a * np.asarray(r, dtype=float)
        out = np.where(
            ar > 20.0,
            ar - math.log(2 * self.a) + np.log1p(-np.exp(-2 * np.minimum(ar, 700.0))),
            np.log(np.sinh(np.minimum(ar, 20.0)) / self.a),
        )
        return out

    def __repr__(self):
        return f"Hyperbolic(a={self.a:g})"


class PowerGrowth(WarpingFunction):
    """phi(r) = r*(1+r^2)^((p-1)/2), asymptotically r^p."""

    def __init__(self, p):
        if not (p > 0 and math.isfinite(p)):
            raise InvalidFamily(f"PowerGrowth exponent must be positive, got {p!r}")
        self.p = float(p)
        self.growth_class = PowerLawGrowth(exponent=self.p)
        self._check_axioms()

    def eval(self, r):
        r = np.asarray(r, dtype=float)
        p = self.p
        one = 1.0 + r * r
        phi = r * one ** ((p - 1) / 2)
        dphi = one ** ((p - 3) / 2) * (1.0 + p * r * r)
        ddphi = r * one ** ((p - 5) / 2) * (p - 1) * (3.0 + p * r * r)
        return phi, dphi, ddphi

    def __repr__(self):
        return f"PowerGrowth(p={self.p:g})"


class PowerLog(WarpingFunction):
    """phi(r) = r below e, exactly C*r*(log r)^c beyond e^2.

    The two regimes are joined on [e, e^2] by blending the logarithmic
    derivative: phi'/phi = 1/r + c*q(log r)/(r log r) with q a quintic
    smoothstep in log r.  q(t)/t has an elementary antiderivative, so the
    matching constant C and all values on the splice are closed-form.  The
    blend keeps phi > 0, phi' > 0 and phi in C^3.
    """

    S1 = math.e
    S2 = math.e ** 2
    # J2 = int_1^2 q(t)/t dt, frozen at quad precision
    J2 = 0.29577073597502874

    def __init__(self, c):
        if not (c >= 0 and math.isfinite(c)):
            raise InvalidFamily(f"PowerLog exponent must be >= 0, got {c!r}")
        self.c = float(c)
        self.match_constant = math.exp(self.c * self.J2) / 2.0 ** self.c
        self.growth_class = PowerLogGrowth(log_exponent=self.c, scale=self.match_constant)
        self._check_axioms()

    @staticmethod
    def _q(t):
        # quintic smoothstep q = 10u^3 - 15u^4 + 6u^5 in u = t-1;
        # q(1) = 0, q(2) = 1, q' = q'' = 0 at both ends
        u = t - 1.0
        return ((6.0 * u - 15.0) * u + 10.0) * u ** 3

    @staticmethod
    def _qp(t):
        return 30.0 * (t - 1.0) ** 2 * (t - 2.0) ** 2

    @classmethod
    def _J(cls, s):
        """int_1^s q(t)/t dt, evaluated without cancellation.

        Forward branch (u = s-1 <= 1/2): the series
        J = 2.5 u^4 - 5 u^5 + 31 sum_{k>=6} (-1)^k u^k / k.
        Backward branch: J = J2 - K(2-s) with
        K(v) = 6/5 v^5 - 3/4 v^4 + 4/3 v^3 + 4 v^2 + 16 v + 31 log1p(-v/2).
        """
        s = np.asarray(s, dtype=float)
        u = s - 1.0
        out = np.empty_like(u)
        fwd = u <= 0.5
        if np.any(fwd):
            uf = u[fwd]
            acc = 2.5 * uf ** 4 - 5.0 * uf ** 5
            term = uf ** 6
            for k in range(6, 81):
                acc = acc + (31.0 / k) * term * (1 if k % 2 == 0 else -1)
                term = term * uf
            out[fwd] = acc
        if np.any(~fwd):
            v = 1.0 - u[~fwd]
            K = (1.2 * v ** 5 - 0.75 * v ** 4 + (4.0 / 3.0) * v ** 3
                 + 4.0 * v ** 2 + 16.0 * v + 31.0 * np.log1p(-0.5 * v))
            out[~fwd] = cls.J2 - K
        return out

    def eval(self, r):
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        phi = np.empty_like(r)
        dphi = np.empty_like(r)
        ddphi = np.empty_like(r)
        c = self.c

        low = r <= self.S1
        phi[low] = r[low]
        dphi[low] = 1.0
        ddphi[low] = 0.0

        mid = (r > self.S1) & (r < self.S2)
        if np.any(mid):
            rm = r[mid]
            s = np.log(rm)
            q, qp = self._q(s), self._qp(s)
            ph = rm * np.exp(c * self._J(s))
            h = (1.0 + c * q / s) / rm
            hp = (-1.0 + c * (qp / s - q * (s + 1.0) / s ** 2)) / rm ** 2
            phi[mid] = ph
            dphi[mid] = ph * h
            ddphi[mid] = ph * (h * h + hp)

        hi = r >= self.S2
        if np.any(hi):
            rh = r[hi]
            L = np.log(rh)
            C = self.match_constant
            phi[hi] = C * rh * L ** c
            dphi[hi] = C * L ** (c - 1) * (L + c)
            ddphi[hi] = C * c * L ** (c - 2) * (L + c - 1.0) / rh

        if scalar:
            return float(phi[0]), float(dphi[0]), float(ddphi[0])
        return phi, dphi, ddphi

    def __repr__(self):
        return f"PowerLog(c={self.c:g})"


class Tabulated(WarpingFunction):
    """Warping function given by samples of (phi, phi', phi'') on a grid.

    Values between nodes come from monotone cubic interpolation of each
    column separately; the supplied derivative samples are authoritative
    (the interpolant is never differentiated).  Growth defaults to Unknown,
    which forces the criterion module onto its heuristic tail path.
    """

    closed_form = False

    def __init__(self, grid, phi, dphi, ddphi, growth=None):
        grid = np.asarray(grid, dtype=float)
        phi = np.asarray(phi, dtype=float)
        dphi = np.asarray(dphi, dtype=float)
        ddphi = np.asarray(ddphi, dtype=float)
        if grid.ndim != 1 or len(grid) < 4:
            raise InvalidFamily("tabulated grid needs at least 4 nodes")
        if np.any(np.diff(grid) <= 0):
            raise InvalidFamily("tabulated grid must be strictly increasing")
        if grid[0] <= 0:
            raise InvalidFamily("tabulated grid must be positive")
        if np.any(phi <= 0):
            raise InvalidFamily("tabulated phi must be positive on the grid")
        if not (phi.shape == dphi.shape == ddphi.shape == grid.shape):
            raise InvalidFamily("tabulated columns must share the grid shape")
        self.grid = grid
        self.growth_class = growth if growth is not None else UnknownGrowth()
        self._phi = PchipInterpolator(grid, phi)
        self._dphi = PchipInterpolator(grid, dphi)
        self._ddphi = PchipInterpolator(grid, ddphi)

    def eval(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.grid[0] - 1e-15) or np.any(r > self.grid[-1] + 1e-15):
            raise OutOfDomain(
                f"r outside tabulated hull [{self.grid[0]:g}, {self.grid[-1]:g}]")
        out = self._phi(r), self._dphi(r), self._ddphi(r)
        if np.ndim(r) == 0:
            return float(out[0]), float(out[1]), float(out[2])
        return out

    def __repr__(self):
        return (f"Tabulated({len(self.grid)} nodes on "
                f"[{self.grid[0]:g}, {self.grid[-1]:g}])")


# ---------------------------------------------------------------------------
# Module operations
# ---------------------------------------------------------------------------

def warp_eval(w: WarpingFunction, r):
    """Evaluate (phi, phi', phi'') at r >= 0."""
    if np.any(np.asarray(r) < 0):
        raise OutOfDomain("warping functions are defined for r >= 0")
    return w.eval(r)


def radial_curvature(w: WarpingFunction, r):
    """k(r) = -phi''(r)/phi(r) for r > 0."""
    if np.any(np.asarray(r) <= 0):
        raise OutOfDomain("radial curvature requires r > 0")
    phi, _, ddphi = w.eval(r)
    if np.any(np.asarray(phi) <= 0):
        raise OutOfDomain("phi(r) <= 0")
    return -ddphi / phi


def load_tabulated_csv(path, growth=None) -> Tabulated:
    """Read a tabulated family from CSV with header r,phi,dphi,ddphi.

    The r column must be strictly increasing with r[0] <= 1e-3 so that
    radial solves can launch inside the hull.
    """
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"r", "phi", "dphi", "ddphi"}
        if reader.fieldnames is None or expected - set(reader.fieldnames):
            raise InvalidFamily(
                f"{path}: expected CSV header r,phi,dphi,ddphi, got {reader.fieldnames}")
        for row in reader:
            rows.append((float(row["r"]), float(row["phi"]),
                         float(row["dphi"]), float(row["ddphi"])))
    if not rows:
        raise InvalidFamily(f"{path}: no data rows")
    data = np.array(rows)
    if data[0, 0] > 1e-3:
        raise InvalidFamily(
            f"{path}: first grid point {data[0, 0]:g} must be <= 1e-3")
    return Tabulated(data[:, 0], data[:, 1], data[:, 2], data[:, 3], growth=growth)


def family_from_name(name, a=None, p=None, c=None) -> WarpingFunction:
    """Construct a closed family from CLI-style arguments."""
    name = name.lower()
    if name == "euclidean":
        return Euclidean()
    if name == "hyperbolic":
        if a is None:
            raise InvalidFamily("hyperbolic family requires parameter a")
        return Hyperbolic(a)
    if name in ("powergrowth", "power"):
        if p is None:
            raise InvalidFamily("power-growth family requires parameter p")
        return PowerGrowth(p)
    if name == "powerlog":
        if c is None:
            raise InvalidFamily("power-log family requires parameter c")
        return PowerLog(c)
    raise InvalidFamily(f"unknown family {name!r}")
