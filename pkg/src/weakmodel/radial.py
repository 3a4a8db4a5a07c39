"""Radial mode profiles: the ODE, its bound structure, and normalization.

For each cross-section eigenvalue lambda^2 the radial factor phi_m solves

    phi_m'' + (n-1) (phi'/phi) phi_m' - (lambda^2/phi^2) phi_m = 0,

is launched at a small r0 from its r^l leading behaviour (l the positive
indicial root), and is nondecreasing and positive.  Integration runs on the
log-log system (u, w) = (log phi_m, r phi_m'/phi_m), which is regular at the
origin and immune to amplitude overflow:

    du/ds = w,   dw/ds = w + lambda^2 (r/phi)^2 - (n-1) (r phi'/phi) w - w^2,

with s = log r.  The substitution x = phi^{n-1} phi_m' / (lambda^2 phi_m)
turns the equation into x' + (lambda^2/phi^{n-1}) x^2 = phi^{n-3}, which
yields the verified growth bound

    phi_m(s) <= B exp( int_1^s lambda^2/phi^{n-1} (A + int_1^t phi^{n-3}) )

with A = x(1), B = phi_m(1); the same bound certifies the normalization
error when the criterion integral converges.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from . import criterion as _criterion
from .errors import (DegenerateProfile, NonPositiveWarp, NotConvergent,
                     OutOfRange, QuadratureFailure, StepSizeUnderflow,
                     TailNotTight)
from .spectrum import EigenMode
from .warp import WarpingFunction

_DEFAULT_R0 = 1e-3
_GRID_SIZE = 800
_NORMALIZE_DELTA = 1e-4


def indicial_exponent(n: int, lambda_sq: float) -> float:
    """Positive root l of l(l-1) + (n-1)l - lambda^2 = 0."""
    if lambda_sq < 0:
        raise ValueError(f"lambda^2 must be >= 0, got {lambda_sq}")
    return 0.5 * (-(n - 2) + math.sqrt((n - 2) ** 2 + 4.0 * lambda_sq))


@dataclass
class RadialProfile:
    mode: EigenMode
    n: int
    warp: WarpingFunction
    indicial_l: float
    grid: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    limit_estimate: float      # math.inf when the mode is unbounded
    limit_error: float
    normalized: bool
    r0: float
    _dense: object = None      # solve_ivp dense solution in s = log r, or None
    _scale: float = 1.0        # divisor applied to the raw solution

    @property
    def r_max(self):
        return float(self.grid[-1])

    def _log_raw(self, r):
        """log of the unnormalized phi_m at r (r >= r0, within range)."""
        s = np.log(r)
        if self._dense is not None:
            return self._dense(s)[0]
        interp = PchipInterpolator(np.log(self.grid),
                                   np.log(self.values * self._scale))
        return interp(s)

    def interp(self, r):
        """phi_m(r) for 0 <= r <= r_max (vectorized)."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0) or np.any(r > self.r_max * (1 + 1e-12)):
            raise OutOfRange(f"r outside [0, {self.r_max:g}]")
        scalar = r.ndim == 0
        r = np.atleast_1d(r).copy()
        out = np.empty_like(r)
        if self.mode.m == 0:
            out[:] = self.values[0]
            return float(out[0]) if scalar else out
        below = r < self.r0
        inside = ~below
        if np.any(inside):
            out[inside] = np.exp(self._log_raw(r[inside])) / self._scale
        if np.any(below):
            # Frobenius launch behaviour phi_m ~ r^l below the launch point
            v0 = self.values[0]
            out[below] = v0 * (r[below] / self.r0) ** self.indicial_l
        return float(out[0]) if scalar else out

    def deriv(self, r):
        """phi_m'(r) for r0 <= r <= r_max."""
        r = np.asarray(r, dtype=float)
        if np.any(r < self.r0 * (1 - 1e-12)) or np.any(r > self.r_max * (1 + 1e-12)):
            raise OutOfRange(f"r outside [{self.r0:g}, {self.r_max:g}]")
        if self.mode.m == 0:
            return np.zeros_like(r)
        if self._dense is not None:
            s = np.log(r)
            u, w = self._dense(s)
            return np.exp(u) / self._scale * w / r
        interp = PchipInterpolator(self.grid, self.derivs)
        return interp(r)

    def log_deriv_ratio(self, r):
        """w(r) = r phi_m'(r)/phi_m(r), scale-free."""
        if self._dense is not None:
            return self._dense(math.log(r))[1]
        i = PchipInterpolator(self.grid, self.grid * self.derivs / self.values)
        return float(i(r))

    def to_csv(self, path):
        data = np.column_stack([self.grid, self.values, self.derivs])
        np.savetxt(path, data, delimiter=",", header="r,phi_m,dphi_m",
                   comments="", fmt="%.15g")

    def metadata(self):
        lim = self.limit_estimate
        return {
            "m": self.mode.m,
            "lambda_sq": self.mode.lambda_sq,
            "l": self.indicial_l,
            "limit_estimate": ("Unbounded" if math.isinf(lim) else lim),
            "limit_error": self.limit_error,
            "normalized": self.normalized,
        }


def load_profile_csv(path, mode: EigenMode, n: int, warp: WarpingFunction,
                     metadata=None) -> RadialProfile:
    """Rebuild a profile from exported samples (no dense solution)."""
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    lim = math.inf
    lim_err = 0.0
    normalized = False
    if metadata:
        raw = metadata.get("limit_estimate", math.inf)
        lim = math.inf if raw == "Unbounded" else float(raw)
        lim_err = float(metadata.get("limit_error", 0.0))
        normalized = bool(metadata.get("normalized", False))
    return RadialProfile(
        mode=mode, n=n, warp=warp,
        indicial_l=indicial_exponent(n, mode.lambda_sq),
        grid=data[:, 0], values=data[:, 1], derivs=data[:, 2],
        limit_estimate=lim, limit_error=lim_err, normalized=normalized,
        r0=float(data[0, 0]))


# ---------------------------------------------------------------------------
# Solving
# ---------------------------------------------------------------------------

def _cubic_seed_coeff(w: WarpingFunction, n, l, lam2):
    """Second-order Frobenius correction phi_m ~ r^l (1 + kappa2 r^2).

    Driven by the cubic term of phi near 0: phi = r + beta3 r^3 + O(r^5);
    beta3 is recovered by finite differences so tabulated data works too.
    """
    h = 1e-2
    try:
        phi_h = float(w.eval(h)[0])
    except Exception:
        return 0.0
    beta3 = (phi_h - h) / h ** 3
    return -beta3 * (l * (n - 1) + lam2) / (2.0 * l + n)


def solve_radial(w: WarpingFunction, n: int, mode: EigenMode,
                 r_max: float = 30.0, tol: float = 1e-10,
                 criterion: _criterion.CriterionReport | None = None,
                 normalize: bool = True, r0: float | None = None,
                 grid_size: int = _GRID_SIZE) -> RadialProfile:
    """Solve the radial mode equation on [r0, r_max].

    The m = 0 mode short-circuits to the constant 1.  When the criterion
    verdict is Convergent (computed here unless supplied) the profile is
    normalized to limit 1 with a certified limit error; otherwise the limit
    estimate is recorded as unbounded.
    """
    lam2 = mode.lambda_sq
    l = indicial_exponent(n, lam2)
    grid = np.geomspace(r0 or _DEFAULT_R0, r_max, grid_size)

    if mode.m == 0:
        return RadialProfile(
            mode=mode, n=n, warp=w, indicial_l=0.0, grid=grid,
            values=np.ones_like(grid), derivs=np.zeros_like(grid),
            limit_estimate=1.0, limit_error=0.0, normalized=True,
            r0=float(grid[0]))

    r_launch = r0 or _DEFAULT_R0
    if r_max <= 1.0:
        raise ValueError(f"r_max must exceed 1, got {r_max}")
    phi_grid = np.asarray(w.eval(grid)[0], dtype=float)
    if np.any(phi_grid <= 0) or np.any(~np.isfinite(phi_grid)):
        bad = grid[np.argmax(~((phi_grid > 0) & np.isfinite(phi_grid)))]
        raise NonPositiveWarp(f"phi({bad:g}) <= 0 inside [{grid[0]:g}, {r_max:g}]")
    kappa2 = _cubic_seed_coeff(w, n, l, lam2)
    u0 = l * math.log(r_launch) + math.log1p(kappa2 * r_launch ** 2)
    w0 = (l + (l + 2) * kappa2 * r_launch ** 2) / (1.0 + kappa2 * r_launch ** 2)

    def rhs(s, y):
        r = math.exp(s)
        phi, dphi, _ = w.eval(r)
        if phi <= 0:
            raise NonPositiveWarp(f"phi({r:g}) = {phi:g} <= 0")
        ww = y[1]
        rho = r / phi
        return [ww, ww + lam2 * rho * rho - (n - 1) * (r * dphi / phi) * ww - ww * ww]

    # near-pure relative control on w: it decays doubly-exponentially for
    # fast-growing phi and x = phi^{n-1} w/(lambda^2 r) re-amplifies any
    # absolute error floor, so w must stay relatively accurate
    sol = solve_ivp(rhs, (math.log(r_launch), math.log(r_max)), [u0, w0],
                    method="DOP853", dense_output=True,
                    rtol=min(max(tol * 1e-3, 1e-13), 1e-8),
                    atol=[1e-12, 1e-290])
    if not sol.success:
        raise StepSizeUnderflow(f"radial integration failed: {sol.message}")

    s_grid = np.log(grid)
    u, wlog = sol.sol(s_grid)
    values = np.exp(u)
    derivs = values * wlog / grid

    profile = RadialProfile(
        mode=mode, n=n, warp=w, indicial_l=l, grid=grid, values=values,
        derivs=derivs, limit_estimate=math.inf, limit_error=math.inf,
        normalized=False, r0=float(grid[0]), _dense=sol.sol)

    if not normalize:
        return profile
    if criterion is None:
        criterion = _criterion.march_criterion(w, n, tol=1e-6)
    if criterion.verdict != _criterion.CONVERGENT:
        return profile
    return normalize_profile(profile, criterion)


# ---------------------------------------------------------------------------
# Normalization via the certified tail bound
# ---------------------------------------------------------------------------

def _tail_delta(profile: RadialProfile, cert) -> float:
    """Upper bound for phi_m(inf)/phi_m(R) - 1 from the growth bound tail.

    The bound's exponent beyond R splits as
    lambda^2 [ A*T_in(R) + C(1,R)*T_in(R) + T_out(R) ] with T_in, T_out the
    certified single and double tails and C the cumulative of phi^{n-3}.
    """
    lam2 = profile.mode.lambda_sq
    A = riccati_value(profile, 1.0)
    log_in_hi = cert.log_inner[1]
    exponent = lam2 * (A * math.exp(log_in_hi)
                       + math.exp(cert.log_cum + log_in_hi)
                       + cert.double[1])
    return math.expm1(exponent)


def riccati_x(profile: RadialProfile, r) -> np.ndarray:
    """x(r) = phi^{n-1}(r) phi_m'(r) / (lambda^2 phi_m(r)), vectorized."""
    lam2 = profile.mode.lambda_sq
    if lam2 <= 0:
        raise DegenerateProfile("x is undefined for the constant mode (lambda^2 = 0)")
    n = profile.n
    w = profile.warp
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if profile._dense is not None:
        wlog = profile._dense(np.log(r))[1]
    else:
        interp = PchipInterpolator(profile.grid,
                                   profile.grid * profile.derivs / profile.values)
        wlog = interp(r)
    log_phi = np.asarray(w.log_phi(r), dtype=float)
    return np.exp((n - 1) * log_phi + np.log(wlog) - math.log(lam2) - np.log(r))


def riccati_value(profile: RadialProfile, r: float) -> float:
    return float(riccati_x(profile, r)[0])


def normalize_profile(profile: RadialProfile,
                      criterion: _criterion.CriterionReport) -> RadialProfile:
    """Rescale a convergent profile so its limit at infinity is 1.

    The limit is pinned between phi_m(R) and phi_m(R)(1 + delta) with delta
    from the certified tail of the growth bound; requires delta < 1e-4,
    re-solving on a doubled range up to 3 times otherwise.
    """
    if criterion.verdict != _criterion.CONVERGENT:
        raise NotConvergent(
            f"normalization requires a Convergent verdict, got {criterion.verdict}")
    if profile.mode.m == 0:
        return profile
    current = profile
    for attempt in range(4):
        cert = _criterion.tail_certificate(current.warp, current.n, current.r_max)
        delta = _tail_delta(current, cert)
        if delta < _NORMALIZE_DELTA:
            limit = current.values[-1] * (1.0 + delta)
            return replace(
                current,
                values=current.values / limit,
                derivs=current.derivs / limit,
                limit_estimate=1.0,
                limit_error=delta,
                normalized=True,
                _scale=current._scale * limit)
        if attempt < 3:
            current = solve_radial(
                current.warp, current.n, current.mode,
                r_max=current.r_max * 2.0, r0=current.r0, normalize=False)
    raise TailNotTight(
        f"tail factor delta = {delta:.3g} still >= {_NORMALIZE_DELTA:g} after "
        f"3 doublings (r_max = {current.r_max:g}); supply a larger r_max")


def suggest_rmax(w: WarpingFunction, n: int, lambda_sq: float,
                 delta_target: float = _NORMALIZE_DELTA / 8.0,
                 start: float = 30.0) -> float:
    """Smallest doubling of `start` whose certified tail delta is below target."""
    probe = solve_radial(w, n, EigenMode(m=1, lambda_sq=lambda_sq, multiplicity=1),
                         r_max=max(start, 30.0), normalize=False)
    A = riccati_value(probe, 1.0)
    R = max(start, 30.0)
    for _ in range(24):
        cert = _criterion.tail_certificate(w, n, R)
        exponent = lambda_sq * (A * math.exp(cert.log_inner[1])
                                + math.exp(cert.log_cum + cert.log_inner[1])
                                + cert.double[1])
        if math.expm1(exponent) < delta_target:
            return R
        R *= 2.0
    raise TailNotTight(f"no r_max below {R:g} reaches tail delta {delta_target:g}")


# ---------------------------------------------------------------------------
# Riccati trace and growth bound verification
# ---------------------------------------------------------------------------

@dataclass
class RiccatiTrace:
    grid: np.ndarray
    x: np.ndarray
    A: float                  # x(1)
    B: float                  # phi_m(1)
    residual: np.ndarray      # x' + (lambda^2/phi^{n-1}) x^2 - phi^{n-3}
    residual_ok: bool
    inequality_ok: bool       # x'(s) <= phi^{n-3}(s) + 1e-9 pointwise


def riccati_trace(profile: RadialProfile, w: WarpingFunction | None = None,
                  n: int | None = None, s_grid=None,
                  fd_step: float = 2e-2) -> RiccatiTrace:
    """Log-derivative substitution trace x(s) with its equation residual.

    x' is estimated from the solved profile by five-point central
    differences, so the residual genuinely tests the solution rather than
    restating the equation.
    """
    w = w or profile.warp
    n = n or profile.n
    lam2 = profile.mode.lambda_sq
    if lam2 <= 0:
        raise DegenerateProfile("Riccati trace needs lambda^2 > 0 (m >= 1)")
    if s_grid is None:
        s_grid = np.linspace(1.0, min(profile.r_max, 20.0), 481)
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid[0] - 2 * fd_step < profile.r0:
        raise DegenerateProfile("trace grid extends below the solved range")

    x = riccati_x(profile, s_grid)
    if np.any(~np.isfinite(x)) or np.any(x < 0):
        raise DegenerateProfile("nonpositive phi_m or phi_m' in the trace range")
    h = fd_step
    xp = (riccati_x(profile, s_grid - 2 * h) - 8 * riccati_x(profile, s_grid - h)
          + 8 * riccati_x(profile, s_grid + h)
          - riccati_x(profile, s_grid + 2 * h)) / (12 * h)

    log_phi = np.asarray(w.log_phi(s_grid), dtype=float)
    quad_term = np.exp(math.log(lam2) + 2 * np.log(x) - (n - 1) * log_phi,
                       where=x > 0, out=np.zeros_like(x))
    source = np.exp((n - 3) * log_phi)
    residual = xp + quad_term - source
    residual_ok = bool(np.all(np.abs(residual) <= 1e-6 * (1.0 + source)))
    inequality_ok = bool(np.all(xp <= source + 1e-9))
    A = float(x[np.argmin(np.abs(s_grid - 1.0))])
    B = float(profile.interp(1.0))
    return RiccatiTrace(grid=s_grid, x=x, A=A, B=B, residual=residual,
                        residual_ok=residual_ok, inequality_ok=inequality_ok)


def lemma_bound_check(profile: RadialProfile, trace: RiccatiTrace,
                      w: WarpingFunction | None = None,
                      n: int | None = None, master_nodes: int = 16385):
    """Verify phi_m(s) <= B exp(int_1^s lambda^2/phi^{n-1} (A + int_1^t phi^{n-3})).

    Returns (bound curve on trace.grid, satisfied flag).  The nested
    quadrature uses only the warping function, hence is independent of the
    ODE solver: composite cumulative Simpson on a fine master grid for both
    the inner cumulative C(t) = int_1^t phi^{n-3} and the outer exponent.
    """
    from scipy.integrate import cumulative_simpson

    w = w or profile.warp
    n = n or profile.n
    lam2 = profile.mode.lambda_sq
    s_grid = trace.grid
    s_end = float(s_grid[-1])

    if lam2 == 0:
        bound = np.full_like(s_grid, trace.B)
        ok = bool(np.all(profile.interp(s_grid) <= bound * (1 + 1e-8)))
        return bound, ok

    master = np.linspace(1.0, s_end, master_nodes)
    log_phi = np.asarray(w.log_phi(master), dtype=float)
    if (n - 3) * np.max(log_phi) > 700.0:
        raise QuadratureFailure(
            "phi^{n-3} overflows double precision on the trace range; "
            "reduce the trace grid extent")
    src = np.exp((n - 3) * log_phi)
    C = cumulative_simpson(src, x=master, initial=0.0)
    h = lam2 * np.exp(-(n - 1) * log_phi) * (trace.A + C)
    H = cumulative_simpson(h, x=master, initial=0.0)
    H_at = np.interp(s_grid, master, H)
    log_bound = math.log(trace.B) + H_at
    with np.errstate(over="ignore"):
        bound = np.exp(np.minimum(log_bound, 700.0))
        bound[log_bound > 700.0] = math.inf
    log_vals = np.array([
        float(profile._log_raw(s)) - math.log(profile._scale) for s in s_grid])
    satisfied = bool(np.all(log_vals <= log_bound + math.log1p(1e-8)))
    return bound, satisfied


def ode_residual(profile: RadialProfile, w: WarpingFunction | None = None,
                 n: int | None = None, r_points=None):
    """Finite-difference residual of the mode equation on interior points."""
    w = w or profile.warp
    n = n or profile.n
    lam2 = profile.mode.lambda_sq
    if r_points is None:
        r_points = np.linspace(max(profile.r0 * 20, 0.05),
                               profile.r_max * 0.98, 200)
    r = np.asarray(r_points, dtype=float)
    h = 1e-4 * np.maximum(1.0, r)
    f = profile.interp
    d2 = (f(r + h) - 2 * f(r) + f(r - h)) / h ** 2
    d1 = (f(r + h) - f(r - h)) / (2 * h)
    phi, dphi, _ = w.eval(r)
    return d2 + (n - 1) * (dphi / phi) * d1 - lam2 / phi ** 2 * f(r)


def export_metadata_json(profiles, path):
    with open(path, "w") as fh:
        json.dump([p.metadata() for p in profiles], fh, indent=1)
