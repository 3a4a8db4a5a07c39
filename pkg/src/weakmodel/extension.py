"""Harmonic extensions u(r, omega) = sum_m phi_m(r) sum_k c_{m,k} f_{m,k}(omega).

Built only when the criterion integral converges; every radial factor is
normalized to limit 1, so u(r, .) converges to the boundary data in L^2 as
r grows, and for band-limited data the truncated series is itself an exact
harmonic function whose boundary values are the data.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import criterion as _criterion
from . import radial as _radial
from .errors import NotSolvable, OutOfRange
from .spectrum import (BoundaryData, CoefficientTable, RoundSphere,
                       SphereSpectrum, project_boundary)
from .warp import ExponentialGrowth, WarpingFunction

_TAIL_ENERGY_FRACTION = 1e-6


@dataclass
class HarmonicExtension:
    warp: WarpingFunction
    n: int
    M: int
    profiles: dict            # m -> RadialProfile, all normalized
    coeffs: CoefficientTable
    truncation_error_bound: float
    criterion: _criterion.CriterionReport
    spectrum: SphereSpectrum = None
    numeric_slack: float = 0.0
    _angular_cache: dict = field(default_factory=dict, repr=False)

    @property
    def r_max(self):
        return min(p.r_max for p in self.profiles.values())

    def mode_amplitudes(self):
        """Per-m sup-norm amplitude sum_k |c_{m,k}| * max|f_{m,k}|."""
        out = {}
        for (m, k), c in self.coeffs.items():
            out[m] = out.get(m, 0.0) + abs(c) * self.spectrum.sup_norm(m)
        return out


def default_r_max(w: WarpingFunction, n: int, M: int, r_max=None,
                  spectrum: SphereSpectrum | None = None) -> float:
    """Profile range: fixed for exponential growth, tail-certified otherwise."""
    if r_max is not None:
        return float(r_max)
    growth = w.growth_class
    if isinstance(growth, ExponentialGrowth):
        return float(min(max(30.0, 24.0 / growth.rate), 120.0))
    if spectrum is None:
        spectrum = RoundSphere(n)
    lam2_max = float(spectrum.mode(M).lambda_sq)
    return _radial.suggest_rmax(w, n, max(lam2_max, 1.0))


def _truncation_bound(coeffs: CoefficientTable, spectrum: SphereSpectrum,
                      M: int) -> float:
    """Estimated sup-norm of the discarded m > M tail via decay fit.

    Fits a geometric decay to the last nonzero mode amplitudes; for
    band-limited data all tail amplitudes vanish and the bound is the
    projection noise floor.
    """
    amps = {}
    for (m, k), c in coeffs.items():
        amps[m] = amps.get(m, 0.0) + abs(c) * spectrum.sup_norm(m)
    total = sum(amps.values())
    floor = 1e-13 * max(total, 1.0)
    nonzero = [(m, a) for m, a in sorted(amps.items()) if a > floor]
    if len(nonzero) < 3 or nonzero[-1][0] < M - 1:
        return floor
    (m1, a1), (m2, a2) = nonzero[-2], nonzero[-1]
    if m2 == m1 or a2 >= a1:
        return floor + a2  # no decay evidence: budget one more mode's worth
    rho = (a2 / a1) ** (1.0 / (m2 - m1))
    return floor + a2 * rho / (1.0 - rho)


def build_extension(w: WarpingFunction, n: int, f: BoundaryData, M: int,
                    tol: float = 1e-8, r_max=None,
                    criterion: _criterion.CriterionReport | None = None,
                    spectrum: SphereSpectrum | None = None,
                    tail_energy_fraction: float = _TAIL_ENERGY_FRACTION
                    ) -> HarmonicExtension:
    """Assemble the harmonic extension of f truncated at degree M.

    `spectrum` defaults to the round sphere; any cross-section metric can be
    supplied through the SphereSpectrum interface.  Construction warns when
    the top of the band carries more than `tail_energy_fraction` of the
    boundary energy, since the truncation bound is then unreliable.
    """
    if spectrum is None:
        spectrum = RoundSphere(n)
    if criterion is None:
        criterion = _criterion.march_criterion(w, n, tol=max(tol, 1e-10))
    if criterion.verdict != _criterion.CONVERGENT:
        raise NotSolvable(
            f"Dirichlet problem at infinity not solvable: criterion verdict "
            f"is {criterion.verdict}")
    coeffs = project_boundary(f, M)

    total = coeffs.total_energy()
    if total > 0 and M >= 2:
        tail = coeffs.tail_energy(M - 1)
        if tail > tail_energy_fraction * total:
            warnings.warn(
                f"boundary data is not well resolved at M={M}: modes >= {M - 1} "
                f"carry {tail / total:.3g} of the energy", stacklevel=2)

    R = default_r_max(w, n, M, r_max, spectrum)
    profiles = {}
    slack = 0.0
    for m in range(M + 1):
        mode = spectrum.mode(m)
        prof = _radial.solve_radial(w, n, mode, r_max=R, tol=tol,
                                    criterion=criterion)
        profiles[m] = prof
        slack = max(slack, prof.limit_error)

    return HarmonicExtension(
        warp=w, n=n, M=M, profiles=profiles, coeffs=coeffs,
        truncation_error_bound=_truncation_bound(coeffs, spectrum, M),
        criterion=criterion, spectrum=spectrum, numeric_slack=slack)


def _angular_parts(ext: HarmonicExtension, omega, cache_key=None):
    """sum_k c_{m,k} f_{m,k}(omega) for each m, vectorized over omega."""
    if cache_key is not None and cache_key in ext._angular_cache:
        return ext._angular_cache[cache_key]
    parts = {}
    for (m, k), c in ext.coeffs.items():
        if c == 0.0:
            continue
        term = c * ext.spectrum.eigenfunction(m, k, omega)
        parts[m] = parts.get(m, 0.0) + term
    if cache_key is not None:
        ext._angular_cache[cache_key] = parts
    return parts


def evaluate(ext: HarmonicExtension, r, omega):
    """u(r, omega); r scalar with omega scalar/array, 0 <= r <= r_max."""
    r = float(r)
    if r < 0 or r > ext.r_max * (1 + 1e-12):
        raise OutOfRange(f"r = {r:g} outside [0, {ext.r_max:g}]")
    parts = _angular_parts(ext, omega)
    if ext.n == 2:
        out = np.zeros_like(np.asarray(omega, dtype=float))
    else:
        out = np.zeros_like(np.asarray(omega[0], dtype=float))
    for m, ang in parts.items():
        out = out + ext.profiles[m].interp(r) * ang
    return out


def boundary_value(ext: HarmonicExtension, omega):
    """The boundary series itself: u at the sphere at infinity."""
    parts = _angular_parts(ext, omega)
    return sum(parts.values())


def l2_distance_to_boundary(ext: HarmonicExtension, r) -> float:
    """|| u(r, .) - f ||_{L^2} in coefficient space (Parseval)."""
    r = float(r)
    total = 0.0
    for m in sorted({m for m, _ in ext.coeffs.entries}):
        gap = 1.0 - ext.profiles[m].interp(r)
        total += gap * gap * ext.coeffs.mode_energy(m)
    return math.sqrt(total)


def sup_distance_on_grid(ext: HarmonicExtension, r, f: BoundaryData = None) -> float:
    """max over the quadrature grid of |u(r, omega) - f(omega)|."""
    quad = (f.quadrature if f is not None and f.quadrature is not None
            else ext.spectrum.quadrature(max(ext.M, ext.coeffs.max_m())))
    omega = quad.unpack()
    target = (f.values_on_grid() if f is not None
              else boundary_value(ext, omega))
    return float(np.max(np.abs(evaluate(ext, r, omega) - target)))


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def dump_evaluation_csv(ext: HarmonicExtension, path, r_values, n_angles=180):
    """u over a product grid; columns r,theta,u (n=2) or r,colat,lon,u (n=3)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if ext.n == 2:
            writer.writerow(["r", "theta", "u"])
            thetas = 2 * math.pi * np.arange(n_angles) / n_angles
            for r in r_values:
                vals = evaluate(ext, r, thetas)
                for th, v in zip(thetas, vals):
                    writer.writerow([f"{r:.12g}", f"{th:.12g}", f"{v:.12g}"])
        else:
            writer.writerow(["r", "colat", "lon", "u"])
            nc = max(n_angles // 2, 8)
            colat = math.pi * (np.arange(nc) + 0.5) / nc
            lon = 2 * math.pi * np.arange(n_angles) / n_angles
            cc, ll = np.meshgrid(colat, lon, indexing="ij")
            for r in r_values:
                vals = evaluate(ext, r, (cc.ravel(), ll.ravel()))
                for c0, l0, v in zip(cc.ravel(), ll.ravel(), vals):
                    writer.writerow([f"{r:.12g}", f"{c0:.12g}",
                                     f"{l0:.12g}", f"{v:.12g}"])


def summary_json(ext: HarmonicExtension, r_values) -> dict:
    return {
        "M": ext.M,
        "n": ext.n,
        "truncation_error_bound": ext.truncation_error_bound,
        "r_max": ext.r_max,
        "l2_curve": [[float(r), l2_distance_to_boundary(ext, r)]
                     for r in r_values],
    }


def export_summary_json(ext: HarmonicExtension, path, r_values):
    with open(path, "w") as fh:
        json.dump(summary_json(ext, r_values), fh, indent=1)
