"""Differential-geometric layer of the landscape.

Gaussian curvature of the graph of f, principal curvatures at critical
points (where the shape operator reduces to the Hessian), the local
conic (Dupin) approximation of the zero level set around a saddle and
the tunneling delay factor it implies, total-curvature quadrature for
Gauss-Bonnet budget checks, and eigenvalue-branch tracing along a path.

Around a nondegenerate critical point p the field is
f(p) + (k1 xi^2 + k2 eta^2)/2 + h.o.t. in principal axes.  The vertical
slice s = const intersects the level set f = 0 in two points whose
distance, for the exact quadratic model in the original (s, lam) axes, is

    g(s)^2 = -(4 / a) * (2 f(p) + (det H / a) (s - s_p)^2),   a = f_lamlam(p).

The pair (det H / a, a) coincides with the principal curvatures (k1, k2)
whenever the mixed partial vanishes at p (true for the reduced search
landscape) and always preserves the product k1 k2 = det H = K(p); it is
the slice-corrected parameterization the gap and delay quantities use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import (DegenerateCriticalPointError, DivergentDelayError,
                     InvalidArgumentError, NoIntersectionError)
from .landscape import CharPolyField, CriticalPoint, LandscapeField, Window
from .operators import HamiltonianPath


# ---------------------------------------------------------------------------
# Curvature
# ---------------------------------------------------------------------------

def gauss_curvature(field: LandscapeField, s, lam, printed_numerator: bool = False):
    """Gaussian curvature of the graph z = f(s, lam).

    K = (f_ss f_ll - f_sl^2) / (1 + f_s^2 + f_l^2)^2.  The
    ``printed_numerator`` switch replaces f_sl^2 by f_l^2 to reproduce a
    non-standard printed form for side-by-side comparison only; it is not
    the graph curvature.
    """
    s = np.asarray(s, dtype=float)
    lam = np.asarray(lam, dtype=float)
    gs, gl = field.gradient(s, lam)
    f_ss, f_sl, f_ll = field.hessian(s, lam)
    if printed_numerator:
        num = f_ss * f_ll - gl ** 2
    else:
        num = f_ss * f_ll - f_sl ** 2
    K = num / (1.0 + gs ** 2 + gl ** 2) ** 2
    return float(K) if np.ndim(K) == 0 else K


def principal_curvatures(field: LandscapeField, point: CriticalPoint) -> tuple[float, float]:
    """Principal curvatures at a nondegenerate critical point.

    With the gradient zero, the second fundamental form of the graph
    equals the Hessian, so these are just its eigenvalues (ascending).
    """
    if point.degenerate:
        raise DegenerateCriticalPointError(f"point {point.id} is degenerate")
    k1, k2 = np.linalg.eigvalsh(point.hessian)
    return float(k1), float(k2)


@dataclass(frozen=True)
class DupinParams:
    """Conic-family parameters at a critical point.

    level is f(p); k_slice and k_transverse are the slice-corrected
    curvature pair described in the module docstring (equal to the
    principal curvatures when the Hessian is diagonal in (s, lam)).
    """

    level: float
    k_slice: float
    k_transverse: float
    s_center: float
    lam_center: float


@dataclass
class CurvatureReport:
    """Local curvature data of one critical point."""

    point_id: str
    K: float
    k1: float
    k2: float
    dupin: DupinParams | None = None
    delay: float | None = None

    @property
    def is_saddle_geometry(self) -> bool:
        return self.K < 0


def curvature_report(field: LandscapeField, point: CriticalPoint) -> CurvatureReport:
    """Assemble the curvature quantities at a census point.

    K is evaluated from the Hessian (the gradient vanishes, so the graph
    formula's denominator is one and K = k1 k2).  Dupin parameters are
    attached whenever the vertical-slice conic is nondegenerate
    (f_lamlam != 0); the delay factor is filled in by the caller when a
    slice range is known (see delay_factor).
    """
    k1, k2 = principal_curvatures(field, point)
    K = k1 * k2
    H = point.hessian
    a = float(H[1, 1])
    dupin = None
    if abs(a) > 1e-14 * max(abs(k1), abs(k2)):
        dupin = DupinParams(level=point.value, k_slice=K / a, k_transverse=a,
                            s_center=point.s, lam_center=point.lam)
    return CurvatureReport(point_id=point.id, K=K, k1=k1, k2=k2, dupin=dupin)


# ---------------------------------------------------------------------------
# Dupin gap and delay factor
# ---------------------------------------------------------------------------

def dupin_gap(report: CurvatureReport, s) -> float | np.ndarray:
    """Level-set gap at slice s predicted by the local conic model.

        g(s) = 2 sqrt(-k_t (2 f(p) + k_s (s - s_p)^2)) / |k_t|

    Exact whenever the field is globally quadratic; third-order accurate
    in s - s_p otherwise.  Raises NoIntersectionError when the slice
    misses the conic (negative radicand).
    """
    if report.dupin is None:
        raise InvalidArgumentError(f"no Dupin parameters for point {report.point_id}")
    d = report.dupin
    s = np.asarray(s, dtype=float)
    inner = -d.k_transverse * (2.0 * d.level + d.k_slice * (s - d.s_center) ** 2)
    if np.any(inner < -1e-15 * max(1.0, abs(d.level))):
        raise NoIntersectionError(
            f"slice misses the local conic at point {report.point_id}")
    inner = np.maximum(inner, 0.0)
    g = 2.0 * np.sqrt(inner) / abs(d.k_transverse)
    return float(g) if np.ndim(g) == 0 else g


def delay_factor(report: CurvatureReport, s_range: tuple[float, float],
                 epsrel: float = 1e-11) -> float:
    """Total delay integral(ds / g(s)^2) across a saddle.

    The integrand of the conic model is rational,

        1 / g^2 = -k_t / (4 (2 f(p) + k_s (s - s_p)^2)),

    integrated by adaptive quadrature with the peak located at s_p.  A
    real root of the denominator inside the range is a level crossing and
    raises DivergentDelayError.
    """
    if report.dupin is None:
        raise InvalidArgumentError(f"no Dupin parameters for point {report.point_id}")
    if report.K >= 0:
        raise InvalidArgumentError("delay factor is defined at saddle geometry (K < 0)")
    d = report.dupin
    a, c0, c1 = d.k_transverse, 2.0 * d.level, d.k_slice
    lo, hi = float(s_range[0]), float(s_range[1])
    if lo >= hi:
        raise InvalidArgumentError(f"empty slice range {s_range}")
    # pole check: c0 + c1 (s - s_p)^2 = 0 inside [lo, hi]
    if c0 == 0.0:
        raise DivergentDelayError("level set touches the saddle (f(p) = 0)")
    if c0 * c1 < 0:
        root = math.sqrt(-c0 / c1)
        for r in (d.s_center - root, d.s_center + root):
            if lo - 1e-12 <= r <= hi + 1e-12:
                raise DivergentDelayError(f"gap vanishes at s = {r:.6g} inside the range")

    def integrand(s):
        return -a / (4.0 * (c0 + c1 * (s - d.s_center) ** 2))

    points = [d.s_center] if lo < d.s_center < hi else None
    value, _err = quad(integrand, lo, hi, epsabs=0.0, epsrel=epsrel,
                       limit=400, points=points)
    return float(value)


def delay_factor_closed_form(report: CurvatureReport,
                             s_range: tuple[float, float]) -> float | None:
    """Arctan antiderivative of the conic delay integrand, as a cross-check.

    Only evaluated when f(p) and k_slice have the same sign (no real pole,
    positive-definite denominator up to overall sign); returns None when
    the parameters do not permit the closed form.
    """
    if report.dupin is None:
        return None
    d = report.dupin
    a, c0, c1 = d.k_transverse, 2.0 * d.level, d.k_slice
    if c0 * c1 <= 0:
        return None
    r = math.sqrt(c1 / c0)

    def antiderivative(s):
        return (-a / 4.0) * (1.0 / (c0 * r)) * math.atan(r * (s - d.s_center))

    return antiderivative(float(s_range[1])) - antiderivative(float(s_range[0]))


# ---------------------------------------------------------------------------
# Gauss-Bonnet quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussBonnetResult:
    value: float
    coarse_value: float
    converged: bool
    rel_change: float
    density: int


def _curvature_measure(field: LandscapeField, S, L):
    """K dsigma / (ds dlam) = det(Hess) / (1 + |grad f|^2)^(3/2)."""
    gs, gl = field.gradient(S, L)
    f_ss, f_sl, f_ll = field.hessian(S, L)
    return (f_ss * f_ll - f_sl ** 2) / (1.0 + gs ** 2 + gl ** 2) ** 1.5


def _tensor_quad(field: LandscapeField, region: Window, nodes_per_axis: int) -> float:
    """Composite 16-point Gauss-Legendre product rule over the region."""
    per_panel = 16
    panels = max(1, nodes_per_axis // per_panel)
    x, w = np.polynomial.legendre.leggauss(per_panel)

    def axis_nodes(lo, hi):
        edges = np.linspace(lo, hi, panels + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        return nodes, weights

    sn, sw = axis_nodes(region.s_lo, region.s_hi)
    ln, lw = axis_nodes(region.lam_lo, region.lam_hi)
    S, L = np.meshgrid(sn, ln, indexing="ij")
    vals = _curvature_measure(field, S, L)
    return float(sw @ vals @ lw)


def gauss_bonnet_integral(field: LandscapeField, region: Window | None = None,
                          quadrature_density: int = 256) -> GaussBonnetResult:
    """Total Gaussian curvature of the graph over a region.

    Tensor-product Gauss-Legendre quadrature of K dsigma, evaluated at
    the requested density and at twice the density; agreement within 1%
    marks the result converged (the finer value is returned either way).
    """
    region = region or field.window
    coarse = _tensor_quad(field, region, quadrature_density)
    fine = _tensor_quad(field, region, 2 * quadrature_density)
    scale = max(abs(fine), abs(coarse), 1e-30)
    rel = abs(fine - coarse) / scale
    return GaussBonnetResult(value=fine, coarse_value=coarse,
                             converged=bool(rel <= 0.01), rel_change=rel,
                             density=quadrature_density)


# ---------------------------------------------------------------------------
# Spectrum tracing
# ---------------------------------------------------------------------------

@dataclass
class SpectrumBranch:
    """One eigenvalue branch lam_i(s) sampled along the path."""

    index: int
    s: np.ndarray
    values: np.ndarray
    min_gap_to_next: float | None
    min_gap_location: float | None
    flagged: bool = False


def spectrum_trace(path: HamiltonianPath, s_samples, field: CharPolyField | None = None,
                   zero_tol: float = 1e-9, gap_resolution: float = 1e-12,
                   max_refinements: int = 6) -> list[SpectrumBranch]:
    """Eigenvalue branches of H(s), verified against the landscape zero set.

    Branches come from diagonalization at each sample, matched across
    samples by sorted order (one-parameter Hermitian families have no
    generic crossings) with nearest-value continuation used as the
    refinement criterion: sample spacing is halved wherever a branch
    moves by more than half its local gap between adjacent samples.
    Every sample is re-verified to satisfy f(s, lam_i(s)) = 0 within
    zero_tol times the spectral scale.  Branch pairs whose gap falls
    below ``gap_resolution`` times the spectral spread are flagged as
    matcher-ambiguous rather than merged.
    """
    s = np.unique(np.asarray(s_samples, dtype=float))
    if s.size < 2:
        raise InvalidArgumentError("need at least two s samples")
    if not path.contains(s):
        raise InvalidArgumentError("s samples outside the path domain")
    field = field or CharPolyField(path)

    def eigs(ss):
        mu, _, _ = field._eig(ss)
        return mu

    mu = eigs(s)
    for _ in range(max_refinements):
        if mu.shape[1] < 2:
            break
        gaps = np.diff(mu, axis=1)
        local_gap = np.minimum.reduce([
            np.pad(gaps, ((0, 0), (0, 1)), constant_values=np.inf),
            np.pad(gaps, ((0, 0), (1, 0)), constant_values=np.inf),
        ])
        move = np.abs(np.diff(mu, axis=0))
        tight = np.minimum(local_gap[:-1], local_gap[1:])
        bad_rows = np.any(move > 0.5 * np.maximum(tight, 1e-300), axis=1)
        if not np.any(bad_rows):
            break
        mids = 0.5 * (s[:-1][bad_rows] + s[1:][bad_rows])
        s = np.unique(np.concatenate([s, mids]))
        mu = eigs(s)

    spread = max(float(np.max(mu) - np.min(mu)), 1e-300)
    scale = field.spectrum_scale()
    resid = np.abs(field.value(s[:, None] * np.ones_like(mu), mu))
    if np.max(resid) > zero_tol * scale:
        raise InvalidArgumentError(
            f"traced branch fails the landscape zero check: max |f| = {np.max(resid):.3e} "
            f"> {zero_tol:.1e} * {scale:.3e}")

    branches = []
    d = mu.shape[1]
    for i in range(d):
        if i < d - 1:
            gap = mu[:, i + 1] - mu[:, i]
            j = int(np.argmin(gap))
            min_gap, at = float(gap[j]), float(s[j])
            flag = min_gap < gap_resolution * spread
        else:
            min_gap, at, flag = None, None, False
        branches.append(SpectrumBranch(index=i, s=s.copy(), values=mu[:, i].copy(),
                                       min_gap_to_next=min_gap, min_gap_location=at,
                                       flagged=flag))
    # flag both members of an ambiguous pair
    for i in range(d - 1):
        if branches[i].flagged:
            branches[i + 1].flagged = True
    return branches
