"""Closed-form example landscapes with analytic derivatives.

Small gallery of explicit fields used by the demos and the test suite:
quadratic model saddles and bowls, the double well, pure k-fold saddles,
and a rational field whose four critical points realize the
deformed-sphere flow pattern (one minimum, one saddle, two maxima, with
both downhill separatrices of the saddle draining into the same minimum).
"""

from __future__ import annotations

import numpy as np

from .landscape import ExplicitField, Window


def quadratic_field(k1: float, k2: float, window: Window | None = None,
                    level: float = 0.0) -> ExplicitField:
    """f = level + (k1 s^2 + k2 lam^2) / 2; exact quadratic model."""
    if window is None:
        window = Window(-1.0, 1.0, -1.0, 1.0)
    return ExplicitField(
        value_fn=lambda s, l: level + 0.5 * (k1 * s ** 2 + k2 * l ** 2),
        grad_fn=lambda s, l: (k1 * s, k2 * l),
        hess_fn=lambda s, l: (k1 * np.ones_like(s), np.zeros_like(s), k2 * np.ones_like(s)),
        window=window,
        label=f"quadratic(k1={k1:g},k2={k2:g})",
    )


def saddle_field(window: Window | None = None) -> ExplicitField:
    """f = lam^2 - s^2, the canonical nondegenerate saddle."""
    return quadratic_field(-2.0, 2.0, window or Window(-1.0, 1.0, -1.0, 1.0))


def bowl_field(window: Window | None = None) -> ExplicitField:
    """f = s^2 + lam^2."""
    return quadratic_field(2.0, 2.0, window or Window(-1.0, 1.0, -1.0, 1.0))


def double_well_field(window: Window | None = None) -> ExplicitField:
    """f = (s^2 - 1)^2 + lam^2: two minima at (+-1, 0), saddle at the origin."""
    if window is None:
        window = Window(-2.0, 2.0, -2.0, 2.0)
    return ExplicitField(
        value_fn=lambda s, l: (s ** 2 - 1.0) ** 2 + l ** 2,
        grad_fn=lambda s, l: (4.0 * s * (s ** 2 - 1.0), 2.0 * l),
        hess_fn=lambda s, l: (12.0 * s ** 2 - 4.0, np.zeros_like(s), 2.0 * np.ones_like(s)),
        window=window,
        label="double-well",
    )


def k_fold_field(k: int, window: Window | None = None) -> ExplicitField:
    """f = Re((s + i lam)^(k+1)): the pure k-fold saddle model.

    k = 1 is the ordinary saddle s^2 - lam^2; k = 2 the monkey saddle
    s^3 - 3 s lam^2.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if window is None:
        window = Window(-1.0, 1.0, -1.0, 1.0)
    m = k + 1

    def z(s, l):
        return np.asarray(s, dtype=float) + 1j * np.asarray(l, dtype=float)

    return ExplicitField(
        value_fn=lambda s, l: np.real(z(s, l) ** m),
        grad_fn=lambda s, l: (m * np.real(z(s, l) ** (m - 1)),
                              -m * np.imag(z(s, l) ** (m - 1))),
        hess_fn=lambda s, l: (m * (m - 1) * np.real(z(s, l) ** (m - 2)),
                              -m * (m - 1) * np.imag(z(s, l) ** (m - 2)),
                              -m * (m - 1) * np.real(z(s, l) ** (m - 2))),
        window=window,
        label=f"{k}-fold-saddle",
    )


def monkey_saddle_field(window: Window | None = None) -> ExplicitField:
    """f = s^3 - 3 s lam^2 (= Re (s + i lam)^3); degenerate 2-fold saddle."""
    f = k_fold_field(2, window)
    f.label = "monkey-saddle"
    return f


# Critical points of the two-peak sphere field below, exact to closed form:
# minimum, saddle, and the two maxima (in that order).
TWO_PEAK_SPHERE_POINTS = (
    (0.0, -1.0),
    (0.0, 1.0),
    (np.sqrt(6.0) / (4.0 - np.sqrt(6.0)), 2.0 / (4.0 - np.sqrt(6.0))),
    (-np.sqrt(6.0) / (4.0 + np.sqrt(6.0)), 2.0 / (4.0 + np.sqrt(6.0))),
)


def two_peak_sphere_field(window: Window | None = None) -> ExplicitField:
    """Planar field realizing the deformed-sphere critical pattern.

    Take the unit sphere with the Morse function Z + Y^2 (height plus a
    bump term): its critical points are a minimum at the south pole, a
    saddle at the north pole and two maxima at (0, +-sqrt(3)/2, 1/2).
    Pulling back through a stereographic chart centered on a regular
    point chosen OFF the two invariant great circles (the separatrix
    skeleton) yields a rational plane field

        f(u, v) = 2 v T + (u^2 + v^2 - 1 + 2 u)^2 T^2 / 2,
        T = 1 / (u^2 + v^2 + 1),

    whose four critical points and their connecting flow lines all stay
    at finite radius: the saddle's two downhill separatrices both reach
    the minimum (so its mod-2 boundary vanishes) and its two uphill ones
    reach one maximum each.  A generic rectangle window cannot host this
    pattern with transverse boundary flow, which is why the fixture is
    built on the sphere and projected.
    """
    if window is None:
        window = Window(-3.2, 3.2, -2.2, 2.2)

    def value(u, v):
        rho2 = u ** 2 + v ** 2
        T = 1.0 / (rho2 + 1.0)
        w = rho2 - 1.0 + 2.0 * u
        return 2.0 * v * T + 0.5 * w ** 2 * T ** 2

    def grad(u, v):
        rho2 = u ** 2 + v ** 2
        T = 1.0 / (rho2 + 1.0)
        w = rho2 - 1.0 + 2.0 * u
        T2, T3 = T * T, T * T * T
        f_u = -4.0 * u * v * T2 + w * (2.0 * u + 2.0) * T2 - 2.0 * u * w ** 2 * T3
        f_v = 2.0 * T - 4.0 * v ** 2 * T2 + 2.0 * v * w * T2 - 2.0 * v * w ** 2 * T3
        return f_u, f_v

    return ExplicitField(value_fn=value, grad_fn=grad, window=window,
                         label="two-peak-sphere")
