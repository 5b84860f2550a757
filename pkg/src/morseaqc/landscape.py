"""Scalar landscape f(s, lam) = det(H(s) - lam I) and its critical structure.

The landscape of a Hermitian path is evaluated spectrally: with
mu_i(s) the eigenvalues of H(s),

    f(s, lam)        = prod_i (mu_i - lam)
    d f / d lam      = -sum_i prod_{j != i} (mu_j - lam)
    d f / d s        =  sum_i mu_i'(s) prod_{j != i} (mu_j - lam)

which is the adjugate/trace identity tr(adj(H - lam I) dA) evaluated in
the eigenbasis; it is exact to rounding and needs no finite-difference
step, including at eigenvalue degeneracies (the exclusion products never
divide).  mu_i'(s) comes from first-order perturbation theory.

Second derivatives default to central differences of the analytic
gradient; an exact spectral second-derivative oracle is provided for
small dimensions as a validation path.

Explicit closed-form fields (polynomials and arbitrary callables with
analytic gradients) share the same interface, so the critical-point
machinery below is source-agnostic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidArgumentError, PerturbationTooLargeError
from .operators import HamiltonianPath

# ---------------------------------------------------------------------------
# Window
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle [s_lo, s_hi] x [lam_lo, lam_hi]."""

    s_lo: float
    s_hi: float
    lam_lo: float
    lam_hi: float

    def __post_init__(self):
        if not (self.s_lo < self.s_hi and self.lam_lo < self.lam_hi):
            raise InvalidArgumentError(f"degenerate window {self}")

    @property
    def width_s(self) -> float:
        return self.s_hi - self.s_lo

    @property
    def width_lam(self) -> float:
        return self.lam_hi - self.lam_lo

    @property
    def diagonal(self) -> float:
        return float(np.hypot(self.width_s, self.width_lam))

    def contains(self, s, lam, pad: float = 0.0) -> bool:
        s = np.asarray(s, dtype=float)
        lam = np.asarray(lam, dtype=float)
        return bool(np.all((s >= self.s_lo - pad) & (s <= self.s_hi + pad)
                           & (lam >= self.lam_lo - pad) & (lam <= self.lam_hi + pad)))

    def interior_distance(self, s: float, lam: float) -> float:
        """Distance from a point to the nearest window edge (negative outside)."""
        return min(s - self.s_lo, self.s_hi - s, lam - self.lam_lo, self.lam_hi - lam)

    def as_tuple(self):
        return (self.s_lo, self.s_hi, self.lam_lo, self.lam_hi)


# ---------------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------------

class LandscapeField:
    """Common interface: vectorized value / gradient / Hessian on a window.

    Subclasses must implement ``_value`` and ``_gradient``; the Hessian
    defaults to central differences of the analytic gradient with a step
    of ``hessian_step_rel`` times each axis width.
    """

    hessian_step_rel = 1e-4

    def __init__(self, window: Window):
        self.window = window

    # -- to implement -------------------------------------------------
    def _value(self, s, lam):
        raise NotImplementedError

    def _gradient(self, s, lam):
        raise NotImplementedError

    # -- shared -------------------------------------------------------
    def value(self, s, lam):
        s, lam = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(lam, dtype=float))
        return self._value(s, lam)

    def gradient(self, s, lam):
        s, lam = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(lam, dtype=float))
        return self._gradient(s, lam)

    def hessian(self, s, lam):
        """(f_ss, f_slam, f_lamlam); mixed partial symmetrized."""
        s, lam = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(lam, dtype=float))
        hs = self.hessian_step_rel * self.window.width_s
        hl = self.hessian_step_rel * self.window.width_lam
        gs_p, gl_p = self._gradient(s + hs, lam)
        gs_m, gl_m = self._gradient(s - hs, lam)
        gs_u, gl_u = self._gradient(s, lam + hl)
        gs_d, gl_d = self._gradient(s, lam - hl)
        f_ss = (gs_p - gs_m) / (2 * hs)
        f_ll = (gl_u - gl_d) / (2 * hl)
        f_sl = 0.5 * ((gl_p - gl_m) / (2 * hs) + (gs_u - gs_d) / (2 * hl))
        return f_ss, f_sl, f_ll

    def hessian_matrix(self, s: float, lam: float) -> np.ndarray:
        f_ss, f_sl, f_ll = self.hessian(s, lam)
        return np.array([[float(f_ss), float(f_sl)], [float(f_sl), float(f_ll)]])

    def value_scale(self, samples: int = 33) -> float:
        """Characteristic |f| scale over the window, for relative tolerances."""
        cached = getattr(self, "_value_scale", None)
        if cached is not None:
            return cached
        s = np.linspace(self.window.s_lo, self.window.s_hi, samples)
        lam = np.linspace(self.window.lam_lo, self.window.lam_hi, samples)
        S, L = np.meshgrid(s, lam, indexing="ij")
        self._value_scale = max(float(np.max(np.abs(self.value(S, L)))), 1e-300)
        return self._value_scale

    def gradient_scale(self, samples: int = 33) -> float:
        """Median gradient magnitude over the window, for relative tolerances."""
        cached = getattr(self, "_gradient_scale", None)
        if cached is not None:
            return cached
        s = np.linspace(self.window.s_lo, self.window.s_hi, samples)
        lam = np.linspace(self.window.lam_lo, self.window.lam_hi, samples)
        S, L = np.meshgrid(s, lam, indexing="ij")
        gs, gl = self.gradient(S, L)
        norms = np.hypot(gs, gl)
        self._gradient_scale = max(float(np.median(norms)), 1e-300)
        return self._gradient_scale


class CharPolyField(LandscapeField):
    """Characteristic-polynomial landscape of a Hermitian path."""

    def __init__(self, path: HamiltonianPath, window: Window | None = None,
                 s_margin: float = 0.0, lam_margin: float = 0.5):
        if window is None:
            window = window_from_path(path, s_margin=s_margin, lam_margin=lam_margin)
        super().__init__(window)
        self.path = path
        g = path.metric
        if g is None:
            self._gh = self._gih = None
        else:
            w, V = np.linalg.eigh(np.asarray(g, dtype=float))
            if np.min(w) <= 0:
                raise InvalidArgumentError("basis metric must be positive definite")
            self._gh = (V * np.sqrt(w)) @ V.T
            self._gih = (V / np.sqrt(w)) @ V.T

    # -- spectral plumbing ---------------------------------------------
    def _sym_stack(self, M):
        """Similarity transform making the stack entrywise Hermitian."""
        if self._gh is not None:
            M = self._gh @ M @ self._gih
        return 0.5 * (M + np.conj(np.swapaxes(M, -1, -2)))

    def _eig(self, s):
        """Eigenvalues and derivative diagonals at each s; shapes (..., d)."""
        H = self._sym_stack(self.path.matrix_stack(s))
        mu, Q = np.linalg.eigh(H)
        B = self._sym_stack(self.path.derivative_stack(s))
        dmu = np.einsum("...ki,...kl,...li->...i", np.conj(Q), B, Q).real
        return mu, Q, dmu

    @staticmethod
    def _exclusion_products(diffs):
        """prod_{j != i} diffs_j along the last axis, division-free."""
        d = diffs.shape[-1]
        pref = np.ones_like(diffs)
        suf = np.ones_like(diffs)
        np.cumprod(diffs[..., :-1], axis=-1, out=pref[..., 1:])
        np.cumprod(diffs[..., :0:-1], axis=-1, out=suf[..., -2::-1])
        return pref * suf

    # -- field interface -----------------------------------------------
    def _value(self, s, lam):
        mu, _, _ = self._eig(s)
        return np.prod(mu - lam[..., None], axis=-1)

    def _gradient(self, s, lam):
        mu, _, dmu = self._eig(s)
        diffs = mu - lam[..., None]
        pi = self._exclusion_products(diffs)
        f_s = np.sum(dmu * pi, axis=-1)
        f_lam = -np.sum(pi, axis=-1)
        return f_s, f_lam

    def hessian_exact(self, s: float, lam: float, gap_rtol: float = 1e-9):
        """Exact spectral second derivatives; validation oracle for dim <= 8.

        Requires a simple spectrum at s (the second-order eigenvalue
        derivative needs it); raises InvalidArgumentError otherwise.
        """
        d = self.path.dim
        if d > 8:
            raise InvalidArgumentError("exact Hessian oracle limited to dim <= 8")
        s_arr = np.asarray(float(s))
        H = self._sym_stack(self.path.matrix_stack(s_arr))
        mu, Q = np.linalg.eigh(H)
        spread = max(np.max(mu) - np.min(mu), 1.0)
        gaps = np.diff(mu)
        if d > 1 and np.min(gaps) < gap_rtol * spread:
            raise InvalidArgumentError("spectrum not simple at this s; oracle undefined")
        W = np.conj(Q).T @ self._sym_stack(self.path.derivative_stack(s_arr)) @ Q
        W2 = np.conj(Q).T @ self._sym_stack(self.path.second_derivative_stack(s_arr)) @ Q
        b = np.real(np.diag(W))
        # second-order perturbation theory for mu_i''
        denom = mu[:, None] - mu[None, :]
        np.fill_diagonal(denom, 1.0)
        off = np.abs(W - np.diag(np.diag(W))) ** 2
        corr = 2.0 * np.sum(off / denom, axis=1)
        b2 = np.real(np.diag(W2)) + corr
        diffs = mu - lam
        pi = self._exclusion_products(diffs[None, :])[0]
        pij = np.zeros((d, d))
        for i, j in itertools.permutations(range(d), 2):
            mask = np.ones(d, dtype=bool)
            mask[[i, j]] = False
            pij[i, j] = np.prod(diffs[mask])
        f_ll = float(np.sum(pij))
        f_sl = -float(np.sum(b[:, None] * pij))
        f_ss = float(np.sum(b2 * pi) + np.sum(np.outer(b, b) * pij))
        return f_ss, f_sl, f_ll

    def spectrum_scale(self, samples: int = 33) -> float:
        """max over s of prod_i (1 + |mu_i|); the f = 0 check scale."""
        s = np.linspace(self.window.s_lo, self.window.s_hi, samples)
        mu, _, _ = self._eig(s)
        return float(np.max(np.prod(1.0 + np.abs(mu), axis=-1)))


class ExplicitField(LandscapeField):
    """Closed-form bivariate field with analytic gradient.

    ``hess_fn``, when given, must return (f_ss, f_slam, f_lamlam); else
    second derivatives fall back to differences of the gradient.
    """

    def __init__(self, value_fn, grad_fn, window: Window, hess_fn=None, label: str = "explicit"):
        super().__init__(window)
        self._fn = value_fn
        self._grad = grad_fn
        self._hess = hess_fn
        self.label = label

    def _value(self, s, lam):
        return np.asarray(self._fn(s, lam), dtype=float)

    def _gradient(self, s, lam):
        gs, gl = self._grad(s, lam)
        return np.asarray(gs, dtype=float), np.asarray(gl, dtype=float)

    def hessian(self, s, lam):
        if self._hess is None:
            return super().hessian(s, lam)
        s, lam = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(lam, dtype=float))
        a, b, c = self._hess(s, lam)
        return (np.asarray(a, dtype=float), np.asarray(b, dtype=float), np.asarray(c, dtype=float))


def polynomial_field(coeffs: dict, window: Window, label: str = "poly") -> ExplicitField:
    """Field sum c_ij s^i lam^j from a coefficient table {(i, j): c_ij}.

    Derivatives are exact coefficient manipulations, so the Hessian of a
    polynomial field carries no finite-difference error.
    """
    if not coeffs:
        raise InvalidArgumentError("empty polynomial coefficient table")
    deg_s = max(i for i, _ in coeffs) + 1
    deg_l = max(j for _, j in coeffs) + 1
    C = np.zeros((deg_s, deg_l))
    for (i, j), c in coeffs.items():
        if i < 0 or j < 0:
            raise InvalidArgumentError(f"negative exponent in coefficient table: {(i, j)}")
        C[i, j] = float(c)

    def _ds(M):
        return (M[1:, :].T * np.arange(1, M.shape[0])).T if M.shape[0] > 1 else np.zeros((1, M.shape[1]))

    def _dl(M):
        return M[:, 1:] * np.arange(1, M.shape[1]) if M.shape[1] > 1 else np.zeros((M.shape[0], 1))

    Cs, Cl = _ds(C), _dl(C)
    Css, Csl, Cll = _ds(Cs), _dl(Cs), _dl(Cl)
    pv = np.polynomial.polynomial.polyval2d
    return ExplicitField(
        value_fn=lambda s, l: pv(s, l, C),
        grad_fn=lambda s, l: (pv(s, l, Cs), pv(s, l, Cl)),
        hess_fn=lambda s, l: (pv(s, l, Css), pv(s, l, Csl), pv(s, l, Cll)),
        window=window,
        label=label,
    )


class PerturbedField(LandscapeField):
    """Base field plus eps * (s - s_center); used to split degenerate points."""

    def __init__(self, base: LandscapeField, eps: float, s_center: float):
        super().__init__(base.window)
        self.base = base
        self.eps = float(eps)
        self.s_center = float(s_center)

    def _value(self, s, lam):
        return self.base.value(s, lam) + self.eps * (s - self.s_center)

    def _gradient(self, s, lam):
        gs, gl = self.base.gradient(s, lam)
        return gs + self.eps, gl

    def hessian(self, s, lam):
        return self.base.hessian(s, lam)


# ---------------------------------------------------------------------------
# Spec'd module operations (window-checked scalar wrappers)
# ---------------------------------------------------------------------------

def _check_window(field: LandscapeField, s, lam):
    pad = 1e-12 * field.window.diagonal
    if not field.window.contains(s, lam, pad=pad):
        raise DomainError(f"point ({s}, {lam}) outside window {field.window.as_tuple()}")


def field_value(field: LandscapeField, s, lam):
    """f(s, lam); raises DomainError outside the field window."""
    _check_window(field, s, lam)
    out = field.value(s, lam)
    return float(out) if np.ndim(out) == 0 else out


def gradient(field: LandscapeField, s, lam):
    """(df/ds, df/dlam); raises DomainError outside the field window."""
    _check_window(field, s, lam)
    gs, gl = field.gradient(s, lam)
    if np.ndim(gs) == 0:
        return float(gs), float(gl)
    return gs, gl


def hessian(field: LandscapeField, s, lam) -> np.ndarray:
    """Symmetric 2x2 matrix of second partials at a single point."""
    _check_window(field, s, lam)
    return field.hessian_matrix(float(s), float(lam))


def window_from_path(path: HamiltonianPath, s_margin: float = 0.0,
                     lam_margin: float = 0.5, samples: int = 101) -> Window:
    """Analysis window for a path: Gershgorin bounds over a dense s-sample.

    The eigenvalue range of H(s) is bounded per sample by Gershgorin discs
    of the symmetrized matrix; the union over samples, inflated by
    ``lam_margin``, gives the lam-range.  The s-range is the path domain
    inflated by ``s_margin``.
    """
    s = np.linspace(path.domain[0], path.domain[1], samples)
    H = path.matrix_stack(s)
    g = path.metric
    if g is not None:
        w, V = np.linalg.eigh(np.asarray(g, dtype=float))
        gh = (V * np.sqrt(w)) @ V.T
        gih = (V / np.sqrt(w)) @ V.T
        H = gh @ H @ gih
    H = 0.5 * (H + np.swapaxes(H, -1, -2))
    centers = np.diagonal(H, axis1=-2, axis2=-1)
    radii = np.sum(np.abs(H), axis=-1) - np.abs(centers)
    lam_lo = float(np.min(centers - radii)) - lam_margin
    lam_hi = float(np.max(centers + radii)) + lam_margin
    if lam_hi <= lam_lo:  # zero path: all discs degenerate to a point
        mid = 0.5 * (lam_hi + lam_lo)
        lam_lo, lam_hi = mid - max(lam_margin, 1e-6), mid + max(lam_margin, 1e-6)
    return Window(path.domain[0] - s_margin, path.domain[1] + s_margin, lam_lo, lam_hi)


# ---------------------------------------------------------------------------
# Critical points
# ---------------------------------------------------------------------------

@dataclass
class CriticalPoint:
    """A gradient zero with its local second-order data."""

    id: str
    s: float
    lam: float
    value: float
    hessian: np.ndarray
    k1: float
    k2: float
    index: int | None
    degenerate: bool
    grad_norm: float

    @property
    def location(self) -> tuple[float, float]:
        return (self.s, self.lam)


@dataclass
class CriticalCensus:
    """All interior critical points of a field window, classified."""

    points: list[CriticalPoint]
    boundary_points: list[CriticalPoint] = field(default_factory=list)
    converged: bool = True
    grid_density: int = 0
    newton_tol_abs: float = 0.0
    merge_radius: float = 0.0

    @property
    def n_min(self) -> int:
        return sum(1 for p in self.points if p.index == 0)

    @property
    def n_saddle(self) -> int:
        return sum(1 for p in self.points if p.index == 1)

    @property
    def n_max(self) -> int:
        return sum(1 for p in self.points if p.index == 2)

    @property
    def n_degenerate(self) -> int:
        return sum(1 for p in self.points if p.degenerate)

    @property
    def counts(self) -> tuple[int, int, int, int]:
        return (self.n_min, self.n_saddle, self.n_max, self.n_degenerate)

    @property
    def is_morse(self) -> bool:
        return self.n_degenerate == 0

    @property
    def euler_from_counts(self) -> int:
        return self.n_min - self.n_saddle + self.n_max

    def by_id(self, pid: str) -> CriticalPoint:
        for p in self.points:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def by_index(self, index: int) -> list[CriticalPoint]:
        return [p for p in self.points if p.index == index]


@dataclass(frozen=True)
class CensusConfig:
    """Knobs for the multistart Newton census.

    ``newton_tol`` and ``merge_radius_rel`` are relative: the gradient
    tolerance is scaled by the field's median gradient magnitude (a
    determinant landscape of an 8-level path has |grad f| in the 1e6
    range, where a fixed 1e-10 would be below rounding noise), and the
    merge radius by the window diagonal.
    """

    grid_density: int = 64
    newton_tol: float = 1e-10
    max_newton_iters: int = 60
    merge_radius_rel: float = 1e-5
    degeneracy_tol: float = 1e-8
    boundary_band_rel: float = 1e-7
    max_density_doublings: int = 1


def _newton_sweep(field: LandscapeField, density: int, tol_abs: float, cfg: CensusConfig):
    """Batched Newton iteration on grad f = 0 from a density x density grid.

    A chord variant: the forward-difference Jacobian is refreshed every
    few iterations and reused in between, since field evaluations (a
    batched eigendecomposition for determinant landscapes) dominate the
    cost.  Returns an array of converged root locations (possibly with
    duplicates) lying within a slightly inflated window.
    """
    w = field.window
    # cell-centered seeds
    s_seeds = w.s_lo + (np.arange(density) + 0.5) * (w.width_s / density)
    l_seeds = w.lam_lo + (np.arange(density) + 0.5) * (w.width_lam / density)
    S, L = np.meshgrid(s_seeds, l_seeds, indexing="ij")
    x = np.stack([S.ravel(), L.ravel()], axis=1)
    n = len(x)
    active = np.ones(n, dtype=bool)
    converged = np.zeros(n, dtype=bool)
    J = np.zeros((n, 4))          # rows (j11, j12, j21, j22)
    hs = field.hessian_step_rel * w.width_s
    hl = field.hessian_step_rel * w.width_lam
    max_step = 0.5 * w.diagonal
    pad_s, pad_l = 0.25 * w.width_s, 0.25 * w.width_lam
    refresh_every = 4

    for it in range(cfg.max_newton_iters):
        if not np.any(active):
            break
        s, lam = x[active, 0], x[active, 1]
        gs, gl = field.gradient(s, lam)
        gnorm = np.hypot(gs, gl)
        done = gnorm <= tol_abs
        idx = np.nonzero(active)[0]
        converged[idx[done]] = True
        active[idx[done]] = False
        still = ~done
        if not np.any(still):
            continue
        s, lam, gs, gl = s[still], lam[still], gs[still], gl[still]
        idx = idx[still]
        if it % refresh_every == 0:
            # forward-difference Jacobian; classification later uses the
            # central-difference Hessian, this only steers the iteration
            gsp, glp = field.gradient(s + hs, lam)
            gsu, glu = field.gradient(s, lam + hl)
            J[idx, 0] = (gsp - gs) / hs
            J[idx, 1] = (gsu - gs) / hl
            J[idx, 2] = (glp - gl) / hs
            J[idx, 3] = (glu - gl) / hl
        j11, j12, j21, j22 = J[idx, 0], J[idx, 1], J[idx, 2], J[idx, 3]
        det = j11 * j22 - j12 * j21
        with np.errstate(divide="ignore", invalid="ignore"):
            ds = (j22 * gs - j12 * gl) / det
            dl = (-j21 * gs + j11 * gl) / det
        bad = ~np.isfinite(ds) | ~np.isfinite(dl)
        step = np.hypot(ds, dl)
        stalled = step < 4e-16 * w.diagonal  # cannot improve further at this precision
        too_big = step > max_step
        scale = np.where(too_big, max_step / np.maximum(step, 1e-300), 1.0)
        ds, dl = ds * scale, dl * scale
        ns, nl = s - ds, lam - dl
        out = ((ns < w.s_lo - pad_s) | (ns > w.s_hi + pad_s)
               | (nl < w.lam_lo - pad_l) | (nl > w.lam_hi + pad_l))
        drop = bad | out | stalled
        active[idx[drop]] = False
        keep = ~drop
        x[idx[keep], 0] = ns[keep]
        x[idx[keep], 1] = nl[keep]
    return x[converged]


def _dedup(points: np.ndarray, radius: float) -> list[np.ndarray]:
    """Greedy clustering of root locations within a merge radius."""
    if len(points) == 0:
        return []
    order = np.lexsort((points[:, 1], points[:, 0]))
    pts = points[order]
    reps: list[np.ndarray] = []   # running cluster means
    sums: list[np.ndarray] = []
    sizes: list[int] = []
    for p in pts:
        placed = False
        for i, r in enumerate(reps):
            if np.hypot(p[0] - r[0], p[1] - r[1]) <= radius:
                sums[i] += p
                sizes[i] += 1
                reps[i] = sums[i] / sizes[i]
                placed = True
                break
        if not placed:
            reps.append(p.copy())
            sums.append(p.copy())
            sizes.append(1)
    return reps


def _merge_flat_clusters(field: LandscapeField, reps: list[np.ndarray],
                         tol_abs: float) -> list[np.ndarray]:
    """Merge representatives joined by a gradient-flat segment.

    A gradient zero of order >= 3 stops Newton anywhere inside a
    tolerance ball far wider than the merge radius, leaving a cloud of
    pseudo-roots around one degenerate point.  Two representatives are
    the same point when |grad f| stays at tolerance level along the whole
    segment between them; distinct critical points always have a
    gradient bump in between.
    """
    n = len(reps)
    if n < 2:
        return reps
    pts = np.array(reps)
    r_cand = 0.05 * field.window.diagonal
    ii, jj = np.triu_indices(n, k=1)
    close = np.hypot(pts[ii, 0] - pts[jj, 0], pts[ii, 1] - pts[jj, 1]) <= r_cand
    ii, jj = ii[close], jj[close]
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if len(ii):
        ts = np.linspace(0.0, 1.0, 11)[1:-1]
        seg = pts[ii, None, :] * (1 - ts[None, :, None]) + pts[jj, None, :] * ts[None, :, None]
        gs, gl = field.gradient(seg[..., 0], seg[..., 1])
        flat = np.max(np.hypot(gs, gl), axis=1) <= 10.0 * tol_abs
        for i, j in zip(ii[flat], jj[flat]):
            ri, rj = find(int(i)), find(int(j))
            if ri != rj:
                parent[rj] = ri
    clusters: dict[int, list[np.ndarray]] = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(reps[i])
    return [np.mean(group, axis=0) for group in sorted(clusters.values(),
                                                       key=lambda g: (g[0][0], g[0][1]))]


def _polish(field: LandscapeField, reps: list[np.ndarray], iters: int = 30) -> list[np.ndarray]:
    """Extra tolerance-free Newton steps per representative.

    Degenerate roots converge only linearly, so the tolerance-gated sweep
    stops well short of the true center; a fixed number of further steps
    brings the location to rounding level.  The lowest-|grad| iterate is
    kept, so nondegenerate (already machine-accurate) roots are unchanged
    and diverging steps are discarded.
    """
    if not reps:
        return reps
    w = field.window
    # far smaller step than the classification Hessian: the Jacobian must
    # stay meaningful while the residual curvature shrinks near a
    # higher-order zero
    hs = 1e-7 * w.width_s
    hl = 1e-7 * w.width_lam
    x = np.array(reps, dtype=float)
    best = x.copy()
    gs, gl = field.gradient(x[:, 0], x[:, 1])
    best_norm = np.hypot(gs, gl)
    for _ in range(iters):
        s, lam = x[:, 0], x[:, 1]
        gs, gl = field.gradient(s, lam)
        gsp, glp = field.gradient(s + hs, lam)
        gsm, glm = field.gradient(s - hs, lam)
        gsu, glu = field.gradient(s, lam + hl)
        gsd, gld = field.gradient(s, lam - hl)
        j11 = (gsp - gsm) / (2 * hs)
        j21 = (glp - glm) / (2 * hs)
        j12 = (gsu - gsd) / (2 * hl)
        j22 = (glu - gld) / (2 * hl)
        det = j11 * j22 - j12 * j21
        with np.errstate(divide="ignore", invalid="ignore"):
            ds = (j22 * gs - j12 * gl) / det
            dl = (-j21 * gs + j11 * gl) / det
        step = np.hypot(ds, dl)
        ok = np.isfinite(step) & (step < 0.01 * w.diagonal)
        x[ok, 0] -= ds[ok]
        x[ok, 1] -= dl[ok]
        ngs, ngl = field.gradient(x[:, 0], x[:, 1])
        norm = np.hypot(ngs, ngl)
        better = norm <= best_norm
        best[better] = x[better]
        best_norm[better] = norm[better]
    return [best[i] for i in range(len(reps))]


def _classify(field: LandscapeField, s: float, lam: float, pid: str,
              cfg: CensusConfig, curvature_floor: float = 0.0) -> CriticalPoint:
    H = field.hessian_matrix(s, lam)
    k1, k2 = np.linalg.eigvalsh(H)
    det = k1 * k2
    # The floor catches fully collapsing Hessians (e.g. a monkey saddle
    # approached numerically has |det| ~ max(|k|)^2 with both tiny), which
    # the point's own scale cannot flag.
    scale = max(abs(k1), abs(k2), curvature_floor, 1e-300)
    degenerate = abs(det) <= cfg.degeneracy_tol * scale * scale
    index = None if degenerate else int(np.sum(np.array([k1, k2]) < 0))
    gs, gl = field.gradient(np.asarray(s), np.asarray(lam))
    return CriticalPoint(
        id=pid, s=float(s), lam=float(lam),
        value=float(field.value(np.asarray(s), np.asarray(lam))),
        hessian=H, k1=float(k1), k2=float(k2),
        index=index, degenerate=bool(degenerate),
        grad_norm=float(np.hypot(gs, gl)),
    )


def _census_once(field: LandscapeField, density: int, cfg: CensusConfig,
                 tol_abs: float, curvature_floor: float) -> CriticalCensus:
    w = field.window
    merge_radius = cfg.merge_radius_rel * w.diagonal
    roots = _newton_sweep(field, density, tol_abs, cfg)
    reps = _dedup(roots, merge_radius)
    reps = _merge_flat_clusters(field, reps, tol_abs)
    reps = _polish(field, reps)
    band = max(cfg.boundary_band_rel * w.diagonal, 1e-300)
    interior, boundary = [], []
    for r in reps:
        dist = w.interior_distance(r[0], r[1])
        if dist > band:
            interior.append(r)
        elif dist >= -band:
            boundary.append(r)
        # roots that wandered clearly outside the window are not census material
    interior.sort(key=lambda r: (r[0], r[1]))
    boundary.sort(key=lambda r: (r[0], r[1]))
    points = [_classify(field, r[0], r[1], f"p{i}", cfg, curvature_floor)
              for i, r in enumerate(interior)]
    bpoints = [_classify(field, r[0], r[1], f"b{i}", cfg, curvature_floor)
               for i, r in enumerate(boundary)]
    return CriticalCensus(points=points, boundary_points=bpoints, converged=True,
                          grid_density=density, newton_tol_abs=tol_abs,
                          merge_radius=merge_radius)


def _censuses_agree(a: CriticalCensus, b: CriticalCensus) -> bool:
    if len(a.points) != len(b.points):
        return False
    radius = max(a.merge_radius, b.merge_radius)
    for pa, pb in zip(a.points, b.points):
        if np.hypot(pa.s - pb.s, pa.lam - pb.lam) > radius:
            return False
        if pa.index != pb.index or pa.degenerate != pb.degenerate:
            return False
    return True


def find_critical_points(field: LandscapeField, grid_density: int = 64,
                         newton_tol: float = 1e-10, max_newton_iters: int = 60,
                         config: CensusConfig | None = None) -> CriticalCensus:
    """Locate and classify all interior critical points of a field window.

    Seeds Newton's method on the gradient from every cell of a
    ``grid_density`` x ``grid_density`` grid, deduplicates converged roots
    within the merge radius, and classifies each by its Hessian spectrum.
    The census is recomputed at twice the density as a convergence check;
    on disagreement the density is doubled once more, and a census that
    still disagrees is returned with ``converged=False``.

    Critical points within a thin band of the window edge are excluded
    from ``points`` and reported in ``boundary_points``.
    """
    if grid_density < 8:
        raise InvalidArgumentError("grid_density must be at least 8 per axis")
    cfg = config or CensusConfig(grid_density=grid_density, newton_tol=newton_tol,
                                 max_newton_iters=max_newton_iters)
    grad_scale = field.gradient_scale()
    tol_abs = cfg.newton_tol * grad_scale
    floor = grad_scale / field.window.diagonal
    census = _census_once(field, cfg.grid_density, cfg, tol_abs, floor)
    finer = _census_once(field, 2 * cfg.grid_density, cfg, tol_abs, floor)
    doublings = 0
    while not _censuses_agree(census, finer):
        if doublings >= cfg.max_density_doublings:
            finer.converged = False
            break
        doublings += 1
        census, finer = finer, _census_once(field, 4 * cfg.grid_density, cfg, tol_abs, floor)
    return finer


# ---------------------------------------------------------------------------
# Degenerate (k-fold) critical points
# ---------------------------------------------------------------------------

def _harmonic_pair_coeffs(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Monomial coefficients of Re((x+iy)^m) and Im((x+iy)^m).

    Returned as length-(m+1) vectors over the basis x^m, x^(m-1) y, ..., y^m.
    """
    re = np.zeros(m + 1)
    im = np.zeros(m + 1)
    for j in range(m + 1):
        c = float(math.comb(m, j))
        if j % 2 == 0:
            re[j] = c * (-1.0) ** (j // 2)
        else:
            im[j] = c * (-1.0) ** ((j - 1) // 2)
    return re, im


def detect_kfold(field: LandscapeField, point: CriticalPoint, k_max: int = 5,
                 fit_radius_rel: float = 5e-3, fit_tol: float = 1e-3) -> int | None:
    """Identify a degenerate critical point as a k-fold saddle.

    Fits a local polynomial of total degree up to k_max + 1 on circles
    around the point, finds the lowest nonvanishing homogeneous part
    beyond the constant, and accepts k = degree - 1 when that part is a
    rotation of Re((x+iy)^(degree)) (equivalently, harmonic) and all
    lower-degree parts vanish at fit tolerance.  Returns None when no
    such model matches (not a k-fold point).
    """
    if not point.degenerate:
        raise InvalidArgumentError("detect_kfold requires a degenerate critical point")
    w = field.window
    r0 = fit_radius_rel * w.diagonal
    deg_max = k_max + 1
    thetas = np.linspace(0.0, 2 * np.pi, 64, endpoint=False)
    radii = r0 * np.array([1.0, 0.75, 0.5, 0.25])
    R, T = np.meshgrid(radii, thetas, indexing="ij")
    xs = (R * np.cos(T)).ravel()
    ys = (R * np.sin(T)).ravel()
    fvals = field.value(point.s + xs, point.lam + ys) - field.value(
        np.asarray(point.s), np.asarray(point.lam))
    # design matrix over monomials x^a y^b, 1 <= a+b <= deg_max,
    # scaled by r0^deg so coefficient blocks are comparable
    cols, keys = [], []
    for deg in range(1, deg_max + 1):
        for b in range(deg + 1):
            a = deg - b
            cols.append((xs ** a) * (ys ** b) / r0 ** deg)
            keys.append((deg, a, b))
    A = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(A, np.asarray(fvals, dtype=float).ravel(), rcond=None)
    block = {deg: np.array([c for c, (d, _, _) in zip(coef, keys) if d == deg])
             for deg in range(1, deg_max + 1)}
    norms = {deg: float(np.linalg.norm(v)) for deg, v in block.items()}
    top = max(norms.values())
    if top <= 0:
        return None
    lead = None
    for deg in range(2, deg_max + 1):
        if norms[deg] > fit_tol * top:
            lead = deg
            break
    if lead is None or lead < 3:
        # quadratic leading part means the point is not a k-fold model
        return None
    # lower-degree parts (including the linear one) must vanish
    for deg in range(1, lead):
        if norms[deg] > fit_tol * norms[lead]:
            return None
    re, im = _harmonic_pair_coeffs(lead)
    basis = np.stack([re, im], axis=1)
    h = block[lead]
    proj, *_ = np.linalg.lstsq(basis, h, rcond=None)
    resid = float(np.linalg.norm(h - basis @ proj)) / norms[lead]
    if resid > max(fit_tol, 1e-6):
        return None
    return lead - 1


def perturb_split(field: LandscapeField, point: CriticalPoint, eps: float,
                  isolating_radius: float | None = None,
                  census_density: int = 64) -> tuple[LandscapeField, CriticalCensus]:
    """Split a k-fold saddle by adding eps * (s - s_p) to the field.

    Returns the perturbed field together with the census of the isolating
    neighborhood around the original point.  With eps > 0 the census must
    contain exactly k nondegenerate saddles, all inside the isolating
    disc; points found outside the disc (or a wrong count) mean the
    perturbation pushed structure out of the neighborhood and raise
    PerturbationTooLargeError.  eps = 0 returns the unchanged field.
    """
    if eps < 0:
        raise InvalidArgumentError("perturbation size must be nonnegative")
    w = field.window
    if isolating_radius is None:
        isolating_radius = 0.25 * max(w.interior_distance(point.s, point.lam), 1e-3 * w.diagonal)
    perturbed = PerturbedField(field, eps, point.s)
    box = 1.6 * isolating_radius
    sub = Window(max(w.s_lo, point.s - box), min(w.s_hi, point.s + box),
                 max(w.lam_lo, point.lam - box), min(w.lam_hi, point.lam + box))
    local_view = _WindowedField(perturbed, sub)
    census = find_critical_points(local_view, grid_density=census_density)
    if eps == 0:
        return perturbed, census
    k = detect_kfold(field, point)
    if k is None:
        raise InvalidArgumentError("perturb_split requires a detected k-fold saddle")
    inside, outside = [], []
    for p in census.points + census.boundary_points:
        r = np.hypot(p.s - point.s, p.lam - point.lam)
        (inside if r <= isolating_radius else outside).append(p)
    if outside or len(inside) != k or any(p.degenerate or p.index != 1 for p in inside):
        raise PerturbationTooLargeError(
            f"expected {k} saddles inside radius {isolating_radius:.3g}, "
            f"found {len(inside)} inside / {len(outside)} escaped")
    kept = CriticalCensus(points=sorted(inside, key=lambda p: (p.s, p.lam)),
                          boundary_points=[], converged=census.converged,
                          grid_density=census.grid_density,
                          newton_tol_abs=census.newton_tol_abs,
                          merge_radius=census.merge_radius)
    for i, p in enumerate(kept.points):
        p.id = f"p{i}"
    return perturbed, kept


class _WindowedField(LandscapeField):
    """View of a field restricted to a sub-window (shares evaluations)."""

    def __init__(self, base: LandscapeField, window: Window):
        super().__init__(window)
        self.base = base

    def _value(self, s, lam):
        return self.base.value(s, lam)

    def _gradient(self, s, lam):
        return self.base.gradient(s, lam)

    def hessian(self, s, lam):
        return self.base.hessian(s, lam)
