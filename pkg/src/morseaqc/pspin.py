"""Ferromagnetic p-spin model: semiclassical energy and quantum b-sweep.

The single-angle classical energy adopted here,

    e_b(s, theta) = -s b sin(theta)^p + s (1-b) cos(theta)^k - (1-s) cos(theta),

is the unique such form whose p = 2, b = 1 stationarity condition
reproduces the known continuous minimizer cos(theta*) = (1-s)/(2s); that
reproduction is asserted by the acceptance tests rather than assumed.

First-order transitions are located by tracking the occupied minimum
while scanning s downward from s = 1 (the magnetized endpoint): a jump
of the tracked minimizer marks the fold where its well disappears.  For
p = 5, b = 1 that spinodal sits at s = 0.3811; the crossing of the two
wells' *values* happens later (near s = 0.469) and is exposed separately
through mode="global" so neither quantity hides the other.

The quantum side sweeps the stoquasticity parameter b of the sector
Hamiltonian, runs the landscape census at each b, and checks the
homotopy signature: constant Euler characteristic with critical points
appearing and disappearing only in pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .landscape import CensusConfig, CharPolyField, CriticalCensus, find_critical_points, window_from_path
from .operators import build_pspin


# ---------------------------------------------------------------------------
# Classical (thermodynamic-limit) energy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassicalEnergy:
    """Single-particle continuous-spin energy e_b(s, theta) on [0, pi]."""

    p: int
    k: int = 2
    b: float = 1.0

    def __post_init__(self):
        if self.p < 1 or self.k < 1:
            raise InvalidArgumentError("p and k must be >= 1")
        if not (0.0 <= self.b <= 1.0):
            raise InvalidArgumentError("b must lie in [0, 1]")

    def value(self, s, theta):
        s = np.asarray(s, dtype=float)
        th = np.asarray(theta, dtype=float)
        return (-s * self.b * np.sin(th) ** self.p
                + s * (1.0 - self.b) * np.cos(th) ** self.k
                - (1.0 - s) * np.cos(th))

    def __call__(self, s, theta):
        return self.value(s, theta)


def _golden_min(fn, a: float, b: float, tol: float = 1e-10) -> float:
    """Golden-section minimizer on [a, b] to absolute x tolerance."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def classical_minimizer(energy: ClassicalEnergy, s: float,
                        theta_grid_density: int = 4096) -> float:
    """Global minimizer theta* of e_b(s, .) on [0, pi].

    Grid scan followed by golden-section refinement of the bracketing
    cell; exact ties break toward smaller theta (argmin picks the first).
    """
    if not (0.0 <= s <= 1.0):
        raise InvalidArgumentError(f"s must lie in [0, 1], got {s}")
    th = np.linspace(0.0, np.pi, theta_grid_density)
    vals = energy.value(s, th)
    i = int(np.argmin(vals))
    a = th[max(i - 1, 0)]
    b = th[min(i + 1, len(th) - 1)]
    return _golden_min(lambda t: float(energy.value(s, t)), a, b)


def _local_minimizer(energy: ClassicalEnergy, s: float, theta0: float,
                     probe_halfwidth: float = 0.06) -> float:
    """Slide to the nearest local minimum of e_b(s, .) starting at theta0.

    Repeatedly minimizes over a small moving bracket; when the current
    well has disappeared (fold), the bracket slides downhill until a new
    stationary pocket (or a domain endpoint) is reached.
    """
    theta = float(np.clip(theta0, 0.0, np.pi))
    max_slides = int(np.ceil(np.pi / probe_halfwidth)) + 4
    for _ in range(max_slides):
        a = max(0.0, theta - probe_halfwidth)
        b = min(np.pi, theta + probe_halfwidth)
        grid = np.linspace(a, b, 41)
        j = int(np.argmin(energy.value(s, grid)))
        best = grid[j]
        if 0 < j < len(grid) - 1:
            return _golden_min(lambda t: float(energy.value(s, t)), grid[j - 1], grid[j + 1])
        if (best == 0.0 and j == 0) or (best == np.pi and j == len(grid) - 1):
            return float(best)   # pinned at a domain endpoint
        theta = float(best)      # bracket edge: keep sliding downhill
    return theta


@dataclass(frozen=True)
class TransitionEvent:
    """A discontinuity of the (tracked or global) minimizer curve."""

    s_star: float
    jump: float
    theta_before: float
    theta_after: float


def transition_locator(energy: ClassicalEnergy, s_resolution: float = 1e-3,
                       jump_threshold: float = 0.1,
                       mode: str = "tracked") -> list[TransitionEvent]:
    """Locate first-order minimizer discontinuities of the classical energy.

    mode="tracked" (default) scans s downward from 1, warm-starting a
    local minimizer at the previous theta*; the curve jumps exactly where
    the occupied well folds away (the spinodal), which is the
    discontinuity the model's minimizer plot exhibits.  mode="global"
    scans the global minimizer instead, jumping where the two wells'
    values cross.  An empty list means the tracked curve is continuous at
    resolution (second-order or no transition).
    """
    if s_resolution > 1e-3 + 1e-15:
        raise InvalidArgumentError("s_resolution must be <= 1e-3")
    if mode not in ("tracked", "global"):
        raise InvalidArgumentError(f"unknown mode {mode!r}")
    n = int(round(1.0 / s_resolution))
    s_grid = np.linspace(1.0, 0.0, n + 1)
    events: list[TransitionEvent] = []
    theta_prev = classical_minimizer(energy, 1.0)
    for s_hi, s in zip(s_grid[:-1], s_grid[1:]):
        if mode == "tracked":
            theta = _local_minimizer(energy, float(s), theta_prev)
        else:
            theta = classical_minimizer(energy, float(s))
        if abs(theta - theta_prev) > jump_threshold:
            events.append(TransitionEvent(
                s_star=0.5 * (float(s_hi) + float(s)),
                jump=abs(theta - theta_prev),
                theta_before=theta_prev, theta_after=theta))
        theta_prev = theta
    events.sort(key=lambda e: e.s_star)
    return events


# ---------------------------------------------------------------------------
# Quantum b-sweep
# ---------------------------------------------------------------------------

@dataclass
class BSweepRecord:
    """Census summary of the sector landscape at one stoquasticity value."""

    b: float
    counts: tuple[int, int, int]     # (minima, saddles, maxima)
    chi: int | None
    flagged: bool
    census: CriticalCensus

    @property
    def total(self) -> int:
        return sum(self.counts)


_DOMAIN_PAD = 1e-6


def _sweep_record(n: int, p: int, k: int, b: float, seed_density: int,
                  lam_margin: float, s_margin: float) -> BSweepRecord:
    """Census at one b, restricted to the closed path domain.

    The census window extends s_margin past the domain so that structure
    within rounding of the endpoints is resolved stably (several saddles
    sit at s = 1 to 1e-9), but only critical points with s in the closed
    domain (plus a rounding pad) belong to the evolution; margin-zone
    points are census artifacts of the analytic extension and are
    dropped from the record's counts.
    """
    path = build_pspin(n, p, b, k)
    window = window_from_path(path, s_margin=s_margin, lam_margin=lam_margin)
    field = CharPolyField(path, window=window)
    census = find_critical_points(field, grid_density=seed_density)
    lo, hi = path.domain
    kept = [p_ for p_ in census.points
            if lo - _DOMAIN_PAD <= p_.s <= hi + _DOMAIN_PAD]
    flagged = any(p_.degenerate for p_ in kept) or (not census.converged)
    counts = (sum(1 for p_ in kept if p_.index == 0),
              sum(1 for p_ in kept if p_.index == 1),
              sum(1 for p_ in kept if p_.index == 2))
    chi = None if flagged else counts[0] - counts[1] + counts[2]
    domain_census = CriticalCensus(points=kept, boundary_points=census.boundary_points,
                                   converged=census.converged,
                                   grid_density=census.grid_density,
                                   newton_tol_abs=census.newton_tol_abs,
                                   merge_radius=census.merge_radius)
    return BSweepRecord(b=b, counts=counts, chi=chi, flagged=flagged, census=domain_census)


def b_sweep(n: int, p: int, k: int = 2, b_grid=None, seed_density: int = 64,
            lam_margin: float = 0.5, s_margin: float = 0.1,
            refine_flagged: bool = True) -> list[BSweepRecord]:
    """Landscape census of the p-spin path across stoquasticity values.

    Runs the full critical-point census of f_b(s, lam) for each b in the
    grid (41 uniform points on [0, 1] by default).  The window extends
    ``s_margin`` beyond the path domain: part of the critical structure
    sits within rounding of s = 1 (at b = 0 several branch crossings land
    exactly there), and a window clamped to the domain would drop it and
    break the constant-Euler-characteristic signature.  Records where the
    census is non-Morse or unconverged (a birth/death bifurcation sitting
    on the grid) are flagged with chi omitted; each flagged value
    triggers one local refinement of 10 extra b points to bracket the
    event.  Records are returned in increasing b order.
    """
    if n < 1 or n > 12:
        raise InvalidArgumentError("sector sweep supports 1 <= n <= 12")
    if b_grid is None:
        b_grid = np.linspace(0.0, 1.0, 41)
    b_grid = np.unique(np.asarray(b_grid, dtype=float))
    if np.any((b_grid < 0) | (b_grid > 1)):
        raise InvalidArgumentError("b grid must lie within [0, 1]")
    records = [_sweep_record(n, p, k, float(b), seed_density, lam_margin, s_margin)
               for b in b_grid]
    if refine_flagged and any(r.flagged for r in records) and len(b_grid) > 1:
        step = float(np.min(np.diff(b_grid))) if len(b_grid) > 1 else 0.0
        extras: list[float] = []
        for r in records:
            if r.flagged and step > 0:
                lo = max(0.0, r.b - 0.5 * step)
                hi = min(1.0, r.b + 0.5 * step)
                extras.extend(np.linspace(lo, hi, 12)[1:-1])
        known = {r.b for r in records}
        for b in sorted(set(np.round(extras, 12)) - known):
            records.append(_sweep_record(n, p, k, float(b), seed_density, lam_margin, s_margin))
    records.sort(key=lambda r: r.b)
    return records


@dataclass(frozen=True)
class HomotopyVerdict:
    passed: bool
    chi: int | None
    failures: tuple[str, ...]


def homotopy_check(records: list[BSweepRecord]) -> HomotopyVerdict:
    """Verify the constant-topology signature of the b-deformation.

    Passes when all non-flagged records share one Euler characteristic
    and the total critical count changes by an even number between
    adjacent non-flagged records (pair birth/death).
    """
    ok = [r for r in records if not r.flagged]
    if len(ok) < 2:
        return HomotopyVerdict(False, None, ("need at least two non-flagged records",))
    failures: list[str] = []
    chis = {r.chi for r in ok}
    chi = ok[0].chi if len(chis) == 1 else None
    if len(chis) != 1:
        failures.append(f"Euler characteristic varies across b: {sorted(chis)}")
    for a, b in zip(ok[:-1], ok[1:]):
        if (a.total - b.total) % 2 != 0:
            failures.append(f"odd critical-count change on b in [{a.b:g}, {b.b:g}]")
    return HomotopyVerdict(passed=not failures, chi=chi, failures=tuple(failures))
