"""Gradient flow, flow-line counting, and GF(2) homology of a census.

The downward flow x' = -grad f is integrated with an adaptive 4th/5th
order pair (scipy's RK45) until it is captured inside a small radius of
a census point, crosses the window edge, or times out.  Connecting flow
lines between critical points of adjacent index are found by launching
trajectories a small offset along the saddle Hessian eigenvectors; their
mod-2 tallies assemble the boundary matrices of the chain complex, whose
GF(2) homology and Euler characteristic summarize the handle structure
of the window.

Boundary exits contribute nothing to the boundary matrices (the
relative-homology convention for a cobordism with exits).  A connection
between two saddles signals broken transversality; the tally is then
marked non-certifiable rather than silently kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import InternalConsistencyError, InvalidArgumentError, NonCertifiableError
from .gf2 import gf2_matmul, gf2_rank
from .landscape import CriticalCensus, CriticalPoint, LandscapeField

EDGE_NAMES = ("s_lo", "s_hi", "lam_lo", "lam_hi")


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """A single integrated flow line."""

    origin: str                      # critical-point id or "seed"
    direction: str                   # "down" | "up"
    start: tuple[float, float]
    tau: np.ndarray                  # sample times
    points: np.ndarray               # (n, 2) sampled (s, lam)
    f_values: np.ndarray
    terminus_kind: str               # "critical-point" | "boundary" | "unresolved"
    terminus_id: str | None = None   # census id when captured
    terminus_edge: str | None = None  # window edge name when exited

    @property
    def resolved(self) -> bool:
        return self.terminus_kind != "unresolved"


@dataclass(frozen=True)
class FlowControl:
    """Integration knobs for the gradient flow.

    capture_radius_rel and launch_offset_rel scale with the window
    diagonal; tau_span_factor fixes tau_max so that the starting speed
    times tau_max would cross the window about that many times.
    """

    rtol: float = 1e-9
    atol_rel: float = 1e-12
    capture_radius_rel: float = 1e-3
    launch_offset_rel: float = 1e-4
    tau_span_factor: float = 100.0
    max_samples: int = 400


def integrate_flow(field: LandscapeField, start: tuple[float, float], direction: str,
                   targets: Sequence[CriticalPoint] = (),
                   ctrl: FlowControl | None = None,
                   origin: str = "seed") -> Trajectory:
    """Integrate x' = -grad f (down) or +grad f (up) from a starting point.

    Terminates on first capture within the control's capture radius of a
    target census point, on crossing the window edge, or at tau_max
    (reported as unresolved for the caller to decide).
    """
    if direction not in ("down", "up"):
        raise InvalidArgumentError(f"direction must be 'down' or 'up', got {direction!r}")
    ctrl = ctrl or FlowControl()
    w = field.window
    diag = w.diagonal
    capture = ctrl.capture_radius_rel * diag
    sign = -1.0 if direction == "down" else 1.0
    s0, l0 = float(start[0]), float(start[1])
    if not w.contains(s0, l0):
        raise InvalidArgumentError(f"flow start {start} outside window")

    def rhs(_t, y):
        gs, gl = field.gradient(np.asarray(y[0]), np.asarray(y[1]))
        return (sign * float(gs), sign * float(gl))

    g0 = np.hypot(*rhs(0.0, (s0, l0)))
    if g0 <= 1e-12 * field.gradient_scale():
        raise InvalidArgumentError("flow start is a critical point (zero gradient)")
    tau_max = ctrl.tau_span_factor * diag / g0

    events = []
    for p in targets:
        def cap_event(_t, y, px=p.s, py=p.lam):
            return (y[0] - px) ** 2 + (y[1] - py) ** 2 - capture ** 2
        cap_event.terminal = True
        cap_event.direction = -1.0
        events.append(cap_event)
    n_targets = len(events)
    for edge_fn in (
        lambda _t, y: y[0] - w.s_lo,
        lambda _t, y: w.s_hi - y[0],
        lambda _t, y: y[1] - w.lam_lo,
        lambda _t, y: w.lam_hi - y[1],
    ):
        edge_fn.terminal = True
        events.append(edge_fn)

    sol = solve_ivp(rhs, (0.0, tau_max), (s0, l0), method="RK45",
                    rtol=ctrl.rtol, atol=ctrl.atol_rel * diag, events=events,
                    dense_output=False)
    tau = sol.t
    pts = sol.y.T
    if len(tau) > ctrl.max_samples:
        keep = np.unique(np.linspace(0, len(tau) - 1, ctrl.max_samples).astype(int))
        tau, pts = tau[keep], pts[keep]

    kind, tid, tedge = "unresolved", None, None
    fired = [i for i, te in enumerate(sol.t_events) if len(te) > 0]
    if fired:
        first = min(fired, key=lambda i: sol.t_events[i][0])
        if first < n_targets:
            kind, tid = "critical-point", targets[first].id
        else:
            kind, tedge = "boundary", EDGE_NAMES[first - n_targets]
    fvals = field.value(pts[:, 0], pts[:, 1])
    return Trajectory(origin=origin, direction=direction, start=(s0, l0),
                      tau=tau, points=pts, f_values=np.asarray(fvals, dtype=float),
                      terminus_kind=kind, terminus_id=tid, terminus_edge=tedge)


def separatrices(field: LandscapeField, saddle: CriticalPoint,
                 census: CriticalCensus, ctrl: FlowControl | None = None) -> list[Trajectory]:
    """The four flow lines leaving a nondegenerate saddle.

    Two downward trajectories start a small offset along the negative
    Hessian eigenvector (where f decreases), two upward along the
    positive one.  The saddle itself is excluded from the capture targets
    (f is monotone along trajectories, so no flow line returns).
    """
    if saddle.degenerate or saddle.index != 1:
        raise InvalidArgumentError(f"separatrices need a nondegenerate saddle, got {saddle.id}")
    ctrl = ctrl or FlowControl()
    delta = ctrl.launch_offset_rel * field.window.diagonal
    evals, evecs = np.linalg.eigh(saddle.hessian)
    e_down = evecs[:, 0]   # eigenvalue k1 < 0
    e_up = evecs[:, 1]     # eigenvalue k2 > 0
    targets = [p for p in census.points if p.id != saddle.id]
    out = []
    for sgn in (+1.0, -1.0):
        start = (saddle.s + sgn * delta * e_down[0], saddle.lam + sgn * delta * e_down[1])
        out.append(integrate_flow(field, start, "down", targets, ctrl, origin=saddle.id))
    for sgn in (+1.0, -1.0):
        start = (saddle.s + sgn * delta * e_up[0], saddle.lam + sgn * delta * e_up[1])
        out.append(integrate_flow(field, start, "up", targets, ctrl, origin=saddle.id))
    return out


# ---------------------------------------------------------------------------
# Flow-line counting
# ---------------------------------------------------------------------------

@dataclass
class InstantonEdge:
    """Connecting flow lines between critical points of adjacent index."""

    source: str                     # higher-index point
    target: str                     # index one lower
    multiplicity_mod2: int
    connection_count: int
    representative: Trajectory


@dataclass
class InstantonTally:
    edges: list[InstantonEdge]
    certifiable: bool
    notes: list[str] = field(default_factory=list)
    trajectories: list[Trajectory] = field(default_factory=list)


def count_instantons(field: LandscapeField, census: CriticalCensus,
                     ctrl: FlowControl | None = None) -> InstantonTally:
    """Tally saddle separatrix termini into mod-2 connection counts.

    Downward separatrices landing on minima give saddle -> minimum edges;
    upward ones landing on maxima give maximum -> saddle edges.  Boundary
    exits count for nothing.  Unresolved separatrices or saddle-to-saddle
    connections (a transversality failure: tilt the field slightly) mark
    the tally non-certifiable.
    """
    if not census.is_morse:
        raise InvalidArgumentError("instanton counting requires a Morse census")
    ctrl = ctrl or FlowControl()
    pairs: dict[tuple[str, str], list[Trajectory]] = {}
    notes: list[str] = []
    certifiable = True
    all_traj: list[Trajectory] = []
    for saddle in census.by_index(1):
        for traj in separatrices(field, saddle, census, ctrl):
            all_traj.append(traj)
            if not traj.resolved:
                certifiable = False
                notes.append(f"unresolved separatrix from {saddle.id} ({traj.direction})")
                continue
            if traj.terminus_kind == "boundary":
                continue
            other = census.by_id(traj.terminus_id)
            if other.index == 1:
                certifiable = False
                notes.append(
                    f"saddle-to-saddle connection {saddle.id} -> {other.id}; "
                    "transversality fails, perturb the field slightly")
                continue
            if traj.direction == "down":
                if other.index != 0:
                    certifiable = False
                    notes.append(f"downward separatrix from {saddle.id} captured at "
                                 f"index-{other.index} point {other.id}")
                    continue
                pairs.setdefault((saddle.id, other.id), []).append(traj)
            else:
                if other.index != 2:
                    certifiable = False
                    notes.append(f"upward separatrix from {saddle.id} captured at "
                                 f"index-{other.index} point {other.id}")
                    continue
                pairs.setdefault((other.id, saddle.id), []).append(traj)
    edges = [InstantonEdge(source=src, target=dst,
                           multiplicity_mod2=len(ts) % 2,
                           connection_count=len(ts),
                           representative=ts[0])
             for (src, dst), ts in sorted(pairs.items())]
    return InstantonTally(edges=edges, certifiable=certifiable, notes=notes,
                          trajectories=all_traj)


# ---------------------------------------------------------------------------
# Chain complex and homology
# ---------------------------------------------------------------------------

@dataclass
class MorseComplex:
    """GF(2) chain complex graded by Morse index (0, 1, 2)."""

    generators: dict[int, list[str]]
    d1: np.ndarray   # C1 -> C0, shape (n0, n1)
    d2: np.ndarray   # C2 -> C1, shape (n1, n2)

    def boundary_square_is_zero(self) -> bool:
        if self.d1.size == 0 or self.d2.size == 0:
            return True
        return not np.any(gf2_matmul(self.d1, self.d2))


@dataclass
class HomologySummary:
    betti: tuple[int, int, int]
    euler: int
    euler_from_counts: int
    handle_census: tuple[int, int, int]


def build_complex(census: CriticalCensus, edges: Sequence[InstantonEdge],
                  certifiable: bool = True) -> MorseComplex:
    """Assemble boundary matrices from mod-2 connection counts.

    The census must be Morse and the tally certifiable; a nonzero
    composite boundary d1 @ d2 means the flow tolerances were too loose
    and raises InternalConsistencyError.
    """
    if not census.is_morse:
        raise InvalidArgumentError("cannot build a chain complex from a non-Morse census")
    if not certifiable:
        raise NonCertifiableError("instanton tally is not certifiable; tighten flow tolerances")
    gens = {k: [p.id for p in census.by_index(k)] for k in (0, 1, 2)}
    pos = {k: {pid: i for i, pid in enumerate(gens[k])} for k in gens}
    d1 = np.zeros((len(gens[0]), len(gens[1])), dtype=np.uint8)
    d2 = np.zeros((len(gens[1]), len(gens[2])), dtype=np.uint8)
    for e in edges:
        if e.source in pos[1] and e.target in pos[0]:
            d1[pos[0][e.target], pos[1][e.source]] = e.multiplicity_mod2
        elif e.source in pos[2] and e.target in pos[1]:
            d2[pos[1][e.target], pos[2][e.source]] = e.multiplicity_mod2
        else:
            raise InvalidArgumentError(f"edge {e.source}->{e.target} does not drop index by one")
    cx = MorseComplex(generators=gens, d1=d1, d2=d2)
    if not cx.boundary_square_is_zero():
        raise InternalConsistencyError("d1 @ d2 != 0 over GF(2); flow tolerances must be tightened")
    return cx


def homology(cx: MorseComplex) -> HomologySummary:
    """Betti numbers over GF(2) by Gaussian elimination.

    beta_k = dim ker d_k - rank d_(k+1); the Euler characteristic is
    computed both from the Betti numbers and from the generator counts
    and must agree.
    """
    if not cx.boundary_square_is_zero():
        raise InvalidArgumentError("homology requires d1 @ d2 = 0")
    n0, n1, n2 = (len(cx.generators[k]) for k in (0, 1, 2))
    r1 = gf2_rank(cx.d1) if cx.d1.size else 0
    r2 = gf2_rank(cx.d2) if cx.d2.size else 0
    betti = (n0 - r1, (n1 - r1) - r2, n2 - r2)
    euler = betti[0] - betti[1] + betti[2]
    euler_counts = n0 - n1 + n2
    if euler != euler_counts:
        raise InternalConsistencyError(
            f"Euler characteristic mismatch: Betti sum {euler} vs index counts {euler_counts}")
    return HomologySummary(betti=betti, euler=euler, euler_from_counts=euler_counts,
                           handle_census=(n0, n1, n2))


def critical_network(census: CriticalCensus, edges: Sequence[InstantonEdge],
                     curvature_reports: Sequence | None = None) -> dict:
    """Serializable graph of critical points and their connecting flow lines.

    Nodes carry the census data and, when curvature reports are supplied
    (see geometry.curvature_report), the local curvature quantities.
    """
    reports = {r.point_id: r for r in (curvature_reports or [])}
    nodes = []
    for p in census.points:
        node = {
            "id": p.id, "s": p.s, "lambda": p.lam, "f": p.value,
            "index": p.index, "degenerate": p.degenerate,
            "k1": p.k1, "k2": p.k2,
        }
        r = reports.get(p.id)
        if r is not None:
            node["gauss_curvature"] = r.K
            if r.delay is not None:
                node["delay"] = r.delay
        nodes.append(node)
    return {
        "nodes": nodes,
        "edges": [{"source": e.source, "target": e.target,
                   "multiplicity_mod2": e.multiplicity_mod2,
                   "connections": e.connection_count} for e in edges],
    }
