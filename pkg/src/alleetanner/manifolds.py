"""Saddle eigen-directions, invariant-manifold tracing and the homoclinic gap.

Stable manifolds are traced by time reversal of the field.  Branches are
named by the orientation of the seeding eigenvector: both eigenvectors of an
interior saddle have strictly positive components, so "up-right" means the
+eigenvector seed and "down-left" its negation.

With two interior points present, the down-left stable branch of the saddle
P1 runs to (M, 0) (or to the origin under a weak Allee effect) and the
up-right stable branch either leaves the trapping box or wraps around P2;
together they form the separatrix between the basins of (0, C) and P2.  The
homoclinic gap is measured on the section v = u + C beyond P2: it is the
signed distance between the first section crossings of the up-right unstable
branch (traced forward) and the up-right stable branch (traced backward),
positive when the unstable branch crosses outside the stable one, zero at a
homoclinic connection.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .equilibria import Equilibrium, EquilibriumKind, all_equilibria, \
    interior_equilibria
from .flow import IntegratorConfig, _Stepper
from .model import Params, State, field_closure, jacobian, vector_field
from .stability import StabilityTag, classify

BOX_MARGIN = 0.05          # enlargement of the trapping box for clipping
_EIG_RESIDUAL = 1e-10
_ESCAPE_RADIUS = 1e-3      # base counts as a target only after escaping this


class GapUndefinedError(RuntimeError):
    """A manifold branch left the box before crossing the section."""


class BranchKind(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


class BranchDirection(enum.Enum):
    UP_RIGHT = "up_right"
    DOWN_LEFT = "down_left"


class BranchTermination(enum.Enum):
    REACHED_EQUILIBRIUM = "reached_equilibrium"
    LEFT_BOX = "left_box"
    ARC_BUDGET = "arc_budget"
    HORIZON = "horizon"
    STEP_UNDERFLOW = "step_underflow"


@dataclass(frozen=True)
class ManifoldBranch:
    base_id: str
    base: State
    kind: BranchKind
    direction: BranchDirection
    polyline: np.ndarray       # (N, 2); first point is base + h*eigenvector
    arclength: np.ndarray      # cumulative arc length per vertex
    termination: BranchTermination
    equilibrium_id: str | None = None


@dataclass(frozen=True)
class Separatrix:
    """Both stable branches of the interior saddle, clipped to [0,1]^2."""

    polyline: np.ndarray
    saddle: State


def _saddle_eigvecs(J: np.ndarray) -> tuple[np.ndarray, np.ndarray,
                                            float, float]:
    """(stable vec, unstable vec, stable eigval, unstable eigval) of a 2x2.

    Raises ValueError unless the eigenvalues are real with opposite signs.
    Vectors are unit length, oriented to positive u-component (positive
    v-component when the u-component vanishes).
    """
    lam, vecs = np.linalg.eig(J)
    if np.iscomplexobj(lam) and np.abs(lam.imag).max() > 0.0:
        raise ValueError("complex eigenvalues: not a saddle")
    lam = lam.real
    vecs = vecs.real
    if not (min(lam) < 0.0 < max(lam)):
        raise ValueError(f"eigenvalues {lam} do not straddle zero")
    i_s, i_u = (0, 1) if lam[0] < 0 else (1, 0)
    out = []
    for i in (i_s, i_u):
        v = vecs[:, i] / np.linalg.norm(vecs[:, i])
        if v[0] < 0.0 or (v[0] == 0.0 and v[1] < 0.0):
            v = -v
        resid = np.linalg.norm(J @ v - lam[i] * v)
        if resid > _EIG_RESIDUAL:
            raise ValueError(f"eigenvector residual {resid:.2e} too large")
        out.append(v)
    return out[0], out[1], lam[i_s], lam[i_u]


def saddle_directions(p: Params, e: Equilibrium) -> tuple[np.ndarray,
                                                          np.ndarray]:
    """Unit stable and unstable eigenvectors of the Jacobian at a saddle."""
    if classify(p, e).tag is not StabilityTag.SADDLE:
        raise ValueError(f"{e.id} at {e.location} is not a saddle")
    vs, vu, _, _ = _saddle_eigvecs(jacobian(p, e.location))
    return vs, vu


def _newton_polish(p: Params, x: State) -> State:
    """One Newton step of the field onto the exact equilibrium."""
    J = jacobian(p, x)
    fu, fv = vector_field(p, x)
    try:
        du, dv = np.linalg.solve(J, [fu, fv])
    except np.linalg.LinAlgError:
        return x
    return x[0] - du, x[1] - dv


class _TraceResult:
    __slots__ = ("points", "arcs", "termination", "equilibrium_id",
                 "crossing")

    def __init__(self):
        self.points = []
        self.arcs = []
        self.termination = BranchTermination.HORIZON
        self.equilibrium_id = None
        self.crossing = None   # (tau, u, v) of first section crossing


def _refine_section(stepper: _Stepper, C: float) -> tuple[float, float, float]:
    lo, hi = stepper.prev_tau, stepper.tau
    g_lo = stepper.prev_v - stepper.prev_u - C
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        u, v = stepper.state_at(mid)
        if (v - u - C > 0.0) == (g_lo > 0.0):
            lo = mid
        else:
            hi = mid
    u, v = stepper.state_at(hi)
    return hi, u, v


def _trace(p: Params, base: State, seed: State, reverse: bool,
           cfg: IntegratorConfig, max_arc: float,
           section_beyond: float | None = None) -> _TraceResult:
    """March one branch until an event; optionally watch for the first
    crossing of v = u + C with u beyond ``section_beyond``."""
    res = _TraceResult()
    f0 = field_closure(p)
    if reverse:
        def f(u, v, _f0=f0):
            du, dv = _f0(u, v)
            return -du, -dv
    else:
        f = f0
    C = p.C
    u_hi = 1.0 + BOX_MARGIN
    v_hi = 1.0 + C + BOX_MARGIN
    rho = cfg.rho_eq
    rho2 = rho * rho
    targets = [eq for eq in all_equilibria(p) if eq.in_domain]
    escaped = False
    arc = 0.0
    res.points.append(seed)
    res.arcs.append(0.0)
    stepper = _Stepper(f, seed, cfg, cfg.tau_max, quadrant=False)
    while stepper.step():
        u1, v1 = stepper.u, stepper.v
        arc += math.hypot(u1 - stepper.prev_u, v1 - stepper.prev_v)
        res.points.append((u1, v1))
        res.arcs.append(arc)
        if not escaped:
            escaped = ((u1 - base[0]) ** 2 + (v1 - base[1]) ** 2
                       > _ESCAPE_RADIUS ** 2)
        if section_beyond is not None and res.crossing is None:
            g0 = stepper.prev_v - stepper.prev_u - C
            g1 = v1 - u1 - C
            if (g0 > 0.0) != (g1 > 0.0):
                tau_c, u_c, v_c = _refine_section(stepper, C)
                if u_c > section_beyond:
                    res.crossing = (tau_c, u_c, v_c)
        if u1 < -1e-9 or v1 < -1e-9 or u1 > u_hi or v1 > v_hi:
            res.termination = BranchTermination.LEFT_BOX
            return res
        if math.hypot(stepper.k1u, stepper.k1v) < rho:
            for eq in targets:
                eu, ev = eq.location
                near_base = (eu - base[0]) ** 2 + (ev - base[1]) ** 2 < rho2
                if near_base and not escaped:
                    continue
                if (u1 - eu) ** 2 + (v1 - ev) ** 2 <= rho2:
                    res.termination = BranchTermination.REACHED_EQUILIBRIUM
                    res.equilibrium_id = eq.id
                    return res
        if arc >= max_arc:
            res.termination = BranchTermination.ARC_BUDGET
            return res
    if stepper.status == _Stepper.UNDERFLOW:
        res.termination = BranchTermination.STEP_UNDERFLOW
    return res


def trace_manifold(p: Params, e: Equilibrium, kind: BranchKind,
                   direction: BranchDirection,
                   cfg: IntegratorConfig | None = None,
                   seed_offset: float = 1e-6,
                   max_arc: float = 100.0) -> ManifoldBranch:
    """Trace one manifold branch of a saddle.

    The base is polished by one Newton step, then seeded ``seed_offset``
    along the (oriented) eigenvector; stable branches integrate the
    time-reversed field.  Budget exhaustion is flagged and the partial
    polyline returned.
    """
    cfg = cfg or IntegratorConfig()
    vs, vu = saddle_directions(p, e)
    base = _newton_polish(p, e.location)
    vec = vs if kind is BranchKind.STABLE else vu
    if direction is BranchDirection.DOWN_LEFT:
        vec = -vec
    seed = (base[0] + seed_offset * vec[0], base[1] + seed_offset * vec[1])
    res = _trace(p, base, seed, reverse=kind is BranchKind.STABLE,
                 cfg=cfg, max_arc=max_arc)
    return ManifoldBranch(e.id, base, kind, direction,
                          np.array(res.points), np.array(res.arcs),
                          res.termination, res.equilibrium_id)


def _interior_pair(p: Params) -> tuple[Equilibrium, Equilibrium]:
    eqs = interior_equilibria(p)
    if len(eqs) != 2:
        raise GapUndefinedError(
            f"need two interior equilibria for the gap, found {len(eqs)}")
    return eqs[0], eqs[1]


def homoclinic_gap(p: Params, cfg: IntegratorConfig | None = None,
                   seed_offset: float = 1e-6, max_arc: float = 100.0) -> float:
    """Signed section distance between the returning manifold crossings.

    Positive when the unstable branch crosses v = u + C (beyond P2) outside
    the stable branch's crossing; zero at a homoclinic connection.  Raises
    GapUndefinedError when P1/P2 are missing or either branch leaves the box
    without crossing.
    """
    cfg = cfg or IntegratorConfig()
    p1, p2 = _interior_pair(p)
    if classify(p, p1).tag is not StabilityTag.SADDLE:
        raise GapUndefinedError("the lower interior point is not a saddle")
    vs, vu = saddle_directions(p, p1)
    base = _newton_polish(p, p1.location)
    beyond = p2.location[0]

    seed_u = (base[0] + seed_offset * vu[0], base[1] + seed_offset * vu[1])
    res_u = _trace(p, base, seed_u, reverse=False, cfg=cfg, max_arc=max_arc,
                   section_beyond=beyond)
    if res_u.crossing is None:
        raise GapUndefinedError(
            f"unstable branch ended ({res_u.termination.value}) before "
            "crossing the section")

    seed_s = (base[0] + seed_offset * vs[0], base[1] + seed_offset * vs[1])
    res_s = _trace(p, base, seed_s, reverse=True, cfg=cfg, max_arc=max_arc,
                   section_beyond=beyond)
    if res_s.crossing is None:
        raise GapUndefinedError(
            f"stable branch ended ({res_s.termination.value}) before "
            "crossing the section")
    return math.sqrt(2.0) * (res_u.crossing[1] - res_s.crossing[1])


def _clip_to_unit_box(points: np.ndarray) -> np.ndarray:
    """Clip an ordered polyline to [0,1]^2, inserting edge intersections."""
    def inside(q):
        return 0.0 <= q[0] <= 1.0 and 0.0 <= q[1] <= 1.0

    def crossings(a, b):
        # parametric clip of segment a->b against the four box edges
        ts = []
        d = b - a
        for dim in (0, 1):
            if d[dim] != 0.0:
                for edge in (0.0, 1.0):
                    t = (edge - a[dim]) / d[dim]
                    if 0.0 < t < 1.0:
                        q = a + t * d
                        if -1e-12 <= q[1 - dim] <= 1.0 + 1e-12:
                            ts.append((t, np.clip(q, 0.0, 1.0)))
        ts.sort(key=lambda e: e[0])
        return [q for _, q in ts]

    out: list[np.ndarray] = []
    for i, q in enumerate(points):
        if i > 0:
            a, b = points[i - 1], q
            a_in, b_in = inside(a), inside(b)
            if a_in != b_in or (not a_in and not b_in):
                for c in crossings(a, b):
                    out.append(c)
        if inside(q):
            out.append(np.asarray(q, dtype=float))
    if not out:
        return np.empty((0, 2))
    arr = np.array(out)
    keep = np.ones(len(arr), dtype=bool)
    keep[1:] = (np.abs(np.diff(arr, axis=0)).max(axis=1) > 1e-15)
    return arr[keep]


def separatrix(p: Params, cfg: IntegratorConfig | None = None,
               seed_offset: float = 1e-6, max_arc: float = 100.0) -> Separatrix:
    """Union of both stable branches of the interior saddle, clipped to Phi.

    The polyline is ordered along the curve: down-left branch end, through
    the saddle, out the up-right branch end.
    """
    cfg = cfg or IntegratorConfig()
    p1, _ = _interior_pair(p)
    if classify(p, p1).tag is not StabilityTag.SADDLE:
        raise GapUndefinedError("no interior saddle: separatrix undefined")
    down = trace_manifold(p, p1, BranchKind.STABLE,
                          BranchDirection.DOWN_LEFT, cfg, seed_offset, max_arc)
    up = trace_manifold(p, p1, BranchKind.STABLE,
                        BranchDirection.UP_RIGHT, cfg, seed_offset, max_arc)
    base = np.array([down.base])
    curve = np.vstack([down.polyline[::-1], base, up.polyline])
    return Separatrix(_clip_to_unit_box(curve), down.base)
