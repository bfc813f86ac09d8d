"""Adaptive integration of the flow with event detection.

The integrator is an embedded Dormand-Prince 5(4) pair with FSAL and the
standard quartic dense-output interpolant.  Steps whose endpoint would leave
the closed first quadrant are rejected and retried with a smaller h; the
solution is never clamped.

Termination events, checked after every accepted step:

* equilibrium convergence: the state is within ``rho_eq`` of a known
  equilibrium AND the field norm there is below ``rho_eq`` (the second test
  keeps a slow saddle passage from being misread as convergence),
* limit-cycle convergence: successive same-direction crossings of the
  Poincare section v = u + C (the predator nullcline, which carries every
  interior equilibrium and is transversal to the flow elsewhere) form a
  geometrically contracting sequence within ``rho_cyc``,
* horizon ``tau_max`` exceeded, domain exit, or step-size underflow.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .equilibria import Equilibrium, EquilibriumKind, all_equilibria
from .model import Params, State, field_closure
from .stability import classify

# Dormand-Prince 5(4) tableau.
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (9017 / 3168, -355 / 33, 46732 / 5247,
                                49 / 176, -5103 / 18656)
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920,
                                -17253 / 339200, 22 / 525, -1 / 40)

# Dense-output polynomial: y(t0 + th*h) = y0 + h * sum_s k_s * P_s(th) with
# P_s(th) = th*(P_s1 + th*(P_s2 + th*(P_s3 + th*P_s4))).  Stage 2 drops out.
_P1 = (1.0, -8048581381 / 2820520608, 8663915743 / 2820520608,
       -12715105075 / 11282082432)
_P3 = (0.0, 131558114200 / 32700410799, -68118460800 / 10900136933,
       87487479700 / 32700410799)
_P4 = (0.0, -1754552775 / 470086768, 14199869525 / 1410260304,
       -10690763975 / 1880347072)
_P5 = (0.0, 127303824393 / 49829197408, -318862633887 / 49829197408,
       701980252875 / 199316789632)
_P6 = (0.0, -282668133 / 205662961, 2019193451 / 616988883,
       -1453857185 / 822651844)
_P7 = (0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423)

# Successive return-map differences must shrink at least this fast before a
# cycle is declared; a slow drift toward a boundary contour has ratio -> 1.
_CYCLE_CONTRACTION = 0.98

_MIN_FACTOR, _MAX_FACTOR, _SAFETY = 0.2, 5.0, 0.9


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = math.inf
    tau_max: float = 1e5
    rho_eq: float = 1e-6
    rho_cyc: float = 1e-7
    min_cycle_radius: float = 1e-3

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "tau_max", "rho_eq",
                     "rho_cyc", "min_cycle_radius"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.rel_tol < 1e-13:
            raise ValueError("rel_tol must be >= 1e-13")


class Termination(enum.Enum):
    REACHED_EQUILIBRIUM = "reached_equilibrium"
    REACHED_CYCLE = "reached_cycle"
    HORIZON_EXCEEDED = "horizon_exceeded"
    LEFT_DOMAIN = "left_domain"
    STEP_UNDERFLOW = "step_underflow"


class AttractorTag(enum.Enum):
    EQUILIBRIUM = "equilibrium"
    LIMIT_CYCLE = "limit_cycle"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class AttractorLabel:
    tag: AttractorTag
    id: str | None = None

    @staticmethod
    def undecided() -> "AttractorLabel":
        return AttractorLabel(AttractorTag.UNDECIDED, None)


@dataclass(frozen=True)
class Cycle:
    period: float
    polyline: np.ndarray          # closed (N, 2) loop of states
    crossing: State               # section crossing point on v = u + C
    residual: float               # final return-map difference


@dataclass(frozen=True)
class Trajectory:
    taus: np.ndarray
    states: np.ndarray            # (N, 2)
    termination: Termination
    equilibrium_id: str | None = None
    cycle: Cycle | None = None


class _Stepper:
    """Scalar Dormand-Prince 5(4) stepper for a planar field."""

    RUNNING, DONE, UNDERFLOW = 0, 1, 2

    __slots__ = ("f", "tau", "u", "v", "k1u", "k1v", "h", "rtol", "atol",
                 "max_step", "tau_end", "status", "prev_tau", "prev_u",
                 "prev_v", "h_last", "ks", "quadrant")

    def __init__(self, f, s0: State, cfg: IntegratorConfig, tau_end: float,
                 quadrant: bool = True):
        self.f = f
        self.quadrant = quadrant
        self.tau = 0.0
        self.u, self.v = float(s0[0]), float(s0[1])
        self.k1u, self.k1v = f(self.u, self.v)
        self.rtol, self.atol = cfg.rel_tol, cfg.abs_tol
        self.max_step = cfg.max_step
        self.tau_end = tau_end
        self.status = self.RUNNING
        self.prev_tau = 0.0
        self.prev_u, self.prev_v = self.u, self.v
        self.h_last = 0.0
        self.ks = None
        self.h = self._initial_step()

    def _initial_step(self) -> float:
        scu = self.atol + self.rtol * abs(self.u)
        scv = self.atol + self.rtol * abs(self.v)
        d0 = math.hypot(self.u / scu, self.v / scv)
        d1 = math.hypot(self.k1u / scu, self.k1v / scv)
        if d0 < 1e-5 or d1 < 1e-5:
            h0 = 1e-6
        else:
            h0 = 0.01 * d0 / d1
        return min(h0, self.max_step, max(self.tau_end, 1e-12))

    def step(self) -> bool:
        """Advance one accepted step; False on horizon/underflow."""
        if self.status != self.RUNNING:
            return False
        if self.tau >= self.tau_end:
            self.status = self.DONE
            return False
        f = self.f
        u0, v0 = self.u, self.v
        k1u, k1v = self.k1u, self.k1v
        rtol, atol = self.rtol, self.atol
        h = min(self.h, self.max_step, self.tau_end - self.tau)
        while True:
            if h <= 1e-13 * max(1.0, abs(self.tau)):
                self.status = self.UNDERFLOW
                return False
            try:
                k2u, k2v = f(u0 + h * _A21 * k1u, v0 + h * _A21 * k1v)
                k3u, k3v = f(u0 + h * (_A31 * k1u + _A32 * k2u),
                             v0 + h * (_A31 * k1v + _A32 * k2v))
                k4u, k4v = f(u0 + h * (_A41 * k1u + _A42 * k2u + _A43 * k3u),
                             v0 + h * (_A41 * k1v + _A42 * k2v + _A43 * k3v))
                k5u, k5v = f(
                    u0 + h * (_A51 * k1u + _A52 * k2u + _A53 * k3u + _A54 * k4u),
                    v0 + h * (_A51 * k1v + _A52 * k2v + _A53 * k3v + _A54 * k4v))
                k6u, k6v = f(
                    u0 + h * (_A61 * k1u + _A62 * k2u + _A63 * k3u
                              + _A64 * k4u + _A65 * k5u),
                    v0 + h * (_A61 * k1v + _A62 * k2v + _A63 * k3v
                              + _A64 * k4v + _A65 * k5v))
                du = _B1 * k1u + _B3 * k3u + _B4 * k4u + _B5 * k5u + _B6 * k6u
                dv = _B1 * k1v + _B3 * k3v + _B4 * k4v + _B5 * k5v + _B6 * k6v
                u5 = u0 + h * du
                v5 = v0 + h * dv
                k7u, k7v = f(u5, v5)
            except ZeroDivisionError:
                h *= 0.25
                continue
            eu = h * (_E1 * k1u + _E3 * k3u + _E4 * k4u + _E5 * k5u
                      + _E6 * k6u + _E7 * k7u)
            ev = h * (_E1 * k1v + _E3 * k3v + _E4 * k4v + _E5 * k5v
                      + _E6 * k6v + _E7 * k7v)
            au0, au5 = abs(u0), abs(u5)
            av0, av5 = abs(v0), abs(v5)
            scu = atol + rtol * (au0 if au0 > au5 else au5)
            scv = atol + rtol * (av0 if av0 > av5 else av5)
            ru, rv = eu / scu, ev / scv
            errn = math.sqrt(0.5 * (ru * ru + rv * rv))
            if not math.isfinite(errn):
                h *= 0.25
                continue
            if errn > 1.0:
                h *= max(_MIN_FACTOR, _SAFETY * errn ** -0.2)
                continue
            if self.quadrant and (u5 < 0.0 or v5 < 0.0):
                # endpoint left the quadrant: reject, do not clamp
                h *= 0.5
                continue
            break
        self.prev_tau, self.prev_u, self.prev_v = self.tau, u0, v0
        self.h_last = h
        self.ks = (k1u, k1v, k3u, k3v, k4u, k4v, k5u, k5v, k6u, k6v, k7u, k7v)
        self.tau = self.tau + h
        self.u, self.v = u5, v5
        self.k1u, self.k1v = k7u, k7v
        if errn == 0.0:
            factor = _MAX_FACTOR
        else:
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR,
                                          _SAFETY * errn ** -0.2))
        self.h = h * factor
        return True

    def state_at(self, tau_q: float) -> State:
        """Dense-output state inside the last accepted step."""
        th = (tau_q - self.prev_tau) / self.h_last
        (k1u, k1v, k3u, k3v, k4u, k4v, k5u, k5v, k6u, k6v,
         k7u, k7v) = self.ks
        b1 = th * (_P1[0] + th * (_P1[1] + th * (_P1[2] + th * _P1[3])))
        b3 = th * (_P3[0] + th * (_P3[1] + th * (_P3[2] + th * _P3[3])))
        b4 = th * (_P4[0] + th * (_P4[1] + th * (_P4[2] + th * _P4[3])))
        b5 = th * (_P5[0] + th * (_P5[1] + th * (_P5[2] + th * _P5[3])))
        b6 = th * (_P6[0] + th * (_P6[1] + th * (_P6[2] + th * _P6[3])))
        b7 = th * (_P7[0] + th * (_P7[1] + th * (_P7[2] + th * _P7[3])))
        h = self.h_last
        u = self.prev_u + h * (b1 * k1u + b3 * k3u + b4 * k4u + b5 * k5u
                               + b6 * k6u + b7 * k7u)
        v = self.prev_v + h * (b1 * k1v + b3 * k3v + b4 * k4v + b5 * k5v
                               + b6 * k6v + b7 * k7v)
        return u, v


class _EqTarget:
    __slots__ = ("id", "u", "v", "attracting")

    def __init__(self, eq_id: str, u: float, v: float, attracting: bool):
        self.id = eq_id
        self.u = u
        self.v = v
        self.attracting = attracting


def _targets(p: Params) -> list[_EqTarget]:
    out = []
    for eq in all_equilibria(p):
        if not eq.in_domain:
            continue
        cls = classify(p, eq)
        out.append(_EqTarget(eq.id, eq.location[0], eq.location[1],
                             cls.attracting))
    return out


def _anchor(p: Params) -> float | None:
    """Prey value of the interior root anchoring the Poincare section."""
    best = None
    for eq in all_equilibria(p):
        if eq.kind in (EquilibriumKind.INTERIOR_HIGH,
                       EquilibriumKind.INTERIOR_DOUBLE):
            best = eq.location[0]
    return best


class _Drive:
    """Outcome of one event-driven integration run."""

    __slots__ = ("termination", "equilibrium_id", "taus", "states",
                 "cycle_period", "cycle_crossing", "cycle_residual",
                 "cycle_segment")

    def __init__(self):
        self.termination = Termination.HORIZON_EXCEEDED
        self.equilibrium_id = None
        self.taus = None
        self.states = None
        self.cycle_period = None
        self.cycle_crossing = None
        self.cycle_residual = None
        self.cycle_segment = None


def _refine_crossing(stepper: _Stepper, C: float) -> tuple[float, float, float]:
    """Bisect the dense output for the v = u + C crossing in the last step."""
    lo, hi = stepper.prev_tau, stepper.tau
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        u, v = stepper.state_at(mid)
        if v - u - C < 0.0:
            lo = mid
        else:
            hi = mid
    u, v = stepper.state_at(hi)
    return hi, u, v


def _drive(p: Params, s0: State, cfg: IntegratorConfig, *,
           want_samples: bool, want_cycle: bool,
           targets: list[_EqTarget] | None = None) -> _Drive:
    res = _Drive()
    f = field_closure(p)
    if targets is None:
        targets = _targets(p)
    anchor = _anchor(p) if want_cycle else None
    C = p.C
    u0, v0 = float(s0[0]), float(s0[1])
    exit_u = max(10.0, 2.0 * (u0 + 1.0))
    exit_v = max(10.0, 2.0 * (v0 + 1.0 + C))
    rho = cfg.rho_eq
    rho2 = rho * rho

    samples = [(0.0, u0, v0)] if want_samples else None
    segment = [(u0, v0)] if anchor is not None else None

    def finish(term, eq_id=None):
        res.termination = term
        res.equilibrium_id = eq_id
        if want_samples:
            res.taus = np.array([s[0] for s in samples])
            res.states = np.array([[s[1], s[2]] for s in samples])
        return res

    # the seed itself may already sit on an equilibrium
    fu, fv = f(u0, v0)
    if math.hypot(fu, fv) < rho:
        for t in targets:
            if (u0 - t.u) ** 2 + (v0 - t.v) ** 2 <= rho2:
                return finish(Termination.REACHED_EQUILIBRIUM, t.id)

    stepper = _Stepper(f, (u0, v0), cfg, cfg.tau_max)
    prev_cross_u = None
    prev_cross_tau = 0.0
    prev_delta = None

    while stepper.step():
        u1, v1 = stepper.u, stepper.v
        if want_samples:
            samples.append((stepper.tau, u1, v1))
        if segment is not None:
            segment.append((u1, v1))
        if u1 > exit_u or v1 > exit_v:
            return finish(Termination.LEFT_DOMAIN)
        if math.hypot(stepper.k1u, stepper.k1v) < rho:
            for t in targets:
                if (u1 - t.u) ** 2 + (v1 - t.v) ** 2 <= rho2:
                    return finish(Termination.REACHED_EQUILIBRIUM, t.id)
        if anchor is None:
            continue
        g0 = stepper.prev_v - stepper.prev_u - C
        g1 = v1 - u1 - C
        if not (g0 < 0.0 <= g1):
            continue
        tau_c, u_c, v_c = _refine_crossing(stepper, C)
        if u_c <= anchor:
            continue
        if prev_cross_u is not None:
            delta = u_c - prev_cross_u
            if (prev_delta is not None
                    and abs(delta) < cfg.rho_cyc
                    and abs(prev_delta) < 10.0 * cfg.rho_cyc
                    and abs(delta) <= _CYCLE_CONTRACTION * abs(prev_delta)
                    and abs(u_c - anchor) >= cfg.min_cycle_radius):
                res.cycle_period = tau_c - prev_cross_tau
                res.cycle_crossing = (u_c, u_c + C)
                res.cycle_residual = abs(delta)
                if segment is not None:
                    segment.append((u_c, u_c + C))
                    res.cycle_segment = segment
                return finish(Termination.REACHED_CYCLE)
            prev_delta = delta
        prev_cross_u = u_c
        prev_cross_tau = tau_c
        segment = [(u_c, u_c + C)]

    if stepper.status == _Stepper.UNDERFLOW:
        return finish(Termination.STEP_UNDERFLOW)
    return finish(Termination.HORIZON_EXCEEDED)


def integrate(p: Params, s0: State, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate from ``s0`` until an event or the horizon.

    Samples are the accepted step endpoints.  Step-size underflow is
    reported via the termination tag, never silently looped over.
    """
    cfg = cfg or IntegratorConfig()
    res = _drive(p, s0, cfg, want_samples=True, want_cycle=True)
    cycle = None
    if res.termination is Termination.REACHED_CYCLE:
        poly = np.array(res.cycle_segment)
        cycle = Cycle(res.cycle_period, poly, res.cycle_crossing,
                      res.cycle_residual)
    return Trajectory(res.taus, res.states, res.termination,
                      res.equilibrium_id, cycle)


def classify_omega_limit(p: Params, s0: State,
                         cfg: IntegratorConfig | None = None,
                         _targets_cache: list[_EqTarget] | None = None
                         ) -> AttractorLabel:
    """Classify the forward limit set of ``s0``.

    Returns Equilibrium(id) only for attracting equilibria (convergence onto
    a saddle or a degenerate point is reported as Undecided), LimitCycle when
    the return map on v = u + C contracts to a fixed point away from the
    interior equilibrium, and Undecided at the horizon or on underflow.
    """
    cfg = cfg or IntegratorConfig()
    targets = _targets_cache if _targets_cache is not None else _targets(p)
    res = _drive(p, s0, cfg, want_samples=False, want_cycle=True,
                 targets=targets)
    if res.termination is Termination.REACHED_EQUILIBRIUM:
        for t in targets:
            if t.id == res.equilibrium_id and t.attracting:
                return AttractorLabel(AttractorTag.EQUILIBRIUM, t.id)
        return AttractorLabel.undecided()
    if res.termination is Termination.REACHED_CYCLE:
        return AttractorLabel(AttractorTag.LIMIT_CYCLE, "cycle")
    return AttractorLabel.undecided()


def find_limit_cycle(p: Params, seed: State,
                     cfg: IntegratorConfig | None = None) -> Cycle | None:
    """Locate a stable limit cycle reached from ``seed``, if any.

    Iterates crossings of the section v = u + C (through the interior
    equilibrium, along direction (1, 1)) until successive crossings differ by
    less than ``rho_cyc``.  Returns None when crossings run into an
    equilibrium or the horizon, or when no interior anchor exists.
    """
    cfg = cfg or IntegratorConfig()
    if _anchor(p) is None:
        return None
    res = _drive(p, seed, cfg, want_samples=False, want_cycle=True)
    if res.termination is not Termination.REACHED_CYCLE:
        return None
    return Cycle(res.cycle_period, np.array(res.cycle_segment),
                 res.cycle_crossing, res.cycle_residual)


def sample_path(f, s0, cfg: IntegratorConfig, tau_end: float,
                taus, quadrant: bool = True) -> np.ndarray:
    """Integrate a raw planar field and dense-sample it at given times.

    Utility for cross-checks (e.g. dimensional vs nondimensional flows);
    no equilibrium or cycle events, just positivity-preserving stepping
    (pass ``quadrant=False`` for fields not confined to the first quadrant).
    """
    taus = np.asarray(taus, dtype=float)
    out = np.empty((len(taus), 2))
    stepper = _Stepper(f, s0, cfg, tau_end, quadrant=quadrant)
    i = 0
    while i < len(taus) and taus[i] <= 0.0:
        out[i] = s0
        i += 1
    while stepper.step():
        while i < len(taus) and taus[i] <= stepper.tau:
            out[i] = stepper.state_at(taus[i])
            i += 1
        if i >= len(taus):
            break
    if i < len(taus):
        raise RuntimeError(
            f"integration stopped at tau={stepper.tau:.6g} before reaching "
            f"all requested sample times")
    return out
