"""Method-of-lines solver for v = u_x.

Integrating u_xxt + u u_xxx + beta u_x u_xx + alpha u_xx = 0 once in x gives

    v_t + u v_x + ((beta - 1)/2) v^2 + alpha(t) v = I(t),

and evaluating at x = 1 (u = v = v_t = 0 there) forces I = 0. The state is v
on N + 1 uniform nodes; u(x) = -int_x^1 v is rebuilt at every stage, so
u(1) = 0 holds by construction and v(0) = v(1) = 0 are re-pinned after
every Runge-Kutta stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import grid, rk
from .damping import DampingProfile
from .diagnostics import TimeSeries, eq8_residual, make_record
from .errors import DomainError

INITIAL_FAMILIES = ("sin2", "poly_bump", "custom")
ENDPOINT_TOL = 1e-12


@dataclass(frozen=True)
class ProblemParams:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n must be an integer >= 2, got {self.n!r}")

    @property
    def beta(self) -> float:
        return (self.n - 3) / (self.n - 1)

    @property
    def k(self) -> float:
        return self.n / (self.n - 1)


@dataclass(frozen=True)
class SolverConfig:
    N: int = 1024
    cfl: float = 0.5
    dt_min: float = 1e-12
    v_max: float = 1e6
    t_end: float = 2.0
    rk_tol: float = 1e-8
    reaction_safety: float = 0.1
    n_fit: int = 10

    def __post_init__(self):
        if self.N < 128 or self.N & (self.N - 1):
            raise DomainError(f"N must be a power of two >= 128, got {self.N}")
        if not 0 < self.cfl <= 1:
            raise DomainError(f"cfl must lie in (0, 1], got {self.cfl}")
        for name in ("dt_min", "v_max", "t_end", "rk_tol", "reaction_safety"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.n_fit < 2:
            raise DomainError("n_fit must be >= 2")

    @property
    def dx(self) -> float:
        return 1.0 / self.N


@dataclass(frozen=True)
class SolutionState:
    t: float
    v: np.ndarray

    @property
    def N(self) -> int:
        return self.v.size - 1

    @property
    def dx(self) -> float:
        return 1.0 / self.N


@dataclass(frozen=True)
class InitialData:
    family: str
    amplitude: float
    N: int
    v0: np.ndarray = field(repr=False)
    h0: float = 0.0

    @property
    def state(self) -> SolutionState:
        return SolutionState(0.0, self.v0.copy())


@dataclass(frozen=True)
class BreakdownEvent:
    detected: bool
    t_detect: float
    reason: str  # v_max_exceeded | dt_collapse | horizon_reached
    max_v: float
    t_extrapolated: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "detected": self.detected,
            "t_detect": self.t_detect,
            "reason": self.reason,
            "max_v": self.max_v,
            "t_extrapolated": self.t_extrapolated,
        }


@dataclass
class RunResult:
    series: TimeSeries
    event: BreakdownEvent
    final_state: SolutionState
    steps: int
    rejected: int


class DtCollapse(RuntimeError):
    def __init__(self, state: SolutionState, dt: float):
        super().__init__(f"time step collapsed to {dt:.3e} at t={state.t:.9g}")
        self.state = state
        self.dt = dt


# initial data ---------------------------------------------------------------


def build_initial(family: str, A: float = 1.0, N: int = 1024, samples=None) -> tuple[InitialData, SolutionState]:
    """Sample v0 = u0_x on the grid and compute h0 = u0(0) = -int v0.

    sin2:       v0 = A sin^2(pi x),          h0 = -A/2
    poly_bump:  v0 = 16 A x^2 (1 - x)^2,     h0 = -8A/15
    custom:     ``samples`` of length N + 1 with zero endpoints
    """
    if N < 128 or N % 2:
        raise DomainError(f"N must be even and >= 128, got {N}")
    x = grid.nodes(N)
    A = float(A)
    if family == "sin2":
        v0 = A * np.sin(np.pi * x) ** 2
    elif family == "poly_bump":
        v0 = 16.0 * A * x**2 * (1.0 - x) ** 2
    elif family == "custom":
        if samples is None:
            raise DomainError("custom initial data needs samples")
        v0 = np.array(samples, dtype=float)
        if v0.shape != (N + 1,):
            raise DomainError(f"custom samples must have length N + 1 = {N + 1}")
        if abs(v0[0]) > ENDPOINT_TOL or abs(v0[-1]) > ENDPOINT_TOL:
            raise DomainError(
                f"custom v0 must vanish at both ends (u_x(0) = u_x(1) = 0); got {v0[0]:.3e}, {v0[-1]:.3e}"
            )
    else:
        raise DomainError(f"unknown initial family {family!r}")
    v0[0] = v0[-1] = 0.0
    if not np.all(np.isfinite(v0)):
        raise DomainError("initial data must be finite")
    h0 = -grid.simpson(v0, 1.0 / N)
    data = InitialData(family, A, N, v0, h0)
    return data, data.state


@dataclass(frozen=True)
class CompatibilityReport:
    u0_at_1: float
    v0_at_0: float
    v0_at_1: float
    omega0_at_0: float
    warnings: tuple = ()

    @property
    def compatible(self) -> bool:
        return not self.warnings


def compatibility_check(initial: InitialData, tol: float = 1e-6) -> CompatibilityReport:
    """Boundary values of the initial data; a nonzero u0_xx(0) is a warning."""
    dx = 1.0 / initial.N
    v0 = initial.v0
    u0 = grid.reconstruct_u(v0, dx)
    omega0 = grid.edge_derivative(v0, dx)
    warnings = []
    if abs(omega0) > tol * max(1.0, float(np.max(np.abs(v0)))):
        warnings.append(
            f"u0_xx(0) = {omega0:.6g} != 0: u(0,t) omega(0,t) = 0 cannot hold while u(0,t) != 0"
        )
    return CompatibilityReport(float(u0[-1]), float(v0[0]), float(v0[-1]), omega0, tuple(warnings))


# right-hand side -------------------------------------------------------------


def _pin(v: np.ndarray) -> None:
    v[0] = 0.0
    v[-1] = 0.0


def _rhs_parts(v: np.ndarray, dx: float, beta: float):
    u = grid.reconstruct_u(v, dx)
    transport = u * grid.ddx(v, dx)
    quadratic = 0.5 * (beta - 1.0) * v * v
    return u, transport, quadratic


def rhs_values(t: float, v: np.ndarray, dx: float, beta: float, alpha: float) -> np.ndarray:
    _, transport, quadratic = _rhs_parts(v, dx, beta)
    r = -(transport + quadratic + alpha * v)
    r[0] = 0.0
    r[-1] = 0.0
    return r


def rhs(state: SolutionState, params: ProblemParams, profile: DampingProfile) -> np.ndarray:
    """-(u v_x + ((beta-1)/2) v^2 + alpha v), zero at both end nodes."""
    return rhs_values(state.t, state.v, state.dx, params.beta, profile.alpha(state.t))


# time stepping ----------------------------------------------------------------


@dataclass(frozen=True)
class StepResult:
    state: SolutionState
    dt: float
    dt_next: float
    rejected: int
    err_norm: float


def stable_dt(state: SolutionState, config: SolverConfig) -> float:
    """min(cfl dx / max|u|, safety / max|v|)."""
    v = state.v
    u = grid.reconstruct_u(v, state.dx)
    limits = [math.inf]
    umax = float(np.max(np.abs(u)))
    vmax = float(np.max(np.abs(v)))
    if umax > 0:
        limits.append(config.cfl * state.dx / umax)
    if vmax > 0:
        limits.append(config.reaction_safety / vmax)
    return min(limits)


def trial_step(state: SolutionState, params: ProblemParams, profile: DampingProfile, dt: float):
    """One Dormand-Prince trial without acceptance logic: (v_new, error estimate)."""
    dx, beta = state.dx, params.beta

    def f(t, v):
        return rhs_values(t, v, dx, beta, profile.alpha(t))

    return rk.dp54_step(f, state.t, state.v, dt, pin=_pin)


def step(
    state: SolutionState,
    params: ProblemParams,
    profile: DampingProfile,
    config: SolverConfig,
    dt_hint: Optional[float] = None,
) -> StepResult:
    """Advance by one accepted adaptive step.

    Raises :class:`DtCollapse` when the admissible step falls below
    ``config.dt_min``.
    """
    limit = stable_dt(state, config)
    dt = min(dt_hint if dt_hint is not None else limit, limit, config.t_end - state.t)
    rejected = 0
    while True:
        if dt < config.dt_min:
            raise DtCollapse(state, dt)
        v_new, err = trial_step(state, params, profile, dt)
        if np.all(np.isfinite(v_new)):
            en = rk.error_norm(err, state.v, v_new, config.rk_tol, config.rk_tol)
        else:
            en = math.inf
        if en <= 1.0:
            return StepResult(SolutionState(state.t + dt, v_new), dt, rk.next_dt(dt, en), rejected, en)
        rejected += 1
        dt = rk.next_dt(dt, en) if math.isfinite(en) else rk.MIN_FACTOR * dt


def extrapolate_blowup(t: np.ndarray, max_v: np.ndarray, n_fit: int = 10) -> Optional[float]:
    """Zero of a straight-line fit of 1/max|v| over the last n_fit records."""
    m = min(n_fit, t.size)
    if m < 2:
        return None
    tt = t[-m:] - t[-1]
    w = 1.0 / max_v[-m:]
    slope, icept = np.polyfit(tt, w, 1)
    # a slope at roundoff level means 1/max|v| is flat, not heading to zero
    span = max(float(-tt[0]), np.finfo(float).tiny)
    if not slope * span < -1e-9 * float(np.max(np.abs(w))):
        return None
    return float(t[-1] - icept / slope)


def run(
    initial: InitialData,
    params: ProblemParams,
    profile: DampingProfile,
    config: SolverConfig,
) -> RunResult:
    """Integrate until max|v| > v_max, step collapse, or t_end."""
    if initial.N != config.N:
        raise DomainError(f"initial data has N={initial.N} but config has N={config.N}")
    state = initial.state
    dx = config.dx
    series = TimeSeries([make_record(0.0, state.v, dx)])
    dt_hint = None
    steps = rejected = 0
    reason = "horizon_reached"
    while state.t < config.t_end:
        if series[-1].max_v > config.v_max:
            reason = "v_max_exceeded"
            break
        try:
            res = step(state, params, profile, config, dt_hint)
        except DtCollapse:
            reason = "dt_collapse"
            break
        state, dt_hint = res.state, res.dt_next
        steps += 1
        rejected += res.rejected
        series.append(make_record(state.t, state.v, dx, res.dt))
    else:
        if series[-1].max_v > config.v_max:
            reason = "v_max_exceeded"

    series = series.with_column("eq8_residual", eq8_residual(series, profile, params.n))
    last = series[-1]
    detected = reason != "horizon_reached"
    t_ext = None
    if detected:
        t_ext = extrapolate_blowup(series.column("t"), series.column("max_v"), config.n_fit)
        if t_ext is not None:
            t_ext = max(t_ext, last.t)
    event = BreakdownEvent(detected, last.t, reason, last.max_v, t_ext)
    return RunResult(series, event, state, steps, rejected)


# vorticity cross-check -----------------------------------------------------------


def omega_residual(
    state_a: SolutionState,
    state_b: SolutionState,
    params: ProblemParams,
    profile: DampingProfile,
) -> float:
    """Max-norm residual of omega_t + u omega_x + beta omega u_x + alpha omega
    between two adjacent states, centred at the midpoint time.

    omega comes from second differences of the reconstructed u.
    """
    dt = state_b.t - state_a.t
    if dt <= 0:
        raise DomainError("states must be in increasing time order")
    dx = state_a.dx
    ua = grid.reconstruct_u(state_a.v, dx)
    ub = grid.reconstruct_u(state_b.v, dx)
    wa = grid.second_difference(ua, dx)
    wb = grid.second_difference(ub, dx)
    wm = 0.5 * (wa + wb)
    um = 0.5 * (ua + ub)
    vm = 0.5 * (state_a.v + state_b.v)
    w_t = (wb - wa) / dt
    w_x = np.full_like(wm, np.nan)
    w_x[2:-2] = (wm[3:-1] - wm[1:-3]) / (2.0 * dx)
    alpha = profile.alpha(0.5 * (state_a.t + state_b.t))
    r = w_t + um * w_x + params.beta * wm * vm + alpha * wm
    return float(np.max(np.abs(r[2:-2])))
